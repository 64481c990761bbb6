#include <algorithm>
#include <stdexcept>
#include <string>

#include "lits/index.hpp"
#include "lits/metrics.hpp"

namespace lits {

namespace {

struct StatsAcc {
    IndexStats st;
    uint64_t keys = 0;
    uint64_t base_depth_sum = 0;
    uint64_t trie_depth_sum = 0;
};

void stats_walk(Item item, uint32_t depth, StatsAcc& acc) {
    switch (item.tag()) {
        case NodeTag::Empty:
            return;
        case NodeTag::SingleEntry:
            acc.st.single_entries++;
            acc.keys++;
            acc.base_depth_sum += depth;
            acc.st.max_base_height = std::max(acc.st.max_base_height, depth);
            acc.st.bytes_used += item.entry()->allocated_bytes();
            return;
        case NodeTag::CompactLeaf: {
            const CompactNode* node = item.cnode();
            acc.st.compact_nodes++;
            acc.keys += node->size();
            acc.base_depth_sum += uint64_t(depth + 1) * node->size();
            acc.st.max_base_height = std::max(acc.st.max_base_height, depth + 1);
            acc.st.bytes_used += node->allocated_bytes();
            for (const HPointer& hp : node->entries())
                acc.st.bytes_used += hp.entry()->allocated_bytes();
            return;
        }
        case NodeTag::Subtrie: {
            const Subtrie* trie = item.trie();
            acc.st.subtries++;
            acc.keys += trie->size();
            acc.st.subtrie_keys += trie->size();
            acc.base_depth_sum += uint64_t(depth) * trie->size();
            acc.st.max_base_height = std::max(acc.st.max_base_height, depth);
            acc.trie_depth_sum += trie->total_key_depth();
            acc.st.bytes_used += trie->heap_bytes();
            return;
        }
        case NodeTag::ModelNode: {
            const ModelNode* node = item.model();
            acc.st.model_nodes++;
            acc.st.bytes_used += node->allocated_bytes();
            for (Item child : node->items) stats_walk(child, depth + 1, acc);
            return;
        }
    }
}

struct AuditCtx {
    const IndexConfig* cfg;
    bool has_prev = false;
    std::string prev;
    uint64_t keys_seen = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw std::logic_error("index audit: " + what);
    }
    void take_key(std::string_view key) {
        if (has_prev && !(std::string_view(prev) < key))
            fail("key order violated near '" + std::string(key) + "'");
        prev.assign(key);
        has_prev = true;
        ++keys_seen;
    }
};

// Returns the live key count under the item while checking structure
// invariants and feeding keys to the order check.
uint64_t audit_walk(Item item, AuditCtx& ctx) {
    switch (item.tag()) {
        case NodeTag::Empty:
            return 0;
        case NodeTag::SingleEntry:
            ctx.take_key(item.entry()->key());
            return 1;
        case NodeTag::CompactLeaf: {
            const CompactNode* node = item.cnode();
            if (node->size() < 2) ctx.fail("compact node below 2 entries");
            if (node->size() > ctx.cfg->cnode_capacity)
                ctx.fail("compact node above capacity");
            for (const HPointer& hp : node->entries()) {
                if (hp.fingerprint() != fingerprint16(hp.entry()->key()))
                    ctx.fail("stale fingerprint in compact node");
                ctx.take_key(hp.entry()->key());
            }
            return node->size();
        }
        case NodeTag::Subtrie: {
            const Subtrie* trie = item.trie();
            if (double(trie->delete_list_size()) >
                ctx.cfg->subtrie_delete_ratio_limit * double(trie->size()) + 1e-9)
                ctx.fail("subtrie delete list above ratio limit");
            uint64_t n = 0;
            auto it = trie->scan({});
            while (const KvEntry* e = it.next()) {
                ctx.take_key(e->key());
                ++n;
            }
            if (n != trie->size()) ctx.fail("subtrie live count mismatch");
            return n;
        }
        case NodeTag::ModelNode: {
            const ModelNode* node = item.model();
            if (node->array_len() < kMinArrayLen) ctx.fail("item array too short");
            uint64_t total = 0;
            uint64_t max_model_child = 0;
            for (uint32_t slot = 0; slot < node->array_len(); ++slot) {
                Item child = node->items[slot];
                // Keys in the main range must carry the node prefix;
                // boundary slots must sort outside it.
                if (child.tag() == NodeTag::SingleEntry) {
                    std::string_view key = child.entry()->key();
                    bool in_prefix = key.size() >= node->prefix.size() &&
                                     key.substr(0, node->prefix.size()) == node->prefix;
                    if (slot == 0 && !(key < std::string_view(node->prefix)))
                        ctx.fail("low boundary slot holds in-range key");
                    if (slot == node->array_len() - 1 && in_prefix)
                        ctx.fail("high boundary slot holds in-range key");
                    if (slot != 0 && slot != node->array_len() - 1 && !in_prefix)
                        ctx.fail("main slot holds key outside node prefix");
                }
                uint64_t under = audit_walk(child, ctx);
                total += under;
                if (child.tag() == NodeTag::ModelNode)
                    max_model_child = std::max(max_model_child, under);
            }
            if (total != node->key_count)
                ctx.fail("model node key_count drift: recorded " +
                         std::to_string(node->key_count) + ", walked " +
                         std::to_string(total));
            if (ctx.cfg->subtries_enabled &&
                double(max_model_child) >
                    ctx.cfg->collision_slot_limit * double(node->key_count) + 1e-9)
                ctx.fail("model child above collision slot limit");
            if (node->max_model_child < max_model_child)
                ctx.fail("max child bound below actual child count");
            return total;
        }
    }
    return 0;
}

}  // namespace

IndexStats Index::stats() const {
    StatsAcc acc;
    stats_walk(root_, 0, acc);
    acc.st.key_count = acc.keys;
    acc.st.bytes_used += hpt_.table_bytes() + sizeof(Index);
    if (acc.keys > 0) {
        acc.st.avg_base_height = double(acc.base_depth_sum) / double(acc.keys);
        acc.st.avg_subtrie_height = double(acc.trie_depth_sum) / double(acc.keys);
    }
    acc.st.resize_count = resize_count_;
    acc.st.resize_touched_entries = resize_touched_;
    acc.st.forced_subtrie_builds = forced_subtries_;
    acc.st.overweight_subtrie_builds = overweight_subtries_;
    return acc.st;
}

void Index::audit() const {
    AuditCtx ctx{&cfg_};
    uint64_t walked = audit_walk(root_, ctx);
    if (walked != total_keys_)
        ctx.fail("total key count drift: tracked " + std::to_string(total_keys_) +
                 ", walked " + std::to_string(walked));
}

}  // namespace lits
