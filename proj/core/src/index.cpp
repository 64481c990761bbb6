#include "lits/index.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lits/metrics.hpp"

namespace lits {

namespace {

bool key_is_valid(std::string_view key) {
    if (key.empty() || key.size() > 255) return false;
    for (unsigned char c : key)
        if (c >= kAlphabetSize) return false;
    return true;
}

std::vector<std::string_view> keys_of(std::span<KvEntry* const> entries) {
    std::vector<std::string_view> keys;
    keys.reserve(entries.size());
    for (const KvEntry* e : entries) keys.push_back(e->key());
    return keys;
}

// Min-max fit mapping the cdf extremes onto the interior slot range. Falls
// back to the degenerate single-slot model when the span is empty or too
// small for the arithmetic to stay finite.
std::pair<double, double> fit_minmax(uint32_t len, double x_min, double x_max) {
    if (!(x_max > x_min)) return {0.0, 0.5};
    double alpha = (double(len) - 3.0) / (double(len) * (x_max - x_min));
    double beta = 1.0 / double(len) - alpha * x_min;
    if (!std::isfinite(alpha) || !std::isfinite(beta)) return {0.0, 0.5};
    return {alpha, beta};
}

// Keeps pathological key groups from chaining model nodes past any sane
// height; groups this deep go to the trie instead.
constexpr uint32_t kMaxBuildDepth = 128;

}  // namespace

void destroy_item_tree(Item item) {
    switch (item.tag()) {
        case NodeTag::Empty:
            return;
        case NodeTag::SingleEntry:
            KvEntry::destroy(item.entry());
            return;
        case NodeTag::CompactLeaf: {
            CompactNode* node = item.cnode();
            for (const HPointer& hp : node->entries()) KvEntry::destroy(hp.entry());
            CompactNode::destroy(node);
            return;
        }
        case NodeTag::Subtrie:
            delete item.trie();
            return;
        case NodeTag::ModelNode: {
            ModelNode* node = item.model();
            for (Item child : node->items) destroy_item_tree(child);
            delete node;
            return;
        }
    }
}

void collect_entries(Item item, std::vector<KvEntry*>& out) {
    switch (item.tag()) {
        case NodeTag::Empty:
            return;
        case NodeTag::SingleEntry:
            out.push_back(item.entry());
            return;
        case NodeTag::CompactLeaf: {
            CompactNode* node = item.cnode();
            for (const HPointer& hp : node->entries()) out.push_back(hp.entry());
            CompactNode::destroy(node);
            return;
        }
        case NodeTag::Subtrie: {
            Subtrie* trie = item.trie();
            for (KvEntry* e : trie->take_live_entries()) out.push_back(e);
            delete trie;
            return;
        }
        case NodeTag::ModelNode: {
            ModelNode* node = item.model();
            for (Item child : node->items) collect_entries(child, out);
            delete node;
            return;
        }
    }
}

// ------------------------------------------------------------ construction

Index::Index(IndexConfig cfg) : hpt_(cfg.hpt), cfg_(std::move(cfg)) {
    if (cfg_.cnode_capacity < 2)
        throw std::invalid_argument("index: cnode capacity must be >= 2");
    double f = cfg_.f_read + cfg_.f_write;
    if (std::abs(f - 1.0) > 1e-9)
        throw std::invalid_argument("index: f_read + f_write must equal 1");
}

Index::~Index() { destroy_item_tree(root_); }

Index::Index(Index&& other) noexcept
    : root_(other.root_),
      hpt_(std::move(other.hpt_)),
      cfg_(std::move(other.cfg_)),
      total_keys_(other.total_keys_),
      resize_count_(other.resize_count_),
      resize_touched_(other.resize_touched_),
      forced_subtries_(other.forced_subtries_),
      overweight_subtries_(other.overweight_subtries_),
      reads_seen_(other.reads_seen_),
      writes_seen_(other.writes_seen_) {
    other.root_ = Item::empty();
    other.total_keys_ = 0;
}

Index& Index::operator=(Index&& other) noexcept {
    if (this != &other) {
        destroy_item_tree(root_);
        root_ = other.root_;
        hpt_ = std::move(other.hpt_);
        cfg_ = std::move(other.cfg_);
        total_keys_ = other.total_keys_;
        resize_count_ = other.resize_count_;
        resize_touched_ = other.resize_touched_;
        forced_subtries_ = other.forced_subtries_;
        overweight_subtries_ = other.overweight_subtries_;
        reads_seen_ = other.reads_seen_;
        writes_seen_ = other.writes_seen_;
        other.root_ = Item::empty();
        other.total_keys_ = 0;
    }
    return *this;
}

double Index::effective_f_read() const {
    if (!cfg_.online_workload_mix) return cfg_.f_read;
    return double(reads_seen_ + 1) / double(reads_seen_ + writes_seen_ + 2);
}

void Index::note_read() const { ++reads_seen_; }
void Index::note_write() { ++writes_seen_; }

Item Index::make_cnode_item(std::span<KvEntry* const> entries) {
    std::vector<HPointer> hps;
    hps.reserve(entries.size());
    for (KvEntry* e : entries) hps.emplace_back(fingerprint16(e->key()), e);
    uint32_t cap = cfg_.cnode_preallocate ? cfg_.cnode_capacity
                                          : uint32_t(entries.size());
    return Item::compact(CompactNode::make(hps, cap));
}

Item Index::make_subtrie_item(std::span<KvEntry* const> entries) {
    return Item::subtrie(
        Subtrie::make_from_sorted(entries, cfg_.subtrie_delete_ratio_limit));
}

ModelNode* Index::build_model(std::span<KvEntry* const> entries, uint32_t depth) {
    const size_t n = entries.size();
    std::string_view first = entries.front()->key();
    std::string_view last = entries.back()->key();
    size_t prefix_len = metrics::common_prefix_len(first, last);

    auto* node = new ModelNode;
    node->prefix = std::string(first.substr(0, prefix_len));
    node->key_count = n;
    uint32_t len = array_len_for(n);
    node->items.assign(len, Item::empty());

    // The cdf is monotone over sorted keys, so the extremes pin the fit.
    double x_min = hpt_.get_cdf(first.substr(prefix_len));
    double x_max = hpt_.get_cdf(last.substr(prefix_len));
    std::tie(node->alpha, node->beta) = fit_minmax(len, x_min, x_max);

    size_t i = 0;
    while (i < n) {
        uint32_t slot =
            node->slot_for_cdf(hpt_.get_cdf(entries[i]->key().substr(prefix_len)));
        size_t j = i + 1;
        while (j < n) {
            uint32_t s =
                node->slot_for_cdf(hpt_.get_cdf(entries[j]->key().substr(prefix_len)));
            if (s != slot) break;
            ++j;
        }
        if (j - i == 1) {
            node->items[slot] =
                Item::single(entries[i], fingerprint16(entries[i]->key()));
        } else {
            Item child = build_child(entries.subspan(i, j - i), n, depth + 1);
            node->items[slot] = child;
            if (child.tag() == NodeTag::ModelNode)
                node->max_model_child =
                    std::max(node->max_model_child, child.model()->key_count);
        }
        i = j;
    }
    return node;
}

Item Index::build_child(std::span<KvEntry* const> entries, uint64_t parent_total,
                        uint32_t depth) {
    const size_t n = entries.size();
    if (n == 0) return Item::empty();
    if (n == 1)
        return Item::single(entries.front(), fingerprint16(entries.front()->key()));
    if (cfg_.cnodes_enabled && n <= cfg_.cnode_capacity) return make_cnode_item(entries);

    // A group the model cannot place into at least two distinct slots would
    // recurse forever; only the trie can split it. The same fit is used
    // here and in the node, so the check is exact.
    std::string_view first = entries.front()->key();
    std::string_view last = entries.back()->key();
    size_t prefix_len = metrics::common_prefix_len(first, last);
    double x_min = hpt_.get_cdf(first.substr(prefix_len));
    double x_max = hpt_.get_cdf(last.substr(prefix_len));
    uint32_t len = array_len_for(n);
    auto [alpha, beta] = fit_minmax(len, x_min, x_max);
    bool splittable = ModelNode::slot_from_model(alpha, beta, len, x_min) !=
                      ModelNode::slot_from_model(alpha, beta, len, x_max);
    if (!splittable || depth >= kMaxBuildDepth) {
        ++forced_subtries_;
        return make_subtrie_item(entries);
    }

    if (cfg_.subtries_enabled) {
        if (parent_total > 0 &&
            double(n) > cfg_.collision_slot_limit * double(parent_total)) {
            ++overweight_subtries_;
            return make_subtrie_item(entries);
        }
        if (n > cfg_.cnode_capacity) {
            auto keys = keys_of(entries);
            double g = metrics::gpkl(keys);
            if (cfg_.tables.select(g, double(n), effective_f_read(),
                                   1.0 - effective_f_read()) ==
                pmss::StructureKind::Subtrie)
                return make_subtrie_item(entries);
        }
    }
    return Item::model(build_model(entries, depth),
                       uint16_t(std::min<size_t>(prefix_len, 0xFFFF)));
}

Item Index::build_root(std::span<KvEntry* const> entries) {
    const size_t n = entries.size();
    if (n == 0) return Item::empty();
    if (n == 1)
        return Item::single(entries.front(), fingerprint16(entries.front()->key()));
    if (cfg_.cnodes_enabled && n <= cfg_.cnode_capacity) {
        // Tiny corpus: a minimal wrapper node over one compact leaf keeps
        // the root a model node.
        auto* node = new ModelNode;
        size_t prefix_len =
            metrics::common_prefix_len(entries.front()->key(), entries.back()->key());
        node->prefix = std::string(entries.front()->key().substr(0, prefix_len));
        node->key_count = n;
        node->alpha = 0.0;
        node->beta = 0.5;
        node->items.assign(kMinArrayLen, Item::empty());
        node->items[node->slot_for_cdf(0.0)] = make_cnode_item(entries);
        return Item::model(node, uint16_t(prefix_len));
    }
    return Item::model(build_model(entries),
                       uint16_t(std::min<size_t>(
                           metrics::common_prefix_len(entries.front()->key(),
                                                      entries.back()->key()),
                           0xFFFF)));
}

Index Index::bulkload(std::vector<std::pair<std::string, uint64_t>> input,
                      IndexConfig cfg) {
    Index idx(std::move(cfg));
    for (const auto& [key, value] : input) validate_key(key);
    std::sort(input.begin(), input.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (size_t i = 1; i < input.size(); ++i)
        if (input[i].first == input[i - 1].first)
            throw std::invalid_argument("bulkload: duplicate key: " + input[i].first);

    if (!input.empty()) {
        std::vector<std::string_view> keys;
        keys.reserve(input.size());
        for (const auto& [key, value] : input) keys.push_back(key);
        auto sample = sample_keys(keys, idx.cfg_.hpt.sample_fraction, idx.cfg_.seed);
        idx.hpt_ = Hpt::build(std::span<const std::string_view>(sample), idx.cfg_.hpt);
    }

    std::vector<KvEntry*> entries;
    entries.reserve(input.size());
    for (const auto& [key, value] : input) entries.push_back(KvEntry::make(key, value));
    idx.root_ = idx.build_root(entries);
    idx.total_keys_ = entries.size();
    return idx;
}

namespace {
void bump_child_hint(ModelNode* parent, Item child) {
    if (parent && child.tag() == NodeTag::ModelNode)
        parent->max_model_child =
            std::max(parent->max_model_child, child.model()->key_count);
}
}  // namespace

void Index::rebuild_item(Item* slot, uint64_t parent_total, bool is_root,
                         ModelNode* parent) {
    std::vector<KvEntry*> entries;
    collect_entries(*slot, entries);
    resize_touched_ += entries.size();
    ++resize_count_;
    *slot = is_root ? build_root(entries) : build_child(entries, parent_total);
    bump_child_hint(parent, *slot);
}

void Index::rebuild() {
    std::vector<KvEntry*> entries;
    collect_entries(root_, entries);
    root_ = Item::empty();
    total_keys_ = entries.size();
    if (!entries.empty()) {
        auto keys = keys_of(entries);
        auto sample = sample_keys(keys, cfg_.hpt.sample_fraction, cfg_.seed);
        hpt_ = Hpt::build(std::span<const std::string_view>(sample), cfg_.hpt);
    }
    root_ = build_root(entries);
    reads_seen_ = 0;
    writes_seen_ = 0;
}

// -------------------------------------------------------------- operations

std::optional<uint64_t> Index::find(std::string_view key, SearchTrace* trace) const {
    note_read();
    if (!key_is_valid(key)) return std::nullopt;
    Item item = root_;
    while (true) {
        switch (item.tag()) {
            case NodeTag::Empty:
                return std::nullopt;
            case NodeTag::SingleEntry: {
                const KvEntry* e = item.entry();
                if (trace) {
                    trace->entry_derefs++;
                    trace->key_comparisons++;
                }
                if (e->key() == key) return e->value();
                return std::nullopt;
            }
            case NodeTag::CompactLeaf: {
                const KvEntry* e = item.cnode()->find(key, trace);
                if (e) return e->value();
                return std::nullopt;
            }
            case NodeTag::Subtrie: {
                const KvEntry* e = item.trie()->find(key);
                if (e) return e->value();
                return std::nullopt;
            }
            case NodeTag::ModelNode: {
                const ModelNode* node = item.model();
                item = node->items[node->slot_for_key(hpt_, key)];
                break;
            }
        }
    }
}

OpStatus Index::insert(std::string_view key, uint64_t value) {
    validate_key(key);
    note_write();

    std::vector<Item*> path;  // model nodes from the root down
    Item* slot = &root_;
    bool inserted = false;
    while (true) {
        switch (slot->tag()) {
            case NodeTag::Empty: {
                *slot = Item::single(KvEntry::make(key, value), fingerprint16(key));
                inserted = true;
                break;
            }
            case NodeTag::SingleEntry: {
                KvEntry* existing = slot->entry();
                if (existing->key() == key) return OpStatus::Duplicate;
                KvEntry* fresh = KvEntry::make(key, value);
                KvEntry* pair[2] = {existing, fresh};
                if (fresh->key() < existing->key()) std::swap(pair[0], pair[1]);
                uint64_t parent_total =
                    path.empty() ? 0 : path.back()->model()->key_count + 1;
                *slot = cfg_.cnodes_enabled ? make_cnode_item(pair)
                                            : build_child(pair, parent_total);
                bump_child_hint(path.empty() ? nullptr : path.back()->model(), *slot);
                inserted = true;
                break;
            }
            case NodeTag::CompactLeaf: {
                CompactNode* cnode = slot->cnode();
                auto res = cnode->insert(key, value, cfg_.cnode_capacity,
                                         cfg_.cnode_preallocate);
                if (res.status == CompactNode::InsertStatus::Duplicate)
                    return OpStatus::Duplicate;
                if (res.status == CompactNode::InsertStatus::Ok) {
                    *slot = Item::compact(res.node);
                    inserted = true;
                    break;
                }
                // Full leaf: rebuild its keys plus the new one into a
                // bigger structure.
                std::vector<KvEntry*> grown;
                grown.reserve(cnode->size() + 1);
                KvEntry* fresh = KvEntry::make(key, value);
                uint32_t pos = cnode->lower_bound(key);
                auto existing = cnode->entries();
                for (uint32_t i = 0; i < pos; ++i) grown.push_back(existing[i].entry());
                grown.push_back(fresh);
                for (uint32_t i = pos; i < cnode->size(); ++i)
                    grown.push_back(existing[i].entry());
                CompactNode::destroy(cnode);
                uint64_t parent_total =
                    path.empty() ? 0 : path.back()->model()->key_count + 1;
                *slot = build_child(grown, parent_total);
                bump_child_hint(path.empty() ? nullptr : path.back()->model(), *slot);
                inserted = true;
                break;
            }
            case NodeTag::Subtrie: {
                if (slot->trie()->insert(key, value) == Subtrie::InsertStatus::Duplicate)
                    return OpStatus::Duplicate;
                inserted = true;
                break;
            }
            case NodeTag::ModelNode: {
                ModelNode* node = slot->model();
                path.push_back(slot);
                slot = &node->items[node->slot_for_key(hpt_, key)];
                continue;
            }
        }
        break;
    }
    if (!inserted) return OpStatus::Duplicate;
    ++total_keys_;

    // Bump counts along the path; the shallowest node past a trigger is
    // rebuilt and recounts everything beneath it.
    for (size_t i = 0; i < path.size(); ++i) {
        ModelNode* node = path[i]->model();
        node->key_count++;
        if (double(node->key_count) >=
            cfg_.resize_grow_trigger * double(node->array_len())) {
            ModelNode* parent = i == 0 ? nullptr : path[i - 1]->model();
            rebuild_item(path[i], parent ? parent->key_count : 0, path[i] == &root_,
                         parent);
            break;
        }
        if (i > 0) {
            ModelNode* parent = path[i - 1]->model();
            parent->max_model_child = std::max(parent->max_model_child, node->key_count);
            if (cfg_.subtries_enabled &&
                double(node->key_count) >
                    cfg_.collision_slot_limit * double(parent->key_count)) {
                rebuild_item(path[i], parent->key_count, false, parent);
                break;
            }
        }
    }
    return OpStatus::Ok;
}

OpStatus Index::erase(std::string_view key) {
    note_write();
    if (!key_is_valid(key)) return OpStatus::NotFound;

    std::vector<Item*> path;
    Item* slot = &root_;
    bool removed = false;
    while (true) {
        switch (slot->tag()) {
            case NodeTag::Empty:
                return OpStatus::NotFound;
            case NodeTag::SingleEntry: {
                KvEntry* e = slot->entry();
                if (e->key() != key) return OpStatus::NotFound;
                KvEntry::destroy(e);
                *slot = Item::empty();
                removed = true;
                break;
            }
            case NodeTag::CompactLeaf: {
                CompactNode* cnode = slot->cnode();
                auto res = cnode->erase(key, cfg_.cnode_preallocate);
                if (res.status == CompactNode::EraseStatus::NotFound)
                    return OpStatus::NotFound;
                if (res.status == CompactNode::EraseStatus::Ok) {
                    *slot = Item::compact(res.node);
                } else {
                    *slot = Item::single(res.survivor, fingerprint16(res.survivor->key()));
                    CompactNode::destroy(cnode);
                }
                KvEntry::destroy(res.removed);
                removed = true;
                break;
            }
            case NodeTag::Subtrie: {
                if (!slot->trie()->erase(key)) return OpStatus::NotFound;
                removed = true;
                break;
            }
            case NodeTag::ModelNode: {
                ModelNode* node = slot->model();
                path.push_back(slot);
                slot = &node->items[node->slot_for_key(hpt_, key)];
                continue;
            }
        }
        break;
    }
    if (!removed) return OpStatus::NotFound;
    --total_keys_;

    for (size_t i = 0; i < path.size(); ++i) {
        ModelNode* node = path[i]->model();
        node->key_count--;
        if (double(node->key_count) <
            cfg_.resize_shrink_trigger * double(node->array_len())) {
            ModelNode* parent = i == 0 ? nullptr : path[i - 1]->model();
            rebuild_item(path[i], parent ? parent->key_count : 0, path[i] == &root_,
                         parent);
            break;
        }
        // Deletes shift weight toward siblings; re-check the heaviest child
        // when the cached bound says the limit may now be crossed.
        if (cfg_.subtries_enabled &&
            double(node->max_model_child) >
                cfg_.collision_slot_limit * double(node->key_count)) {
            uint64_t actual_max = 0;
            Item* heaviest = nullptr;
            for (Item& child : node->items) {
                if (child.tag() != NodeTag::ModelNode) continue;
                if (child.model()->key_count > actual_max) {
                    actual_max = child.model()->key_count;
                    heaviest = &child;
                }
            }
            node->max_model_child = actual_max;
            if (heaviest &&
                double(actual_max) >
                    cfg_.collision_slot_limit * double(node->key_count)) {
                bool on_path = i + 1 < path.size() && heaviest == path[i + 1];
                rebuild_item(heaviest, node->key_count, false, node);
                if (on_path) break;
            }
        }
    }
    return OpStatus::Ok;
}

OpStatus Index::update(std::string_view key, uint64_t value) {
    note_write();
    if (!key_is_valid(key)) return OpStatus::NotFound;
    Item item = root_;
    while (true) {
        switch (item.tag()) {
            case NodeTag::Empty:
                return OpStatus::NotFound;
            case NodeTag::SingleEntry: {
                KvEntry* e = item.entry();
                if (e->key() != key) return OpStatus::NotFound;
                e->set_value(value);
                return OpStatus::Ok;
            }
            case NodeTag::CompactLeaf: {
                auto* e = const_cast<KvEntry*>(item.cnode()->find(key));
                if (!e) return OpStatus::NotFound;
                e->set_value(value);
                return OpStatus::Ok;
            }
            case NodeTag::Subtrie:
                return item.trie()->update(key, value) ? OpStatus::Ok
                                                       : OpStatus::NotFound;
            case NodeTag::ModelNode: {
                const ModelNode* node = item.model();
                item = node->items[node->slot_for_key(hpt_, key)];
                break;
            }
        }
    }
}

// -------------------------------------------------------------------- scan

Index::Scanner Index::scan(std::string_view from) const {
    Scanner s;
    Item item = root_;
    std::string_view seek = from;
    while (true) {
        switch (item.tag()) {
            case NodeTag::Empty:
                return s;
            case NodeTag::SingleEntry:
                if (item.entry()->key() >= seek) s.pending_ = item.entry();
                return s;
            case NodeTag::CompactLeaf: {
                const CompactNode* node = item.cnode();
                s.stack_.push_back(Scanner::CnodeFrame{node, node->lower_bound(seek)});
                return s;
            }
            case NodeTag::Subtrie:
                s.stack_.push_back(Scanner::TrieFrame{item.trie()->scan(seek)});
                return s;
            case NodeTag::ModelNode: {
                const ModelNode* node = item.model();
                std::string_view sp =
                    seek.substr(0, std::min(seek.size(), node->prefix.size()));
                int cmp = sp.compare(std::string_view(node->prefix));
                if (cmp < 0) {
                    // Keys under the main and high slots all sort above the
                    // seek key; slot 0 needs a real descent.
                    s.stack_.push_back(Scanner::ModelFrame{node, 1});
                    item = node->items[0];
                    continue;
                }
                if (cmp > 0) {
                    item = node->items[node->array_len() - 1];
                    continue;
                }
                uint32_t pos =
                    node->slot_for_cdf(hpt_.get_cdf(seek.substr(node->prefix.size())));
                s.stack_.push_back(Scanner::ModelFrame{node, pos + 1});
                item = node->items[pos];
                continue;
            }
        }
    }
}

bool Index::Scanner::next(std::string_view& key, uint64_t& value) {
    if (pending_) {
        key = pending_->key();
        value = pending_->value();
        pending_ = nullptr;
        return true;
    }
    while (!stack_.empty()) {
        Frame& frame = stack_.back();
        if (auto* mf = std::get_if<ModelFrame>(&frame)) {
            if (mf->next_slot >= mf->node->array_len()) {
                stack_.pop_back();
                continue;
            }
            Item item = mf->node->items[mf->next_slot++];
            switch (item.tag()) {
                case NodeTag::Empty:
                    continue;
                case NodeTag::SingleEntry:
                    key = item.entry()->key();
                    value = item.entry()->value();
                    return true;
                case NodeTag::CompactLeaf:
                    stack_.push_back(CnodeFrame{item.cnode(), 0});
                    continue;
                case NodeTag::Subtrie:
                    stack_.push_back(TrieFrame{item.trie()->scan({})});
                    continue;
                case NodeTag::ModelNode:
                    stack_.push_back(ModelFrame{item.model(), 0});
                    continue;
            }
        } else if (auto* cf = std::get_if<CnodeFrame>(&frame)) {
            if (cf->idx >= cf->node->size()) {
                stack_.pop_back();
                continue;
            }
            const KvEntry* e = cf->node->entries()[cf->idx++].entry();
            key = e->key();
            value = e->value();
            return true;
        } else {
            auto& tf = std::get<TrieFrame>(frame);
            const KvEntry* e = tf.it.next();
            if (!e) {
                stack_.pop_back();
                continue;
            }
            key = e->key();
            value = e->value();
            return true;
        }
    }
    return false;
}

}  // namespace lits
