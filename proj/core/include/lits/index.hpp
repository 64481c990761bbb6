#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "lits/hpt.hpp"
#include "lits/item.hpp"
#include "lits/nodes.hpp"
#include "lits/pmss.hpp"
#include "lits/subtrie.hpp"

namespace lits {

struct IndexConfig {
    HptConfig hpt;
    uint32_t cnode_capacity = 16;  // w
    bool cnodes_enabled = true;
    bool cnode_preallocate = false;
    bool subtries_enabled = true;
    double collision_slot_limit = 0.5;   // max fraction of a node's keys one slot may hold
    double resize_grow_trigger = 2.0;    // rebuild when key_count >= trigger * array_len
    double resize_shrink_trigger = 0.25; // rebuild when key_count < trigger * array_len
    double subtrie_delete_ratio_limit = 0.25;
    double f_read = 0.5;
    double f_write = 0.5;
    bool online_workload_mix = false;  // derive f_read/f_write from op counters
    uint64_t seed = 0x517f00d;
    pmss::LatencyTables tables = pmss::LatencyTables::builtin_default();
};

enum class OpStatus : uint8_t { Ok, Duplicate, NotFound };

struct IndexStats {
    uint64_t key_count = 0;
    uint64_t model_nodes = 0;
    uint64_t compact_nodes = 0;
    uint64_t single_entries = 0;
    uint64_t subtries = 0;
    uint64_t subtrie_keys = 0;
    double avg_base_height = 0;     // model/cnode levels traversed, averaged over keys
    double avg_subtrie_height = 0;  // trie levels, averaged over all keys
    uint32_t max_base_height = 0;
    uint64_t bytes_used = 0;  // tree allocations plus the model table
    uint64_t resize_count = 0;
    uint64_t resize_touched_entries = 0;
    uint64_t forced_subtrie_builds = 0;  // ranges the model could not split
    uint64_t overweight_subtrie_builds = 0;  // slots past the collision limit
};

// Ordered in-memory index for ASCII string keys (1..255 bytes) with 64-bit
// values. A global prefix-table cdf model drives per-node linear models;
// colliding key groups become child nodes, small groups become compact
// leaves, and hard groups fall back to an embedded radix subtrie chosen by
// the calibrated performance model.
//
// Single-writer: callers serialize mutations against reads. Reads are safe
// to share across threads between mutations.
class Index {
  public:
    Index() : Index(IndexConfig{}) {}
    explicit Index(IndexConfig cfg);
    ~Index();
    Index(Index&&) noexcept;
    Index& operator=(Index&&) noexcept;
    Index(const Index&) = delete;
    Index& operator=(const Index&) = delete;

    // Keys must be valid and distinct; throws std::invalid_argument naming
    // the first duplicate otherwise.
    static Index bulkload(std::vector<std::pair<std::string, uint64_t>> entries,
                          IndexConfig cfg = {});

    std::optional<uint64_t> find(std::string_view key,
                                 SearchTrace* trace = nullptr) const;
    OpStatus insert(std::string_view key, uint64_t value);
    OpStatus erase(std::string_view key);
    OpStatus update(std::string_view key, uint64_t value);

    size_t size() const { return total_keys_; }
    bool empty() const { return total_keys_ == 0; }

    class Scanner {
      public:
        // Emits entries in key order, starting at the first key >= the
        // seek key. Views stay valid until the index is mutated.
        bool next(std::string_view& key, uint64_t& value);

      private:
        friend class Index;
        struct ModelFrame {
            const ModelNode* node;
            uint32_t next_slot;
        };
        struct CnodeFrame {
            const CompactNode* node;
            uint32_t idx;
        };
        struct TrieFrame {
            Subtrie::Iterator it;
        };
        using Frame = std::variant<ModelFrame, CnodeFrame, TrieFrame>;
        std::vector<Frame> stack_;
        const KvEntry* pending_ = nullptr;
    };
    Scanner scan(std::string_view from) const;

    IndexStats stats() const;
    // Full-walk invariant check; throws std::logic_error with a description
    // on the first violation.
    void audit() const;

    // Retrains the cdf model on the current keys and rebuilds the tree; the
    // recovery action once should_rebuild() fires.
    void rebuild();

    const Hpt& hpt() const { return hpt_; }
    const IndexConfig& config() const { return cfg_; }

  private:
    struct BuildScratch;
    Item build_root(std::span<KvEntry* const> entries);
    Item build_child(std::span<KvEntry* const> entries, uint64_t parent_total);
    ModelNode* build_model(std::span<KvEntry* const> entries);
    Item make_cnode_item(std::span<KvEntry* const> entries);
    Item make_subtrie_item(std::span<KvEntry* const> entries);
    void rebuild_item(Item* slot, uint64_t parent_total, bool is_root,
                      ModelNode* parent);
    void note_write();
    void note_read() const;
    double effective_f_read() const;

    Item root_;
    Hpt hpt_;
    IndexConfig cfg_;
    size_t total_keys_ = 0;
    uint64_t resize_count_ = 0;
    uint64_t resize_touched_ = 0;
    uint64_t forced_subtries_ = 0;
    uint64_t overweight_subtries_ = 0;
    mutable uint64_t reads_seen_ = 0;
    uint64_t writes_seen_ = 0;
};

// Recursively frees a subtree of items, entries included.
void destroy_item_tree(Item item);

// Collects the kv-entries under an item in key order, destroying the node
// structure (but not the entries) along the way. Masked subtrie deletions
// are dropped and freed.
void collect_entries(Item item, std::vector<KvEntry*>& out);

}  // namespace lits
