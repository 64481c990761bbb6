#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "lits/nodes.hpp"

namespace lits {

class TrieNode;

// Child slot: either an inner node or a kv-entry leaf, tagged in the low
// pointer bit.
class TrieRef {
  public:
    TrieRef() = default;
    static TrieRef node(TrieNode* n) {
        return TrieRef(reinterpret_cast<uintptr_t>(n));
    }
    static TrieRef leaf(KvEntry* e) {
        return TrieRef(reinterpret_cast<uintptr_t>(e) | 1u);
    }
    bool is_null() const { return bits_ == 0; }
    bool is_leaf() const { return bits_ & 1u; }
    TrieNode* as_node() const { return reinterpret_cast<TrieNode*>(bits_); }
    KvEntry* as_leaf() const { return reinterpret_cast<KvEntry*>(bits_ & ~uintptr_t(1)); }

  private:
    explicit TrieRef(uintptr_t bits) : bits_(bits) {}
    uintptr_t bits_ = 0;
};

// Adaptive child container: grows through fanout classes 4, 16, 48, 256 as
// bytes are added. Children never shrink in place; reconstruction handles
// that.
class Children {
  public:
    Children() = default;
    ~Children();
    Children(Children&& other) noexcept;
    Children& operator=(Children&& other) noexcept;
    Children(const Children&) = delete;
    Children& operator=(const Children&) = delete;

    uint16_t size() const { return count_; }
    TrieRef* find(uint8_t byte);
    const TrieRef* find(uint8_t byte) const;
    void insert(uint8_t byte, TrieRef child);

    // Ordered traversal cursors; kEnd marks exhaustion.
    static constexpr int kEnd = -1;
    int first_at_or_after(int byte) const;
    int next(int cursor) const;
    uint8_t byte_at(int cursor) const;
    TrieRef ref_at(int cursor) const;

    size_t heap_bytes() const;

  private:
    void grow();
    uint8_t kind_ = 0;  // index into {4, 16, 48, 256} fanout classes
    uint16_t count_ = 0;
    void* rep_ = nullptr;
};

class TrieNode {
  public:
    std::string prefix;          // compressed path below the incoming byte
    KvEntry* entry = nullptr;    // key terminating exactly here
    Children children;
};

// Byte-per-level radix trie with path compression; the fallback structure
// for key subsets the learned model separates poorly. Deletes go through a
// delete list: removed keys stay in the structure, are masked on reads, and
// the whole trie is rebuilt once deletions pass `delete_ratio_limit` of the
// live count.
class Subtrie {
  public:
    explicit Subtrie(double delete_ratio_limit = 0.25)
        : delete_ratio_limit_(delete_ratio_limit) {}
    ~Subtrie();
    Subtrie(Subtrie&&) noexcept;
    Subtrie& operator=(Subtrie&&) noexcept;
    Subtrie(const Subtrie&) = delete;
    Subtrie& operator=(const Subtrie&) = delete;

    // Takes ownership of the entries; they must be sorted by key and
    // deduplicated.
    static Subtrie* make_from_sorted(std::span<KvEntry* const> entries,
                                     double delete_ratio_limit = 0.25);

    const KvEntry* find(std::string_view key) const;
    KvEntry* find_mutable(std::string_view key);

    enum class InsertStatus : uint8_t { Ok, Duplicate };
    InsertStatus insert(std::string_view key, uint64_t value);
    bool erase(std::string_view key);
    bool update(std::string_view key, uint64_t value);

    size_t size() const { return live_; }
    size_t delete_list_size() const { return dlist_.size(); }
    uint64_t rebuild_count() const { return rebuilds_; }
    uint32_t height() const;
    size_t heap_bytes() const;

    // Sum over live keys of the node levels traversed to reach each one.
    uint64_t total_key_depth() const;

    // Hands back the live entries in key order and empties the trie; dead
    // entries are freed.
    std::vector<KvEntry*> take_live_entries();

    class Iterator {
      public:
        // Returns the next live entry with key >= the seek key, in order.
        const KvEntry* next();

      private:
        friend class Subtrie;
        struct Frame {
            const TrieNode* node;
            bool entry_pending;
            int cursor;
        };
        const Subtrie* trie_ = nullptr;
        const KvEntry* pending_ = nullptr;
        std::vector<Frame> stack_;
    };
    Iterator scan(std::string_view from) const;

  private:
    void insert_placed(KvEntry* owned);  // structural insert of a fresh entry
    void rebuild();
    bool alive(const KvEntry* e) const;

    TrieNode root_;
    size_t live_ = 0;
    uint64_t rebuilds_ = 0;
    double delete_ratio_limit_;

    struct SvHash {
        using is_transparent = void;
        size_t operator()(std::string_view s) const {
            return std::hash<std::string_view>{}(s);
        }
    };
    struct SvEq {
        using is_transparent = void;
        bool operator()(std::string_view a, std::string_view b) const { return a == b; }
    };
    std::unordered_set<std::string, SvHash, SvEq> dlist_;
};

}  // namespace lits
