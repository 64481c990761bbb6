#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lits/hpt.hpp"
#include "lits/item.hpp"

namespace lits {

// Key-value entry: an 8-byte value, a length byte, and the key bytes in one
// allocation. Keys are 1..255 bytes.
class KvEntry {
  public:
    static KvEntry* make(std::string_view key, uint64_t value);
    static void destroy(KvEntry* e);

    std::string_view key() const { return {key_, len_}; }
    uint64_t value() const { return value_; }
    void set_value(uint64_t v) { value_ = v; }
    size_t allocated_bytes() const;

    KvEntry(const KvEntry&) = delete;
    KvEntry& operator=(const KvEntry&) = delete;

  private:
    KvEntry() = default;
    static size_t alloc_size(size_t key_len);
    uint64_t value_;
    uint8_t len_;
    char key_[1];  // trailing bytes live past the header allocation
};

// Test instrumentation: counts work done while probing leaf structures.
struct SearchTrace {
    uint64_t entry_derefs = 0;
    uint64_t key_comparisons = 0;
};

// Sorted array of fingerprinted entry pointers; the leaf that replaces
// clusters of tiny nodes. The default flavor is exact-sized and reallocated
// on insert; the preallocated flavor reserves `capacity` slots up front and
// shifts in place.
class CompactNode {
  public:
    static CompactNode* make(std::span<const HPointer> sorted_entries, uint32_t capacity);
    static void destroy(CompactNode* node);

    uint32_t size() const { return count_; }
    uint32_t capacity() const { return capacity_; }
    std::span<const HPointer> entries() const { return {entries_, count_}; }
    size_t allocated_bytes() const;

    // Fingerprint-gated linear probe; dereferences an entry only on a hash
    // match.
    const KvEntry* find(std::string_view key, SearchTrace* trace = nullptr) const;

    // Index of the first entry with key >= `key` (by full key comparison).
    uint32_t lower_bound(std::string_view key) const;

    enum class InsertStatus : uint8_t { Ok, Duplicate, Full };
    struct InsertResult {
        InsertStatus status;
        CompactNode* node;  // replacement node on Ok (may be `this` in-place)
    };
    // `max_keys` is the capacity limit w; hitting it reports Full so the
    // caller can rebuild the keys into a bigger structure.
    InsertResult insert(std::string_view key, uint64_t value, uint32_t max_keys,
                        bool preallocate);

    enum class EraseStatus : uint8_t { Ok, Collapsed, NotFound };
    struct EraseResult {
        EraseStatus status;
        CompactNode* node;      // replacement on Ok
        KvEntry* survivor;      // the remaining entry on Collapsed
        KvEntry* removed;       // entry taken out of the node (caller frees)
    };
    EraseResult erase(std::string_view key, bool preallocate);

    CompactNode(const CompactNode&) = delete;
    CompactNode& operator=(const CompactNode&) = delete;

  private:
    CompactNode() = default;
    static size_t alloc_size(uint32_t capacity);
    uint32_t count_;
    uint32_t capacity_;
    HPointer entries_[1];
};

// Inner node: a key prefix, a linear model over the global-table cdf, and
// an item array with slots 0 and len-1 reserved for keys sorting outside
// the prefix.
struct ModelNode {
    std::string prefix;
    uint64_t key_count = 0;
    // Upper bound on the key count of any model-node child; lets the
    // collision-limit check run without scanning the item array.
    uint64_t max_model_child = 0;
    double alpha = 0.0;
    double beta = 0.0;
    std::vector<Item> items;

    uint32_t array_len() const { return uint32_t(items.size()); }
    size_t allocated_bytes() const;

    // Slot for a key whose prefix matches: floor((alpha*x + beta) * len)
    // clamped into the model range [1, len-2].
    uint32_t slot_for_cdf(double x) const {
        return slot_from_model(alpha, beta, array_len(), x);
    }
    static uint32_t slot_from_model(double alpha, double beta, uint32_t len, double x);

    // Full dispatch: boundary slot 0 / len-1 on prefix mismatch, model slot
    // otherwise.
    uint32_t slot_for_key(const Hpt& hpt, std::string_view key) const;
};

inline constexpr uint32_t kMinArrayLen = 4;

// Item array size for a node built over n keys: twice the keys plus the two
// boundary slots, floored at the minimum.
uint32_t array_len_for(size_t n);

}  // namespace lits
