#pragma once

#include <cassert>
#include <cstdint>
#include <string_view>

namespace lits {

class KvEntry;
class CompactNode;
class ModelNode;
class Subtrie;

enum class NodeTag : uint8_t {
    Empty = 0,
    SingleEntry = 1,
    CompactLeaf = 2,
    ModelNode = 3,
    Subtrie = 4,
};

// 16-bit key hash for h-pointers and single-entry items. Domain-separated
// from the prefix-table row hash so the two never correlate.
uint16_t fingerprint16(std::string_view key);

// 64-bit tagged handle: 3-bit node tag, 16-bit auxiliary field, 45-bit
// reference. Referenced structures are 8-byte aligned so the low three
// address bits are reconstructible, which covers the full 48-bit
// user-space address range.
class Item {
  public:
    constexpr Item() : bits_(0) {}

    static Item empty() { return Item(); }
    static Item single(KvEntry* entry, uint16_t fp);
    static Item compact(CompactNode* node);
    static Item model(ModelNode* node, uint16_t prefix_len_hint);
    static Item subtrie(Subtrie* trie);
    static Item pack(NodeTag tag, uint16_t aux, const void* ptr);

    NodeTag tag() const { return NodeTag(bits_ >> 61); }
    uint16_t aux() const { return uint16_t((bits_ >> 45) & 0xFFFF); }
    void* ptr() const { return reinterpret_cast<void*>((bits_ & kRefMask) << 3); }

    bool is_empty() const { return tag() == NodeTag::Empty; }
    KvEntry* entry() const { return static_cast<KvEntry*>(ptr()); }
    CompactNode* cnode() const { return static_cast<CompactNode*>(ptr()); }
    ModelNode* model() const { return static_cast<ModelNode*>(ptr()); }
    Subtrie* trie() const { return static_cast<Subtrie*>(ptr()); }

    uint64_t raw() const { return bits_; }

  private:
    static constexpr uint64_t kRefMask = (uint64_t(1) << 45) - 1;
    uint64_t bits_;
};
static_assert(sizeof(Item) == 8);

// Packed (fingerprint, kv-entry) pair: 16-bit hash in the upper bits, the
// 48-bit entry address below.
class HPointer {
  public:
    HPointer() : bits_(0) {}
    HPointer(uint16_t fp, const KvEntry* entry);

    uint16_t fingerprint() const { return uint16_t(bits_ >> 48); }
    KvEntry* entry() const {
        return reinterpret_cast<KvEntry*>(bits_ & ((uint64_t(1) << 48) - 1));
    }

  private:
    uint64_t bits_;
};
static_assert(sizeof(HPointer) == 8);

}  // namespace lits
