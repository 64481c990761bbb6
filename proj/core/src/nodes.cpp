#include "lits/nodes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <new>
#include <stdexcept>

namespace lits {

uint16_t fingerprint16(std::string_view key) {
    // FNV-1a with a shifted basis so it stays independent of the prefix-row
    // hash, folded down to 16 bits.
    uint64_t h = 0xcbf29ce484222325ull ^ 0x9e3779b97f4a7c15ull;
    for (unsigned char c : key) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return uint16_t(h ^ (h >> 16) ^ (h >> 32) ^ (h >> 48));
}

namespace {
uint64_t pack_bits(NodeTag tag, uint16_t aux, const void* ptr) {
    auto addr = reinterpret_cast<uintptr_t>(ptr);
    if (addr & 0x7) throw std::logic_error("item: reference not 8-byte aligned");
    if (addr >> 48) throw std::logic_error("item: reference beyond 48-bit space");
    return (uint64_t(tag) << 61) | (uint64_t(aux) << 45) | (addr >> 3);
}
}  // namespace

Item Item::pack(NodeTag tag, uint16_t aux, const void* ptr) {
    Item item;
    item.bits_ = pack_bits(tag, aux, ptr);
    return item;
}

Item Item::single(KvEntry* entry, uint16_t fp) {
    return pack(NodeTag::SingleEntry, fp, entry);
}
Item Item::compact(CompactNode* node) { return pack(NodeTag::CompactLeaf, 0, node); }
Item Item::model(ModelNode* node, uint16_t prefix_len_hint) {
    return pack(NodeTag::ModelNode, prefix_len_hint, node);
}
Item Item::subtrie(Subtrie* trie) { return pack(NodeTag::Subtrie, 0, trie); }

HPointer::HPointer(uint16_t fp, const KvEntry* entry) {
    auto addr = reinterpret_cast<uintptr_t>(entry);
    if (addr >> 48) throw std::logic_error("h-pointer: address beyond 48-bit space");
    bits_ = (uint64_t(fp) << 48) | addr;
}

// ---------------------------------------------------------------- KvEntry

size_t KvEntry::alloc_size(size_t key_len) {
    size_t raw = offsetof(KvEntry, key_) + key_len;
    return (raw + 7) & ~size_t(7);
}

KvEntry* KvEntry::make(std::string_view key, uint64_t value) {
    validate_key(key);
    void* mem = ::operator new(KvEntry::alloc_size(key.size()));
    auto* e = static_cast<KvEntry*>(mem);
    e->value_ = value;
    e->len_ = uint8_t(key.size());
    std::memcpy(e->key_, key.data(), key.size());
    return e;
}

void KvEntry::destroy(KvEntry* e) {
    if (e) ::operator delete(static_cast<void*>(e));
}

size_t KvEntry::allocated_bytes() const { return KvEntry::alloc_size(len_); }

// ------------------------------------------------------------ CompactNode

size_t CompactNode::alloc_size(uint32_t capacity) {
    return offsetof(CompactNode, entries_) + size_t(capacity) * sizeof(HPointer);
}

CompactNode* CompactNode::make(std::span<const HPointer> sorted_entries,
                               uint32_t capacity) {
    capacity = std::max<uint32_t>(capacity, uint32_t(sorted_entries.size()));
    void* mem = ::operator new(alloc_size(capacity));
    auto* node = static_cast<CompactNode*>(mem);
    node->count_ = uint32_t(sorted_entries.size());
    node->capacity_ = capacity;
    std::memcpy(node->entries_, sorted_entries.data(),
                sorted_entries.size() * sizeof(HPointer));
    return node;
}

void CompactNode::destroy(CompactNode* node) {
    if (node) ::operator delete(static_cast<void*>(node));
}

size_t CompactNode::allocated_bytes() const { return alloc_size(capacity_); }

const KvEntry* CompactNode::find(std::string_view key, SearchTrace* trace) const {
    uint16_t fp = fingerprint16(key);
    for (uint32_t i = 0; i < count_; ++i) {
        if (entries_[i].fingerprint() != fp) continue;
        const KvEntry* e = entries_[i].entry();
        if (trace) {
            trace->entry_derefs++;
            trace->key_comparisons++;
        }
        if (e->key() == key) return e;
    }
    return nullptr;
}

uint32_t CompactNode::lower_bound(std::string_view key) const {
    uint32_t lo = 0, hi = count_;
    while (lo < hi) {
        uint32_t mid = (lo + hi) / 2;
        if (entries_[mid].entry()->key() < key)
            lo = mid + 1;
        else
            hi = mid;
    }
    return lo;
}

CompactNode::InsertResult CompactNode::insert(std::string_view key, uint64_t value,
                                              uint32_t max_keys, bool preallocate) {
    uint32_t pos = lower_bound(key);
    if (pos < count_ && entries_[pos].entry()->key() == key)
        return {InsertStatus::Duplicate, this};
    if (count_ >= max_keys) return {InsertStatus::Full, this};

    KvEntry* e = KvEntry::make(key, value);
    HPointer hp(fingerprint16(key), e);
    if (preallocate && count_ < capacity_) {
        std::memmove(entries_ + pos + 1, entries_ + pos,
                     (count_ - pos) * sizeof(HPointer));
        entries_[pos] = hp;
        ++count_;
        return {InsertStatus::Ok, this};
    }
    uint32_t new_cap = preallocate ? std::max(capacity_, max_keys) : count_ + 1;
    void* mem = ::operator new(alloc_size(new_cap));
    auto* node = static_cast<CompactNode*>(mem);
    node->count_ = count_ + 1;
    node->capacity_ = new_cap;
    std::memcpy(node->entries_, entries_, pos * sizeof(HPointer));
    node->entries_[pos] = hp;
    std::memcpy(node->entries_ + pos + 1, entries_ + pos,
                (count_ - pos) * sizeof(HPointer));
    destroy(this);
    return {InsertStatus::Ok, node};
}

CompactNode::EraseResult CompactNode::erase(std::string_view key, bool preallocate) {
    uint32_t pos = lower_bound(key);
    if (pos >= count_ || entries_[pos].entry()->key() != key)
        return {EraseStatus::NotFound, this, nullptr, nullptr};
    KvEntry* removed = entries_[pos].entry();

    if (count_ == 2) {
        KvEntry* survivor = entries_[pos == 0 ? 1 : 0].entry();
        return {EraseStatus::Collapsed, this, survivor, removed};
    }
    if (preallocate) {
        std::memmove(entries_ + pos, entries_ + pos + 1,
                     (count_ - pos - 1) * sizeof(HPointer));
        --count_;
        return {EraseStatus::Ok, this, nullptr, removed};
    }
    void* mem = ::operator new(alloc_size(count_ - 1));
    auto* node = static_cast<CompactNode*>(mem);
    node->count_ = count_ - 1;
    node->capacity_ = count_ - 1;
    std::memcpy(node->entries_, entries_, pos * sizeof(HPointer));
    std::memcpy(node->entries_ + pos, entries_ + pos + 1,
                (count_ - pos - 1) * sizeof(HPointer));
    destroy(this);
    return {EraseStatus::Ok, node, nullptr, removed};
}

// -------------------------------------------------------------- ModelNode

uint32_t array_len_for(size_t n) {
    return uint32_t(std::max<size_t>(kMinArrayLen, 2 * n + 2));
}

uint32_t ModelNode::slot_from_model(double alpha, double beta, uint32_t len, double x) {
    double pos = std::floor((alpha * x + beta) * double(len));
    if (!(pos > 1.0)) return 1;  // also catches NaN
    if (pos > double(len - 2)) return len - 2;
    return uint32_t(pos);
}

uint32_t ModelNode::slot_for_key(const Hpt& hpt, std::string_view key) const {
    std::string_view kp = key.substr(0, std::min(key.size(), prefix.size()));
    int cmp = kp.compare(std::string_view(prefix));
    if (cmp < 0) return 0;
    if (cmp > 0) return array_len() - 1;
    return slot_for_cdf(hpt.get_cdf(key.substr(prefix.size())));
}

size_t ModelNode::allocated_bytes() const {
    return sizeof(ModelNode) + items.capacity() * sizeof(Item) + prefix.capacity();
}

}  // namespace lits
