#include "lits/subtrie.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

#include "lits/metrics.hpp"

namespace lits {

namespace {

struct Rep4 {
    uint8_t keys[4];
    TrieRef kids[4];
};
struct Rep16 {
    uint8_t keys[16];
    TrieRef kids[16];
};
struct Rep48 {
    uint8_t idx[256];  // 0 = empty, else slot + 1
    TrieRef kids[48];
};
struct Rep256 {
    TrieRef kids[256];
};

constexpr size_t kRepBytes[4] = {sizeof(Rep4), sizeof(Rep16), sizeof(Rep48),
                                 sizeof(Rep256)};

}  // namespace

Children::~Children() {
    ::operator delete(rep_);
}

Children::Children(Children&& other) noexcept
    : kind_(other.kind_), count_(other.count_), rep_(other.rep_) {
    other.kind_ = 0;
    other.count_ = 0;
    other.rep_ = nullptr;
}

Children& Children::operator=(Children&& other) noexcept {
    if (this != &other) {
        ::operator delete(rep_);
        kind_ = other.kind_;
        count_ = other.count_;
        rep_ = other.rep_;
        other.kind_ = 0;
        other.count_ = 0;
        other.rep_ = nullptr;
    }
    return *this;
}

const TrieRef* Children::find(uint8_t byte) const {
    if (!rep_) return nullptr;
    switch (kind_) {
        case 0: {
            auto* r = static_cast<const Rep4*>(rep_);
            for (uint16_t i = 0; i < count_; ++i)
                if (r->keys[i] == byte) return &r->kids[i];
            return nullptr;
        }
        case 1: {
            auto* r = static_cast<const Rep16*>(rep_);
            for (uint16_t i = 0; i < count_; ++i)
                if (r->keys[i] == byte) return &r->kids[i];
            return nullptr;
        }
        case 2: {
            auto* r = static_cast<const Rep48*>(rep_);
            uint8_t slot = r->idx[byte];
            return slot ? &r->kids[slot - 1] : nullptr;
        }
        default: {
            auto* r = static_cast<const Rep256*>(rep_);
            return r->kids[byte].is_null() ? nullptr : &r->kids[byte];
        }
    }
}

TrieRef* Children::find(uint8_t byte) {
    return const_cast<TrieRef*>(std::as_const(*this).find(byte));
}

void Children::grow() {
    uint8_t new_kind = kind_ + 1;
    void* fresh = ::operator new(kRepBytes[new_kind]);
    std::memset(fresh, 0, kRepBytes[new_kind]);
    if (new_kind == 1) {
        auto* src = static_cast<Rep4*>(rep_);
        auto* dst = static_cast<Rep16*>(fresh);
        std::memcpy(dst->keys, src->keys, count_);
        std::memcpy(dst->kids, src->kids, count_ * sizeof(TrieRef));
    } else if (new_kind == 2) {
        auto* src = static_cast<Rep16*>(rep_);
        auto* dst = static_cast<Rep48*>(fresh);
        for (uint16_t i = 0; i < count_; ++i) {
            dst->idx[src->keys[i]] = uint8_t(i + 1);
            dst->kids[i] = src->kids[i];
        }
    } else {
        auto* src = static_cast<Rep48*>(rep_);
        auto* dst = static_cast<Rep256*>(fresh);
        for (int b = 0; b < 256; ++b)
            if (src->idx[b]) dst->kids[b] = src->kids[src->idx[b] - 1];
    }
    ::operator delete(rep_);
    rep_ = fresh;
    kind_ = new_kind;
}

void Children::insert(uint8_t byte, TrieRef child) {
    if (!rep_) {
        rep_ = ::operator new(sizeof(Rep4));
        std::memset(rep_, 0, sizeof(Rep4));
    }
    if ((kind_ == 0 && count_ == 4) || (kind_ == 1 && count_ == 16) ||
        (kind_ == 2 && count_ == 48))
        grow();
    switch (kind_) {
        case 0:
        case 1: {
            uint8_t* keys = kind_ == 0 ? static_cast<Rep4*>(rep_)->keys
                                       : static_cast<Rep16*>(rep_)->keys;
            TrieRef* kids = kind_ == 0 ? static_cast<Rep4*>(rep_)->kids
                                       : static_cast<Rep16*>(rep_)->kids;
            uint16_t pos = 0;
            while (pos < count_ && keys[pos] < byte) ++pos;
            std::memmove(keys + pos + 1, keys + pos, count_ - pos);
            std::memmove(kids + pos + 1, kids + pos, (count_ - pos) * sizeof(TrieRef));
            keys[pos] = byte;
            kids[pos] = child;
            break;
        }
        case 2: {
            auto* r = static_cast<Rep48*>(rep_);
            r->idx[byte] = uint8_t(count_ + 1);
            r->kids[count_] = child;
            break;
        }
        default: {
            static_cast<Rep256*>(rep_)->kids[byte] = child;
            break;
        }
    }
    ++count_;
}

int Children::first_at_or_after(int byte) const {
    if (!rep_ || byte > 255) return kEnd;
    switch (kind_) {
        case 0:
        case 1: {
            const uint8_t* keys = kind_ == 0 ? static_cast<const Rep4*>(rep_)->keys
                                             : static_cast<const Rep16*>(rep_)->keys;
            for (uint16_t i = 0; i < count_; ++i)
                if (keys[i] >= byte) return i;
            return kEnd;
        }
        case 2: {
            auto* r = static_cast<const Rep48*>(rep_);
            for (int b = std::max(byte, 0); b < 256; ++b)
                if (r->idx[b]) return b;
            return kEnd;
        }
        default: {
            auto* r = static_cast<const Rep256*>(rep_);
            for (int b = std::max(byte, 0); b < 256; ++b)
                if (!r->kids[b].is_null()) return b;
            return kEnd;
        }
    }
}

int Children::next(int cursor) const {
    if (cursor == kEnd) return kEnd;
    if (kind_ <= 1) return cursor + 1 < count_ ? cursor + 1 : kEnd;
    return first_at_or_after(cursor + 1);
}

uint8_t Children::byte_at(int cursor) const {
    if (kind_ == 0) return static_cast<const Rep4*>(rep_)->keys[cursor];
    if (kind_ == 1) return static_cast<const Rep16*>(rep_)->keys[cursor];
    return uint8_t(cursor);
}

TrieRef Children::ref_at(int cursor) const {
    switch (kind_) {
        case 0: return static_cast<const Rep4*>(rep_)->kids[cursor];
        case 1: return static_cast<const Rep16*>(rep_)->kids[cursor];
        case 2: {
            auto* r = static_cast<const Rep48*>(rep_);
            return r->kids[r->idx[cursor] - 1];
        }
        default: return static_cast<const Rep256*>(rep_)->kids[cursor];
    }
}

size_t Children::heap_bytes() const { return rep_ ? kRepBytes[kind_] : 0; }

// ----------------------------------------------------------------- Subtrie

namespace {

void destroy_subtree(TrieRef ref) {
    if (ref.is_null()) return;
    if (ref.is_leaf()) {
        KvEntry::destroy(ref.as_leaf());
        return;
    }
    TrieNode* node = ref.as_node();
    if (node->entry) KvEntry::destroy(node->entry);
    for (int c = node->children.first_at_or_after(0); c != Children::kEnd;
         c = node->children.next(c))
        destroy_subtree(node->children.ref_at(c));
    delete node;
}

void clear_node(TrieNode& node) {
    if (node.entry) KvEntry::destroy(node.entry);
    for (int c = node.children.first_at_or_after(0); c != Children::kEnd;
         c = node.children.next(c))
        destroy_subtree(node.children.ref_at(c));
    node.entry = nullptr;
    node.prefix.clear();
    node.children = Children();
}

// Builds the subtree for a sorted entry range; `depth` is the key offset
// the range agrees on so far.
TrieRef build_range(std::span<KvEntry* const> range, size_t depth) {
    if (range.size() == 1) return TrieRef::leaf(range.front());
    std::string_view first = range.front()->key();
    std::string_view last = range.back()->key();
    size_t cpl = metrics::common_prefix_len(first, last);

    auto* node = new TrieNode;
    node->prefix = std::string(first.substr(depth, cpl - depth));
    size_t i = 0;
    if (first.size() == cpl) {
        node->entry = range.front();
        i = 1;
    }
    while (i < range.size()) {
        uint8_t byte = uint8_t(range[i]->key()[cpl]);
        size_t j = i + 1;
        while (j < range.size() && uint8_t(range[j]->key()[cpl]) == byte) ++j;
        node->children.insert(byte, build_range(range.subspan(i, j - i), cpl + 1));
        i = j;
    }
    return TrieRef::node(node);
}

void build_into_root(TrieNode& root, std::span<KvEntry* const> entries) {
    if (entries.empty()) return;
    if (entries.size() == 1) {
        root.prefix = std::string(entries.front()->key());
        root.entry = entries.front();
        return;
    }
    TrieRef built = build_range(entries, 0);
    TrieNode* n = built.as_node();
    root = std::move(*n);
    delete n;
}

void collect_subtree(TrieRef ref, std::vector<KvEntry*>& out) {
    if (ref.is_null()) return;
    if (ref.is_leaf()) {
        out.push_back(ref.as_leaf());
        return;
    }
    const TrieNode* node = ref.as_node();
    if (node->entry) out.push_back(node->entry);
    for (int c = node->children.first_at_or_after(0); c != Children::kEnd;
         c = node->children.next(c))
        collect_subtree(node->children.ref_at(c), out);
}

uint32_t subtree_height(TrieRef ref) {
    if (ref.is_null()) return 0;
    if (ref.is_leaf()) return 1;
    const TrieNode* node = ref.as_node();
    uint32_t deepest = 0;
    for (int c = node->children.first_at_or_after(0); c != Children::kEnd;
         c = node->children.next(c))
        deepest = std::max(deepest, subtree_height(node->children.ref_at(c)));
    return deepest + 1;
}

template <typename Alive>
uint64_t subtree_depth_sum(const TrieNode& node, uint64_t level, const Alive& alive) {
    uint64_t sum = (node.entry && alive(node.entry)) ? level : 0;
    for (int c = node.children.first_at_or_after(0); c != Children::kEnd;
         c = node.children.next(c)) {
        TrieRef ref = node.children.ref_at(c);
        if (ref.is_leaf())
            sum += alive(ref.as_leaf()) ? level + 1 : 0;
        else
            sum += subtree_depth_sum(*ref.as_node(), level + 1, alive);
    }
    return sum;
}

size_t subtree_bytes(const TrieNode& node) {
    size_t bytes = sizeof(TrieNode) + node.prefix.capacity() + node.children.heap_bytes();
    if (node.entry) bytes += node.entry->allocated_bytes();
    for (int c = node.children.first_at_or_after(0); c != Children::kEnd;
         c = node.children.next(c)) {
        TrieRef ref = node.children.ref_at(c);
        if (ref.is_leaf())
            bytes += ref.as_leaf()->allocated_bytes();
        else
            bytes += subtree_bytes(*ref.as_node());
    }
    return bytes;
}

}  // namespace

Subtrie::~Subtrie() { clear_node(root_); }

Subtrie::Subtrie(Subtrie&& other) noexcept
    : root_(std::move(other.root_)),
      live_(other.live_),
      rebuilds_(other.rebuilds_),
      delete_ratio_limit_(other.delete_ratio_limit_),
      dlist_(std::move(other.dlist_)) {
    other.root_ = TrieNode();
    other.live_ = 0;
    other.dlist_.clear();
}

Subtrie& Subtrie::operator=(Subtrie&& other) noexcept {
    if (this != &other) {
        clear_node(root_);
        root_ = std::move(other.root_);
        live_ = other.live_;
        rebuilds_ = other.rebuilds_;
        delete_ratio_limit_ = other.delete_ratio_limit_;
        dlist_ = std::move(other.dlist_);
        other.root_ = TrieNode();
        other.live_ = 0;
        other.dlist_.clear();
    }
    return *this;
}

Subtrie* Subtrie::make_from_sorted(std::span<KvEntry* const> entries,
                                   double delete_ratio_limit) {
    auto* trie = new Subtrie(delete_ratio_limit);
    build_into_root(trie->root_, entries);
    trie->live_ = entries.size();
    return trie;
}

bool Subtrie::alive(const KvEntry* e) const {
    return dlist_.empty() || !dlist_.contains(e->key());
}

KvEntry* Subtrie::find_mutable(std::string_view key) {
    if (live_ == 0 && dlist_.empty()) return nullptr;
    TrieNode* node = &root_;
    size_t depth = 0;
    while (true) {
        std::string_view rest = key.substr(depth);
        std::string_view p = node->prefix;
        if (rest.size() < p.size() || rest.substr(0, p.size()) != p) return nullptr;
        depth += p.size();
        if (depth == key.size()) return node->entry;
        TrieRef* child = node->children.find(uint8_t(key[depth]));
        if (!child) return nullptr;
        if (child->is_leaf()) {
            KvEntry* e = child->as_leaf();
            return e->key() == key ? e : nullptr;
        }
        node = child->as_node();
        ++depth;
    }
}

const KvEntry* Subtrie::find(std::string_view key) const {
    const KvEntry* e = const_cast<Subtrie*>(this)->find_mutable(key);
    return (e && alive(e)) ? e : nullptr;
}

void Subtrie::insert_placed(KvEntry* owned) {
    std::string_view key = owned->key();
    TrieNode* node = &root_;
    size_t depth = 0;
    if (live_ == 0 && dlist_.empty() && node->children.size() == 0 && !node->entry) {
        node->prefix = std::string(key);
        node->entry = owned;
        return;
    }
    while (true) {
        std::string_view rest = key.substr(depth);
        std::string_view p = node->prefix;
        size_t m = metrics::common_prefix_len(rest, p);
        if (m < p.size()) {
            // Split the compressed path at the divergence point.
            auto* moved = new TrieNode;
            moved->prefix = std::string(p.substr(m + 1));
            moved->entry = node->entry;
            moved->children = std::move(node->children);
            uint8_t branch = uint8_t(p[m]);
            node->prefix.resize(m);
            node->entry = nullptr;
            node->children = Children();
            node->children.insert(branch, TrieRef::node(moved));
            if (rest.size() == m)
                node->entry = owned;
            else
                node->children.insert(uint8_t(rest[m]), TrieRef::leaf(owned));
            return;
        }
        depth += m;
        if (depth == key.size()) {
            node->entry = owned;  // caller guarantees the slot is free
            return;
        }
        TrieRef* child = node->children.find(uint8_t(key[depth]));
        if (!child) {
            node->children.insert(uint8_t(key[depth]), TrieRef::leaf(owned));
            return;
        }
        if (child->is_leaf()) {
            KvEntry* other = child->as_leaf();
            std::string_view ok = other->key();
            size_t m2 = metrics::common_prefix_len(key.substr(depth + 1),
                                                   ok.substr(depth + 1));
            auto* n = new TrieNode;
            n->prefix = std::string(key.substr(depth + 1, m2));
            size_t split = depth + 1 + m2;
            if (ok.size() == split)
                n->entry = other;
            else
                n->children.insert(uint8_t(ok[split]), TrieRef::leaf(other));
            if (key.size() == split)
                n->entry = owned;
            else
                n->children.insert(uint8_t(key[split]), TrieRef::leaf(owned));
            *child = TrieRef::node(n);
            return;
        }
        node = child->as_node();
        ++depth;
    }
}

Subtrie::InsertStatus Subtrie::insert(std::string_view key, uint64_t value) {
    KvEntry* existing = find_mutable(key);
    if (existing) {
        if (alive(existing)) return InsertStatus::Duplicate;
        dlist_.erase(dlist_.find(key));  // resurrect the masked entry
        existing->set_value(value);
        ++live_;
        return InsertStatus::Ok;
    }
    insert_placed(KvEntry::make(key, value));
    ++live_;
    return InsertStatus::Ok;
}

bool Subtrie::erase(std::string_view key) {
    KvEntry* existing = find_mutable(key);
    if (!existing || !alive(existing)) return false;
    dlist_.insert(std::string(key));
    --live_;
    if (double(dlist_.size()) > delete_ratio_limit_ * double(live_)) rebuild();
    return true;
}

bool Subtrie::update(std::string_view key, uint64_t value) {
    KvEntry* existing = find_mutable(key);
    if (!existing || !alive(existing)) return false;
    existing->set_value(value);
    return true;
}

void Subtrie::rebuild() {
    std::vector<KvEntry*> live = take_live_entries();
    build_into_root(root_, live);
    live_ = live.size();
    ++rebuilds_;
}

std::vector<KvEntry*> Subtrie::take_live_entries() {
    std::vector<KvEntry*> all;
    all.reserve(live_ + dlist_.size());
    if (root_.entry) all.push_back(root_.entry);
    for (int c = root_.children.first_at_or_after(0); c != Children::kEnd;
         c = root_.children.next(c))
        collect_subtree(root_.children.ref_at(c), all);
    std::vector<KvEntry*> live;
    live.reserve(all.size());
    for (KvEntry* e : all) {
        if (alive(e))
            live.push_back(e);
        else
            KvEntry::destroy(e);
    }
    // Drop the node structure without touching the entries we handed out.
    root_.entry = nullptr;
    for (int c = root_.children.first_at_or_after(0); c != Children::kEnd;
         c = root_.children.next(c)) {
        TrieRef ref = root_.children.ref_at(c);
        if (!ref.is_leaf()) {
            std::vector<const TrieNode*> pending{ref.as_node()};
            while (!pending.empty()) {
                const TrieNode* n = pending.back();
                pending.pop_back();
                for (int cc = n->children.first_at_or_after(0); cc != Children::kEnd;
                     cc = n->children.next(cc)) {
                    TrieRef r = n->children.ref_at(cc);
                    if (!r.is_leaf()) pending.push_back(r.as_node());
                }
                delete n;
            }
        }
    }
    root_.children = Children();
    root_.prefix.clear();
    dlist_.clear();
    live_ = 0;
    return live;
}

uint32_t Subtrie::height() const {
    if (live_ == 0 && dlist_.empty() && !root_.entry && root_.children.size() == 0)
        return 0;
    uint32_t deepest = 0;
    for (int c = root_.children.first_at_or_after(0); c != Children::kEnd;
         c = root_.children.next(c))
        deepest = std::max(deepest, subtree_height(root_.children.ref_at(c)));
    return deepest + 1;
}

uint64_t Subtrie::total_key_depth() const {
    return subtree_depth_sum(root_, 1, [this](const KvEntry* e) { return alive(e); });
}

size_t Subtrie::heap_bytes() const {
    size_t bytes = sizeof(Subtrie) + subtree_bytes(root_) - sizeof(TrieNode);
    for (const auto& key : dlist_) bytes += key.capacity() + 32;
    return bytes;
}

Subtrie::Iterator Subtrie::scan(std::string_view from) const {
    Iterator it;
    it.trie_ = this;
    const TrieNode* node = &root_;
    if (live_ == 0 && dlist_.empty() && !root_.entry && root_.children.size() == 0)
        return it;
    std::string_view rest = from;
    while (true) {
        std::string_view p = node->prefix;
        size_t m = metrics::common_prefix_len(rest, p);
        if (m == rest.size()) {
            // Seek key exhausted inside this node: everything here
            // qualifies.
            it.stack_.push_back({node, true, node->children.first_at_or_after(0)});
            return it;
        }
        if (m < p.size()) {
            if (uint8_t(rest[m]) < uint8_t(p[m]))
                it.stack_.push_back({node, true, node->children.first_at_or_after(0)});
            return it;
        }
        uint8_t b = uint8_t(rest[m]);
        int cursor = node->children.first_at_or_after(b);
        Iterator::Frame frame{node, false, cursor};
        if (cursor == Children::kEnd || node->children.byte_at(cursor) != b) {
            it.stack_.push_back(frame);
            return it;
        }
        TrieRef ref = node->children.ref_at(cursor);
        frame.cursor = node->children.next(cursor);
        it.stack_.push_back(frame);
        if (ref.is_leaf()) {
            const KvEntry* e = ref.as_leaf();
            if (e->key() >= from) it.pending_ = e;
            return it;
        }
        node = ref.as_node();
        rest = rest.substr(m + 1);
    }
}

const KvEntry* Subtrie::Iterator::next() {
    if (pending_) {
        const KvEntry* e = pending_;
        pending_ = nullptr;
        if (trie_->alive(e)) return e;
    }
    while (!stack_.empty()) {
        Frame& f = stack_.back();
        if (f.entry_pending) {
            f.entry_pending = false;
            if (f.node->entry && trie_->alive(f.node->entry)) return f.node->entry;
            continue;
        }
        if (f.cursor == Children::kEnd) {
            stack_.pop_back();
            continue;
        }
        TrieRef ref = f.node->children.ref_at(f.cursor);
        f.cursor = f.node->children.next(f.cursor);
        if (ref.is_leaf()) {
            if (trie_->alive(ref.as_leaf())) return ref.as_leaf();
            continue;
        }
        const TrieNode* child = ref.as_node();
        stack_.push_back({child, true, child->children.first_at_or_after(0)});
    }
    return nullptr;
}

}  // namespace lits
