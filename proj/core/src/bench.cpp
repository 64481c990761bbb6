#include "lits/bench.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <random>

#include <json.hpp>

#include "lits/subtrie.hpp"

namespace lits {

namespace {

using Clock = std::chrono::steady_clock;

class LitsAdapter final : public IndexAdapter {
  public:
    explicit LitsAdapter(IndexConfig cfg, std::string name)
        : cfg_(std::move(cfg)), name_(std::move(name)) {}

    void bulkload(std::vector<std::pair<std::string, uint64_t>> entries) override {
        index_ = Index::bulkload(std::move(entries), cfg_);
    }
    std::optional<uint64_t> find(std::string_view key) override {
        return index_.find(key);
    }
    bool insert(std::string_view key, uint64_t value) override {
        return index_.insert(key, value) == OpStatus::Ok;
    }
    bool erase(std::string_view key) override {
        return index_.erase(key) == OpStatus::Ok;
    }
    bool update(std::string_view key, uint64_t value) override {
        return index_.update(key, value) == OpStatus::Ok;
    }
    size_t scan_count(std::string_view from, size_t len) override {
        auto scanner = index_.scan(from);
        std::string_view key;
        uint64_t value;
        size_t seen = 0;
        while (seen < len && scanner.next(key, value)) ++seen;
        return seen;
    }
    void scan_collect(std::string_view from, size_t len,
                      std::vector<std::pair<std::string, uint64_t>>& out) override {
        out.clear();
        auto scanner = index_.scan(from);
        std::string_view key;
        uint64_t value;
        while (out.size() < len && scanner.next(key, value))
            out.emplace_back(std::string(key), value);
    }
    size_t size() const override { return index_.size(); }
    std::optional<IndexStats> stats() const override { return index_.stats(); }
    std::string kind_name() const override { return name_; }

    Index& index() { return index_; }

  private:
    IndexConfig cfg_;
    std::string name_;
    Index index_;
};

class TrieAdapter final : public IndexAdapter {
  public:
    void bulkload(std::vector<std::pair<std::string, uint64_t>> entries) override {
        std::sort(entries.begin(), entries.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<KvEntry*> owned;
        owned.reserve(entries.size());
        for (const auto& [key, value] : entries)
            owned.push_back(KvEntry::make(key, value));
        trie_.reset(Subtrie::make_from_sorted(owned));
    }
    std::optional<uint64_t> find(std::string_view key) override {
        const KvEntry* e = trie_->find(key);
        if (!e) return std::nullopt;
        return e->value();
    }
    bool insert(std::string_view key, uint64_t value) override {
        return trie_->insert(key, value) == Subtrie::InsertStatus::Ok;
    }
    bool erase(std::string_view key) override { return trie_->erase(key); }
    bool update(std::string_view key, uint64_t value) override {
        return trie_->update(key, value);
    }
    size_t scan_count(std::string_view from, size_t len) override {
        auto it = trie_->scan(from);
        size_t seen = 0;
        while (seen < len && it.next()) ++seen;
        return seen;
    }
    void scan_collect(std::string_view from, size_t len,
                      std::vector<std::pair<std::string, uint64_t>>& out) override {
        out.clear();
        auto it = trie_->scan(from);
        while (out.size() < len) {
            const KvEntry* e = it.next();
            if (!e) break;
            out.emplace_back(std::string(e->key()), e->value());
        }
    }
    size_t size() const override { return trie_ ? trie_->size() : 0; }
    std::string kind_name() const override { return "trie"; }

  private:
    std::unique_ptr<Subtrie> trie_ = std::make_unique<Subtrie>();
};

class OracleAdapter final : public IndexAdapter {
  public:
    void bulkload(std::vector<std::pair<std::string, uint64_t>> entries) override {
        map_.clear();
        for (auto& [key, value] : entries) map_.emplace(std::move(key), value);
    }
    std::optional<uint64_t> find(std::string_view key) override {
        auto it = map_.find(key);
        if (it == map_.end()) return std::nullopt;
        return it->second;
    }
    bool insert(std::string_view key, uint64_t value) override {
        return map_.emplace(std::string(key), value).second;
    }
    bool erase(std::string_view key) override {
        auto it = map_.find(key);
        if (it == map_.end()) return false;
        map_.erase(it);
        return true;
    }
    bool update(std::string_view key, uint64_t value) override {
        auto it = map_.find(key);
        if (it == map_.end()) return false;
        it->second = value;
        return true;
    }
    size_t scan_count(std::string_view from, size_t len) override {
        size_t seen = 0;
        for (auto it = map_.lower_bound(from); it != map_.end() && seen < len; ++it)
            ++seen;
        return seen;
    }
    void scan_collect(std::string_view from, size_t len,
                      std::vector<std::pair<std::string, uint64_t>>& out) override {
        out.clear();
        for (auto it = map_.lower_bound(from); it != map_.end() && out.size() < len; ++it)
            out.emplace_back(it->first, it->second);
    }
    size_t size() const override { return map_.size(); }
    std::string kind_name() const override { return "oracle"; }

  private:
    std::map<std::string, uint64_t, std::less<>> map_;
};

}  // namespace

AdapterKind adapter_kind_from_name(const std::string& name) {
    if (name == "lits") return AdapterKind::Lits;
    if (name == "lit") return AdapterKind::Lit;
    if (name == "trie") return AdapterKind::Trie;
    if (name == "oracle") return AdapterKind::Oracle;
    throw std::invalid_argument("unknown index kind: " + name);
}

std::unique_ptr<IndexAdapter> make_adapter(AdapterKind kind, IndexConfig cfg) {
    switch (kind) {
        case AdapterKind::Lits:
            return std::make_unique<LitsAdapter>(std::move(cfg), "lits");
        case AdapterKind::Lit:
            cfg.subtries_enabled = false;
            return std::make_unique<LitsAdapter>(std::move(cfg), "lit");
        case AdapterKind::Trie:
            return std::make_unique<TrieAdapter>();
        case AdapterKind::Oracle:
            return std::make_unique<OracleAdapter>();
    }
    throw std::invalid_argument("unknown adapter kind");
}

BenchReport run_bench(IndexAdapter& index, const Workload& w,
                      const BenchOptions& options) {
    BenchReport report;
    report.workload = workload_kind_name(w.spec.kind);
    report.dist = w.spec.dist.zipf
                      ? "zipf:" + std::to_string(w.spec.dist.theta)
                      : "uniform";
    report.index_kind = index.kind_name();
    report.seed = w.spec.seed;
    report.bulk_keys = w.bulk.size();
    report.op_count = w.ops.size();

    std::vector<std::pair<std::string, uint64_t>> bulk;
    bulk.reserve(w.bulk.size());
    for (uint32_t idx : w.bulk) bulk.emplace_back(w.keys[idx], w.values[idx]);

    auto t0 = Clock::now();
    index.bulkload(std::move(bulk));
    report.bulkload_seconds = std::chrono::duration<double>(Clock::now() - t0).count();

    std::map<std::string, uint64_t, std::less<>> shadow;
    std::mt19937_64 verify_rng(options.verify_seed);
    std::bernoulli_distribution sample_op(options.verify_fraction);
    if (options.verify)
        for (uint32_t idx : w.bulk) shadow.emplace(w.keys[idx], w.values[idx]);

    auto diverged = [&](const Op& op, const std::string& what) {
        throw VerifyError("verify: divergence on " + what + " key='" +
                          w.keys[op.key_idx] + "'");
    };

    std::vector<std::pair<std::string, uint64_t>> got, want;
    double latency_sums[kOpTypeCount] = {};
    auto run_start = Clock::now();
    for (const Op& op : w.ops) {
        const std::string& key = w.keys[op.key_idx];
        bool check = options.verify && sample_op(verify_rng);
        auto op_start = Clock::now();
        switch (op.type) {
            case OpType::Read: {
                auto value = index.find(key);
                if (options.verify) {
                    auto it = shadow.find(key);
                    std::optional<uint64_t> expect;
                    if (it != shadow.end()) expect = it->second;
                    if (check && value != expect) diverged(op, "read");
                }
                break;
            }
            case OpType::Insert: {
                bool ok = index.insert(key, op.value);
                if (options.verify) {
                    bool expect = shadow.emplace(key, op.value).second;
                    if (check && ok != expect) diverged(op, "insert");
                }
                break;
            }
            case OpType::Update: {
                // Insert-on-miss: new keys become inserts.
                bool ok = index.update(key, op.value);
                if (!ok) ok = index.insert(key, op.value);
                if (options.verify) {
                    shadow[key] = op.value;
                    if (check && !ok) diverged(op, "update");
                }
                break;
            }
            case OpType::Delete: {
                bool ok = index.erase(key);
                if (options.verify) {
                    bool expect = shadow.erase(key) > 0;
                    if (check && ok != expect) diverged(op, "delete");
                }
                break;
            }
            case OpType::Scan: {
                if (check) {
                    index.scan_collect(key, op.scan_len, got);
                    want.clear();
                    for (auto it = shadow.lower_bound(key);
                         it != shadow.end() && want.size() < op.scan_len; ++it)
                        want.emplace_back(it->first, it->second);
                    if (got != want) diverged(op, "scan");
                } else {
                    index.scan_count(key, op.scan_len);
                }
                break;
            }
            case OpType::ReadModifyWrite: {
                auto value = index.find(key);
                uint64_t next = value.value_or(0) + 1;
                bool ok = value.has_value() && index.update(key, next);
                if (options.verify) {
                    auto it = shadow.find(key);
                    bool expect = it != shadow.end();
                    if (expect) it->second = it->second + 1;
                    if (check && ok != expect) diverged(op, "rmw");
                }
                break;
            }
        }
        auto op_ns =
            std::chrono::duration<double, std::nano>(Clock::now() - op_start).count();
        size_t t = size_t(op.type);
        latency_sums[t] += op_ns;
        report.op_counts[t]++;
        if (check) report.verified_ops++;
    }
    report.elapsed_seconds =
        std::chrono::duration<double>(Clock::now() - run_start).count();
    report.throughput_mops =
        report.op_count > 0 && report.elapsed_seconds > 0
            ? double(report.op_count) / report.elapsed_seconds / 1e6
            : 0.0;
    for (size_t t = 0; t < kOpTypeCount; ++t)
        if (report.op_counts[t] > 0)
            report.mean_latency_ns[t] = latency_sums[t] / double(report.op_counts[t]);
    report.final_key_count = index.size();
    report.index_stats = index.stats();
    if (options.verify && index.size() != shadow.size())
        throw VerifyError("verify: final size mismatch: index " +
                          std::to_string(index.size()) + " vs oracle " +
                          std::to_string(shadow.size()));
    return report;
}

double sample_read_latency_ns(IndexAdapter& index, const std::vector<std::string>& keys,
                              size_t probes, uint64_t seed) {
    if (keys.empty() || probes == 0) return 0;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<size_t> pick(0, keys.size() - 1);
    uint64_t sink = 0;
    auto t0 = Clock::now();
    for (size_t i = 0; i < probes; ++i) sink += index.find(keys[pick(rng)]).value_or(0);
    double ns = std::chrono::duration<double, std::nano>(Clock::now() - t0).count();
    // Keep the loop honest under optimization.
    if (sink == 0xDEAD) ns += 0;
    return ns / double(probes);
}

namespace {
const char* op_type_name(size_t t) {
    switch (OpType(t)) {
        case OpType::Read: return "read";
        case OpType::Insert: return "insert";
        case OpType::Update: return "update";
        case OpType::Delete: return "delete";
        case OpType::Scan: return "scan";
        case OpType::ReadModifyWrite: return "rmw";
    }
    return "?";
}
}  // namespace

std::string BenchReport::to_json() const {
    nlohmann::ordered_json j;
    j["version"] = version;
    j["workload"] = workload;
    j["dist"] = dist;
    j["index"] = index_kind;
    j["seed"] = seed;
    j["bulk_keys"] = bulk_keys;
    j["op_count"] = op_count;
    nlohmann::ordered_json counts, lats;
    for (size_t t = 0; t < kOpTypeCount; ++t) {
        counts[op_type_name(t)] = op_counts[t];
        lats[op_type_name(t)] = mean_latency_ns[t];
    }
    j["op_counts"] = counts;
    j["mean_latency_ns"] = lats;
    j["bulkload_seconds"] = bulkload_seconds;
    j["elapsed_seconds"] = elapsed_seconds;
    j["throughput_mops"] = throughput_mops;
    j["final_key_count"] = final_key_count;
    j["verified_ops"] = verified_ops;
    if (index_stats) {
        const IndexStats& s = *index_stats;
        nlohmann::ordered_json st;
        st["key_count"] = s.key_count;
        st["model_nodes"] = s.model_nodes;
        st["compact_nodes"] = s.compact_nodes;
        st["single_entries"] = s.single_entries;
        st["subtries"] = s.subtries;
        st["subtrie_keys"] = s.subtrie_keys;
        st["avg_base_height"] = s.avg_base_height;
        st["avg_subtrie_height"] = s.avg_subtrie_height;
        st["max_base_height"] = s.max_base_height;
        st["bytes_used"] = s.bytes_used;
        st["resize_count"] = s.resize_count;
        st["resize_touched_entries"] = s.resize_touched_entries;
        st["forced_subtrie_builds"] = s.forced_subtrie_builds;
        st["overweight_subtrie_builds"] = s.overweight_subtrie_builds;
        j["index_stats"] = st;
    }
    return j.dump(2);
}

}  // namespace lits
