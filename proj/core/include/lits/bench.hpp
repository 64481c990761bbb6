#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lits/index.hpp"
#include "lits/workload.hpp"

namespace lits {

// Uniform surface over the index variants the harness can drive.
class IndexAdapter {
  public:
    virtual ~IndexAdapter() = default;
    virtual void bulkload(std::vector<std::pair<std::string, uint64_t>> entries) = 0;
    virtual std::optional<uint64_t> find(std::string_view key) = 0;
    virtual bool insert(std::string_view key, uint64_t value) = 0;
    virtual bool erase(std::string_view key) = 0;
    virtual bool update(std::string_view key, uint64_t value) = 0;
    // Walks up to `len` entries starting at the first key >= from.
    virtual size_t scan_count(std::string_view from, size_t len) = 0;
    virtual void scan_collect(std::string_view from, size_t len,
                              std::vector<std::pair<std::string, uint64_t>>& out) = 0;
    virtual size_t size() const = 0;
    virtual std::optional<IndexStats> stats() const { return std::nullopt; }
    virtual std::string kind_name() const = 0;
};

enum class AdapterKind : uint8_t { Lits, Lit, Trie, Oracle };
AdapterKind adapter_kind_from_name(const std::string& name);

std::unique_ptr<IndexAdapter> make_adapter(AdapterKind kind, IndexConfig cfg = {});

struct BenchOptions {
    bool verify = false;           // shadow-oracle comparison on a sample of ops
    double verify_fraction = 0.01;
    uint64_t verify_seed = 7;
};

struct BenchReport {
    int version = 1;
    std::string workload;
    std::string dist;
    std::string index_kind;
    uint64_t seed = 0;
    uint64_t bulk_keys = 0;
    uint64_t op_count = 0;
    uint64_t op_counts[kOpTypeCount] = {};
    double mean_latency_ns[kOpTypeCount] = {};
    double bulkload_seconds = 0;
    double elapsed_seconds = 0;
    double throughput_mops = 0;
    uint64_t final_key_count = 0;
    uint64_t verified_ops = 0;
    std::optional<IndexStats> index_stats;

    std::string to_json() const;  // stable field order, versioned
};

class VerifyError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Bulkloads per the workload, replays the op stream wall-clocked, and
// optionally cross-checks a sampled fraction of operations against a
// reference ordered map (mutations are mirrored so the shadows stay in
// sync). Divergence raises VerifyError naming the op.
BenchReport run_bench(IndexAdapter& index, const Workload& workload,
                      const BenchOptions& options = {});

// Mean per-op latency of random hits on the given keys; the probe used by
// the staleness rebuild policy.
double sample_read_latency_ns(IndexAdapter& index,
                              const std::vector<std::string>& keys, size_t probes,
                              uint64_t seed);

}  // namespace lits
