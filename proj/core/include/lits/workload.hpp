#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "lits/corpus.hpp"

namespace lits {

enum class WorkloadKind : uint8_t {
    A,           // 50% read, 50% update
    B,           // 95% read, 5% update
    C,           // 100% read
    D,           // 95% latest-read, 5% insert
    E,           // 95% short scan, 5% insert
    F,           // 50% read, 50% read-modify-write
    InsertOnly,  // bulkload half, insert the rest
    DeleteOnly,  // bulkload all, delete a random half
    ReadOnly,    // alias of C
};

WorkloadKind workload_kind_from_name(const std::string& name);
std::string workload_kind_name(WorkloadKind kind);

struct KeyDist {
    bool zipf = false;
    double theta = 1.0;
};

struct WorkloadSpec {
    WorkloadKind kind = WorkloadKind::C;
    uint64_t op_count = 20000;  // ignored by insert-only / delete-only
    KeyDist dist;
    double bulkload_fraction = -1.0;  // < 0: use the kind's default
    uint32_t scan_len_min = 1;
    uint32_t scan_len_max = 100;
    uint64_t seed = 1;
};

enum class OpType : uint8_t { Read, Insert, Update, Delete, Scan, ReadModifyWrite };
inline constexpr size_t kOpTypeCount = 6;

struct Op {
    OpType type;
    uint32_t key_idx;   // into Workload::keys
    uint32_t scan_len;  // Scan only
    uint64_t value;     // Insert/Update payload
};

struct Workload {
    WorkloadSpec spec;
    std::vector<std::string> keys;   // full corpus key table
    std::vector<uint64_t> values;    // bulkload values, aligned with keys
    std::vector<uint32_t> bulk;      // key indices loaded before timing
    std::vector<Op> ops;
};

// Deterministic under (spec.seed, corpus): the same stream every run.
// Zipf-distributed key choice applies to read-style workloads (A, B, C, F);
// workloads that insert or delete reject it.
Workload gen_workload(const WorkloadSpec& spec, const Corpus& corpus);

// Rank sampler with P(rank) proportional to 1/rank^theta, ranks 1..n.
class ZipfSampler {
  public:
    ZipfSampler(size_t n, double theta);
    size_t draw(std::mt19937_64& rng) const;  // zero-based rank
    size_t size() const { return cdf_.size(); }

  private:
    std::vector<double> cdf_;
};

}  // namespace lits
