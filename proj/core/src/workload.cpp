#include "lits/workload.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace lits {

WorkloadKind workload_kind_from_name(const std::string& name) {
    std::string n;
    for (char c : name) n.push_back(char(std::tolower(uint8_t(c))));
    if (n == "a") return WorkloadKind::A;
    if (n == "b") return WorkloadKind::B;
    if (n == "c") return WorkloadKind::C;
    if (n == "d") return WorkloadKind::D;
    if (n == "e") return WorkloadKind::E;
    if (n == "f") return WorkloadKind::F;
    if (n == "insert-only" || n == "insert") return WorkloadKind::InsertOnly;
    if (n == "delete-only" || n == "delete") return WorkloadKind::DeleteOnly;
    if (n == "read-only" || n == "read") return WorkloadKind::ReadOnly;
    throw std::invalid_argument("unknown workload: " + name);
}

std::string workload_kind_name(WorkloadKind kind) {
    switch (kind) {
        case WorkloadKind::A: return "a";
        case WorkloadKind::B: return "b";
        case WorkloadKind::C: return "c";
        case WorkloadKind::D: return "d";
        case WorkloadKind::E: return "e";
        case WorkloadKind::F: return "f";
        case WorkloadKind::InsertOnly: return "insert-only";
        case WorkloadKind::DeleteOnly: return "delete-only";
        case WorkloadKind::ReadOnly: return "read-only";
    }
    return "?";
}

ZipfSampler::ZipfSampler(size_t n, double theta) {
    if (n == 0) throw std::invalid_argument("zipf: empty domain");
    cdf_.resize(n);
    double sum = 0;
    for (size_t r = 1; r <= n; ++r) {
        sum += 1.0 / std::pow(double(r), theta);
        cdf_[r - 1] = sum;
    }
    for (double& v : cdf_) v /= sum;
}

size_t ZipfSampler::draw(std::mt19937_64& rng) const {
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    return size_t(std::lower_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
}

namespace {

double default_bulk_fraction(WorkloadKind kind) {
    switch (kind) {
        case WorkloadKind::C:
        case WorkloadKind::ReadOnly:
        case WorkloadKind::DeleteOnly:
            return 1.0;
        case WorkloadKind::InsertOnly:
            return 0.5;
        default:
            return 0.8;
    }
}

bool has_structural_writes(WorkloadKind kind) {
    switch (kind) {
        case WorkloadKind::D:
        case WorkloadKind::E:
        case WorkloadKind::InsertOnly:
        case WorkloadKind::DeleteOnly:
            return true;
        default:
            return false;
    }
}

}  // namespace

Workload gen_workload(const WorkloadSpec& spec, const Corpus& corpus) {
    if (corpus.keys.empty()) throw std::invalid_argument("workload: empty corpus");
    if (corpus.keys.size() != corpus.values.size())
        throw std::invalid_argument("workload: corpus keys/values mismatch");
    if (corpus.keys.size() > 0xFFFFFFFFull)
        throw std::invalid_argument("workload: corpus too large for key indices");
    if (spec.dist.zipf && has_structural_writes(spec.kind))
        throw std::invalid_argument(
            "workload: zipf key choice applies to read/update workloads only");
    if (spec.scan_len_min < 1 || spec.scan_len_max < spec.scan_len_min)
        throw std::invalid_argument("workload: bad scan length range");

    Workload w;
    w.spec = spec;
    w.keys = corpus.keys;
    w.values = corpus.values;

    const size_t n = w.keys.size();
    std::mt19937_64 rng(spec.seed);

    std::vector<uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);

    double frac = spec.bulkload_fraction >= 0 ? spec.bulkload_fraction
                                              : default_bulk_fraction(spec.kind);
    size_t bulk_n = std::clamp<size_t>(size_t(std::ceil(frac * double(n))), 1, n);
    w.bulk.assign(perm.begin(), perm.begin() + bulk_n);
    std::vector<uint32_t> held(perm.begin() + bulk_n, perm.end());

    auto uniform_of = [&rng](const std::vector<uint32_t>& pool) {
        return pool[std::uniform_int_distribution<size_t>(0, pool.size() - 1)(rng)];
    };

    // Zipf ranks follow the shuffled bulk order, a fixed arbitrary
    // popularity assignment.
    std::optional<ZipfSampler> zipf;
    if (spec.dist.zipf) zipf.emplace(bulk_n, spec.dist.theta);
    auto pick_bulk = [&]() -> uint32_t {
        if (zipf) return w.bulk[zipf->draw(rng)];
        return uniform_of(w.bulk);
    };
    auto pick_any = [&]() -> uint32_t {
        if (zipf) {
            // Updates range over the whole corpus; reuse the zipf ranks for
            // the bulk portion and fall back to uniform for the rest.
            size_t r = zipf->draw(rng);
            return w.bulk[r];
        }
        return perm[std::uniform_int_distribution<size_t>(0, n - 1)(rng)];
    };
    auto scan_len = [&]() {
        return std::uniform_int_distribution<uint32_t>(spec.scan_len_min,
                                                       spec.scan_len_max)(rng);
    };

    switch (spec.kind) {
        case WorkloadKind::InsertOnly: {
            w.ops.reserve(held.size());
            for (uint32_t idx : held)
                w.ops.push_back({OpType::Insert, idx, 0, rng()});
            return w;
        }
        case WorkloadKind::DeleteOnly: {
            size_t m = n / 2;
            w.ops.reserve(m);
            for (size_t i = 0; i < m; ++i)
                w.ops.push_back({OpType::Delete, perm[i], 0, 0});
            return w;
        }
        default:
            break;
    }

    double read_frac = 0, update_frac = 0, insert_frac = 0, scan_frac = 0, rmw_frac = 0;
    bool latest_read = false;
    switch (spec.kind) {
        case WorkloadKind::A: read_frac = 0.5; update_frac = 0.5; break;
        case WorkloadKind::B: read_frac = 0.95; update_frac = 0.05; break;
        case WorkloadKind::C:
        case WorkloadKind::ReadOnly: read_frac = 1.0; break;
        case WorkloadKind::D: read_frac = 0.95; insert_frac = 0.05; latest_read = true; break;
        case WorkloadKind::E: scan_frac = 0.95; insert_frac = 0.05; break;
        case WorkloadKind::F: read_frac = 0.5; rmw_frac = 0.5; break;
        default: break;
    }
    (void)read_frac;

    // Recency pool for latest-read: bulk keys count as inserted in shuffled
    // order, stream inserts append.
    std::vector<uint32_t> recency;
    std::optional<ZipfSampler> recency_zipf;
    if (latest_read) {
        recency = w.bulk;
        recency_zipf.emplace(bulk_n + held.size(), 1.0);
    }
    size_t next_held = 0;

    w.ops.reserve(spec.op_count);
    for (uint64_t i = 0; i < spec.op_count; ++i) {
        double roll = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        if (roll < insert_frac && next_held < held.size()) {
            uint32_t idx = held[next_held++];
            w.ops.push_back({OpType::Insert, idx, 0, rng()});
            if (latest_read) recency.push_back(idx);
        } else if (roll < insert_frac + update_frac) {
            w.ops.push_back({OpType::Update, pick_any(), 0, rng()});
        } else if (roll < insert_frac + update_frac + scan_frac) {
            w.ops.push_back({OpType::Scan, pick_bulk(), scan_len(), 0});
        } else if (roll < insert_frac + update_frac + scan_frac + rmw_frac) {
            w.ops.push_back({OpType::ReadModifyWrite, pick_bulk(), 0, 0});
        } else if (latest_read) {
            size_t rank;
            do {
                rank = recency_zipf->draw(rng);
            } while (rank >= recency.size());
            w.ops.push_back({OpType::Read, recency[recency.size() - 1 - rank], 0, 0});
        } else {
            w.ops.push_back({OpType::Read, pick_bulk(), 0, 0});
        }
    }
    return w;
}

}  // namespace lits
