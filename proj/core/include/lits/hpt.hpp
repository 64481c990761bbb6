#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lits {

// Character-set size the index accepts: plain ASCII, one table column per
// byte value. Bytes >= kAlphabetSize are rejected at the API boundary.
inline constexpr uint32_t kAlphabetSize = 128;

struct HptConfig {
    uint32_t num_rows = 1024;
    uint32_t num_cols = kAlphabetSize;
    double sample_fraction = 0.01;   // fraction of keys used for training
    double prob_epsilon = 1e-12;     // early exit once the running prob underflows this

    void validate() const;  // throws std::invalid_argument
};

struct HptCell {
    double cdf = 0.0;   // cumulative probability of characters below this column
    double prob = 0.0;  // conditional probability of this character
};
static_assert(sizeof(HptCell) == 16);

// Incremental prefix hash. One row per prefix; the empty prefix is pinned
// to row 0 so the first character of every key shares a well-populated row.
class PrefixHash {
  public:
    void step(uint8_t byte) {
        hash_ ^= byte;
        hash_ *= 0x100000001b3ull;
        ++len_;
    }
    uint32_t row(uint32_t num_rows) const {
        return len_ == 0 ? 0u : static_cast<uint32_t>(hash_ % num_rows);
    }
    uint64_t length() const { return len_; }

  private:
    uint64_t hash_ = 0xcbf29ce484222325ull;  // FNV-1a offset basis
    uint64_t len_ = 0;
};

// Global CDF model for string keys: a fixed-size table of (cdf, prob) cells
// indexed by prefix-hash row and next-character column. Immutable once
// built; concurrent reads need no synchronization.
class Hpt {
  public:
    Hpt() : Hpt(HptConfig{}) {}
    explicit Hpt(HptConfig cfg);

    // Trains the table on a key sample: one frequency pass over every
    // (prefix, next-char) pair, then per-row normalization into cdf/prob.
    // Rows that saw no observations stay all-zero.
    static Hpt build(std::span<const std::string> sample, const HptConfig& cfg = {});
    static Hpt build(std::span<const std::string_view> sample, const HptConfig& cfg = {});

    // Model prediction: walks the key byte by byte accumulating
    //   cdf += prob * cell.cdf;  prob *= cell.prob
    // starting from (0, 1) at the empty-prefix row. Returns a value in
    // [0, 1]; the empty string maps to 0. Cost is O(len(s)).
    double get_cdf(std::string_view s) const;

    const HptCell& cell(uint32_t row, uint32_t col) const {
        return cells_[size_t(row) * cfg_.num_cols + col];
    }
    const HptConfig& config() const { return cfg_; }
    size_t table_bytes() const { return cells_.size() * sizeof(HptCell); }

    // Debug dump: magic "HPT1", little-endian u32 rows/cols, then row-major
    // f64 (cdf, prob) pairs.
    void save(std::ostream& out) const;
    void save_file(const std::string& path) const;
    static Hpt load(std::istream& in);
    static Hpt load_file(const std::string& path);

    bool operator==(const Hpt& other) const;

  private:
    HptConfig cfg_;
    std::vector<HptCell> cells_;
};

// Absolute-error bound for a table cell: a row holding n_p occurrences of
// the prefix of interest plus d occurrences of colliding prefixes is off by
// at most 1 / (n_p/d + 1). d == 0 means the row is exact.
double hpt_error_bound(uint64_t n_p, uint64_t d);

// Staleness watermark for the rebuild policy: true once the observed mean
// latency has degraded so that baseline/observed throughput fell to the
// watermark (default 0.5) or below.
bool should_rebuild(double observed_latency_ns, double baseline_latency_ns,
                    double watermark = 0.5);

// Deterministic reservoir sample of ceil(fraction * n) keys.
std::vector<std::string_view> sample_keys(std::span<const std::string_view> keys,
                                          double fraction, uint64_t seed);

void validate_key(std::string_view key);  // length 1..255, bytes < kAlphabetSize

}  // namespace lits
