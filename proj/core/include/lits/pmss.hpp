#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lits::pmss {

enum class StructureKind : uint8_t { LearnedNode = 0, Subtrie = 1 };

// Calibrated read/write latency grids for both structure kinds, indexed by
// (gpkl, log2 n). Lookups clamp to the grid and interpolate bilinearly.
// Latencies are quantized to 0.1 ns so the text serialization round-trips
// exactly.
class LatencyTables {
  public:
    LatencyTables();  // default grids: gpkl 3,5,...,21 and n 2^4..2^25
    LatencyTables(std::vector<double> gpkl_grid, std::vector<uint32_t> nlog2_grid);

    // Hand-tuned fallback used when no calibration file is supplied: the
    // learned structure gains with data size, the trie gains with hardness.
    static LatencyTables builtin_default();

    const std::vector<double>& gpkl_grid() const { return gpkl_grid_; }
    const std::vector<uint32_t>& nlog2_grid() const { return nlog2_grid_; }

    void set_cell(StructureKind kind, size_t gpkl_idx, size_t n_idx, double read_ns,
                  double write_ns);
    double read_cell(StructureKind kind, size_t gpkl_idx, size_t n_idx) const;
    double write_cell(StructureKind kind, size_t gpkl_idx, size_t n_idx) const;

    double read_lat(StructureKind kind, double gpkl, double n) const;
    double write_lat(StructureKind kind, double gpkl, double n) const;

    // Workload-mix estimate: f_read * readlat + f_write * writelat.
    double estimate(StructureKind kind, double gpkl, double n, double f_read,
                    double f_write) const;

    // Lowest estimated latency wins; ties go to the learned structure.
    StructureKind select(double gpkl, double n, double f_read, double f_write) const;

    void save(std::ostream& out) const;
    void save_file(const std::string& path) const;
    static LatencyTables load(std::istream& in);
    static LatencyTables load_file(const std::string& path);

    bool operator==(const LatencyTables& other) const = default;

  private:
    double interpolate(const std::vector<double>& grid, double gpkl, double n) const;
    std::vector<double> gpkl_grid_;
    std::vector<uint32_t> nlog2_grid_;
    // One row-major [gpkl][n] grid per (kind, read/write).
    std::vector<double> read_[2];
    std::vector<double> write_[2];
};

// Convenience wrapper: measures the key set's hardness and size, then picks
// the structure with the lower estimated latency.
StructureKind select_structure(const LatencyTables& tables,
                               std::span<const std::string_view> sorted_keys,
                               double f_read, double f_write);

// ------------------------------------------------------- dataset generator

struct GpklGenConfig {
    double target_gpkl = 5.0;  // l
    size_t n = 1 << 14;
    size_t dict_size = 10000;
    size_t dict_len_min = 2;
    size_t dict_len_max = 6;
    size_t group = 32;  // k: adjacent strings mutated together
    size_t base_len_min = 8;
    size_t base_len_max = 16;
    uint32_t alphabet = 26;
    uint64_t seed = 1;
    size_t max_windows = 2'000'000;  // mutation budget before giving up
};

class GpklTargetError : public std::runtime_error {
  public:
    GpklTargetError(double achieved, double target)
        : std::runtime_error("gpkl target " + std::to_string(target) +
                             " unreachable, achieved " + std::to_string(achieved)),
          achieved_gpkl(achieved) {}
    double achieved_gpkl;
};

// Grows a random string set until its gpkl reaches the target: repeatedly
// splices dictionary strings into groups of adjacent keys inside their
// shared prefix, re-sorting between passes. Output is sorted, distinct, and
// exactly n strings.
std::vector<std::string> gen_gpkl_dataset(const GpklGenConfig& cfg);

}  // namespace lits::pmss
