#include "lits/hpt.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace lits {

void HptConfig::validate() const {
    if (num_rows < 1) throw std::invalid_argument("hpt: num_rows must be >= 1");
    if (num_cols < 1) throw std::invalid_argument("hpt: num_cols must be >= 1");
    if (!(sample_fraction > 0.0) || sample_fraction > 1.0)
        throw std::invalid_argument("hpt: sample_fraction must be in (0, 1]");
    if (!(prob_epsilon >= 0.0))
        throw std::invalid_argument("hpt: prob_epsilon must be >= 0");
}

void validate_key(std::string_view key) {
    if (key.empty()) throw std::invalid_argument("key must be nonempty");
    if (key.size() > 255) throw std::invalid_argument("key longer than 255 bytes");
    for (unsigned char c : key)
        if (c >= kAlphabetSize) throw std::domain_error("key contains non-ASCII byte");
}

Hpt::Hpt(HptConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    cells_.resize(size_t(cfg_.num_rows) * cfg_.num_cols);
}

namespace {
void check_byte(unsigned char c, uint32_t num_cols) {
    if (c >= num_cols) throw std::domain_error("hpt: byte outside character set");
}
}  // namespace

Hpt Hpt::build(std::span<const std::string> sample, const HptConfig& cfg) {
    std::vector<std::string_view> views(sample.begin(), sample.end());
    return build(std::span<const std::string_view>(views), cfg);
}

Hpt Hpt::build(std::span<const std::string_view> sample, const HptConfig& cfg) {
    cfg.validate();
    if (sample.empty()) throw std::invalid_argument("hpt: empty training sample");

    std::vector<uint64_t> counts(size_t(cfg.num_rows) * cfg.num_cols, 0);
    for (std::string_view s : sample) {
        PrefixHash h;
        for (unsigned char c : s) {
            check_byte(c, cfg.num_cols);
            counts[size_t(h.row(cfg.num_rows)) * cfg.num_cols + c]++;
            h.step(c);
        }
    }

    Hpt hpt(cfg);
    for (uint32_t r = 0; r < cfg.num_rows; ++r) {
        const uint64_t* row = counts.data() + size_t(r) * cfg.num_cols;
        uint64_t total = 0;
        for (uint32_t c = 0; c < cfg.num_cols; ++c) total += row[c];
        if (total == 0) continue;
        uint64_t below = 0;
        for (uint32_t c = 0; c < cfg.num_cols; ++c) {
            HptCell& cell = hpt.cells_[size_t(r) * cfg.num_cols + c];
            cell.cdf = double(below) / double(total);
            cell.prob = double(row[c]) / double(total);
            below += row[c];
        }
    }
    return hpt;
}

double Hpt::get_cdf(std::string_view s) const {
    double cdf = 0.0;
    double prob = 1.0;
    PrefixHash h;
    for (unsigned char c : s) {
        check_byte(c, cfg_.num_cols);
        const HptCell& cell = this->cell(h.row(cfg_.num_rows), c);
        cdf += prob * cell.cdf;
        prob *= cell.prob;
        if (prob < cfg_.prob_epsilon) break;
        h.step(c);
    }
    return cdf;
}

double hpt_error_bound(uint64_t n_p, uint64_t d) {
    if (n_p == 0) throw std::domain_error("hpt_error_bound: prefix count must be >= 1");
    if (d == 0) return 0.0;
    return 1.0 / (double(n_p) / double(d) + 1.0);
}

bool should_rebuild(double observed_latency_ns, double baseline_latency_ns,
                    double watermark) {
    if (!(baseline_latency_ns > 0.0))
        throw std::invalid_argument("should_rebuild: baseline must be positive");
    if (!(observed_latency_ns > 0.0)) return false;
    // Throughput ratio at or below the watermark triggers a rebuild, so a
    // 2x latency degradation fires at the default 0.5 mark.
    return baseline_latency_ns / observed_latency_ns <= watermark;
}

std::vector<std::string_view> sample_keys(std::span<const std::string_view> keys,
                                          double fraction, uint64_t seed) {
    if (keys.empty()) return {};
    size_t m = size_t(std::ceil(fraction * double(keys.size())));
    m = std::clamp<size_t>(m, 1, keys.size());
    std::vector<std::string_view> reservoir(keys.begin(), keys.begin() + m);
    std::mt19937_64 rng(seed);
    for (size_t i = m; i < keys.size(); ++i) {
        size_t j = std::uniform_int_distribution<size_t>(0, i)(rng);
        if (j < m) reservoir[j] = keys[i];
    }
    return reservoir;
}

namespace {
constexpr char kMagic[4] = {'H', 'P', 'T', '1'};

void write_u32(std::ostream& out, uint32_t v) {
    char buf[4];
    std::memcpy(buf, &v, 4);
    out.write(buf, 4);
}

uint32_t read_u32(std::istream& in) {
    char buf[4];
    in.read(buf, 4);
    uint32_t v;
    std::memcpy(&v, buf, 4);
    return v;
}
}  // namespace

void Hpt::save(std::ostream& out) const {
    out.write(kMagic, 4);
    write_u32(out, cfg_.num_rows);
    write_u32(out, cfg_.num_cols);
    out.write(reinterpret_cast<const char*>(cells_.data()),
              std::streamsize(cells_.size() * sizeof(HptCell)));
    if (!out) throw std::runtime_error("hpt: write failed");
}

void Hpt::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("hpt: cannot open " + path);
    save(out);
}

Hpt Hpt::load(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("hpt: bad magic");
    HptConfig cfg;
    cfg.num_rows = read_u32(in);
    cfg.num_cols = read_u32(in);
    Hpt hpt(cfg);
    in.read(reinterpret_cast<char*>(hpt.cells_.data()),
            std::streamsize(hpt.cells_.size() * sizeof(HptCell)));
    if (!in) throw std::runtime_error("hpt: truncated table file");
    return hpt;
}

Hpt Hpt::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("hpt: cannot open " + path);
    return load(in);
}

bool Hpt::operator==(const Hpt& other) const {
    if (cfg_.num_rows != other.cfg_.num_rows || cfg_.num_cols != other.cfg_.num_cols)
        return false;
    return std::memcmp(cells_.data(), other.cells_.data(),
                       cells_.size() * sizeof(HptCell)) == 0;
}

}  // namespace lits
