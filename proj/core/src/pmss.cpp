#include "lits/pmss.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lits/metrics.hpp"

namespace lits::pmss {

namespace {

std::vector<double> default_gpkl_grid() {
    std::vector<double> g;
    for (double v = 3; v <= 21; v += 2) g.push_back(v);
    return g;
}

std::vector<uint32_t> default_nlog2_grid() {
    std::vector<uint32_t> n;
    for (uint32_t v = 4; v <= 25; ++v) n.push_back(v);
    return n;
}

double quantize(double ns) { return std::round(ns * 10.0) / 10.0; }

}  // namespace

LatencyTables::LatencyTables() : LatencyTables(default_gpkl_grid(), default_nlog2_grid()) {}

LatencyTables::LatencyTables(std::vector<double> gpkl_grid,
                             std::vector<uint32_t> nlog2_grid)
    : gpkl_grid_(std::move(gpkl_grid)), nlog2_grid_(std::move(nlog2_grid)) {
    if (gpkl_grid_.empty() || nlog2_grid_.empty())
        throw std::invalid_argument("pmss: empty grid");
    if (!std::is_sorted(gpkl_grid_.begin(), gpkl_grid_.end()) ||
        !std::is_sorted(nlog2_grid_.begin(), nlog2_grid_.end()))
        throw std::invalid_argument("pmss: grids must be ascending");
    size_t cells = gpkl_grid_.size() * nlog2_grid_.size();
    for (auto* grid : {&read_[0], &read_[1], &write_[0], &write_[1]})
        grid->assign(cells, 0.0);
}

LatencyTables LatencyTables::builtin_default() {
    LatencyTables t;
    for (size_t gi = 0; gi < t.gpkl_grid_.size(); ++gi) {
        double g = t.gpkl_grid_[gi];
        for (size_t ni = 0; ni < t.nlog2_grid_.size(); ++ni) {
            double ln = t.nlog2_grid_[ni];
            double read_learned = 40.0 + 1.8 * ln + 2.5 * g;
            double read_trie = 28.0 + 22.0 * (ln / 5.0) * (0.5 + g / 12.0);
            t.set_cell(StructureKind::LearnedNode, gi, ni, read_learned,
                       read_learned * 1.3);
            t.set_cell(StructureKind::Subtrie, gi, ni, read_trie, read_trie * 1.6);
        }
    }
    return t;
}

void LatencyTables::set_cell(StructureKind kind, size_t gpkl_idx, size_t n_idx,
                             double read_ns, double write_ns) {
    if (!(read_ns > 0.0) || !(write_ns > 0.0))
        throw std::invalid_argument("pmss: latencies must be positive");
    size_t idx = gpkl_idx * nlog2_grid_.size() + n_idx;
    read_[size_t(kind)].at(idx) = quantize(read_ns);
    write_[size_t(kind)].at(idx) = quantize(write_ns);
}

double LatencyTables::read_cell(StructureKind kind, size_t gpkl_idx, size_t n_idx) const {
    return read_[size_t(kind)].at(gpkl_idx * nlog2_grid_.size() + n_idx);
}

double LatencyTables::write_cell(StructureKind kind, size_t gpkl_idx,
                                 size_t n_idx) const {
    return write_[size_t(kind)].at(gpkl_idx * nlog2_grid_.size() + n_idx);
}

double LatencyTables::interpolate(const std::vector<double>& grid, double gpkl,
                                  double n) const {
    double g = std::clamp(gpkl, gpkl_grid_.front(), gpkl_grid_.back());
    double ln = std::clamp(std::log2(std::max(n, 1.0)), double(nlog2_grid_.front()),
                           double(nlog2_grid_.back()));

    auto bracket = [](const auto& axis, double v) {
        size_t hi = 0;
        while (hi + 1 < axis.size() && double(axis[hi + 1]) < v) ++hi;
        size_t lo = hi;
        if (hi + 1 < axis.size()) ++hi;
        double a = double(axis[lo]), b = double(axis[hi]);
        double t = (b > a) ? std::clamp((v - a) / (b - a), 0.0, 1.0) : 0.0;
        return std::tuple<size_t, size_t, double>{lo, hi, t};
    };

    auto [g0, g1, tg] = bracket(gpkl_grid_, g);
    auto [n0, n1, tn] = bracket(nlog2_grid_, ln);
    size_t cols = nlog2_grid_.size();
    double v00 = grid[g0 * cols + n0], v01 = grid[g0 * cols + n1];
    double v10 = grid[g1 * cols + n0], v11 = grid[g1 * cols + n1];
    double low = v00 + (v01 - v00) * tn;
    double high = v10 + (v11 - v10) * tn;
    return low + (high - low) * tg;
}

double LatencyTables::read_lat(StructureKind kind, double gpkl, double n) const {
    return interpolate(read_[size_t(kind)], gpkl, n);
}

double LatencyTables::write_lat(StructureKind kind, double gpkl, double n) const {
    return interpolate(write_[size_t(kind)], gpkl, n);
}

double LatencyTables::estimate(StructureKind kind, double gpkl, double n, double f_read,
                               double f_write) const {
    return f_read * read_lat(kind, gpkl, n) + f_write * write_lat(kind, gpkl, n);
}

StructureKind LatencyTables::select(double gpkl, double n, double f_read,
                                    double f_write) const {
    double learned = estimate(StructureKind::LearnedNode, gpkl, n, f_read, f_write);
    double trie = estimate(StructureKind::Subtrie, gpkl, n, f_read, f_write);
    return trie < learned ? StructureKind::Subtrie : StructureKind::LearnedNode;
}

StructureKind select_structure(const LatencyTables& tables,
                               std::span<const std::string_view> sorted_keys,
                               double f_read, double f_write) {
    double g = metrics::gpkl(sorted_keys);
    return tables.select(g, double(sorted_keys.size()), f_read, f_write);
}

// ---------------------------------------------------------- serialization

void LatencyTables::save(std::ostream& out) const {
    out << "PMSS\t1\n";
    out << "gpkl\t";
    for (size_t i = 0; i < gpkl_grid_.size(); ++i)
        out << (i ? "," : "") << gpkl_grid_[i];
    out << "\tnlog2\t";
    for (size_t i = 0; i < nlog2_grid_.size(); ++i)
        out << (i ? "," : "") << nlog2_grid_[i];
    out << "\n";
    char buf[64];
    for (int kind = 0; kind < 2; ++kind) {
        char tag = kind == 0 ? 'L' : 'T';
        for (size_t gi = 0; gi < gpkl_grid_.size(); ++gi) {
            for (size_t ni = 0; ni < nlog2_grid_.size(); ++ni) {
                size_t idx = gi * nlog2_grid_.size() + ni;
                std::snprintf(buf, sizeof(buf), "%c\t%g\t%u\t%.1f\t%.1f\n", tag,
                              gpkl_grid_[gi], nlog2_grid_[ni], read_[kind][idx],
                              write_[kind][idx]);
                out << buf;
            }
        }
    }
    if (!out) throw std::runtime_error("pmss: write failed");
}

void LatencyTables::save_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("pmss: cannot open " + path);
    save(out);
}

namespace {
std::vector<double> parse_csv_doubles(const std::string& csv) {
    std::vector<double> values;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) values.push_back(std::stod(item));
    return values;
}
}  // namespace

LatencyTables LatencyTables::load(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "PMSS\t1")
        throw std::runtime_error("pmss: bad magic or version");
    if (!std::getline(in, line)) throw std::runtime_error("pmss: missing grid line");
    std::stringstream header(line);
    std::string tag, gpkl_csv, ntag, n_csv;
    if (!std::getline(header, tag, '\t') || tag != "gpkl" ||
        !std::getline(header, gpkl_csv, '\t') || !std::getline(header, ntag, '\t') ||
        ntag != "nlog2" || !std::getline(header, n_csv, '\t'))
        throw std::runtime_error("pmss: malformed grid line");

    std::vector<uint32_t> nlog2;
    for (double v : parse_csv_doubles(n_csv)) nlog2.push_back(uint32_t(v));
    LatencyTables t(parse_csv_doubles(gpkl_csv), nlog2);

    size_t expected = 2 * t.gpkl_grid_.size() * t.nlog2_grid_.size();
    size_t seen = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string kind_s, g_s, n_s, r_s, w_s;
        if (!std::getline(row, kind_s, '\t') || !std::getline(row, g_s, '\t') ||
            !std::getline(row, n_s, '\t') || !std::getline(row, r_s, '\t') ||
            !std::getline(row, w_s, '\t'))
            throw std::runtime_error("pmss: malformed row: " + line);
        StructureKind kind;
        if (kind_s == "L")
            kind = StructureKind::LearnedNode;
        else if (kind_s == "T")
            kind = StructureKind::Subtrie;
        else
            throw std::runtime_error("pmss: unknown structure kind: " + kind_s);
        double g = std::stod(g_s);
        uint32_t n = uint32_t(std::stoul(n_s));
        auto gi = std::find(t.gpkl_grid_.begin(), t.gpkl_grid_.end(), g);
        auto ni = std::find(t.nlog2_grid_.begin(), t.nlog2_grid_.end(), n);
        if (gi == t.gpkl_grid_.end() || ni == t.nlog2_grid_.end())
            throw std::runtime_error("pmss: row outside declared grid: " + line);
        t.set_cell(kind, size_t(gi - t.gpkl_grid_.begin()),
                   size_t(ni - t.nlog2_grid_.begin()), std::stod(r_s), std::stod(w_s));
        ++seen;
    }
    if (seen != expected)
        throw std::runtime_error("pmss: truncated table, expected " +
                                 std::to_string(expected) + " rows, got " +
                                 std::to_string(seen));
    return t;
}

LatencyTables LatencyTables::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("pmss: cannot open " + path);
    return load(in);
}

}  // namespace lits::pmss
