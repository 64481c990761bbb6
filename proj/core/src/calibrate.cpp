#include "lits/calibrate.hpp"

#include <algorithm>
#include <chrono>
#include <random>

#include "lits/index.hpp"
#include "lits/subtrie.hpp"

namespace lits::pmss {

namespace {

using Clock = std::chrono::steady_clock;

struct CellData {
    std::vector<std::string> bulk;   // sorted
    std::vector<std::string> inserts;  // shuffled
    std::vector<const std::string*> probes;  // read targets, with replacement
};

CellData make_cell_data(double gpkl_target, size_t n, uint64_t seed,
                        size_t max_probes) {
    GpklGenConfig cfg;
    cfg.target_gpkl = gpkl_target;
    cfg.n = n;
    cfg.seed = seed;
    std::vector<std::string> keys = gen_gpkl_dataset(cfg);

    CellData data;
    data.bulk.reserve(keys.size() / 2 + 1);
    data.inserts.reserve(keys.size() / 2 + 1);
    for (size_t i = 0; i < keys.size(); ++i)
        (i % 2 == 0 ? data.bulk : data.inserts).push_back(std::move(keys[i]));

    std::mt19937_64 rng(seed ^ 0xabcdef);
    std::shuffle(data.inserts.begin(), data.inserts.end(), rng);
    size_t probes = std::min(max_probes, 4 * n);
    data.probes.reserve(probes);
    for (size_t i = 0; i < probes; ++i) {
        size_t j = std::uniform_int_distribution<size_t>(0, n - 1)(rng);
        data.probes.push_back(j % 2 == 0 ? &data.bulk[j / 2] : &data.inserts[j / 2]);
    }
    return data;
}

// Repeats the probe loop until it runs long enough for the clock to
// resolve it cleanly.
template <typename Body>
double timed_read_ns(size_t probes, const Body& body) {
    size_t reps = 1;
    while (true) {
        auto t0 = Clock::now();
        for (size_t r = 0; r < reps; ++r)
            for (size_t i = 0; i < probes; ++i) body(i);
        double ns = std::chrono::duration<double, std::nano>(Clock::now() - t0).count();
        if (ns >= 100'000.0 || reps >= 1024)
            return ns / double(reps * probes);
        reps *= 4;
    }
}

struct CellResult {
    double read_ns;
    double write_ns;
};

CellResult measure_learned(const CellData& data) {
    IndexConfig cfg;
    cfg.subtries_enabled = false;
    std::vector<std::pair<std::string, uint64_t>> bulk;
    bulk.reserve(data.bulk.size());
    for (const auto& k : data.bulk) bulk.emplace_back(k, 1);
    Index index = Index::bulkload(std::move(bulk), cfg);

    auto t0 = Clock::now();
    for (const auto& k : data.inserts) index.insert(k, 2);
    double write_ns =
        std::chrono::duration<double, std::nano>(Clock::now() - t0).count() /
        double(std::max<size_t>(1, data.inserts.size()));

    uint64_t sink = 0;
    for (size_t i = 0; i < std::min<size_t>(1000, data.probes.size()); ++i)
        sink += index.find(*data.probes[i]).value_or(0);  // warm-up
    double read_ns = timed_read_ns(data.probes.size(), [&](size_t i) {
        sink += index.find(*data.probes[i]).value_or(0);
    });
    if (sink == 0xF00D) read_ns += 0;
    return {read_ns, write_ns};
}

CellResult measure_trie(const CellData& data) {
    std::vector<KvEntry*> owned;
    owned.reserve(data.bulk.size());
    for (const auto& k : data.bulk) owned.push_back(KvEntry::make(k, 1));
    std::unique_ptr<Subtrie> trie(Subtrie::make_from_sorted(owned));

    auto t0 = Clock::now();
    for (const auto& k : data.inserts) trie->insert(k, 2);
    double write_ns =
        std::chrono::duration<double, std::nano>(Clock::now() - t0).count() /
        double(std::max<size_t>(1, data.inserts.size()));

    uint64_t sink = 0;
    for (size_t i = 0; i < std::min<size_t>(1000, data.probes.size()); ++i) {
        const KvEntry* e = trie->find(*data.probes[i]);
        sink += e ? e->value() : 0;
    }
    double read_ns = timed_read_ns(data.probes.size(), [&](size_t i) {
        const KvEntry* e = trie->find(*data.probes[i]);
        sink += e ? e->value() : 0;
    });
    if (sink == 0xF00D) read_ns += 0;
    return {read_ns, write_ns};
}

}  // namespace

LatencyTables calibrate(const CalibrationOptions& options) {
    std::vector<double> gpkl_grid;
    for (double g = 3; g <= 21; g += 2) gpkl_grid.push_back(g);
    std::vector<uint32_t> nlog2_grid;
    for (uint32_t ln = 4; ln <= (options.fast ? 20u : 25u); ++ln)
        nlog2_grid.push_back(ln);

    LatencyTables tables(gpkl_grid, nlog2_grid);
    for (size_t gi = 0; gi < gpkl_grid.size(); ++gi) {
        for (size_t ni = 0; ni < nlog2_grid.size(); ++ni) {
            size_t n = size_t(1) << nlog2_grid[ni];
            uint64_t cell_seed = options.seed + gi * 1000 + ni;
            CellData data = make_cell_data(gpkl_grid[gi], n, cell_seed,
                                           options.max_probe_ops);
            CellResult learned = measure_learned(data);
            CellResult trie = measure_trie(data);
            tables.set_cell(StructureKind::LearnedNode, gi, ni,
                            std::max(learned.read_ns, 0.1),
                            std::max(learned.write_ns, 0.1));
            tables.set_cell(StructureKind::Subtrie, gi, ni, std::max(trie.read_ns, 0.1),
                            std::max(trie.write_ns, 0.1));
            if (options.progress) {
                char buf[160];
                std::snprintf(buf, sizeof(buf),
                              "gpkl=%2.0f n=2^%-2u  learned r/w %7.1f/%7.1f ns  "
                              "trie r/w %7.1f/%7.1f ns",
                              gpkl_grid[gi], nlog2_grid[ni], learned.read_ns,
                              learned.write_ns, trie.read_ns, trie.write_ns);
                options.progress(buf);
            }
        }
    }
    return tables;
}

}  // namespace lits::pmss
