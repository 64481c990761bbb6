#include <doctest.h>

#include <stdexcept>

#include <filesystem>
#include <random>
#include <sstream>

#include "lits/metrics.hpp"
#include "lits/pmss.hpp"
#include "test_util.hpp"

using namespace lits;
using namespace lits::pmss;

TEST_SUITE_BEGIN("pmss");

namespace {
LatencyTables synthetic_tables(double learned_scale, double trie_scale) {
    LatencyTables t;
    for (size_t gi = 0; gi < t.gpkl_grid().size(); ++gi)
        for (size_t ni = 0; ni < t.nlog2_grid().size(); ++ni) {
            double base = 10.0 + double(gi) * 3 + double(ni) * 2;
            t.set_cell(StructureKind::LearnedNode, gi, ni, base * learned_scale,
                       base * learned_scale * 1.5);
            t.set_cell(StructureKind::Subtrie, gi, ni, base * trie_scale,
                       base * trie_scale * 1.5);
        }
    return t;
}
}  // namespace

TEST_CASE("estimate degenerates to the pure read latency at f_read one") {
    auto t = synthetic_tables(1.0, 2.0);
    double g = t.gpkl_grid()[2];
    double n = std::pow(2.0, t.nlog2_grid()[3]);
    CHECK(t.estimate(StructureKind::LearnedNode, g, n, 1.0, 0.0) ==
          doctest::Approx(t.read_lat(StructureKind::LearnedNode, g, n)));
}

TEST_CASE("estimate is the mix arithmetic") {
    LatencyTables t({5.0}, {10u});
    t.set_cell(StructureKind::LearnedNode, 0, 0, 100.0, 200.0);
    t.set_cell(StructureKind::Subtrie, 0, 0, 300.0, 400.0);
    CHECK(t.estimate(StructureKind::LearnedNode, 5.0, 1024.0, 0.5, 0.5) ==
          doctest::Approx(150.0));
}

TEST_CASE("estimate is affine in the read fraction") {
    auto t = synthetic_tables(1.3, 0.9);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        double g = std::uniform_real_distribution<double>(1.0, 25.0)(rng);
        double n = std::pow(2.0, std::uniform_real_distribution<double>(2.0, 27.0)(rng));
        double a = t.estimate(StructureKind::Subtrie, g, n, 0.0, 1.0);
        double m = t.estimate(StructureKind::Subtrie, g, n, 0.5, 0.5);
        double b = t.estimate(StructureKind::Subtrie, g, n, 1.0, 0.0);
        CHECK(m == doctest::Approx((a + b) / 2.0).epsilon(1e-9));
    }
}

TEST_CASE("interpolated value lies inside the corner box") {
    auto t = synthetic_tables(1.0, 1.0);
    double g_mid = (t.gpkl_grid()[1] + t.gpkl_grid()[2]) / 2.0;
    double n_mid = std::pow(2.0, (t.nlog2_grid()[4] + t.nlog2_grid()[5]) / 2.0);
    double v = t.read_lat(StructureKind::LearnedNode, g_mid, n_mid);
    double lo = 1e300, hi = -1e300;
    for (size_t gi : {size_t(1), size_t(2)})
        for (size_t ni : {size_t(4), size_t(5)}) {
            lo = std::min(lo, t.read_cell(StructureKind::LearnedNode, gi, ni));
            hi = std::max(hi, t.read_cell(StructureKind::LearnedNode, gi, ni));
        }
    CHECK(v >= lo);
    CHECK(v <= hi);
}

TEST_CASE("selection follows domination and breaks ties toward the learned node") {
    auto learned_wins = synthetic_tables(1.0, 2.0);
    auto trie_wins = synthetic_tables(2.0, 1.0);
    auto tied = synthetic_tables(1.0, 1.0);
    std::mt19937_64 rng(6);
    for (int i = 0; i < 100; ++i) {
        double g = std::uniform_real_distribution<double>(1.0, 25.0)(rng);
        double n = std::pow(2.0, std::uniform_real_distribution<double>(2.0, 27.0)(rng));
        CHECK(learned_wins.select(g, n, 0.5, 0.5) == StructureKind::LearnedNode);
        CHECK(trie_wins.select(g, n, 0.5, 0.5) == StructureKind::Subtrie);
        CHECK(tied.select(g, n, 0.5, 0.5) == StructureKind::LearnedNode);
    }
}

TEST_CASE("selection is invariant under common positive scaling") {
    std::mt19937_64 rng(7);
    for (int round = 0; round < 1000; ++round) {
        double ls = std::uniform_real_distribution<double>(0.5, 2.0)(rng);
        double ts = std::uniform_real_distribution<double>(0.5, 2.0)(rng);
        auto t = synthetic_tables(ls, ts);
        double scale = std::uniform_real_distribution<double>(0.1, 100.0)(rng);
        LatencyTables scaled = t;
        for (size_t gi = 0; gi < t.gpkl_grid().size(); ++gi)
            for (size_t ni = 0; ni < t.nlog2_grid().size(); ++ni)
                for (auto kind : {StructureKind::LearnedNode, StructureKind::Subtrie})
                    scaled.set_cell(kind, gi, ni, t.read_cell(kind, gi, ni) * scale,
                                    t.write_cell(kind, gi, ni) * scale);
        double g = std::uniform_real_distribution<double>(3.0, 21.0)(rng);
        double n = std::pow(2.0, std::uniform_real_distribution<double>(4.0, 25.0)(rng));
        double fr = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        CHECK(t.select(g, n, fr, 1 - fr) == scaled.select(g, n, fr, 1 - fr));
    }
}

TEST_CASE("save and load round-trip exactly") {
    auto t = synthetic_tables(1.7, 0.6);
    std::stringstream buf;
    t.save(buf);
    LatencyTables back = LatencyTables::load(buf);
    CHECK(back == t);

    // And the serialized form itself is a fixed point.
    std::stringstream buf2;
    back.save(buf2);
    std::stringstream buf3;
    t.save(buf3);
    CHECK(buf2.str() == buf3.str());
}

TEST_CASE("default-size table file stays under ten kibibytes") {
    auto t = LatencyTables::builtin_default();
    std::stringstream buf;
    t.save(buf);
    CHECK(buf.str().size() < 10 * 1024);
}

TEST_CASE("load rejects damage") {
    auto t = synthetic_tables(1.0, 1.0);
    std::stringstream buf;
    t.save(buf);
    std::string data = buf.str();

    std::stringstream bad_magic("PMSX\t1\n" + data.substr(7));
    CHECK_THROWS_AS(LatencyTables::load(bad_magic), std::runtime_error);

    std::stringstream truncated(data.substr(0, data.size() * 2 / 3));
    CHECK_THROWS_AS(LatencyTables::load(truncated), std::runtime_error);
}

TEST_CASE("select_structure measures the keys") {
    auto learned_wins = synthetic_tables(1.0, 5.0);
    std::mt19937_64 rng(8);
    auto keys = test::distinct_keys(rng, 64, 4, 10);
    auto v = metrics::as_views(keys);
    CHECK(select_structure(learned_wins, v, 0.5, 0.5) == StructureKind::LearnedNode);
}

TEST_CASE("generator reaches its target within ten percent") {
    for (double target : {5.0, 9.0}) {
        GpklGenConfig cfg;
        cfg.target_gpkl = target;
        cfg.n = 1 << 12;
        cfg.seed = 17;
        auto keys = gen_gpkl_dataset(cfg);
        CHECK(keys.size() == cfg.n);
        CHECK(std::is_sorted(keys.begin(), keys.end()));
        CHECK(std::adjacent_find(keys.begin(), keys.end()) == keys.end());
        double g = metrics::gpkl(metrics::as_views(keys));
        CHECK(g >= target);
        CHECK(g <= target * 1.1);
    }
}

TEST_CASE("generator with a pre-satisfied target does not mutate") {
    GpklGenConfig cfg;
    cfg.target_gpkl = 1.0;  // below any random baseline
    cfg.n = 1 << 10;
    cfg.seed = 3;
    auto keys = gen_gpkl_dataset(cfg);
    CHECK(keys.size() == cfg.n);
    // All keys still look like pristine base strings.
    for (const auto& k : keys) {
        CHECK(k.size() >= cfg.base_len_min);
        CHECK(k.size() <= cfg.base_len_max);
    }
}

TEST_CASE("generator reports unreachable targets") {
    GpklGenConfig cfg;
    cfg.target_gpkl = 50.0;
    cfg.n = 2;  // a two-string list has gpkl exactly 1
    cfg.max_windows = 500;
    CHECK_THROWS_AS(gen_gpkl_dataset(cfg), GpklTargetError);
    try {
        gen_gpkl_dataset(cfg);
    } catch (const GpklTargetError& e) {
        CHECK(e.achieved_gpkl == doctest::Approx(1.0));
    }
}

TEST_SUITE_END();
