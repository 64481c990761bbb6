#include <doctest.h>

#include <stdexcept>

#include <map>
#include <random>

#include "lits/index.hpp"
#include "test_util.hpp"

using namespace lits;

namespace {

std::vector<std::pair<std::string, uint64_t>> entries_of(
    const std::vector<std::string>& keys) {
    std::vector<std::pair<std::string, uint64_t>> out;
    for (size_t i = 0; i < keys.size(); ++i) out.emplace_back(keys[i], i + 1);
    return out;
}

std::vector<std::string> scan_keys(const Index& idx, std::string_view from = {},
                                   size_t limit = size_t(-1)) {
    std::vector<std::string> keys;
    auto scanner = idx.scan(from);
    std::string_view key;
    uint64_t value;
    while (keys.size() < limit && scanner.next(key, value)) keys.emplace_back(key);
    return keys;
}

}  // namespace

TEST_SUITE_BEGIN("index");

TEST_CASE("bulkload one key") {
    Index idx = Index::bulkload({{"solo", 7}});
    CHECK(idx.size() == 1);
    CHECK(idx.find("solo") == 7);
    CHECK(idx.find("other") == std::nullopt);
    idx.audit();
}

TEST_CASE("bulkload empty") {
    Index idx = Index::bulkload({});
    CHECK(idx.empty());
    CHECK(idx.find("x") == std::nullopt);
    CHECK(scan_keys(idx).empty());
    CHECK(idx.insert("x", 1) == OpStatus::Ok);
    CHECK(idx.find("x") == 1);
    idx.audit();
}

TEST_CASE("sixteen keys land in a single compact node under the root") {
    std::mt19937_64 rng(1);
    auto keys = test::distinct_keys(rng, 16, 6, 12);
    Index idx = Index::bulkload(entries_of(keys));
    auto st = idx.stats();
    CHECK(st.model_nodes == 1);
    CHECK(st.compact_nodes == 1);
    CHECK(st.single_entries == 0);
    CHECK(st.subtries == 0);
    for (const auto& k : keys) CHECK(idx.find(k).has_value());
    idx.audit();
}

TEST_CASE("bulkload rejects duplicates naming the first") {
    CHECK_THROWS_WITH_AS(Index::bulkload({{"dup", 1}, {"a", 2}, {"dup", 3}}),
                         "bulkload: duplicate key: dup", std::invalid_argument);
    CHECK_THROWS_AS(Index::bulkload({{"", 1}}), std::invalid_argument);
    CHECK_THROWS_AS(Index::bulkload({{std::string("x\xff"), 1}}), std::domain_error);
}

TEST_CASE("bulkload roundtrip and full scan at one hundred thousand keys") {
    std::mt19937_64 rng(2);
    auto keys = test::distinct_keys(rng, 100000, 4, 20);
    Index idx = Index::bulkload(entries_of(keys));
    CHECK(idx.size() == keys.size());
    CHECK(scan_keys(idx) == keys);
    for (size_t i = 0; i < keys.size(); i += 97)
        CHECK(idx.find(keys[i]) == i + 1);
    idx.audit();
}

TEST_CASE("search miss through an occupied single-entry slot costs one comparison") {
    // Two keys mapping to the same slot: insert one, search the other.
    std::mt19937_64 rng(3);
    auto keys = test::distinct_keys(rng, 64, 8, 12);
    Index idx = Index::bulkload(entries_of(keys));

    // Find a probe key routed to a single-entry slot but not stored.
    for (int attempt = 0; attempt < 10000; ++attempt) {
        std::string probe = test::random_key(rng, 8, 12);
        if (idx.find(probe)) continue;
        SearchTrace trace;
        auto got = idx.find(probe, &trace);
        CHECK(got == std::nullopt);
        if (trace.key_comparisons > 0) {
            CHECK(trace.key_comparisons == 1);
            return;
        }
    }
    FAIL("no probe key collided into a single-entry slot");
}

TEST_CASE("insert basics") {
    Index idx = Index::bulkload(entries_of({"b", "d", "f"}));
    CHECK(idx.insert("c", 100) == OpStatus::Ok);
    CHECK(idx.find("c") == 100);
    CHECK(idx.insert("c", 200) == OpStatus::Duplicate);
    CHECK(idx.find("c") == 100);
    CHECK(idx.size() == 4);
    CHECK(scan_keys(idx) == std::vector<std::string>{"b", "c", "d", "f"});
    idx.audit();
}

TEST_CASE("seventeenth insert converts a full compact node") {
    std::mt19937_64 rng(4);
    auto keys = test::distinct_keys(rng, 16, 6, 10);
    Index idx = Index::bulkload(entries_of(keys));
    REQUIRE(idx.stats().compact_nodes == 1);

    std::string extra = test::random_key(rng, 6, 10);
    while (idx.find(extra)) extra = test::random_key(rng, 6, 10);
    CHECK(idx.insert(extra, 999) == OpStatus::Ok);

    CHECK(idx.find(extra) == 999);
    for (const auto& k : keys) CHECK(idx.find(k).has_value());
    auto st = idx.stats();
    CHECK(st.key_count == 17);
    idx.audit();
}

TEST_CASE("grow resize triggers and keeps order") {
    std::mt19937_64 rng(5);
    auto keys = test::distinct_keys(rng, 64, 6, 14);
    Index idx = Index::bulkload(entries_of(keys));
    auto more = test::distinct_keys(rng, 1500, 6, 14);
    for (const auto& k : more) idx.insert(k, 1);

    CHECK(idx.stats().resize_count >= 1);
    auto got = scan_keys(idx);
    CHECK(std::is_sorted(got.begin(), got.end()));
    CHECK(got.size() == idx.size());
    idx.audit();
}

TEST_CASE("erase paths: single slots, compact nodes, shrink collapse") {
    std::mt19937_64 rng(6);
    auto keys = test::distinct_keys(rng, 4000, 4, 12);
    Index idx = Index::bulkload(entries_of(keys));

    CHECK(idx.erase("missing-key") == OpStatus::NotFound);
    size_t removed = 0;
    for (size_t i = 0; i < keys.size(); i += 2) {
        CHECK(idx.erase(keys[i]) == OpStatus::Ok);
        ++removed;
    }
    CHECK(idx.size() == keys.size() - removed);
    for (size_t i = 0; i < keys.size(); ++i) {
        if (i % 2 == 0)
            CHECK(idx.find(keys[i]) == std::nullopt);
        else
            CHECK(idx.find(keys[i]) == i + 1);
    }
    idx.audit();
}

TEST_CASE("delete everything then keep using the index") {
    std::mt19937_64 rng(7);
    auto keys = test::distinct_keys(rng, 300, 2, 8);
    Index idx = Index::bulkload(entries_of(keys));
    for (const auto& k : keys) CHECK(idx.erase(k) == OpStatus::Ok);
    CHECK(idx.empty());
    CHECK(scan_keys(idx).empty());
    CHECK(idx.insert("reborn", 1) == OpStatus::Ok);
    CHECK(idx.find("reborn") == 1);
    idx.audit();
}

TEST_CASE("update in place") {
    Index idx = Index::bulkload(entries_of({"k1", "k2", "k3"}));
    CHECK(idx.update("k2", 777) == OpStatus::Ok);
    CHECK(idx.find("k2") == 777);
    CHECK(idx.update("nope", 1) == OpStatus::NotFound);
    idx.audit();
}

TEST_CASE("insert delete search roundtrip") {
    std::mt19937_64 rng(8);
    auto keys = test::distinct_keys(rng, 500, 4, 10);
    Index idx = Index::bulkload({});
    for (const auto& k : keys) CHECK(idx.insert(k, 5) == OpStatus::Ok);
    for (const auto& k : keys) CHECK(idx.erase(k) == OpStatus::Ok);
    for (const auto& k : keys) CHECK(idx.find(k) == std::nullopt);
    idx.audit();
}

TEST_CASE("scan from below the minimum returns everything") {
    std::mt19937_64 rng(9);
    auto keys = test::distinct_keys(rng, 5000, 2, 12, 'b', 'z');
    Index idx = Index::bulkload(entries_of(keys));
    CHECK(scan_keys(idx, "a") == keys);
    CHECK(scan_keys(idx, "") == keys);
    CHECK(scan_keys(idx, "zzzzzzzzzzzzzz").empty());
}

TEST_CASE("scan windows match the reference map") {
    std::mt19937_64 rng(10);
    auto keys = test::distinct_keys(rng, 20000, 2, 16);
    Index idx = Index::bulkload(entries_of(keys));
    std::map<std::string, uint64_t> oracle;
    for (size_t i = 0; i < keys.size(); ++i) oracle[keys[i]] = i + 1;

    for (int round = 0; round < 3000; ++round) {
        std::string from = test::random_key(rng, 1, 16);
        auto scanner = idx.scan(from);
        auto oit = oracle.lower_bound(from);
        std::string_view key;
        uint64_t value;
        for (int step = 0; step < 100; ++step) {
            bool got = scanner.next(key, value);
            if (oit == oracle.end()) {
                CHECK_FALSE(got);
                break;
            }
            REQUIRE(got);
            CHECK(key == oit->first);
            CHECK(value == oit->second);
            ++oit;
        }
    }
}

TEST_CASE("oracle equivalence under mixed operations") {
    std::mt19937_64 rng(11);
    auto keys = test::distinct_keys(rng, 8000, 2, 14);
    std::map<std::string, uint64_t> oracle;
    std::vector<std::pair<std::string, uint64_t>> bulk;
    for (size_t i = 0; i < keys.size() / 2; ++i) {
        bulk.emplace_back(keys[i], i);
        oracle[keys[i]] = i;
    }
    Index idx = Index::bulkload(std::move(bulk));

    for (int op = 0; op < 200000; ++op) {
        const std::string& k =
            keys[std::uniform_int_distribution<size_t>(0, keys.size() - 1)(rng)];
        int kind = std::uniform_int_distribution<int>(0, 99)(rng);
        if (kind < 40) {
            auto got = idx.find(k);
            auto it = oracle.find(k);
            if (it == oracle.end())
                CHECK(got == std::nullopt);
            else
                CHECK(got == it->second);
        } else if (kind < 70) {
            bool ok = idx.insert(k, op) == OpStatus::Ok;
            CHECK(ok == oracle.emplace(k, op).second);
        } else if (kind < 85) {
            bool ok = idx.erase(k) == OpStatus::Ok;
            CHECK(ok == (oracle.erase(k) > 0));
        } else if (kind < 95) {
            bool ok = idx.update(k, op) == OpStatus::Ok;
            auto it = oracle.find(k);
            CHECK(ok == (it != oracle.end()));
            if (it != oracle.end()) it->second = op;
        } else {
            auto scanner = idx.scan(k);
            auto oit = oracle.lower_bound(k);
            std::string_view key;
            uint64_t value;
            for (int step = 0; step < 20 && oit != oracle.end(); ++step, ++oit) {
                REQUIRE(scanner.next(key, value));
                CHECK(key == oit->first);
                CHECK(value == oit->second);
            }
        }
    }
    CHECK(idx.size() == oracle.size());
    idx.audit();
}

TEST_CASE("height bound and collision-limit audit after bulkload and inserts") {
    std::mt19937_64 rng(12);
    for (size_t n : {size_t(10000), size_t(100000)}) {
        auto keys = test::distinct_keys(rng, n + n / 2, 8, 16);
        std::vector<std::pair<std::string, uint64_t>> bulk;
        for (size_t i = 0; i < n; ++i) bulk.emplace_back(keys[i], i);
        Index idx = Index::bulkload(std::move(bulk));

        uint32_t bound = uint32_t(std::ceil(std::log2(double(n)))) + 4;
        CHECK(idx.stats().max_base_height <= bound);
        idx.audit();

        for (size_t i = n; i < keys.size(); ++i) idx.insert(keys[i], i);
        bound = uint32_t(std::ceil(std::log2(double(idx.size())))) + 4;
        CHECK(idx.stats().max_base_height <= bound);
        idx.audit();
    }
}

TEST_CASE("amortized resize work stays within the log-squared budget") {
    std::mt19937_64 rng(13);
    size_t n = 50000;
    auto keys = test::distinct_keys(rng, 2 * n, 6, 14);
    std::vector<std::pair<std::string, uint64_t>> bulk;
    for (size_t i = 0; i < n; ++i) bulk.emplace_back(keys[i], i);
    Index idx = Index::bulkload(std::move(bulk));

    uint64_t before = idx.stats().resize_touched_entries;
    size_t inserts = 0;
    for (size_t i = n; i < keys.size(); ++i, ++inserts) idx.insert(keys[i], i);
    uint64_t touched = idx.stats().resize_touched_entries - before;

    double log_n = std::log2(double(idx.size()));
    // Constant picked with wide headroom over observed behavior (~0.3).
    CHECK(double(touched) <= 8.0 * double(inserts) * log_n * log_n);
}

TEST_CASE("delete-heavy storms keep the collision audit clean") {
    std::mt19937_64 rng(14);
    auto keys = test::distinct_keys(rng, 30000, 4, 12);
    Index idx = Index::bulkload(entries_of(keys));
    std::vector<std::string> shuffled(keys);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (size_t i = 0; i < shuffled.size() / 2; ++i)
        CHECK(idx.erase(shuffled[i]) == OpStatus::Ok);
    idx.audit();
    for (size_t i = shuffled.size() / 2; i < shuffled.size(); ++i)
        CHECK(idx.find(shuffled[i]).has_value());
    for (size_t i = 0; i < shuffled.size() / 2; ++i)
        CHECK(idx.find(shuffled[i]) == std::nullopt);
}

TEST_CASE("cnode-disabled configuration still works") {
    IndexConfig cfg;
    cfg.cnodes_enabled = false;
    std::mt19937_64 rng(15);
    auto keys = test::distinct_keys(rng, 5000, 4, 12);
    Index idx = Index::bulkload(entries_of(keys), cfg);
    CHECK(idx.stats().compact_nodes == 0);
    CHECK(scan_keys(idx) == keys);
    for (size_t i = 0; i < keys.size(); i += 53) CHECK(idx.find(keys[i]) == i + 1);
    idx.audit();
}

TEST_CASE("subtrie-disabled configuration stays correct") {
    IndexConfig cfg;
    cfg.subtries_enabled = false;
    std::mt19937_64 rng(16);
    auto keys = test::distinct_keys(rng, 20000, 4, 12);
    Index idx = Index::bulkload(entries_of(keys), cfg);
    auto st = idx.stats();
    CHECK(st.subtries == st.forced_subtrie_builds);  // only unsplittable groups
    CHECK(scan_keys(idx) == keys);
    idx.audit();
}

TEST_CASE("preallocated compact nodes cost more space") {
    std::mt19937_64 rng(17);
    auto keys = test::distinct_keys(rng, 30000, 4, 10, 'a', 'd');
    IndexConfig plain;
    IndexConfig prealloc;
    prealloc.cnode_preallocate = true;
    Index a = Index::bulkload(entries_of(keys), plain);
    Index b = Index::bulkload(entries_of(keys), prealloc);
    CHECK(b.stats().bytes_used >= a.stats().bytes_used);
    CHECK(scan_keys(b) == keys);
    b.audit();
}

TEST_CASE("stats reflect the tree") {
    std::mt19937_64 rng(18);
    auto keys = test::distinct_keys(rng, 1000, 4, 10);
    Index idx = Index::bulkload(entries_of(keys));
    auto st = idx.stats();
    CHECK(st.key_count == 1000);
    CHECK(st.model_nodes >= 1);
    CHECK(st.bytes_used > 2 * 1024 * 1024);  // the cdf table alone is 2 MiB
    CHECK(st.avg_base_height >= 1.0);
    CHECK(st.avg_base_height <= st.max_base_height);

    Index solo = Index::bulkload({{"one", 1}});
    CHECK(solo.stats().avg_base_height <= 1.0);
    CHECK(solo.stats().key_count == 1);
}

TEST_CASE("full rebuild retrains and preserves content") {
    std::mt19937_64 rng(19);
    auto keys = test::distinct_keys(rng, 3000, 4, 12);
    Index idx = Index::bulkload(entries_of(keys));
    auto extra = test::distinct_keys(rng, 3000, 13, 20);
    for (const auto& k : extra) idx.insert(k, 9);
    idx.rebuild();
    CHECK(idx.size() == keys.size() + extra.size());
    for (size_t i = 0; i < keys.size(); i += 37) CHECK(idx.find(keys[i]) == i + 1);
    for (size_t i = 0; i < extra.size(); i += 37) CHECK(idx.find(extra[i]) == 9);
    auto got = scan_keys(idx);
    CHECK(std::is_sorted(got.begin(), got.end()));
    idx.audit();
}

TEST_CASE("online workload mix flips structure choices as counters drift") {
    IndexConfig cfg;
    cfg.online_workload_mix = true;
    Index idx = Index::bulkload(entries_of({"a", "b"}), cfg);
    // Reads dominate; the effective mix should track it.
    for (int i = 0; i < 1000; ++i) idx.find("a");
    // No direct observable beyond not crashing and staying correct; the
    // selection effect is covered by the pmss suite.
    CHECK(idx.find("a") == 1);
}

TEST_SUITE_END();
