#include <doctest.h>

#include <stdexcept>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "lits/bench.hpp"
#include "lits/corpus.hpp"
#include "lits/workload.hpp"
#include "test_util.hpp"

using namespace lits;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& content) {
        path = (std::filesystem::temp_directory_path() /
                ("lits_test_" + std::to_string(std::random_device{}()) + ".txt"))
                   .string();
        std::ofstream out(path, std::ios::binary);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

Corpus small_corpus(size_t n, uint64_t seed = 5) {
    std::mt19937_64 rng(seed);
    return corpus_from_keys(test::distinct_keys(rng, n, 4, 12), seed);
}

}  // namespace

TEST_SUITE_BEGIN("harness");

TEST_CASE("corpus filtering counts each drop reason") {
    std::string content;
    content += "good-key\n";
    content += "dup-key\n";
    content += "dup-key\n";              // duplicate
    content += std::string(256, 'a') + "\n";  // too long
    content += "bad\xc3key\n";           // non-ascii
    content += "\n";                     // empty
    content += std::string(255, 'b') + "\n";  // exactly at the limit
    TempFile file(content);

    Corpus corpus = load_corpus(file.path);
    CHECK(corpus.keys.size() == 3);
    CHECK(corpus.dropped_dup == 1);
    CHECK(corpus.dropped_too_long == 1);
    CHECK(corpus.dropped_non_ascii == 1);
    CHECK(corpus.dropped_empty == 1);
    CHECK(corpus.values.size() == corpus.keys.size());

    Corpus again = load_corpus(file.path);
    CHECK(again.values == corpus.values);  // seeded values reproduce
}

TEST_CASE("corpus errors") {
    CHECK_THROWS_AS(load_corpus("/nonexistent/path/nope"), std::runtime_error);
    TempFile empty("\n\n");
    CHECK_THROWS_AS(load_corpus(empty.path), std::runtime_error);
}

TEST_CASE("workload c reads only bulkloaded keys") {
    Corpus corpus = small_corpus(500);
    WorkloadSpec spec;
    spec.kind = WorkloadKind::C;
    spec.op_count = 2000;
    Workload w = gen_workload(spec, corpus);
    CHECK(w.bulk.size() == corpus.keys.size());
    std::set<uint32_t> bulk_set(w.bulk.begin(), w.bulk.end());
    for (const Op& op : w.ops) {
        CHECK(op.type == OpType::Read);
        CHECK(bulk_set.contains(op.key_idx));
    }
}

TEST_CASE("insert-only inserts exactly the held-out half") {
    Corpus corpus = small_corpus(1000);
    WorkloadSpec spec;
    spec.kind = WorkloadKind::InsertOnly;
    Workload w = gen_workload(spec, corpus);
    CHECK(w.bulk.size() == 500);
    CHECK(w.ops.size() == 500);
    std::set<uint32_t> bulk_set(w.bulk.begin(), w.bulk.end());
    std::set<uint32_t> inserted;
    for (const Op& op : w.ops) {
        CHECK(op.type == OpType::Insert);
        CHECK_FALSE(bulk_set.contains(op.key_idx));
        inserted.insert(op.key_idx);
    }
    CHECK(inserted.size() == 500);
}

TEST_CASE("delete-only removes a random half of a full bulkload") {
    Corpus corpus = small_corpus(1000);
    WorkloadSpec spec;
    spec.kind = WorkloadKind::DeleteOnly;
    Workload w = gen_workload(spec, corpus);
    CHECK(w.bulk.size() == 1000);
    CHECK(w.ops.size() == 500);
    std::set<uint32_t> deleted;
    for (const Op& op : w.ops) {
        CHECK(op.type == OpType::Delete);
        deleted.insert(op.key_idx);
    }
    CHECK(deleted.size() == 500);
}

TEST_CASE("same seed reproduces the stream") {
    Corpus corpus = small_corpus(400);
    WorkloadSpec spec;
    spec.kind = WorkloadKind::A;
    spec.op_count = 5000;
    spec.seed = 1234;
    Workload w1 = gen_workload(spec, corpus);
    Workload w2 = gen_workload(spec, corpus);
    REQUIRE(w1.ops.size() == w2.ops.size());
    for (size_t i = 0; i < w1.ops.size(); ++i) {
        CHECK(w1.ops[i].type == w2.ops[i].type);
        CHECK(w1.ops[i].key_idx == w2.ops[i].key_idx);
        CHECK(w1.ops[i].value == w2.ops[i].value);
    }
}

TEST_CASE("workload mixes stay near their nominal fractions") {
    Corpus corpus = small_corpus(2000);
    auto fraction_of = [&](WorkloadKind kind, OpType type) {
        WorkloadSpec spec;
        spec.kind = kind;
        spec.op_count = 20000;
        Workload w = gen_workload(spec, corpus);
        size_t hits = 0;
        for (const Op& op : w.ops) hits += op.type == type;
        return double(hits) / double(w.ops.size());
    };
    CHECK(fraction_of(WorkloadKind::A, OpType::Read) == doctest::Approx(0.5).epsilon(0.05));
    CHECK(fraction_of(WorkloadKind::B, OpType::Update) ==
          doctest::Approx(0.05).epsilon(0.2));
    CHECK(fraction_of(WorkloadKind::E, OpType::Scan) ==
          doctest::Approx(0.95).epsilon(0.05));
    CHECK(fraction_of(WorkloadKind::F, OpType::ReadModifyWrite) ==
          doctest::Approx(0.5).epsilon(0.05));
    CHECK(fraction_of(WorkloadKind::D, OpType::Insert) ==
          doctest::Approx(0.05).epsilon(0.2));
}

TEST_CASE("zipf rank-one to rank-two frequency ratio is near two") {
    ZipfSampler zipf(1000, 1.0);
    std::mt19937_64 rng(77);
    size_t rank1 = 0, rank2 = 0;
    for (int i = 0; i < 1000000; ++i) {
        size_t r = zipf.draw(rng);
        rank1 += r == 0;
        rank2 += r == 1;
    }
    double ratio = double(rank1) / double(rank2);
    CHECK(ratio >= 1.8);
    CHECK(ratio <= 2.2);
}

TEST_CASE("zipf rejects workloads with structural writes") {
    Corpus corpus = small_corpus(100);
    WorkloadSpec spec;
    spec.kind = WorkloadKind::InsertOnly;
    spec.dist.zipf = true;
    CHECK_THROWS_AS(gen_workload(spec, corpus), std::invalid_argument);
    spec.kind = WorkloadKind::A;
    CHECK_NOTHROW(gen_workload(spec, corpus));
}

TEST_CASE("bench on an empty stream reports zeros") {
    Corpus corpus = small_corpus(50);
    WorkloadSpec spec;
    spec.kind = WorkloadKind::C;
    spec.op_count = 0;
    Workload w = gen_workload(spec, corpus);
    auto idx = make_adapter(AdapterKind::Lits);
    BenchReport report = run_bench(*idx, w);
    CHECK(report.op_count == 0);
    CHECK(report.throughput_mops == 0.0);
    for (size_t t = 0; t < kOpTypeCount; ++t) CHECK(report.op_counts[t] == 0);
}

TEST_CASE("verified bench passes for every adapter and workload kind") {
    Corpus corpus = small_corpus(3000);
    BenchOptions opts;
    opts.verify = true;
    opts.verify_fraction = 0.2;
    for (auto kind : {AdapterKind::Lits, AdapterKind::Lit, AdapterKind::Trie,
                      AdapterKind::Oracle}) {
        for (auto wk : {WorkloadKind::A, WorkloadKind::D, WorkloadKind::E,
                        WorkloadKind::InsertOnly, WorkloadKind::DeleteOnly}) {
            WorkloadSpec spec;
            spec.kind = wk;
            spec.op_count = 4000;
            spec.seed = 42;
            Workload w = gen_workload(spec, corpus);
            auto idx = make_adapter(kind);
            BenchReport report = run_bench(*idx, w, opts);
            CHECK(report.verified_ops > 0);
            CHECK(report.final_key_count == idx->size());
        }
    }
}

TEST_CASE("rmw counts as one operation") {
    Corpus corpus = small_corpus(200);
    WorkloadSpec spec;
    spec.kind = WorkloadKind::F;
    spec.op_count = 1000;
    Workload w = gen_workload(spec, corpus);
    auto idx = make_adapter(AdapterKind::Lits);
    BenchReport report = run_bench(*idx, w);
    uint64_t total = 0;
    for (size_t t = 0; t < kOpTypeCount; ++t) total += report.op_counts[t];
    CHECK(total == 1000);
    CHECK(report.op_counts[size_t(OpType::ReadModifyWrite)] > 0);
}

TEST_CASE("report json schema is stable on a fixed seed") {
    Corpus corpus = small_corpus(100, 9);
    WorkloadSpec spec;
    spec.kind = WorkloadKind::A;
    spec.op_count = 200;
    spec.seed = 7;
    Workload w = gen_workload(spec, corpus);
    auto idx = make_adapter(AdapterKind::Lits);
    BenchReport report = run_bench(*idx, w);
    auto j = nlohmann::json::parse(report.to_json());

    // Deterministic fields are frozen; timing fields only need to exist.
    CHECK(j["version"] == 1);
    CHECK(j["workload"] == "a");
    CHECK(j["dist"] == "uniform");
    CHECK(j["index"] == "lits");
    CHECK(j["seed"] == 7);
    CHECK(j["bulk_keys"] == 80);
    CHECK(j["op_count"] == 200);
    uint64_t reads = j["op_counts"]["read"].get<uint64_t>();
    uint64_t updates = j["op_counts"]["update"].get<uint64_t>();
    CHECK(reads + updates == 200);
    for (const char* field :
         {"mean_latency_ns", "bulkload_seconds", "elapsed_seconds",
          "throughput_mops", "final_key_count", "verified_ops", "index_stats"})
        CHECK(j.contains(field));
    for (const char* field :
         {"key_count", "model_nodes", "compact_nodes", "single_entries", "subtries",
          "avg_base_height", "max_base_height", "bytes_used", "resize_count"})
        CHECK(j["index_stats"].contains(field));

    // Same seed, same deterministic content.
    auto idx2 = make_adapter(AdapterKind::Lits);
    auto j2 = nlohmann::json::parse(run_bench(*idx2, gen_workload(spec, corpus)).to_json());
    CHECK(j2["op_counts"] == j["op_counts"]);
    CHECK(j2["final_key_count"] == j["final_key_count"]);
}

TEST_CASE("sampled read latency probe returns something positive") {
    Corpus corpus = small_corpus(2000);
    auto idx = make_adapter(AdapterKind::Lits);
    std::vector<std::pair<std::string, uint64_t>> bulk;
    for (size_t i = 0; i < corpus.keys.size(); ++i)
        bulk.emplace_back(corpus.keys[i], corpus.values[i]);
    idx->bulkload(std::move(bulk));
    double ns = sample_read_latency_ns(*idx, corpus.keys, 20000, 3);
    CHECK(ns > 0.0);
    CHECK(ns < 1e6);
}

TEST_SUITE_END();
