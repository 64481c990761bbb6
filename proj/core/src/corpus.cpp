#include "lits/corpus.hpp"

#include <fstream>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include "lits/hpt.hpp"

namespace lits {

namespace {
bool all_ascii(const std::string& s) {
    for (unsigned char c : s)
        if (c >= kAlphabetSize) return false;
    return true;
}
}  // namespace

Corpus load_corpus(const std::string& path, uint64_t value_seed) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("corpus: cannot open " + path);

    Corpus corpus;
    corpus.source_path = path;
    std::unordered_set<std::string> seen;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            ++corpus.dropped_empty;
            continue;
        }
        if (line.size() > 255) {
            ++corpus.dropped_too_long;
            continue;
        }
        if (!all_ascii(line)) {
            ++corpus.dropped_non_ascii;
            continue;
        }
        if (!seen.insert(line).second) {
            ++corpus.dropped_dup;
            continue;
        }
        corpus.keys.push_back(line);
    }
    if (corpus.keys.empty()) throw std::runtime_error("corpus: no usable keys in " + path);

    std::mt19937_64 rng(value_seed);
    corpus.values.reserve(corpus.keys.size());
    for (size_t i = 0; i < corpus.keys.size(); ++i) corpus.values.push_back(rng());
    return corpus;
}

Corpus corpus_from_keys(std::vector<std::string> keys, uint64_t value_seed) {
    Corpus corpus;
    corpus.keys = std::move(keys);
    std::mt19937_64 rng(value_seed);
    corpus.values.reserve(corpus.keys.size());
    for (size_t i = 0; i < corpus.keys.size(); ++i) corpus.values.push_back(rng());
    return corpus;
}

}  // namespace lits
