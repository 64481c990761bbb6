#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lits {

// Ingested key set: deduplicated, ASCII, 1..255 bytes per key, with a
// seeded random 64-bit value per key.
struct Corpus {
    std::vector<std::string> keys;
    std::vector<uint64_t> values;
    std::string source_path;
    uint64_t dropped_non_ascii = 0;
    uint64_t dropped_too_long = 0;
    uint64_t dropped_dup = 0;
    uint64_t dropped_empty = 0;
};

// Reads newline-delimited keys, filtering lines that violate the corpus
// invariants. Throws std::runtime_error on unreadable files or when no key
// survives.
Corpus load_corpus(const std::string& path, uint64_t value_seed = 42);

// Wraps an in-memory key list (already valid and distinct) as a corpus.
Corpus corpus_from_keys(std::vector<std::string> keys, uint64_t value_seed = 42);

}  // namespace lits
