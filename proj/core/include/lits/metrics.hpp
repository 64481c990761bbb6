#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lits::metrics {

// Length of the longest prefix shared by two strings.
size_t common_prefix_len(std::string_view a, std::string_view b);

// Longest prefix shared by every string in the list. A single-string list
// yields the string's own length.
size_t common_prefix_len(std::span<const std::string_view> strings);

// Partial key length of the i-th string in a sorted distinct list: the
// shortest prefix separating it from its neighbors, minus the prefix the
// whole list shares. Boundary elements use their single existing neighbor.
size_t partial_key_len(std::span<const std::string_view> sorted, size_t i);
size_t partial_key_len(std::span<const std::string_view> sorted, size_t i,
                       size_t list_cpl);

// Mean partial key length; the hardness metric for a string set. Requires a
// sorted, distinct list of at least two strings.
double gpkl(std::span<const std::string_view> sorted);

// Mean of per-sublist gpkls over disjoint groups of g consecutive strings.
// A trailing group of one string is merged into the previous group.
double local_gpkl(std::span<const std::string_view> sorted, size_t group = 32);

// Distinct k-byte prefixes divided by the number of keys; keys shorter than
// k contribute their whole string.
double prefix_skew_ratio(std::span<const std::string_view> keys, size_t k);

// Fraction of keys landing in distinct slots when a cdf model maps them
// into an array of scale_factor * |keys| slots.
double unique_rate(const std::function<double(std::string_view)>& cdf_model,
                   std::span<const std::string_view> keys, uint64_t scale_factor);

// Positional base-256 fraction of the bytes; the simple-model baseline cdf.
double sm_encode(std::string_view s);

std::vector<std::string_view> as_views(std::span<const std::string> strings);

}  // namespace lits::metrics
