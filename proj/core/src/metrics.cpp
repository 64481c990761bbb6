#include "lits/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>
#include <vector>

namespace lits::metrics {

size_t common_prefix_len(std::string_view a, std::string_view b) {
    size_t n = std::min(a.size(), b.size());
    size_t i = 0;
    while (i < n && a[i] == b[i]) ++i;
    return i;
}

size_t common_prefix_len(std::span<const std::string_view> strings) {
    if (strings.empty()) throw std::invalid_argument("cpl: empty list");
    if (strings.size() == 1) return strings[0].size();
    // Sorted or not, the shared prefix of all strings is the shared prefix
    // of the extremes; computing pairwise against the first is as cheap.
    size_t cpl = strings[0].size();
    for (size_t i = 1; i < strings.size() && cpl > 0; ++i)
        cpl = std::min(cpl, common_prefix_len(strings[0], strings[i]));
    return cpl;
}

size_t partial_key_len(std::span<const std::string_view> sorted, size_t i,
                       size_t list_cpl) {
    if (sorted.size() < 2) throw std::invalid_argument("pkl: need >= 2 strings");
    if (i >= sorted.size()) throw std::out_of_range("pkl: index out of range");
    size_t neighbor_cpl = 0;
    if (i > 0)
        neighbor_cpl = std::max(neighbor_cpl, common_prefix_len(sorted[i - 1], sorted[i]));
    if (i + 1 < sorted.size())
        neighbor_cpl = std::max(neighbor_cpl, common_prefix_len(sorted[i], sorted[i + 1]));
    return neighbor_cpl + 1 - list_cpl;
}

size_t partial_key_len(std::span<const std::string_view> sorted, size_t i) {
    return partial_key_len(sorted, i, common_prefix_len(sorted));
}

double gpkl(std::span<const std::string_view> sorted) {
    if (sorted.size() < 2) throw std::invalid_argument("gpkl: need >= 2 strings");
    size_t list_cpl = common_prefix_len(sorted);
    // One pass: each adjacent cpl feeds both neighbors' pkl terms.
    size_t prev = 0;
    uint64_t sum = 0;
    for (size_t i = 0; i < sorted.size(); ++i) {
        size_t next = (i + 1 < sorted.size())
                          ? common_prefix_len(sorted[i], sorted[i + 1])
                          : 0;
        size_t neighbor = (i == 0) ? next
                          : (i + 1 == sorted.size()) ? prev
                                                     : std::max(prev, next);
        sum += neighbor + 1 - list_cpl;
        prev = next;
    }
    return double(sum) / double(sorted.size());
}

double local_gpkl(std::span<const std::string_view> sorted, size_t group) {
    if (sorted.size() < 2) throw std::invalid_argument("local_gpkl: need >= 2 strings");
    if (group < 2) throw std::invalid_argument("local_gpkl: group size must be >= 2");
    double sum = 0;
    size_t groups = 0;
    size_t pos = 0;
    while (pos < sorted.size()) {
        size_t len = std::min(group, sorted.size() - pos);
        if (sorted.size() - pos - len == 1) ++len;  // fold a lone trailing string in
        sum += gpkl(sorted.subspan(pos, len));
        ++groups;
        pos += len;
    }
    return sum / double(groups);
}

double prefix_skew_ratio(std::span<const std::string_view> keys, size_t k) {
    if (keys.empty()) throw std::invalid_argument("prefix_skew_ratio: empty key set");
    if (k < 1) throw std::invalid_argument("prefix_skew_ratio: k must be >= 1");
    std::unordered_set<std::string_view> prefixes;
    prefixes.reserve(keys.size());
    for (std::string_view key : keys) prefixes.insert(key.substr(0, k));
    return double(prefixes.size()) / double(keys.size());
}

double unique_rate(const std::function<double(std::string_view)>& cdf_model,
                   std::span<const std::string_view> keys, uint64_t scale_factor) {
    if (keys.empty()) throw std::invalid_argument("unique_rate: empty key set");
    if (scale_factor < 1) throw std::invalid_argument("unique_rate: SF must be >= 1");
    const uint64_t slots = scale_factor * keys.size();
    std::vector<bool> occupied(slots, false);
    uint64_t valid = 0;
    for (std::string_view key : keys) {
        double x = cdf_model(key);
        auto slot = uint64_t(std::floor(x * double(slots)));
        slot = std::min(slot, slots - 1);
        if (!occupied[slot]) {
            occupied[slot] = true;
            ++valid;
        }
    }
    return double(valid) / double(keys.size());
}

double sm_encode(std::string_view s) {
    double y = 0.0;
    double scale = 1.0 / 256.0;
    for (unsigned char c : s) {
        y += double(c) * scale;
        scale /= 256.0;
        if (scale == 0.0) break;
    }
    return y;
}

std::vector<std::string_view> as_views(std::span<const std::string> strings) {
    return {strings.begin(), strings.end()};
}

}  // namespace lits::metrics
