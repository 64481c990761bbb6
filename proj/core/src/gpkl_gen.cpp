#include <algorithm>
#include <cmath>
#include <random>

#include "lits/metrics.hpp"
#include "lits/pmss.hpp"

namespace lits::pmss {

namespace {

std::string random_string(std::mt19937_64& rng, size_t len_min, size_t len_max,
                          uint32_t alphabet) {
    size_t len = std::uniform_int_distribution<size_t>(len_min, len_max)(rng);
    std::string s(len, 'a');
    std::uniform_int_distribution<uint32_t> ch(0, alphabet - 1);
    for (char& c : s) c = char('a' + ch(rng));
    return s;
}

double gpkl_of(const std::vector<std::string>& list) {
    auto views = metrics::as_views(list);
    return metrics::gpkl(views);
}

// Keeps the list sorted, distinct, and exactly n strings long, topping up
// with fresh random strings when dedup removed some.
void normalize(std::vector<std::string>& list, size_t n, std::mt19937_64& rng,
               const GpklGenConfig& cfg) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    while (list.size() < n) {
        size_t missing = n - list.size();
        for (size_t i = 0; i < missing; ++i)
            list.push_back(random_string(rng, cfg.base_len_min, cfg.base_len_max,
                                         cfg.alphabet));
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
}

}  // namespace

std::vector<std::string> gen_gpkl_dataset(const GpklGenConfig& cfg) {
    if (cfg.n < 2) throw std::invalid_argument("gpkl gen: n must be >= 2");
    if (cfg.alphabet < 2 || cfg.alphabet > 26)
        throw std::invalid_argument("gpkl gen: alphabet must be in [2, 26]");
    std::mt19937_64 rng(cfg.seed);

    std::vector<std::string> dict;
    dict.reserve(cfg.dict_size);
    for (size_t i = 0; i < cfg.dict_size; ++i)
        dict.push_back(random_string(rng, cfg.dict_len_min, cfg.dict_len_max,
                                     cfg.alphabet));

    std::vector<std::string> list;
    list.reserve(cfg.n + 64);
    for (size_t i = 0; i < cfg.n; ++i)
        list.push_back(random_string(rng, cfg.base_len_min, cfg.base_len_max,
                                     cfg.alphabet));
    normalize(list, cfg.n, rng, cfg);

    // Group size scales with n so large lists converge in a bounded number
    // of mutate-and-sort passes.
    size_t k = std::max(cfg.group, cfg.n / 1024);
    k = std::min(k, std::max<size_t>(2, cfg.n / 2));

    double g = gpkl_of(list);
    size_t windows_used = 0;
    while (g < cfg.target_gpkl) {
        if (windows_used >= cfg.max_windows) throw GpklTargetError(g, cfg.target_gpkl);
        double gap = cfg.target_gpkl - g;
        auto windows = size_t(std::ceil(gap * double(cfg.n) / (double(k) * 4.0) * 0.5));
        windows = std::clamp<size_t>(windows, 1, std::max<size_t>(1, cfg.n / (k * 4)));
        windows = std::min(windows, cfg.max_windows - windows_used);

        for (size_t w = 0; w < windows; ++w) {
            size_t start =
                std::uniform_int_distribution<size_t>(0, list.size() - k)(rng);
            auto group = std::span<const std::string>(list).subspan(start, k);
            auto group_views = metrics::as_views(group);
            size_t cpl = metrics::common_prefix_len(group_views);
            size_t j = std::uniform_int_distribution<size_t>(0, cpl)(rng);
            const std::string& piece = dict[std::uniform_int_distribution<size_t>(
                0, dict.size() - 1)(rng)];
            for (size_t i = start; i < start + k; ++i) {
                if (list[i].size() + piece.size() > 255) continue;
                list[i].insert(j, piece);
            }
        }
        windows_used += windows;
        normalize(list, cfg.n, rng, cfg);
        g = gpkl_of(list);
    }
    return list;
}

}  // namespace lits::pmss
