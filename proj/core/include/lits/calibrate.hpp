#pragma once

#include <functional>
#include <string>

#include "lits/pmss.hpp"

namespace lits::pmss {

struct CalibrationOptions {
    bool fast = false;  // cap the size grid at 2^20 so a full pass stays desk-sized
    uint64_t seed = 99;
    size_t max_probe_ops = 1 << 16;  // per-cell read probes
    std::function<void(const std::string&)> progress;
};

// Offline benchmarking pass: for every (gpkl, n) grid cell, generates a
// matching dataset, bulkloads both structure kinds with half the keys,
// times inserting the other half (write latency) and random hits on the
// result (read latency). Single-threaded by design.
LatencyTables calibrate(const CalibrationOptions& options = {});

}  // namespace lits::pmss
