#pragma once

#include <cstdint>
#include <vector>

#include "nilm/types.hpp"

namespace nilm {

struct Metrics {
    double rmse = 0.0;     // W
    double mae = 0.0;      // W
    double mape = 0.0;     // %
    double energy_e = 0.0; // %, signed
    std::int64_t mape_excluded = 0; // samples below the MAPE floor
};

inline constexpr double kMapeFloorW = 10.0;

// All metrics on the sum of active phases over [a, b).
Metrics metrics(const PowerSeries& measured, const PowerSeries& predicted, std::int64_t a, std::int64_t b,
                double mape_floor_w = kMapeFloorW);

// Aggregate of per-window metric rows.
struct MetricsSummary {
    Metrics mean;
    Metrics stddev;          // sample standard deviation across windows
    Metrics stderr_of_mean;  // stddev / sqrt(n)
    std::int64_t windows = 0;
};

MetricsSummary summarize(const std::vector<Metrics>& rows);

// Verbatim copy of the same 900 s slot seven days earlier.
PowerSeries persistence_7d(const PowerSeries& history, std::int64_t t0, std::int64_t horizon = 900);

// Verbatim copy of the window immediately before t0.
PowerSeries persistence_15min(const PowerSeries& history, std::int64_t t0, std::int64_t horizon = 900);

} // namespace nilm
