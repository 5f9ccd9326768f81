#pragma once

#include <cstdint>
#include <vector>

#include "nilm/events.hpp"
#include "nilm/types.hpp"

namespace nilm {

struct DisaggConfig {
    double alpha = 0.5;
    double beta = 0.5;
    std::int64_t window = 3600; // s
    std::int64_t overlap = 300; // lookahead beyond each decision span, s
    int particles = 40;
    int iterations = 200;
    double inertia = 0.72;
    double cognitive = 1.49;
    double social = 1.49;
    std::uint64_t seed = 1;
    // Optional per-event device hint (index into events, -1 = none); seeds one particle.
    std::vector<int> hint_assignment;
};

// Eq-style windowed error: alpha * sum of squared 6-channel deviations plus
// beta * the same on first differences, over [a, b).
double disagg_error(const PowerSeries& measured, const PowerSeries& reconstructed, double alpha, double beta,
                    std::int64_t a, std::int64_t b);

struct WindowReport {
    std::int64_t a = 0, b = 0;
    int candidate_events = 0;
    double best_error = 0.0;
    double empty_error = 0.0; // error of leaving every candidate unassigned
};

struct DisaggResult {
    StateChangesMatrix states;
    PowerSeries reconstructed;
    std::vector<Vec6> epsilon;          // per-sample always-on estimate
    std::vector<int> event_assignment;  // per event: device index or -1
    std::vector<WindowReport> windows;
    double total_error = 0.0;
};

// Assigns detected events to device profiles window by window with a particle
// swarm over relaxed per-event option scores. Devices still ON at a window
// boundary carry into the next window as fixed context. Deterministic given
// the config seed.
DisaggResult pso_disaggregate(const PowerSeries& series, const std::vector<DeviceProfile>& profiles,
                              const EventSet& events, const DisaggConfig& cfg);

} // namespace nilm
