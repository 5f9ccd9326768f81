#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nilm/ingest.hpp"
#include "nilm/vec6.hpp"

namespace nilm {

enum class EventKind { On, Off };

struct Event {
    std::int64_t t = 0; // index into the derivative series
    EventKind kind = EventKind::On;
    Vec6 signature; // dP(t) over all six channels, W/s
};

struct EventSet {
    std::vector<Event> events; // strictly increasing t
    double threshold = 0.0;    // W/s used for detection
};

// Strict local extrema of the total active-power derivative above the threshold.
// ON: dPtot(t-1) < dPtot(t) > dPtot(t+1) and dPtot(t) >= threshold; OFF mirrored.
// Boundary samples have no two neighbors and can never be events.
EventSet detect_events(const DerivativeSeries& deriv, double threshold);

void write_events_csv(const std::string& path, const EventSet& events);

} // namespace nilm
