#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nilm/vec6.hpp"

namespace nilm {

struct PowerSample {
    std::int64_t t = 0; // sample index, seconds since series start
    Vec6 p;
};

// Uniformly sampled 1 Hz six-channel power record.
struct PowerSeries {
    std::int64_t start_timestamp = 0; // epoch seconds of sample 0
    std::vector<Vec6> samples;

    std::int64_t length() const { return static_cast<std::int64_t>(samples.size()); }
    double total_active(std::int64_t t) const { return samples[static_cast<std::size_t>(t)].active_total(); }

    // Epoch timestamp of sample t.
    std::int64_t timestamp_at(std::int64_t t) const { return start_timestamp + t; }
};

// One operational mode of one device: dynamic trajectory, stable-state vector,
// and the cluster center (W/s switching signature) it was derived from.
struct DeviceProfile {
    int id = 0;
    std::vector<Vec6> dynamic; // l(1..d), absolute watts / vars
    Vec6 stable_state;
    Vec6 cluster_center; // W/s at the ON event
    std::int64_t duration() const { return static_cast<std::int64_t>(dynamic.size()); }
};

struct StateChange {
    std::int64_t t = 0;
    std::int32_t device = 0;
    double value = 0.0; // +-1 for the discrete variant, [-1,1] for the probabilistic one
};

// Sparse T x M matrix of per-device switching marks. Discrete entries are
// integers in {-1,+1}; the probabilistic variant holds model outputs in [-1,1].
struct StateChangesMatrix {
    std::int64_t rows = 0; // T
    std::int32_t cols = 0; // M
    bool discrete = true;
    std::vector<StateChange> entries; // kept sorted by (t, device)

    void sort_entries();
    // Discrete validity: per device the running state stays within {0,1}.
    bool valid_discrete(std::string* why = nullptr) const;
};

// Explicit densification; entries land at (t, device), zeros elsewhere.
std::vector<std::vector<double>> densify(const StateChangesMatrix& s);

// Inverse of densify for round-trips: nonzero cells become entries.
StateChangesMatrix sparsify(const std::vector<std::vector<double>>& dense, bool discrete);

} // namespace nilm
