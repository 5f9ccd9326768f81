#pragma once

#include <cstdint>
#include <vector>

#include "nilm/types.hpp"

namespace nilm {

// Dense per-device state series (row-major, rows x cols).
struct StateSeries {
    std::int64_t rows = 0;
    std::int32_t cols = 0;
    std::vector<double> values;

    double at(std::int64_t t, std::int32_t device) const {
        return values[static_cast<std::size_t>(t) * static_cast<std::size_t>(cols) +
                      static_cast<std::size_t>(device)];
    }
    double& at(std::int64_t t, std::int32_t device) {
        return values[static_cast<std::size_t>(t) * static_cast<std::size_t>(cols) +
                      static_cast<std::size_t>(device)];
    }
};

// Cumulative sum of state changes per device (no normalization applied here).
StateSeries integrate_states(const StateChangesMatrix& s);

// Exact inverse of integrate_states: first difference with state(-1) = 0.
// Float inputs produce the probabilistic variant.
StateChangesMatrix differentiate_states(const StateSeries& states, bool discrete);

// Sparse state timeline with O(log n) range averages, for feature extraction
// over month-scale histories.
class StateTimeline {
public:
    explicit StateTimeline(const StateChangesMatrix& s);

    std::int32_t devices() const { return cols_; }
    std::int64_t length() const { return rows_; }

    double state_at(std::int32_t device, std::int64_t t) const;
    // Mean state over [a, b).
    double average_state(std::int32_t device, std::int64_t a, std::int64_t b) const;
    // Largest |state| reached over [a, b).
    double max_abs_state(std::int32_t device, std::int64_t a, std::int64_t b) const;

private:
    struct ChangePoint {
        std::int64_t t;
        double state;    // value from t onward
        double integral; // integral of the state over [0, t)
    };
    std::int64_t rows_ = 0;
    std::int32_t cols_ = 0;
    std::vector<std::vector<ChangePoint>> points_;

    double integral_up_to(std::int32_t device, std::int64_t t) const;
};

} // namespace nilm
