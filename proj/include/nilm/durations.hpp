#pragma once

#include <cstdint>
#include <vector>

#include "nilm/events.hpp"

namespace nilm {

struct DurationSample {
    std::int64_t on_time = 0;
    std::int64_t duration = 0; // seconds until the next OFF in the same cluster
};

struct GmmComponent {
    double weight = 1.0;
    double mean = 0.0;
    double variance = 1.0;
};

struct GmmModel {
    std::vector<GmmComponent> components;
    double log_likelihood = 0.0;
    int variance_clamps = 0; // EM collapse events, variance held at the floor
    int m() const { return static_cast<int>(components.size()); }
};

// Run-time group: events of one cluster sharing a characteristic ON-duration.
struct Group {
    int cluster = 0;
    std::int64_t duration = 1; // rounded component mean, >= 1
    std::vector<DurationSample> members;
};

// Earliest-subsequent pairing: each ON takes the first unconsumed OFF after it;
// surplus events of either kind are dropped.
std::vector<DurationSample> pair_on_off(const std::vector<Event>& cluster_events);

inline constexpr double kGmmVarianceFloor = 1.0; // s^2

// 1-D EM fit with deterministic quantile initialization. The log-likelihood is
// checked to be non-decreasing on every step that did not clamp a variance.
GmmModel fit_gmm(const std::vector<double>& durations, int m, std::uint64_t seed);

struct BicSelection {
    int m_opt = 1;
    GmmModel model;
    std::vector<std::pair<int, double>> bic_curve; // (m, BIC) for every fitted m
};

// BIC(m) = 0.5*(3m-1)*ln N - log-likelihood; m grows while the next model
// improves BIC by more than delta_threshold.
BicSelection select_m_bic(const std::vector<double>& durations, int m_max, double delta_threshold,
                          std::uint64_t seed);

// Weighted-density argmax per sample; ties go to the lower component index.
// Empty groups are dropped.
std::vector<Group> split_groups(int cluster_index, const std::vector<DurationSample>& samples,
                                const GmmModel& gmm);

} // namespace nilm
