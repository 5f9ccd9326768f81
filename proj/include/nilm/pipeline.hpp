#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nilm/clustering.hpp"
#include "nilm/config.hpp"
#include "nilm/durations.hpp"
#include "nilm/events.hpp"
#include "nilm/forecast.hpp"
#include "nilm/pso.hpp"
#include "nilm/types.hpp"

namespace nilm {

// Typed view of the configuration with every threshold pinned to its default.
struct PipelineConfig {
    std::uint64_t seed = 1;

    double event_threshold = 500.0; // W/s

    int k_max = 50;
    int kmeans_restarts = 10;
    bool clean = true;
    double sigma_factor = 2.0;
    int outlier_k = 10;
    double rho_min = 0.9;
    double ape_max = 0.1;

    int m_max = 8;
    double delta_bic = 2.0;
    std::int64_t max_duration = 86400;
    int min_group_events = 5;

    DisaggConfig disagg;

    MlpConfig mlp;
    int past_pool = 60;
    int week_pool = 15;
    int output_steps = 60;
    std::int64_t horizon = 900;
    std::int64_t past_window = 3600;
    double reconstruct_threshold = 0.1;
    std::int64_t train_stride = 300;
    std::int64_t test_days = 2;

    double mape_floor = 10.0;

    static PipelineConfig from(const Config& cfg);
    // Every key the configuration may contain.
    static std::vector<std::string> known_keys();
};

struct ClusterDiagnostics {
    int cluster = 0;
    std::vector<std::pair<int, double>> bic_curve;
    std::vector<double> durations;
    int m_opt = 0;
};

struct ExtractionResult {
    EventSet events;
    std::vector<std::size_t> on_index, off_index; // event indices by kind
    Clustering clusters;                          // final ON clustering
    std::vector<int> on_assignment;               // per ON event
    std::vector<int> off_assignment;              // per OFF event
    bool weak_separation = false;
    std::vector<std::pair<int, double>> ch_curve;
    std::vector<Group> groups;
    std::vector<DeviceProfile> profiles;
    std::vector<int> profile_members;
    std::vector<ClusterDiagnostics> cluster_diagnostics;
    std::vector<std::string> notes;
};

// events -> clusters -> clean -> merge -> OFF assignment -> durations -> GMM
// groups -> median blending.
ExtractionResult extract_profiles(const PowerSeries& series, const PipelineConfig& cfg);

struct ForecastDataset {
    FeatureLayout layout;
    std::vector<std::vector<double>> inputs;
    std::vector<std::vector<double>> targets;
    std::vector<std::int64_t> t0s;
};

// Workday prediction anchors with full 7-day history, stopping short of the
// held-out test range.
ForecastDataset build_forecast_dataset(const StateChangesMatrix& states, std::int64_t start_timestamp,
                                       const PipelineConfig& cfg, std::int64_t train_end);

// Evaluation anchors (non-overlapping horizon windows on workdays) in [from, to).
std::vector<std::int64_t> forecast_anchors(std::int64_t from, std::int64_t to, std::int64_t horizon,
                                           std::int64_t start_timestamp);

} // namespace nilm
