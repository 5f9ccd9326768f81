#include "nilm/pipeline.hpp"

#include <algorithm>
#include <stdexcept>

#include "nilm/ingest.hpp"
#include "nilm/profiles.hpp"

namespace nilm {

namespace {
constexpr std::int64_t kSecondsPerDay = 86400;

int weekday_of(std::int64_t epoch_seconds) {
    std::int64_t day = epoch_seconds / kSecondsPerDay;
    return static_cast<int>((day % 7 + 7 + 3) % 7);
}
} // namespace

PipelineConfig PipelineConfig::from(const Config& cfg) {
    PipelineConfig p;
    p.seed = static_cast<std::uint64_t>(cfg.get_int("run", "seed", 1));

    p.event_threshold = cfg.get_float("events", "threshold_w_per_s", 500.0);

    p.k_max = static_cast<int>(cfg.get_int("clustering", "k_max", 50));
    p.kmeans_restarts = static_cast<int>(cfg.get_int("clustering", "restarts", 10));
    p.clean = cfg.get_bool("clustering", "clean_outliers", true);
    p.sigma_factor = cfg.get_float("clustering", "sigma_factor", 2.0);
    p.outlier_k = static_cast<int>(cfg.get_int("clustering", "outlier_k", 10));
    p.rho_min = cfg.get_float("clustering", "rho_min", 0.9);
    p.ape_max = cfg.get_float("clustering", "ape_max", 0.1);

    p.m_max = static_cast<int>(cfg.get_int("durations", "m_max", 8));
    p.delta_bic = cfg.get_float("durations", "delta_bic", 2.0);
    p.max_duration = cfg.get_int("durations", "max_duration_s", 86400);
    p.min_group_events = static_cast<int>(cfg.get_int("durations", "min_group_events", 5));

    p.disagg.alpha = cfg.get_float("disaggregation", "alpha", 0.5);
    p.disagg.beta = cfg.get_float("disaggregation", "beta", 0.5);
    p.disagg.window = cfg.get_int("disaggregation", "window_s", 3600);
    p.disagg.overlap = cfg.get_int("disaggregation", "overlap_s", 300);
    p.disagg.particles = static_cast<int>(cfg.get_int("disaggregation", "particles", 40));
    p.disagg.iterations = static_cast<int>(cfg.get_int("disaggregation", "iterations", 200));
    p.disagg.inertia = cfg.get_float("disaggregation", "inertia", 0.72);
    p.disagg.cognitive = cfg.get_float("disaggregation", "cognitive", 1.49);
    p.disagg.social = cfg.get_float("disaggregation", "social", 1.49);
    p.disagg.seed = p.seed;

    p.mlp.hidden_neurons = static_cast<int>(cfg.get_int("forecast", "hidden_neurons", 214));
    p.mlp.hidden_layers = static_cast<int>(cfg.get_int("forecast", "hidden_layers", 3));
    p.mlp.dropout = cfg.get_float("forecast", "dropout", 0.05);
    p.mlp.learning_rate = cfg.get_float("forecast", "learning_rate", 0.01);
    p.mlp.batch_size = static_cast<int>(cfg.get_int("forecast", "batch_size", 2048));
    p.mlp.max_epochs = static_cast<int>(cfg.get_int("forecast", "max_epochs", 200));
    p.mlp.patience = static_cast<int>(cfg.get_int("forecast", "patience", 5));
    p.mlp.momentum = cfg.get_float("forecast", "momentum", 0.0);
    p.mlp.seed = p.seed;
    const std::string loss = cfg.get_string("forecast", "loss", "msle-diff");
    if (loss == "msle-diff") p.mlp.loss = LossKind::MsleDiff;
    else if (loss == "msle-ratio") p.mlp.loss = LossKind::MsleRatio;
    else throw ConfigError("[forecast].loss must be \"msle-diff\" or \"msle-ratio\"");

    p.past_pool = static_cast<int>(cfg.get_int("forecast", "past_pool", 60));
    p.week_pool = static_cast<int>(cfg.get_int("forecast", "week_pool", 15));
    p.output_steps = static_cast<int>(cfg.get_int("forecast", "output_steps", 60));
    p.horizon = cfg.get_int("forecast", "horizon_s", 900);
    p.past_window = cfg.get_int("forecast", "past_window_s", 3600);
    p.reconstruct_threshold = cfg.get_float("forecast", "reconstruct_threshold", 0.1);
    p.train_stride = cfg.get_int("forecast", "train_stride_s", 300);
    p.test_days = cfg.get_int("evaluate", "test_days", 2);

    p.mape_floor = cfg.get_float("evaluate", "mape_floor_w", 10.0);
    return p;
}

std::vector<std::string> PipelineConfig::known_keys() {
    return {
        "run.seed",
        "run.out",
        "scenario.preset",
        "scenario.days",
        "ingest.timestamp_column",
        "ingest.p0_column",
        "ingest.p1_column",
        "ingest.p2_column",
        "ingest.p3_column",
        "ingest.p4_column",
        "ingest.p5_column",
        "events.threshold_w_per_s",
        "clustering.k_max",
        "clustering.restarts",
        "clustering.clean_outliers",
        "clustering.sigma_factor",
        "clustering.outlier_k",
        "clustering.rho_min",
        "clustering.ape_max",
        "durations.m_max",
        "durations.delta_bic",
        "durations.max_duration_s",
        "durations.min_group_events",
        "disaggregation.alpha",
        "disaggregation.beta",
        "disaggregation.window_s",
        "disaggregation.overlap_s",
        "disaggregation.particles",
        "disaggregation.iterations",
        "disaggregation.inertia",
        "disaggregation.cognitive",
        "disaggregation.social",
        "forecast.hidden_neurons",
        "forecast.hidden_layers",
        "forecast.dropout",
        "forecast.learning_rate",
        "forecast.batch_size",
        "forecast.max_epochs",
        "forecast.patience",
        "forecast.loss",
        "forecast.momentum",
        "forecast.past_pool",
        "forecast.week_pool",
        "forecast.output_steps",
        "forecast.horizon_s",
        "forecast.past_window_s",
        "forecast.reconstruct_threshold",
        "forecast.train_stride_s",
        "evaluate.mape_floor_w",
        "evaluate.test_days",
    };
}

ExtractionResult extract_profiles(const PowerSeries& series, const PipelineConfig& cfg) {
    ExtractionResult result;
    const DerivativeSeries deriv = derivative(series);
    result.events = detect_events(deriv, cfg.event_threshold);

    std::vector<Vec6> on_sigs, off_sigs;
    for (std::size_t e = 0; e < result.events.events.size(); ++e) {
        if (result.events.events[e].kind == EventKind::On) {
            result.on_index.push_back(e);
            on_sigs.push_back(result.events.events[e].signature);
        } else {
            result.off_index.push_back(e);
            off_sigs.push_back(result.events.events[e].signature);
        }
    }
    if (on_sigs.size() < 2) throw std::runtime_error("extract_profiles: fewer than 2 ON events detected");

    KSelection sel = select_k(on_sigs, cfg.k_max, cfg.seed, cfg.kmeans_restarts);
    result.ch_curve = sel.ch_curve;
    result.weak_separation = sel.weak_separation;
    if (sel.weak_separation)
        result.notes.push_back("cluster-count selection: no clear maximum in the score curve");

    Clustering clusters = std::move(sel.clustering);
    if (cfg.clean) {
        OutlierCleaning cleaned =
            clean_outliers(clusters, on_sigs, cfg.sigma_factor, cfg.outlier_k, cfg.seed + 17);
        if (cleaned.outliers_moved > 0)
            result.notes.push_back("outlier cleaning moved " + std::to_string(cleaned.outliers_moved) +
                                   " events into " + std::to_string(cleaned.outlier_clusters) +
                                   " extra clusters");
        clusters = std::move(cleaned.clustering);
    }
    if (clusters.k() >= 2) {
        MergeResult merged = merge_clusters(clusters, cfg.rho_min, cfg.ape_max);
        for (const MergeRecord& m : merged.merges)
            result.notes.push_back("merged clusters " + std::to_string(m.first) + " and " +
                                   std::to_string(m.second));
        for (const std::string& d : merged.diagnostics) result.notes.push_back(d);
        clusters = std::move(merged.clustering);
    }
    result.on_assignment = clusters.assignment;
    result.off_assignment = assign_off_events(clusters, off_sigs);
    result.clusters = std::move(clusters);

    // Per-cluster duration modeling and grouping.
    for (int k = 0; k < result.clusters.k(); ++k) {
        std::vector<Event> cluster_events;
        for (std::size_t i = 0; i < result.on_index.size(); ++i)
            if (result.on_assignment[i] == k) cluster_events.push_back(result.events.events[result.on_index[i]]);
        for (std::size_t i = 0; i < result.off_index.size(); ++i)
            if (result.off_assignment[i] == k)
                cluster_events.push_back(result.events.events[result.off_index[i]]);
        std::sort(cluster_events.begin(), cluster_events.end(),
                  [](const Event& a, const Event& b) { return a.t < b.t; });

        std::vector<DurationSample> samples = pair_on_off(cluster_events);
        samples.erase(std::remove_if(samples.begin(), samples.end(),
                                     [&](const DurationSample& s) { return s.duration > cfg.max_duration; }),
                      samples.end());
        if (samples.empty()) continue;

        std::vector<double> durations;
        durations.reserve(samples.size());
        for (const DurationSample& s : samples) durations.push_back(static_cast<double>(s.duration));

        BicSelection bic = select_m_bic(durations, cfg.m_max, cfg.delta_bic,
                                        cfg.seed + static_cast<std::uint64_t>(k) * 131ULL);
        ClusterDiagnostics diag;
        diag.cluster = k;
        diag.bic_curve = bic.bic_curve;
        diag.durations = durations;
        diag.m_opt = bic.m_opt;
        result.cluster_diagnostics.push_back(std::move(diag));

        std::vector<Group> groups = split_groups(k, samples, bic.model);
        for (Group& g : groups) result.groups.push_back(std::move(g));
    }

    // Median blending per sufficiently supported group.
    int next_id = 0;
    for (const Group& g : result.groups) {
        if (static_cast<int>(g.members.size()) < cfg.min_group_events) continue;
        BlendDiagnostics diag;
        try {
            DeviceProfile profile = median_blend(g, series, result.clusters.centers[static_cast<std::size_t>(g.cluster)],
                                                 next_id, &diag);
            result.profiles.push_back(std::move(profile));
            result.profile_members.push_back(static_cast<int>(g.members.size()));
            ++next_id;
        } catch (const std::runtime_error& e) {
            result.notes.push_back("group of cluster " + std::to_string(g.cluster) +
                                   " produced no profile: " + e.what());
        }
        if (diag.windows_zero_max > 0)
            result.notes.push_back("cluster " + std::to_string(g.cluster) + ": skipped " +
                                   std::to_string(diag.windows_zero_max) + " zero-maximum windows");
    }
    return result;
}

ForecastDataset build_forecast_dataset(const StateChangesMatrix& states, std::int64_t start_timestamp,
                                       const PipelineConfig& cfg, std::int64_t train_end) {
    StateTimeline timeline(states);
    ForecastDataset ds;
    ds.layout.devices = states.cols;
    ds.layout.past_pool = cfg.past_pool;
    ds.layout.week_pool = cfg.week_pool;
    ds.layout.output_steps = cfg.output_steps;
    ds.layout.horizon = cfg.horizon;
    ds.layout.past_window = cfg.past_window;

    const std::int64_t first = std::max<std::int64_t>(7 * kSecondsPerDay, cfg.past_window);
    const std::int64_t last = std::min<std::int64_t>(train_end, states.rows) - cfg.horizon;
    ds.layout.device_scale = fit_device_scales(timeline, 0, std::max<std::int64_t>(first, last));

    for (std::int64_t t0 = first; t0 <= last; t0 += cfg.train_stride) {
        if (weekday_of(start_timestamp + t0) > 4) continue; // workdays only
        ds.inputs.push_back(build_features(timeline, ds.layout, t0, start_timestamp));
        ds.targets.push_back(build_targets(timeline, ds.layout, t0));
        ds.t0s.push_back(t0);
    }
    if (ds.inputs.empty())
        throw std::runtime_error("build_forecast_dataset: no usable training anchors (history too short?)");
    return ds;
}

std::vector<std::int64_t> forecast_anchors(std::int64_t from, std::int64_t to, std::int64_t horizon,
                                           std::int64_t start_timestamp) {
    std::vector<std::int64_t> anchors;
    for (std::int64_t t0 = from; t0 + horizon <= to; t0 += horizon) {
        if (weekday_of(start_timestamp + t0) > 4) continue;
        anchors.push_back(t0);
    }
    return anchors;
}

} // namespace nilm
