#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nilm/states.hpp"
#include "nilm/types.hpp"

namespace nilm {

// Flattened network input layout: for every device `past_pool` bin averages of
// the normalized state over [t0-past_window, t0), then for every device
// `week_pool` bin averages over the same horizon slot seven days earlier,
// then sin/cos of time-of-day and the weekday scalar (Monday 0 .. Friday 1).
struct FeatureLayout {
    std::int32_t devices = 0;
    int past_pool = 60;
    int week_pool = 15;
    int output_steps = 60; // horizon samples per device in the target block
    std::int64_t horizon = 900;
    std::int64_t past_window = 3600;
    std::vector<double> device_scale; // per-device max |state| over the training range

    int input_size() const { return devices * (past_pool + week_pool) + 3; }
    int output_size() const { return devices * output_steps; }
};

// Scales fitted on [a, b); never-active devices get scale 1.
std::vector<double> fit_device_scales(const StateTimeline& timeline, std::int64_t a, std::int64_t b);

// Needs history covering [t0 - 7*86400, t0). Every component lies in [-1, 1].
std::vector<double> build_features(const StateTimeline& timeline, const FeatureLayout& layout,
                                   std::int64_t t0, std::int64_t start_timestamp);

// Normalized pooled target states over [t0, t0 + horizon).
std::vector<double> build_targets(const StateTimeline& timeline, const FeatureLayout& layout, std::int64_t t0);

// Time features on their own (sin, cos, weekday scalar).
void time_features(std::int64_t wall_clock, double& sin_tod, double& cos_tod, double& weekday);

enum class LossKind {
    MsleRatio, // squared ratio of shifted logs, the documented error measure
    MsleDiff   // squared difference of shifted logs, the trainable default
};

// Mean over components of (log(target+2) / log(output+2))^2; components must
// be > -1 (the [-1,1] state domain is shifted into the log domain).
double msle(const std::vector<double>& target, const std::vector<double>& output);

// Conventional variant: mean of (log(target+2) - log(output+2))^2.
double msle_diff(const std::vector<double>& target, const std::vector<double>& output);

struct MlpConfig {
    int hidden_neurons = 214;
    int hidden_layers = 3;
    double dropout = 0.05;
    double learning_rate = 0.01;
    int batch_size = 2048;
    int max_epochs = 200;
    int patience = 5;
    double validation_fraction = 0.05;
    double momentum = 0.0;
    LossKind loss = LossKind::MsleDiff;
    std::uint64_t seed = 1;
};

struct TrainResult;

// Fully connected network, relu hidden layers, linear output.
class Mlp {
public:
    Mlp() = default;
    Mlp(int input, int hidden, int hidden_layers, int output, std::uint64_t seed);

    std::vector<double> forward(const std::vector<double>& x) const;

    int input_size() const { return input_; }
    int output_size() const { return output_; }
    std::size_t parameter_count() const;
    double get_parameter(std::size_t idx) const;
    void set_parameter(std::size_t idx, double value);

    // Mean loss over a row batch, dropout disabled.
    double loss_on(const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& y,
                   LossKind loss) const;
    // Analytic gradient of loss_on with respect to every parameter.
    std::vector<double> gradients_on(const std::vector<std::vector<double>>& x,
                                     const std::vector<std::vector<double>>& y, LossKind loss) const;

    void save(const std::string& path, const FeatureLayout& layout) const;
    static Mlp load(const std::string& path, FeatureLayout& layout);

private:
    friend struct MlpTrainer;
    friend TrainResult train_mlp(const std::vector<std::vector<double>>& inputs,
                                 const std::vector<std::vector<double>>& targets, const MlpConfig& cfg);
    int input_ = 0, hidden_ = 0, hidden_layers_ = 0, output_ = 0;
    // weights_[l] is (rows x cols) row-major, biases_[l] sized rows.
    std::vector<std::vector<double>> weights_;
    std::vector<std::vector<double>> biases_;
    std::vector<int> rows_, cols_;
};

struct TrainLogEntry {
    int epoch = 0;
    double train_loss = 0.0;
    double validation_loss = 0.0;
};

struct TrainResult {
    Mlp model;
    std::vector<TrainLogEntry> log;
    int best_epoch = 0;
    bool early_stopped = false;
};

// Mini-batch SGD with inverted dropout on hidden layers and early stopping on
// the validation loss (best weights restored). Throws on non-finite loss.
TrainResult train_mlp(const std::vector<std::vector<double>>& inputs,
                      const std::vector<std::vector<double>>& targets, const MlpConfig& cfg);

struct ForecastResult {
    StateChangesMatrix prob_changes; // horizon x M probabilistic block
    PowerSeries power;               // reconstructed horizon
    Vec6 epsilon_used;
};

// Forward pass, un-normalize, upsample to seconds, differentiate against the
// boundary state, then reconstruct with the 0.1 magnitude threshold and the
// last measured power vector as the constant always-on term.
ForecastResult predict_and_reconstruct(const Mlp& model, const FeatureLayout& layout,
                                       const std::vector<double>& features,
                                       const std::vector<double>& boundary_state,
                                       const std::vector<DeviceProfile>& profiles, const Vec6& last_measured,
                                       double threshold = 0.1);

} // namespace nilm
