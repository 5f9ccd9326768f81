#include "nilm/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "nilm/reconstruct.hpp"
#include "nilm/serialize.hpp"

namespace nilm {

namespace {
constexpr std::int64_t kSecondsPerDay = 86400;

int weekday_of(std::int64_t epoch_seconds) {
    std::int64_t day = epoch_seconds / kSecondsPerDay;
    return static_cast<int>((day % 7 + 7 + 3) % 7);
}
} // namespace

void time_features(std::int64_t wall_clock, double& sin_tod, double& cos_tod, double& weekday) {
    const double tau = static_cast<double>(wall_clock % kSecondsPerDay);
    sin_tod = std::sin(2.0 * M_PI * tau / 86400.0);
    cos_tod = std::cos(2.0 * M_PI * tau / 86400.0);
    const int wd = weekday_of(wall_clock);
    // Monday 0 .. Friday 1 in quarter steps; weekends clamp to the Friday value.
    weekday = wd <= 4 ? 0.25 * wd : 1.0;
}

std::vector<double> fit_device_scales(const StateTimeline& timeline, std::int64_t a, std::int64_t b) {
    std::vector<double> scales(static_cast<std::size_t>(timeline.devices()), 1.0);
    for (std::int32_t d = 0; d < timeline.devices(); ++d) {
        const double m = timeline.max_abs_state(d, a, b);
        scales[static_cast<std::size_t>(d)] = m > 0.0 ? m : 1.0;
    }
    return scales;
}

namespace {

void pooled_block(const StateTimeline& timeline, const FeatureLayout& layout, std::int64_t from,
                  std::int64_t to, int bins, std::vector<double>& out) {
    const double span = static_cast<double>(to - from);
    for (std::int32_t d = 0; d < layout.devices; ++d) {
        const double scale = layout.device_scale[static_cast<std::size_t>(d)];
        for (int k = 0; k < bins; ++k) {
            const std::int64_t lo = from + static_cast<std::int64_t>(span * k / bins);
            const std::int64_t hi = from + static_cast<std::int64_t>(span * (k + 1) / bins);
            const double avg = timeline.average_state(d, lo, std::max(hi, lo + 1));
            out.push_back(std::clamp(avg / scale, -1.0, 1.0));
        }
    }
}

} // namespace

std::vector<double> build_features(const StateTimeline& timeline, const FeatureLayout& layout,
                                   std::int64_t t0, std::int64_t start_timestamp) {
    if (layout.devices != timeline.devices())
        throw std::invalid_argument("build_features: layout does not match the timeline");
    if (static_cast<std::size_t>(layout.devices) != layout.device_scale.size())
        throw std::invalid_argument("build_features: missing device scales");
    if (t0 - 7 * kSecondsPerDay < 0 || t0 - layout.past_window < 0)
        throw std::invalid_argument("build_features: history must cover seven days before t0");

    std::vector<double> x;
    x.reserve(static_cast<std::size_t>(layout.input_size()));
    pooled_block(timeline, layout, t0 - layout.past_window, t0, layout.past_pool, x);
    const std::int64_t week_from = t0 - 7 * kSecondsPerDay;
    pooled_block(timeline, layout, week_from, week_from + layout.horizon, layout.week_pool, x);
    double s, c, w;
    time_features(start_timestamp + t0, s, c, w);
    x.push_back(s);
    x.push_back(c);
    x.push_back(w);
    return x;
}

std::vector<double> build_targets(const StateTimeline& timeline, const FeatureLayout& layout, std::int64_t t0) {
    if (t0 + layout.horizon > timeline.length())
        throw std::invalid_argument("build_targets: horizon extends past the history");
    std::vector<double> y;
    y.reserve(static_cast<std::size_t>(layout.output_size()));
    pooled_block(timeline, layout, t0, t0 + layout.horizon, layout.output_steps, y);
    return y;
}

namespace {

void check_log_domain(const std::vector<double>& target, const std::vector<double>& output) {
    if (target.size() != output.size()) throw std::invalid_argument("msle: size mismatch");
    if (target.empty()) throw std::invalid_argument("msle: empty vectors");
    for (double v : target)
        if (!(v > -1.0)) throw std::domain_error("msle: target component outside the log domain");
    for (double v : output)
        if (!(v > -1.0)) throw std::domain_error("msle: output component outside the log domain");
}

} // namespace

double msle(const std::vector<double>& target, const std::vector<double>& output) {
    check_log_domain(target, output);
    double sum = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        const double r = std::log(target[i] + 2.0) / std::log(output[i] + 2.0);
        sum += r * r;
    }
    return sum / static_cast<double>(target.size());
}

double msle_diff(const std::vector<double>& target, const std::vector<double>& output) {
    check_log_domain(target, output);
    double sum = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        const double d = std::log(target[i] + 2.0) - std::log(output[i] + 2.0);
        sum += d * d;
    }
    return sum / static_cast<double>(target.size());
}

namespace {

// Loss value and d(loss)/d(output) per component, mean over the vector.
double loss_value_grad(LossKind kind, const std::vector<double>& target, const std::vector<double>& output,
                       std::vector<double>& grad) {
    const double n = static_cast<double>(target.size());
    grad.resize(output.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        // Shift [-1,1] into the log domain; clamp keeps stray outputs finite.
        const double ot = std::max(output[i] + 2.0, 1e-9);
        const double tt = std::max(target[i] + 2.0, 1e-9);
        const double lo = std::log(ot);
        const double lt = std::log(tt);
        if (kind == LossKind::MsleDiff) {
            const double d = lo - lt;
            sum += d * d;
            grad[i] = 2.0 * d / (ot * n);
        } else {
            const double lo_safe = std::abs(lo) < 1e-9 ? (lo < 0 ? -1e-9 : 1e-9) : lo;
            const double r = lt / lo_safe;
            sum += r * r;
            grad[i] = -2.0 * lt * lt / (lo_safe * lo_safe * lo_safe * ot * n);
        }
    }
    return sum / n;
}

} // namespace

Mlp::Mlp(int input, int hidden, int hidden_layers, int output, std::uint64_t seed)
    : input_(input), hidden_(hidden), hidden_layers_(hidden_layers), output_(output) {
    if (input < 1 || hidden < 1 || hidden_layers < 1 || output < 1)
        throw std::invalid_argument("Mlp: all layer sizes must be positive");
    std::mt19937_64 rng(seed);
    auto add_layer = [&](int rows, int cols) {
        std::normal_distribution<double> init(0.0, std::sqrt(2.0 / cols));
        std::vector<double> w(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
        for (double& x : w) x = init(rng);
        weights_.push_back(std::move(w));
        biases_.push_back(std::vector<double>(static_cast<std::size_t>(rows), 0.0));
        rows_.push_back(rows);
        cols_.push_back(cols);
    };
    add_layer(hidden, input);
    for (int l = 1; l < hidden_layers; ++l) add_layer(hidden, hidden);
    add_layer(output, hidden);
}

std::vector<double> Mlp::forward(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != input_) throw std::invalid_argument("Mlp::forward: wrong input size");
    std::vector<double> cur = x;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        const int rows = rows_[l], cols = cols_[l];
        std::vector<double> next(static_cast<std::size_t>(rows));
        const double* w = weights_[l].data();
        for (int r = 0; r < rows; ++r) {
            double acc = biases_[l][static_cast<std::size_t>(r)];
            const double* wr = w + static_cast<std::size_t>(r) * static_cast<std::size_t>(cols);
            for (int c = 0; c < cols; ++c) acc += wr[c] * cur[static_cast<std::size_t>(c)];
            next[static_cast<std::size_t>(r)] = acc;
        }
        if (l + 1 < weights_.size())
            for (double& v : next) v = v > 0.0 ? v : 0.0; // relu on hidden layers
        cur = std::move(next);
    }
    return cur;
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) n += weights_[l].size() + biases_[l].size();
    return n;
}

double Mlp::get_parameter(std::size_t idx) const {
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        if (idx < weights_[l].size()) return weights_[l][idx];
        idx -= weights_[l].size();
        if (idx < biases_[l].size()) return biases_[l][idx];
        idx -= biases_[l].size();
    }
    throw std::out_of_range("Mlp::get_parameter");
}

void Mlp::set_parameter(std::size_t idx, double value) {
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        if (idx < weights_[l].size()) {
            weights_[l][idx] = value;
            return;
        }
        idx -= weights_[l].size();
        if (idx < biases_[l].size()) {
            biases_[l][idx] = value;
            return;
        }
        idx -= biases_[l].size();
    }
    throw std::out_of_range("Mlp::set_parameter");
}

// Shared forward/backward machinery for training and gradient evaluation.
struct MlpTrainer {
    Mlp& net;
    std::vector<std::vector<double>> activations; // per layer outputs (post-relu)
    std::vector<std::vector<double>> masks;       // dropout masks per hidden layer

    explicit MlpTrainer(Mlp& n) : net(n) {}

    // Forward one sample; keep_prob < 1 applies inverted dropout on hidden layers.
    std::vector<double> forward_train(const std::vector<double>& x, double keep_prob, std::mt19937_64* rng) {
        activations.clear();
        masks.clear();
        activations.push_back(x);
        for (std::size_t l = 0; l < net.weights_.size(); ++l) {
            const int rows = net.rows_[l], cols = net.cols_[l];
            const std::vector<double>& cur = activations.back();
            std::vector<double> next(static_cast<std::size_t>(rows));
            const double* w = net.weights_[l].data();
            for (int r = 0; r < rows; ++r) {
                double acc = net.biases_[l][static_cast<std::size_t>(r)];
                const double* wr = w + static_cast<std::size_t>(r) * static_cast<std::size_t>(cols);
                for (int c = 0; c < cols; ++c) acc += wr[c] * cur[static_cast<std::size_t>(c)];
                next[static_cast<std::size_t>(r)] = acc;
            }
            const bool hidden = l + 1 < net.weights_.size();
            if (hidden) {
                for (double& v : next) v = v > 0.0 ? v : 0.0;
                std::vector<double> mask(next.size(), 1.0);
                if (keep_prob < 1.0 && rng) {
                    std::uniform_real_distribution<double> u01(0.0, 1.0);
                    for (std::size_t i = 0; i < next.size(); ++i) {
                        if (u01(*rng) >= keep_prob) {
                            mask[i] = 0.0;
                            next[i] = 0.0;
                        } else {
                            mask[i] = 1.0 / keep_prob;
                            next[i] *= mask[i];
                        }
                    }
                }
                masks.push_back(std::move(mask));
            }
            activations.push_back(std::move(next));
        }
        return activations.back();
    }

    // Backprop one sample's output gradient into parameter gradient accumulators.
    void backward(const std::vector<double>& dout, std::vector<std::vector<double>>& grad_w,
                  std::vector<std::vector<double>>& grad_b) {
        std::vector<double> delta = dout;
        for (std::size_t li = net.weights_.size(); li-- > 0;) {
            const int rows = net.rows_[li], cols = net.cols_[li];
            const std::vector<double>& input = activations[li];
            for (int r = 0; r < rows; ++r) {
                const double d = delta[static_cast<std::size_t>(r)];
                if (d == 0.0) continue;
                double* gw = grad_w[li].data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(cols);
                for (int c = 0; c < cols; ++c) gw[c] += d * input[static_cast<std::size_t>(c)];
                grad_b[li][static_cast<std::size_t>(r)] += d;
            }
            if (li == 0) break;
            std::vector<double> prev(static_cast<std::size_t>(cols), 0.0);
            const double* w = net.weights_[li].data();
            for (int r = 0; r < rows; ++r) {
                const double d = delta[static_cast<std::size_t>(r)];
                if (d == 0.0) continue;
                const double* wr = w + static_cast<std::size_t>(r) * static_cast<std::size_t>(cols);
                for (int c = 0; c < cols; ++c) prev[static_cast<std::size_t>(c)] += d * wr[c];
            }
            // Through dropout and relu of the layer below.
            const std::vector<double>& act = activations[li];
            const std::vector<double>& mask = masks[li - 1];
            for (int c = 0; c < cols; ++c) {
                const std::size_t cs = static_cast<std::size_t>(c);
                prev[cs] *= mask[cs];
                if (act[cs] <= 0.0) prev[cs] = 0.0;
            }
            delta = std::move(prev);
        }
    }
};

double Mlp::loss_on(const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& y,
                    LossKind loss) const {
    if (x.empty() || x.size() != y.size()) throw std::invalid_argument("Mlp::loss_on: bad batch");
    double total = 0.0;
    std::vector<double> grad;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::vector<double> out = forward(x[i]);
        total += loss_value_grad(loss, y[i], out, grad);
    }
    return total / static_cast<double>(x.size());
}

std::vector<double> Mlp::gradients_on(const std::vector<std::vector<double>>& x,
                                      const std::vector<std::vector<double>>& y, LossKind loss) const {
    Mlp copy = *this;
    MlpTrainer trainer(copy);
    std::vector<std::vector<double>> grad_w, grad_b;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        grad_w.emplace_back(weights_[l].size(), 0.0);
        grad_b.emplace_back(biases_[l].size(), 0.0);
    }
    std::vector<double> dout;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::vector<double> out = trainer.forward_train(x[i], 1.0, nullptr);
        loss_value_grad(loss, y[i], out, dout);
        for (double& g : dout) g /= static_cast<double>(x.size());
        trainer.backward(dout, grad_w, grad_b);
    }
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        flat.insert(flat.end(), grad_w[l].begin(), grad_w[l].end());
        flat.insert(flat.end(), grad_b[l].begin(), grad_b[l].end());
    }
    return flat;
}

TrainResult train_mlp(const std::vector<std::vector<double>>& inputs,
                      const std::vector<std::vector<double>>& targets, const MlpConfig& cfg) {
    if (inputs.empty() || inputs.size() != targets.size())
        throw std::invalid_argument("train_mlp: empty or mismatched dataset");
    const int input = static_cast<int>(inputs.front().size());
    const int output = static_cast<int>(targets.front().size());

    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(inputs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);

    // 95/5 split; at least one row stays on each side when possible.
    std::size_t n_val = static_cast<std::size_t>(cfg.validation_fraction * static_cast<double>(order.size()));
    if (n_val == 0 && order.size() > 1) n_val = 1;
    const std::size_t n_train = order.size() - n_val;
    std::vector<std::size_t> train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> val_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());

    std::vector<std::vector<double>> val_x, val_y;
    for (std::size_t i : val_idx) {
        val_x.push_back(inputs[i]);
        val_y.push_back(targets[i]);
    }

    TrainResult result;
    result.model = Mlp(input, cfg.hidden_neurons, cfg.hidden_layers, output, cfg.seed ^ 0xA5A5A5A5ULL);
    Mlp& net = result.model;
    MlpTrainer trainer(net);

    const double keep_prob = 1.0 - cfg.dropout;
    std::vector<std::vector<double>> grad_w, grad_b, vel_w, vel_b;
    auto reset_grads = [&] {
        grad_w.clear();
        grad_b.clear();
        for (std::size_t l = 0; l < net.weights_.size(); ++l) {
            grad_w.emplace_back(net.weights_[l].size(), 0.0);
            grad_b.emplace_back(net.biases_[l].size(), 0.0);
        }
    };
    if (cfg.momentum > 0.0) {
        for (std::size_t l = 0; l < net.weights_.size(); ++l) {
            vel_w.emplace_back(net.weights_[l].size(), 0.0);
            vel_b.emplace_back(net.biases_[l].size(), 0.0);
        }
    }

    Mlp best = net;
    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    int stall = 0;
    std::vector<double> dout;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        std::shuffle(train_idx.begin(), train_idx.end(), rng);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < train_idx.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(train_idx.size(), start + static_cast<std::size_t>(cfg.batch_size));
            const double batch_n = static_cast<double>(end - start);
            reset_grads();
            double batch_loss = 0.0;
            for (std::size_t bi = start; bi < end; ++bi) {
                const std::size_t row = train_idx[bi];
                const std::vector<double> out = trainer.forward_train(inputs[row], keep_prob, &rng);
                batch_loss += loss_value_grad(cfg.loss, targets[row], out, dout) / batch_n;
                for (double& g : dout) g /= batch_n;
                trainer.backward(dout, grad_w, grad_b);
            }
            if (!std::isfinite(batch_loss))
                throw std::runtime_error("train_mlp: training diverged (non-finite loss)");
            epoch_loss += batch_loss;
            ++batches;
            for (std::size_t l = 0; l < net.weights_.size(); ++l) {
                if (cfg.momentum > 0.0) {
                    for (std::size_t i = 0; i < net.weights_[l].size(); ++i) {
                        vel_w[l][i] = cfg.momentum * vel_w[l][i] - cfg.learning_rate * grad_w[l][i];
                        net.weights_[l][i] += vel_w[l][i];
                    }
                    for (std::size_t i = 0; i < net.biases_[l].size(); ++i) {
                        vel_b[l][i] = cfg.momentum * vel_b[l][i] - cfg.learning_rate * grad_b[l][i];
                        net.biases_[l][i] += vel_b[l][i];
                    }
                } else {
                    for (std::size_t i = 0; i < net.weights_[l].size(); ++i)
                        net.weights_[l][i] -= cfg.learning_rate * grad_w[l][i];
                    for (std::size_t i = 0; i < net.biases_[l].size(); ++i)
                        net.biases_[l][i] -= cfg.learning_rate * grad_b[l][i];
                }
            }
        }
        const double train_loss = epoch_loss / std::max<double>(1.0, static_cast<double>(batches));
        const double val_loss = val_x.empty() ? train_loss : net.loss_on(val_x, val_y, cfg.loss);
        if (!std::isfinite(val_loss)) throw std::runtime_error("train_mlp: validation loss is not finite");
        result.log.push_back({epoch, train_loss, val_loss});

        if (val_loss < best_val - 1e-12) {
            best_val = val_loss;
            best = net;
            best_epoch = epoch;
            stall = 0;
        } else if (++stall >= cfg.patience) {
            result.early_stopped = true;
            break;
        }
    }
    result.model = std::move(best);
    result.best_epoch = best_epoch;
    return result;
}

void Mlp::save(const std::string& path, const FeatureLayout& layout) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "nilmkit-mlp 1\n";
    out << "net " << input_ << ' ' << hidden_ << ' ' << hidden_layers_ << ' ' << output_ << '\n';
    out << "layout " << layout.devices << ' ' << layout.past_pool << ' ' << layout.week_pool << ' '
        << layout.output_steps << ' ' << layout.horizon << ' ' << layout.past_window << '\n';
    out << "scales";
    for (double s : layout.device_scale) out << ' ' << format_double(s);
    out << '\n';
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        out << "layer " << rows_[l] << ' ' << cols_[l] << '\n';
        for (double w : weights_[l]) out << format_double(w) << '\n';
        for (double b : biases_[l]) out << format_double(b) << '\n';
    }
}

Mlp Mlp::load(const std::string& path, FeatureLayout& layout) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "nilmkit-mlp" || version != 1) throw std::runtime_error(path + ": unknown model format");
    std::string tag;
    Mlp net;
    in >> tag >> net.input_ >> net.hidden_ >> net.hidden_layers_ >> net.output_;
    if (tag != "net") throw std::runtime_error(path + ": malformed model header");
    in >> tag >> layout.devices >> layout.past_pool >> layout.week_pool >> layout.output_steps >>
        layout.horizon >> layout.past_window;
    if (tag != "layout") throw std::runtime_error(path + ": malformed layout header");
    in >> tag;
    if (tag != "scales") throw std::runtime_error(path + ": malformed scales header");
    layout.device_scale.resize(static_cast<std::size_t>(layout.devices));
    for (double& s : layout.device_scale) in >> s;
    for (int l = 0; l < net.hidden_layers_ + 1; ++l) {
        int rows = 0, cols = 0;
        in >> tag >> rows >> cols;
        if (tag != "layer" || rows < 1 || cols < 1) throw std::runtime_error(path + ": malformed layer header");
        std::vector<double> w(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
        for (double& v : w) in >> v;
        std::vector<double> b(static_cast<std::size_t>(rows));
        for (double& v : b) in >> v;
        net.weights_.push_back(std::move(w));
        net.biases_.push_back(std::move(b));
        net.rows_.push_back(rows);
        net.cols_.push_back(cols);
    }
    if (!in) throw std::runtime_error(path + ": truncated model file");
    return net;
}

ForecastResult predict_and_reconstruct(const Mlp& model, const FeatureLayout& layout,
                                       const std::vector<double>& features,
                                       const std::vector<double>& boundary_state,
                                       const std::vector<DeviceProfile>& profiles, const Vec6& last_measured,
                                       double threshold) {
    if (static_cast<std::int32_t>(profiles.size()) != layout.devices)
        throw std::invalid_argument("predict_and_reconstruct: profile count does not match the layout");
    if (boundary_state.size() != static_cast<std::size_t>(layout.devices))
        throw std::invalid_argument("predict_and_reconstruct: boundary state size mismatch");

    const std::vector<double> out = model.forward(features);

    ForecastResult result;
    result.prob_changes.rows = layout.horizon;
    result.prob_changes.cols = layout.devices;
    result.prob_changes.discrete = false;
    result.epsilon_used = last_measured;

    const std::int64_t step = layout.horizon / layout.output_steps;
    for (std::int32_t d = 0; d < layout.devices; ++d) {
        const double scale = layout.device_scale[static_cast<std::size_t>(d)];
        double prev = boundary_state[static_cast<std::size_t>(d)];
        for (int k = 0; k < layout.output_steps; ++k) {
            const double norm = out[static_cast<std::size_t>(d * layout.output_steps + k)];
            const double state = norm * scale;
            const double change = std::clamp(state - prev, -1.0, 1.0);
            prev = state;
            if (change != 0.0)
                result.prob_changes.entries.push_back({static_cast<std::int64_t>(k) * step, d, change});
        }
    }
    result.prob_changes.sort_entries();

    result.power = reconstruct(result.prob_changes, profiles, last_measured, layout.horizon, threshold);
    return result;
}

} // namespace nilm
