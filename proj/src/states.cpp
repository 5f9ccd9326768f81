#include "nilm/states.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nilm {

StateSeries integrate_states(const StateChangesMatrix& s) {
    StateSeries out;
    out.rows = s.rows;
    out.cols = s.cols;
    out.values.assign(static_cast<std::size_t>(s.rows) * static_cast<std::size_t>(s.cols), 0.0);
    if (s.rows == 0 || s.cols == 0) return out;

    for (const StateChange& e : s.entries) {
        if (e.t < 0 || e.t >= s.rows || e.device < 0 || e.device >= s.cols)
            throw std::out_of_range("integrate_states: entry outside matrix shape");
        out.at(e.t, e.device) += e.value;
    }
    for (std::int64_t t = 1; t < s.rows; ++t)
        for (std::int32_t d = 0; d < s.cols; ++d) out.at(t, d) += out.at(t - 1, d);
    return out;
}

StateChangesMatrix differentiate_states(const StateSeries& states, bool discrete) {
    StateChangesMatrix out;
    out.rows = states.rows;
    out.cols = states.cols;
    out.discrete = discrete;
    for (std::int64_t t = 0; t < states.rows; ++t) {
        for (std::int32_t d = 0; d < states.cols; ++d) {
            const double prev = t > 0 ? states.at(t - 1, d) : 0.0;
            const double change = states.at(t, d) - prev;
            if (change != 0.0) out.entries.push_back({t, d, change});
        }
    }
    return out;
}

StateTimeline::StateTimeline(const StateChangesMatrix& s) : rows_(s.rows), cols_(s.cols) {
    points_.resize(static_cast<std::size_t>(cols_));
    // Entries are sorted by time; accumulate per device.
    std::vector<double> state(static_cast<std::size_t>(cols_), 0.0);
    std::vector<double> integral(static_cast<std::size_t>(cols_), 0.0);
    std::vector<std::int64_t> last_t(static_cast<std::size_t>(cols_), 0);
    for (std::size_t d = 0; d < points_.size(); ++d) points_[d].push_back({0, 0.0, 0.0});
    for (const StateChange& e : s.entries) {
        const std::size_t d = static_cast<std::size_t>(e.device);
        integral[d] += state[d] * static_cast<double>(e.t - last_t[d]);
        state[d] += e.value;
        last_t[d] = e.t;
        if (!points_[d].empty() && points_[d].back().t == e.t) {
            points_[d].back().state = state[d];
        } else {
            points_[d].push_back({e.t, state[d], integral[d]});
        }
    }
}

double StateTimeline::state_at(std::int32_t device, std::int64_t t) const {
    const auto& pts = points_[static_cast<std::size_t>(device)];
    auto it = std::upper_bound(pts.begin(), pts.end(), t,
                               [](std::int64_t v, const ChangePoint& p) { return v < p.t; });
    if (it == pts.begin()) return 0.0;
    return std::prev(it)->state;
}

double StateTimeline::integral_up_to(std::int32_t device, std::int64_t t) const {
    const auto& pts = points_[static_cast<std::size_t>(device)];
    auto it = std::upper_bound(pts.begin(), pts.end(), t,
                               [](std::int64_t v, const ChangePoint& p) { return v < p.t; });
    if (it == pts.begin()) return 0.0;
    const ChangePoint& p = *std::prev(it);
    return p.integral + p.state * static_cast<double>(t - p.t);
}

double StateTimeline::average_state(std::int32_t device, std::int64_t a, std::int64_t b) const {
    if (a >= b) throw std::invalid_argument("average_state: empty range");
    return (integral_up_to(device, b) - integral_up_to(device, a)) / static_cast<double>(b - a);
}

double StateTimeline::max_abs_state(std::int32_t device, std::int64_t a, std::int64_t b) const {
    const auto& pts = points_[static_cast<std::size_t>(device)];
    double best = std::abs(state_at(device, a));
    for (const ChangePoint& p : pts) {
        if (p.t >= b) break;
        if (p.t >= a) best = std::max(best, std::abs(p.state));
    }
    return best;
}

} // namespace nilm
