#include "nilm/evaluate.hpp"

#include <cmath>
#include <stdexcept>

namespace nilm {

Metrics metrics(const PowerSeries& measured, const PowerSeries& predicted, std::int64_t a, std::int64_t b,
                double mape_floor_w) {
    if (a >= b) throw std::invalid_argument("metrics: empty window");
    if (b > measured.length() || b > predicted.length() || a < 0)
        throw std::invalid_argument("metrics: window outside the series");

    double se = 0.0, ae = 0.0, ape = 0.0;
    double sum_meas = 0.0, sum_pred = 0.0;
    std::int64_t mape_n = 0, excluded = 0;
    for (std::int64_t t = a; t < b; ++t) {
        const double m = measured.total_active(t);
        const double p = predicted.total_active(t);
        const double d = p - m;
        se += d * d;
        ae += std::abs(d);
        sum_meas += m;
        sum_pred += p;
        if (m < mape_floor_w) {
            ++excluded;
        } else {
            ape += std::abs(d) / m;
            ++mape_n;
        }
    }
    const double n = static_cast<double>(b - a);
    Metrics out;
    out.rmse = std::sqrt(se / n);
    out.mae = ae / n;
    out.mape = mape_n > 0 ? 100.0 * ape / static_cast<double>(mape_n) : 0.0;
    out.energy_e = sum_meas != 0.0 ? 100.0 * (sum_pred - sum_meas) / sum_meas : 0.0;
    out.mape_excluded = excluded;
    if (out.rmse < out.mae - 1e-9)
        throw std::logic_error("metrics: RMSE fell below MAE"); // power-mean inequality
    return out;
}

MetricsSummary summarize(const std::vector<Metrics>& rows) {
    if (rows.empty()) throw std::invalid_argument("summarize: no metric rows");
    MetricsSummary s;
    s.windows = static_cast<std::int64_t>(rows.size());
    auto accumulate = [&](auto getter, double& mean, double& sd, double& sem) {
        double m = 0.0;
        for (const Metrics& r : rows) m += getter(r);
        m /= static_cast<double>(rows.size());
        double v = 0.0;
        for (const Metrics& r : rows) {
            const double d = getter(r) - m;
            v += d * d;
        }
        v = rows.size() > 1 ? v / static_cast<double>(rows.size() - 1) : 0.0;
        mean = m;
        sd = std::sqrt(v);
        sem = sd / std::sqrt(static_cast<double>(rows.size()));
    };
    accumulate([](const Metrics& r) { return r.rmse; }, s.mean.rmse, s.stddev.rmse, s.stderr_of_mean.rmse);
    accumulate([](const Metrics& r) { return r.mae; }, s.mean.mae, s.stddev.mae, s.stderr_of_mean.mae);
    accumulate([](const Metrics& r) { return r.mape; }, s.mean.mape, s.stddev.mape, s.stderr_of_mean.mape);
    accumulate([](const Metrics& r) { return r.energy_e; }, s.mean.energy_e, s.stddev.energy_e,
               s.stderr_of_mean.energy_e);
    return s;
}

namespace {

PowerSeries copy_window(const PowerSeries& history, std::int64_t from, std::int64_t horizon,
                        std::int64_t stamp_at) {
    if (from < 0 || from + horizon > history.length())
        throw std::invalid_argument("persistence: insufficient history for the requested window");
    PowerSeries out;
    out.start_timestamp = history.timestamp_at(stamp_at);
    out.samples.assign(history.samples.begin() + static_cast<std::ptrdiff_t>(from),
                       history.samples.begin() + static_cast<std::ptrdiff_t>(from + horizon));
    return out;
}

} // namespace

PowerSeries persistence_7d(const PowerSeries& history, std::int64_t t0, std::int64_t horizon) {
    return copy_window(history, t0 - 7 * 86400, horizon, t0);
}

PowerSeries persistence_15min(const PowerSeries& history, std::int64_t t0, std::int64_t horizon) {
    return copy_window(history, t0 - horizon, horizon, t0);
}

} // namespace nilm
