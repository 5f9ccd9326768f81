#include "nilm/durations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nilm {

std::vector<DurationSample> pair_on_off(const std::vector<Event>& cluster_events) {
    std::vector<DurationSample> samples;
    std::size_t cursor = 0; // OFF events before this index are consumed or skipped
    for (std::size_t i = 0; i < cluster_events.size(); ++i) {
        if (cluster_events[i].kind != EventKind::On) continue;
        std::size_t j = std::max(cursor, i + 1);
        while (j < cluster_events.size() && cluster_events[j].kind != EventKind::Off) ++j;
        if (j >= cluster_events.size()) break; // surplus ON events are dropped
        samples.push_back({cluster_events[i].t, cluster_events[j].t - cluster_events[i].t});
        cursor = j + 1;
    }
    return samples;
}

namespace {

double log_normal_pdf(double x, double mean, double variance) {
    const double d = x - mean;
    return -0.5 * std::log(2.0 * M_PI * variance) - d * d / (2.0 * variance);
}

double log_sum_exp(const std::vector<double>& xs) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double x : xs) mx = std::max(mx, x);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - mx);
    return mx + std::log(s);
}

double model_log_likelihood(const std::vector<double>& data, const GmmModel& model) {
    double ll = 0.0;
    std::vector<double> terms(model.components.size());
    for (double x : data) {
        for (std::size_t k = 0; k < model.components.size(); ++k) {
            const GmmComponent& c = model.components[k];
            terms[k] = std::log(std::max(c.weight, 1e-300)) + log_normal_pdf(x, c.mean, c.variance);
        }
        ll += log_sum_exp(terms);
    }
    return ll;
}

} // namespace

GmmModel fit_gmm(const std::vector<double>& durations, int m, std::uint64_t seed) {
    (void)seed; // the quantile initialization is already deterministic
    if (m < 1) throw std::invalid_argument("fit_gmm: m must be >= 1");
    const std::size_t n = durations.size();
    if (n < static_cast<std::size_t>(m)) throw std::invalid_argument("fit_gmm: fewer samples than components");

    std::vector<double> sorted = durations;
    std::sort(sorted.begin(), sorted.end());

    double mean_all = 0.0;
    for (double x : sorted) mean_all += x;
    mean_all /= static_cast<double>(n);
    double var_all = 0.0;
    for (double x : sorted) var_all += (x - mean_all) * (x - mean_all);
    var_all = std::max(var_all / static_cast<double>(n), kGmmVarianceFloor);

    GmmModel model;
    model.components.resize(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        const double q = (k + 0.5) / static_cast<double>(m);
        const std::size_t idx = std::min(n - 1, static_cast<std::size_t>(q * static_cast<double>(n)));
        model.components[static_cast<std::size_t>(k)] = {1.0 / m, sorted[idx],
                                                         std::max(var_all / (m * m), kGmmVarianceFloor)};
    }

    double prev_ll = -std::numeric_limits<double>::infinity();
    bool clamped_last_step = false;
    std::vector<double> resp(static_cast<std::size_t>(m));
    std::vector<double> nk(static_cast<std::size_t>(m));
    std::vector<double> mu(static_cast<std::size_t>(m));
    std::vector<double> var(static_cast<std::size_t>(m));
    std::vector<double> responsibilities(n * static_cast<std::size_t>(m));

    for (int iter = 0; iter < 500; ++iter) {
        std::fill(nk.begin(), nk.end(), 0.0);
        std::fill(mu.begin(), mu.end(), 0.0);

        double ll = 0.0;
        // E-step accumulated in one pass; responsibilities in the log domain.
        for (std::size_t i = 0; i < n; ++i) {
            for (int k = 0; k < m; ++k) {
                const GmmComponent& c = model.components[static_cast<std::size_t>(k)];
                resp[static_cast<std::size_t>(k)] =
                    std::log(std::max(c.weight, 1e-300)) + log_normal_pdf(durations[i], c.mean, c.variance);
            }
            const double lse = log_sum_exp(resp);
            ll += lse;
            for (int k = 0; k < m; ++k) {
                const double r = std::exp(resp[static_cast<std::size_t>(k)] - lse);
                responsibilities[i * static_cast<std::size_t>(m) + static_cast<std::size_t>(k)] = r;
                nk[static_cast<std::size_t>(k)] += r;
                mu[static_cast<std::size_t>(k)] += r * durations[i];
            }
        }

        // A variance clamp leaves the EM path; skip the check for that step.
        if (!clamped_last_step && ll < prev_ll - 1e-8 * (1.0 + std::abs(prev_ll)))
            throw std::logic_error("fit_gmm: log-likelihood decreased across an EM step");
        const bool converged = std::isfinite(prev_ll) && std::abs(ll - prev_ll) < 1e-9 * (1.0 + std::abs(ll));
        prev_ll = ll;
        model.log_likelihood = ll;
        if (converged) break;

        // M-step.
        clamped_last_step = false;
        for (int k = 0; k < m; ++k) {
            const std::size_t ks = static_cast<std::size_t>(k);
            if (nk[ks] < 1e-12) continue; // dead component keeps its parameters
            mu[ks] /= nk[ks];
            var[ks] = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = durations[i] - mu[ks];
                var[ks] += responsibilities[i * static_cast<std::size_t>(m) + ks] * d * d;
            }
            var[ks] /= nk[ks];
            if (var[ks] < kGmmVarianceFloor) {
                var[ks] = kGmmVarianceFloor;
                clamped_last_step = true;
                ++model.variance_clamps;
            }
            model.components[ks].weight = nk[ks] / static_cast<double>(n);
            model.components[ks].mean = mu[ks];
            model.components[ks].variance = var[ks];
        }
        double wsum = 0.0;
        for (const GmmComponent& c : model.components) wsum += c.weight;
        for (GmmComponent& c : model.components) c.weight /= wsum;
    }

    model.log_likelihood = model_log_likelihood(durations, model);
    return model;
}

BicSelection select_m_bic(const std::vector<double>& durations, int m_max, double delta_threshold,
                          std::uint64_t seed) {
    if (durations.empty()) throw std::invalid_argument("select_m_bic: no duration samples");
    if (m_max < 1) throw std::invalid_argument("select_m_bic: m_max must be >= 1");
    const int upper = std::min<int>(m_max, static_cast<int>(durations.size()));
    const double n = static_cast<double>(durations.size());

    auto bic_of = [&](const GmmModel& model) {
        const double params = 3.0 * model.m() - 1.0;
        return 0.5 * params * std::log(n) - model.log_likelihood;
    };

    BicSelection sel;
    sel.model = fit_gmm(durations, 1, seed);
    sel.m_opt = 1;
    double incumbent_bic = bic_of(sel.model);
    sel.bic_curve.emplace_back(1, incumbent_bic);

    for (int m = 2; m <= upper; ++m) {
        GmmModel next = fit_gmm(durations, m, seed);
        const double bic = bic_of(next);
        sel.bic_curve.emplace_back(m, bic);
        if (incumbent_bic - bic > delta_threshold) {
            sel.model = std::move(next);
            sel.m_opt = m;
            incumbent_bic = bic;
        } else {
            break; // improvement failed; keep the last improving model
        }
    }
    return sel;
}

std::vector<Group> split_groups(int cluster_index, const std::vector<DurationSample>& samples,
                                const GmmModel& gmm) {
    if (gmm.components.empty()) throw std::invalid_argument("split_groups: model has no components");
    std::vector<Group> groups(gmm.components.size());
    for (std::size_t k = 0; k < gmm.components.size(); ++k) {
        groups[k].cluster = cluster_index;
        groups[k].duration = std::max<std::int64_t>(1, std::llround(gmm.components[k].mean));
    }
    for (const DurationSample& s : samples) {
        int best = 0;
        double best_density = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < gmm.components.size(); ++k) {
            const GmmComponent& c = gmm.components[k];
            const double d = std::log(std::max(c.weight, 1e-300)) +
                             log_normal_pdf(static_cast<double>(s.duration), c.mean, c.variance);
            if (d > best_density) {
                best_density = d;
                best = static_cast<int>(k);
            }
        }
        groups[static_cast<std::size_t>(best)].members.push_back(s);
    }
    groups.erase(std::remove_if(groups.begin(), groups.end(),
                                [](const Group& g) { return g.members.empty(); }),
                 groups.end());
    return groups;
}

} // namespace nilm
