#include "nilm/pso.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "nilm/reconstruct.hpp"

namespace nilm {

double disagg_error(const PowerSeries& measured, const PowerSeries& reconstructed, double alpha, double beta,
                    std::int64_t a, std::int64_t b) {
    if (std::abs(alpha + beta - 1.0) > 1e-12) throw std::invalid_argument("disagg_error: alpha + beta must be 1");
    if (a < 0 || b > measured.length() || b > reconstructed.length() || a >= b)
        throw std::invalid_argument("disagg_error: window out of range");

    double level = 0.0;
    for (std::int64_t t = a; t < b; ++t)
        level += squared_distance(reconstructed.samples[static_cast<std::size_t>(t)],
                                  measured.samples[static_cast<std::size_t>(t)]);
    double slope = 0.0;
    for (std::int64_t t = a; t + 1 < b; ++t) {
        const Vec6 dm = measured.samples[static_cast<std::size_t>(t + 1)] - measured.samples[static_cast<std::size_t>(t)];
        const Vec6 dr = reconstructed.samples[static_cast<std::size_t>(t + 1)] -
                        reconstructed.samples[static_cast<std::size_t>(t)];
        slope += (dr - dm).squared_norm();
    }
    return alpha * level + beta * slope;
}

namespace {

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Per-device carry-over context at a window boundary.
struct DeviceState {
    bool on = false;
    std::int64_t on_time = 0;
};

struct WindowScratch {
    std::vector<Vec6> buffer;              // reconstruction over [a, b)
    std::vector<int> decoded;              // per candidate event: device or -1
    std::vector<DeviceState> states;       // working copy of the boundary states
};

// Net contribution of one activation (on at u, off at v, possibly open) clipped
// to [a, b): dynamic while it lasts, stable state until the off, nothing after.
void add_activation(std::vector<Vec6>& buffer, std::int64_t a, std::int64_t b, const DeviceProfile& prof,
                    std::int64_t u, std::int64_t v) {
    const std::int64_t d = prof.duration();
    const std::int64_t dyn_end = std::min(u + d, v); // inclusive
    for (std::int64_t t = std::max(a, u + 1); t <= std::min(b - 1, dyn_end); ++t)
        buffer[static_cast<std::size_t>(t - a)] += prof.dynamic[static_cast<std::size_t>(t - u - 1)];
    const std::int64_t stable_end = std::min(b - 1, v); // inclusive
    for (std::int64_t t = std::max(a, dyn_end + 1); t <= stable_end; ++t)
        buffer[static_cast<std::size_t>(t - a)] += prof.stable_state;
}

double window_error(const PowerSeries& measured, const std::vector<Vec6>& buffer, double alpha, double beta,
                    std::int64_t a, std::int64_t b) {
    double level = 0.0;
    for (std::int64_t t = a; t < b; ++t)
        level += squared_distance(buffer[static_cast<std::size_t>(t - a)],
                                  measured.samples[static_cast<std::size_t>(t)]);
    double slope = 0.0;
    for (std::int64_t t = a; t + 1 < b; ++t) {
        const Vec6 dm = measured.samples[static_cast<std::size_t>(t + 1)] -
                        measured.samples[static_cast<std::size_t>(t)];
        const Vec6 dr = buffer[static_cast<std::size_t>(t - a + 1)] - buffer[static_cast<std::size_t>(t - a)];
        slope += (dr - dm).squared_norm();
    }
    return alpha * level + beta * slope;
}

} // namespace

DisaggResult pso_disaggregate(const PowerSeries& series, const std::vector<DeviceProfile>& profiles,
                              const EventSet& events, const DisaggConfig& cfg) {
    if (profiles.empty()) throw std::invalid_argument("pso_disaggregate: no device profiles");
    if (cfg.window < 3) throw std::invalid_argument("pso_disaggregate: window shorter than 3 samples");
    if (cfg.overlap < 0 || cfg.overlap >= cfg.window)
        throw std::invalid_argument("pso_disaggregate: overlap must be within the window");
    if (std::abs(cfg.alpha + cfg.beta - 1.0) > 1e-12)
        throw std::invalid_argument("pso_disaggregate: alpha + beta must be 1");
    if (cfg.particles < 1 || cfg.iterations < 1)
        throw std::invalid_argument("pso_disaggregate: need at least one particle and one iteration");
    if (!cfg.hint_assignment.empty() && cfg.hint_assignment.size() != events.events.size())
        throw std::invalid_argument("pso_disaggregate: hint does not cover the events");

    const std::int64_t T = series.length();
    const int m_devices = static_cast<int>(profiles.size());
    const int options = m_devices + 1; // last option: leave the event unassigned

    DisaggResult result;
    result.event_assignment.assign(events.events.size(), -1);
    result.epsilon.assign(static_cast<std::size_t>(T), Vec6{});

    std::vector<DeviceState> boundary(profiles.size());
    WindowScratch scratch;

    std::size_t first_undecided = 0;
    std::int64_t a = 0;
    std::uint64_t window_idx = 0;
    while (a < T) {
        const std::int64_t b = std::min<std::int64_t>(a + cfg.window, T);
        const std::int64_t decide_until = (b >= T) ? T : b - cfg.overlap;

        // Candidate events inside [a, b).
        std::vector<std::size_t> candidates;
        for (std::size_t e = first_undecided; e < events.events.size() && events.events[e].t < b; ++e)
            candidates.push_back(e);
        const std::size_t n_ev = candidates.size();

        // Always-on estimate: window minimum of the total active power spread
        // over the channels in proportion to their own window minimums.
        Vec6 eps;
        {
            double min_tot = std::numeric_limits<double>::infinity();
            Vec6 min_ch;
            for (std::size_t c = 0; c < 6; ++c) min_ch[c] = std::numeric_limits<double>::infinity();
            for (std::int64_t t = a; t < b; ++t) {
                min_tot = std::min(min_tot, series.total_active(t));
                for (std::size_t c = 0; c < 6; ++c)
                    min_ch[c] = std::min(min_ch[c], series.samples[static_cast<std::size_t>(t)][c]);
            }
            min_tot = std::max(0.0, min_tot);
            double active_min_sum = 0.0;
            for (std::size_t c = 0; c < 3; ++c) active_min_sum += std::max(0.0, min_ch[c]);
            if (active_min_sum > 0.0) {
                const double scale = min_tot / active_min_sum;
                for (std::size_t c = 0; c < 6; ++c) eps[c] = std::max(0.0, min_ch[c]) * scale;
            }
        }

        const std::size_t win_len = static_cast<std::size_t>(b - a);
        scratch.buffer.assign(win_len, Vec6{});
        scratch.decoded.assign(n_ev, -1);

        // Evaluate one decoded assignment; repairs invalid transitions to "none".
        auto evaluate = [&](const std::vector<double>& position, std::vector<int>& decoded) {
            for (std::size_t j = 0; j < n_ev; ++j) {
                const double* row = position.data() + j * static_cast<std::size_t>(options);
                int best = 0;
                for (int o = 1; o < options; ++o)
                    if (row[o] > row[best]) best = o;
                decoded[j] = best == options - 1 ? -1 : best;
            }
            scratch.states = boundary;
            std::fill(scratch.buffer.begin(), scratch.buffer.end(), Vec6{});
            for (Vec6& x : scratch.buffer) x = eps;

            // Walk events in time order, closing and opening activations.
            std::vector<std::pair<std::int64_t, std::int64_t>> acts; // (u, v) per activation, v = T if open
            std::vector<int> act_device;
            std::vector<int> open_act(profiles.size(), -1);
            for (std::size_t dev = 0; dev < profiles.size(); ++dev) {
                if (scratch.states[dev].on) {
                    open_act[dev] = static_cast<int>(acts.size());
                    acts.emplace_back(scratch.states[dev].on_time, T);
                    act_device.push_back(static_cast<int>(dev));
                }
            }
            for (std::size_t j = 0; j < n_ev; ++j) {
                const Event& ev = events.events[candidates[j]];
                int dev = decoded[j];
                if (dev < 0) continue;
                if (ev.kind == EventKind::On) {
                    if (scratch.states[static_cast<std::size_t>(dev)].on) {
                        decoded[j] = -1; // already on: repaired to none
                        continue;
                    }
                    scratch.states[static_cast<std::size_t>(dev)] = {true, ev.t};
                    open_act[static_cast<std::size_t>(dev)] = static_cast<int>(acts.size());
                    acts.emplace_back(ev.t, T);
                    act_device.push_back(dev);
                } else {
                    if (!scratch.states[static_cast<std::size_t>(dev)].on) {
                        decoded[j] = -1; // not on: repaired to none
                        continue;
                    }
                    acts[static_cast<std::size_t>(open_act[static_cast<std::size_t>(dev)])].second = ev.t;
                    open_act[static_cast<std::size_t>(dev)] = -1;
                    scratch.states[static_cast<std::size_t>(dev)].on = false;
                }
            }
            for (std::size_t k = 0; k < acts.size(); ++k)
                add_activation(scratch.buffer, a, b, profiles[static_cast<std::size_t>(act_device[k])],
                               acts[k].first, acts[k].second);
            return window_error(series, scratch.buffer, cfg.alpha, cfg.beta, a, b);
        };

        WindowReport report;
        report.a = a;
        report.b = b;
        report.candidate_events = static_cast<int>(n_ev);

        const std::size_t dims = n_ev * static_cast<std::size_t>(options);
        std::vector<double> empty_pos(dims, 0.0);
        for (std::size_t j = 0; j < n_ev; ++j) empty_pos[j * static_cast<std::size_t>(options) +
                                                        static_cast<std::size_t>(options - 1)] = 1.0;
        std::vector<int> empty_decoded(n_ev, -1);
        report.empty_error = evaluate(empty_pos, empty_decoded);

        std::vector<int> best_decoded(n_ev, -1);
        double best_error = report.empty_error;

        if (n_ev > 0) {
            struct Particle {
                std::vector<double> pos, vel, pbest;
                double pbest_err = std::numeric_limits<double>::infinity();
            };
            std::vector<Particle> swarm(static_cast<std::size_t>(cfg.particles));
            std::vector<std::mt19937_64> rngs;
            rngs.reserve(swarm.size());
            for (std::size_t p = 0; p < swarm.size(); ++p)
                rngs.emplace_back(mix(cfg.seed ^ mix(window_idx ^ mix(p + 1))));

            for (std::size_t p = 0; p < swarm.size(); ++p) {
                Particle& part = swarm[p];
                part.pos.assign(dims, 0.0);
                part.vel.assign(dims, 0.0);
                if (p == 0) {
                    part.pos = empty_pos;
                } else if (p == 1) {
                    // Greedy signature seed: nearest center for ONs, nearest
                    // negated stable state for OFFs, none when far off.
                    for (std::size_t j = 0; j < n_ev; ++j) {
                        const Event& ev = events.events[candidates[j]];
                        int best = -1;
                        double best_d = std::numeric_limits<double>::infinity();
                        for (int dev = 0; dev < m_devices; ++dev) {
                            const Vec6 target = ev.kind == EventKind::On
                                                    ? profiles[static_cast<std::size_t>(dev)].cluster_center
                                                    : -1.0 * profiles[static_cast<std::size_t>(dev)].stable_state;
                            const double d = squared_distance(ev.signature, target);
                            if (d < best_d) {
                                best_d = d;
                                best = dev;
                            }
                        }
                        const double sig_norm = ev.signature.squared_norm();
                        const int pick = (best >= 0 && best_d < 0.5 * sig_norm) ? best : options - 1;
                        part.pos[j * static_cast<std::size_t>(options) + static_cast<std::size_t>(pick)] = 1.0;
                    }
                } else if (p == 2 && !cfg.hint_assignment.empty()) {
                    for (std::size_t j = 0; j < n_ev; ++j) {
                        const int dev = cfg.hint_assignment[candidates[j]];
                        const int pick = dev >= 0 && dev < m_devices ? dev : options - 1;
                        part.pos[j * static_cast<std::size_t>(options) + static_cast<std::size_t>(pick)] = 1.0;
                    }
                } else {
                    std::uniform_real_distribution<double> u01(0.0, 1.0);
                    for (double& x : part.pos) x = u01(rngs[p]);
                }
            }

            std::vector<double> gbest;
            double gbest_err = std::numeric_limits<double>::infinity();
            for (std::size_t p = 0; p < swarm.size(); ++p) {
                const double err = evaluate(swarm[p].pos, scratch.decoded);
                swarm[p].pbest = swarm[p].pos;
                swarm[p].pbest_err = err;
                if (err < gbest_err) {
                    gbest_err = err;
                    gbest = swarm[p].pos;
                    best_decoded = scratch.decoded;
                }
            }

            for (int iter = 1; iter < cfg.iterations; ++iter) {
                const double prev_gbest = gbest_err;
                for (std::size_t p = 0; p < swarm.size(); ++p) {
                    Particle& part = swarm[p];
                    std::uniform_real_distribution<double> u01(0.0, 1.0);
                    for (std::size_t d = 0; d < dims; ++d) {
                        const double r1 = u01(rngs[p]);
                        const double r2 = u01(rngs[p]);
                        double v = cfg.inertia * part.vel[d] + cfg.cognitive * r1 * (part.pbest[d] - part.pos[d]) +
                                   cfg.social * r2 * (gbest[d] - part.pos[d]);
                        v = std::clamp(v, -0.5, 0.5);
                        part.vel[d] = v;
                        part.pos[d] = std::clamp(part.pos[d] + v, 0.0, 1.0);
                    }
                    const double err = evaluate(part.pos, scratch.decoded);
                    if (err < part.pbest_err) {
                        part.pbest_err = err;
                        part.pbest = part.pos;
                    }
                    if (err < gbest_err) {
                        gbest_err = err;
                        gbest = part.pos;
                        best_decoded = scratch.decoded;
                    }
                }
                if (gbest_err > prev_gbest + 1e-12)
                    throw std::logic_error("pso_disaggregate: global best error increased");
            }
            best_error = std::min(gbest_err, report.empty_error);
            if (report.empty_error < gbest_err) best_decoded.assign(n_ev, -1);
        }
        report.best_error = best_error;
        result.windows.push_back(report);
        result.total_error += best_error;

        // Fix the decision span: store assignments, advance the boundary state.
        std::size_t next_first = first_undecided;
        for (std::size_t j = 0; j < n_ev; ++j) {
            const std::size_t e = candidates[j];
            const Event& ev = events.events[e];
            if (ev.t >= decide_until) break;
            const int dev = best_decoded[j];
            result.event_assignment[e] = dev;
            if (dev >= 0) {
                if (ev.kind == EventKind::On) boundary[static_cast<std::size_t>(dev)] = {true, ev.t};
                else boundary[static_cast<std::size_t>(dev)].on = false;
            }
            next_first = e + 1;
        }
        first_undecided = next_first;

        for (std::int64_t t = a; t < decide_until; ++t) result.epsilon[static_cast<std::size_t>(t)] = eps;

        if (b >= T) break;
        a = decide_until;
        ++window_idx;
    }

    // Assemble the matrix and the full reconstruction.
    result.states.rows = T;
    result.states.cols = m_devices;
    result.states.discrete = true;
    for (std::size_t e = 0; e < events.events.size(); ++e) {
        const int dev = result.event_assignment[e];
        if (dev < 0) continue;
        result.states.entries.push_back(
            {events.events[e].t, dev, events.events[e].kind == EventKind::On ? 1.0 : -1.0});
    }
    result.states.sort_entries();
    std::string why;
    if (!result.states.valid_discrete(&why))
        throw std::logic_error("pso_disaggregate: produced an invalid matrix: " + why);

    result.reconstructed = reconstruct(result.states, profiles, result.epsilon, T);
    result.reconstructed.start_timestamp = series.start_timestamp;
    return result;
}

} // namespace nilm
