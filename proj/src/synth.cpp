#include "nilm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "nilm/profiles.hpp"
#include "nilm/reconstruct.hpp"

namespace nilm {

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

// Monday = 0 .. Sunday = 6 (epoch day zero was a Thursday).
int weekday_of(std::int64_t epoch_seconds) {
    std::int64_t day = epoch_seconds / kSecondsPerDay;
    return static_cast<int>((day % 7 + 7 + 3) % 7);
}

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t a = 0, std::uint64_t b = 0) {
    return std::mt19937_64(mix(seed ^ mix(tag ^ mix(a ^ mix(b)))));
}

enum StreamTag : std::uint64_t { kTagSchedule = 1, kTagNoise = 2, kTagBase = 3, kTagFleet = 4 };

} // namespace

std::vector<Vec6> build_profile_shape(const DeviceSpec& spec) {
    const std::int64_t d = spec.duration;
    if (d < 1) throw std::invalid_argument("device profile needs duration >= 1");
    std::vector<Vec6> dynamic(static_cast<std::size_t>(d));
    switch (spec.shape) {
    case ProfileShape::Step:
        for (auto& s : dynamic) s = spec.amplitude;
        break;
    case ProfileShape::ExponentialSettle:
        for (std::int64_t k = 1; k <= d; ++k) {
            const double f = 1.0 + (spec.peak_ratio - 1.0) * std::exp(-static_cast<double>(k - 1) / spec.settle_tau);
            dynamic[static_cast<std::size_t>(k - 1)] = spec.amplitude * f;
        }
        break;
    case ProfileShape::OscillatingSinglePhase:
        for (std::int64_t k = 1; k <= d; ++k) {
            const double f = 1.0 + spec.osc_amplitude * std::sin(2.0 * M_PI * static_cast<double>(k) / spec.osc_period);
            dynamic[static_cast<std::size_t>(k - 1)] = spec.amplitude * f;
        }
        break;
    case ProfileShape::DecayingMultiSpike: {
        const std::int64_t period = std::max<std::int64_t>(10, d / 8);
        for (std::int64_t k = 1; k <= d; ++k) {
            double f = 1.3 - 0.3 * static_cast<double>(k - 1) / static_cast<double>(std::max<std::int64_t>(1, d - 1));
            if (k % period == 0) f *= spec.spike_ratio;
            dynamic[static_cast<std::size_t>(k - 1)] = spec.amplitude * f;
        }
        break;
    }
    }
    return dynamic;
}

GeneratedData generate(const Scenario& scenario) {
    if (scenario.days < 1) throw std::invalid_argument("generate: scenario needs at least one day");
    const std::int64_t T = scenario.days * kSecondsPerDay;

    GeneratedData out;
    out.series.start_timestamp = scenario.start_timestamp;
    out.truth_states.rows = T;
    out.truth_states.cols = static_cast<std::int32_t>(scenario.devices.size());
    out.truth_states.discrete = true;

    // Truth profiles.
    for (std::size_t i = 0; i < scenario.devices.size(); ++i) {
        DeviceProfile p;
        p.id = static_cast<int>(i);
        p.dynamic = build_profile_shape(scenario.devices[i]);
        p.stable_state = stable_state(p.dynamic);
        p.cluster_center = p.dynamic.front(); // W/s jump out of the OFF state
        out.truth_profiles.push_back(std::move(p));
    }

    // Schedules.
    for (std::size_t i = 0; i < scenario.devices.size(); ++i) {
        const DeviceSpec& spec = scenario.devices[i];
        std::vector<std::pair<std::int64_t, std::int64_t>> activations;

        if (!spec.explicit_activations.empty()) {
            activations = spec.explicit_activations;
            std::sort(activations.begin(), activations.end());
            for (std::size_t a = 0; a < activations.size(); ++a) {
                if (activations[a].second <= activations[a].first)
                    throw std::runtime_error("generate: activation ends before it starts");
                if (a > 0 && activations[a].first <= activations[a - 1].second)
                    throw std::runtime_error("generate: device re-switched on while already on");
            }
        } else {
            for (std::int64_t day = 0; day < scenario.days; ++day) {
                auto rng = stream(scenario.seed, kTagSchedule, i, static_cast<std::uint64_t>(day));
                const int wd = weekday_of(scenario.start_timestamp + day * kSecondsPerDay);
                std::vector<double> times;
                if (wd <= 4) {
                    times = spec.workday_slots;
                    std::poisson_distribution<int> extra(spec.random_rate);
                    const int n = spec.random_rate > 0.0 ? extra(rng) : 0;
                    std::uniform_real_distribution<double> when(6.0 * 3600.0, 20.0 * 3600.0);
                    for (int k = 0; k < n; ++k) times.push_back(when(rng));
                } else if (spec.weekend_rate > 0.0) {
                    std::poisson_distribution<int> cnt(spec.weekend_rate);
                    const int n = cnt(rng);
                    std::uniform_real_distribution<double> when(8.0 * 3600.0, 18.0 * 3600.0);
                    for (int k = 0; k < n; ++k) times.push_back(when(rng));
                }
                std::sort(times.begin(), times.end());
                for (double tod : times) {
                    std::int64_t on = day * kSecondsPerDay + static_cast<std::int64_t>(tod);
                    std::int64_t hold = spec.duration + spec.extra_stable;
                    if (spec.duration_jitter > 0) {
                        std::uniform_int_distribution<std::int64_t> jit(-spec.duration_jitter, spec.duration_jitter);
                        hold += jit(rng);
                    }
                    hold = std::max<std::int64_t>(hold, 2);
                    activations.emplace_back(on, on + hold);
                }
            }
            // Overlapping schedule draws are dropped, earliest wins.
            std::sort(activations.begin(), activations.end());
            std::vector<std::pair<std::int64_t, std::int64_t>> kept;
            for (const auto& a : activations) {
                if (!kept.empty() && a.first <= kept.back().second + 1) continue;
                kept.push_back(a);
            }
            activations = std::move(kept);
        }

        for (const auto& [on, off] : activations) {
            if (on < 0 || on >= T - 1) continue;
            out.truth_states.entries.push_back({on, static_cast<std::int32_t>(i), 1.0});
            if (off < T) out.truth_states.entries.push_back({off, static_cast<std::int32_t>(i), -1.0});
        }
    }
    out.truth_states.sort_entries();
    std::string why;
    if (!out.truth_states.valid_discrete(&why)) throw std::runtime_error("generate: invalid schedule: " + why);

    // Slowly varying base load: hourly control points, linear in between.
    out.base_load.resize(static_cast<std::size_t>(T));
    {
        auto rng = stream(scenario.seed, kTagBase);
        const std::int64_t hours = T / 3600 + 1;
        std::vector<double> level(static_cast<std::size_t>(hours + 1));
        std::uniform_real_distribution<double> pick(scenario.base_min, scenario.base_max);
        for (auto& v : level) v = scenario.base_max > scenario.base_min ? pick(rng) : scenario.base_min;
        for (std::int64_t t = 0; t < T; ++t) {
            const std::int64_t h = t / 3600;
            const double frac = static_cast<double>(t % 3600) / 3600.0;
            const double tot = level[static_cast<std::size_t>(h)] * (1.0 - frac) +
                               level[static_cast<std::size_t>(h + 1)] * frac;
            Vec6 b;
            for (std::size_t c = 0; c < 6; ++c) b[c] = tot * scenario.base_fractions[c];
            out.base_load[static_cast<std::size_t>(t)] = b;
        }
    }

    PowerSeries clean = reconstruct(out.truth_states, out.truth_profiles, out.base_load, T);
    clean.start_timestamp = scenario.start_timestamp;

    // Per-day noise streams.
    bool any_noise = false;
    for (double s : scenario.noise_sigma) any_noise |= s > 0.0;
    if (any_noise) {
        for (std::int64_t day = 0; day < scenario.days; ++day) {
            auto rng = stream(scenario.seed, kTagNoise, static_cast<std::uint64_t>(day));
            std::normal_distribution<double> unit(0.0, 1.0);
            const std::int64_t a = day * kSecondsPerDay, b = std::min(T, a + kSecondsPerDay);
            for (std::int64_t t = a; t < b; ++t)
                for (std::size_t c = 0; c < 6; ++c)
                    if (scenario.noise_sigma[c] > 0.0)
                        clean.samples[static_cast<std::size_t>(t)][c] += scenario.noise_sigma[c] * unit(rng);
        }
    }

    out.series = std::move(clean);
    return out;
}

namespace {

Scenario tiny_scenario() {
    Scenario s;
    s.name = "tiny";
    s.noise_sigma = {20, 20, 20, 5, 5, 5};
    s.base_min = 2000;
    s.base_max = 2600;

    DeviceSpec d0;
    d0.shape = ProfileShape::Step;
    d0.amplitude = {{1200, 0, 0, 200, 0, 0}};
    d0.duration = 180;
    d0.workday_slots = {9 * 3600.0, 14 * 3600.0};
    d0.random_rate = 1.0;
    d0.extra_stable = 120;

    DeviceSpec d1;
    d1.shape = ProfileShape::ExponentialSettle;
    d1.amplitude = {{800, 800, 800, 150, 150, 150}};
    d1.duration = 300;
    d1.peak_ratio = 1.6;
    d1.settle_tau = 4.0;
    d1.workday_slots = {10.5 * 3600.0};
    d1.random_rate = 1.0;
    d1.extra_stable = 300;

    DeviceSpec d2;
    d2.shape = ProfileShape::OscillatingSinglePhase;
    d2.amplitude = {{0, 1500, 0, 0, 250, 0}};
    d2.duration = 600;
    d2.osc_amplitude = 0.15;
    d2.osc_period = 90.0;
    d2.workday_slots = {12 * 3600.0};
    d2.random_rate = 0.5;

    s.devices = {d0, d1, d2};
    return s;
}

Scenario small_office_scenario() {
    Scenario s;
    s.name = "small-office";
    s.noise_sigma = {30, 30, 30, 10, 10, 10};
    s.base_min = 2300;
    s.base_max = 3000;

    struct Blueprint {
        ProfileShape shape;
        double p0, p1, p2, q0, q1, q2;
        std::int64_t d;
        std::vector<double> slots_h;
        double rate;
        std::int64_t extra;
    };
    const std::vector<Blueprint> fleet = {
        {ProfileShape::Step, 2400, 0, 0, 400, 0, 0, 240, {7.0, 12.5}, 1.0, 180},
        {ProfileShape::Step, 0, 3200, 0, 0, 500, 0, 420, {8.0, 15.0}, 1.0, 240},
        {ProfileShape::ExponentialSettle, 1500, 1500, 1500, 350, 350, 350, 600, {9.0}, 1.5, 600},
        {ProfileShape::ExponentialSettle, 900, 900, 900, 700, 700, 700, 300, {10.0, 16.0}, 1.0, 120},
        {ProfileShape::Step, 0, 0, 1800, 0, 0, 250, 180, {11.0, 13.5, 17.0}, 1.5, 60},
        {ProfileShape::OscillatingSinglePhase, 0, 2600, 0, 0, 450, 0, 900, {9.5}, 0.5, 300},
        {ProfileShape::ExponentialSettle, 2000, 2000, 2000, 300, 300, 300, 450, {13.0}, 1.0, 450},
        {ProfileShape::Step, 700, 700, 0, 150, 150, 0, 120, {8.5, 12.0, 15.5}, 2.0, 60},
        {ProfileShape::DecayingMultiSpike, 1200, 1200, 1200, 200, 200, 200, 360, {14.0}, 0.5, 0},
        {ProfileShape::Step, 4000, 0, 0, 600, 0, 0, 300, {11.5}, 0.5, 300},
    };
    for (const Blueprint& b : fleet) {
        DeviceSpec d;
        d.shape = b.shape;
        d.amplitude = {{b.p0, b.p1, b.p2, b.q0, b.q1, b.q2}};
        d.duration = b.d;
        for (double h : b.slots_h) d.workday_slots.push_back(h * 3600.0);
        d.random_rate = b.rate;
        d.extra_stable = b.extra;
        d.duration_jitter = 0;
        s.devices.push_back(std::move(d));
    }
    return s;
}

Scenario periodic_office_scenario() {
    Scenario s;
    s.name = "periodic-office";
    s.noise_sigma = {15, 15, 15, 5, 5, 5};
    s.base_min = 2250;
    s.base_max = 2350;

    struct Blueprint {
        ProfileShape shape;
        double p0, p1, p2, q0, q1, q2;
        std::int64_t d;
        std::vector<double> slots_h;
        double rate;
        std::int64_t extra;
    };
    // Roughly one random activation for every four scheduled ones.
    const std::vector<Blueprint> fleet = {
        {ProfileShape::Step, 2600, 0, 0, 450, 0, 0, 300, {7.25, 9.5, 12.0, 14.5}, 1.0, 240},
        {ProfileShape::Step, 0, 3400, 0, 0, 550, 0, 480, {8.0, 11.0, 15.0}, 0.75, 300},
        {ProfileShape::ExponentialSettle, 1400, 1400, 1400, 320, 320, 320, 540, {8.5, 13.0, 16.5}, 0.75, 360},
        {ProfileShape::Step, 0, 0, 2100, 0, 0, 360, 240, {7.75, 10.25, 13.75, 16.0}, 1.0, 120},
        {ProfileShape::ExponentialSettle, 1000, 1000, 1000, 240, 240, 240, 360, {9.0, 12.5, 15.25}, 0.75, 180},
        {ProfileShape::Step, 1800, 1800, 0, 280, 280, 0, 420, {10.0, 14.0}, 0.5, 240},
    };
    for (const Blueprint& b : fleet) {
        DeviceSpec d;
        d.shape = b.shape;
        d.amplitude = {{b.p0, b.p1, b.p2, b.q0, b.q1, b.q2}};
        d.duration = b.d;
        for (double h : b.slots_h) d.workday_slots.push_back(h * 3600.0);
        d.random_rate = b.rate;
        d.extra_stable = b.extra;
        s.devices.push_back(std::move(d));
    }
    return s;
}

Scenario paper_like_scenario() {
    Scenario s;
    s.name = "paper-like";
    s.noise_sigma = {25, 25, 25, 8, 8, 8};
    s.base_min = 2310;
    s.base_max = 3150;

    auto rng = stream(0xC0FFEEULL, kTagFleet);

    // A handful of large three-phase machines carrying the midday peak.
    for (int i = 0; i < 6; ++i) {
        DeviceSpec d;
        d.shape = ProfileShape::ExponentialSettle;
        std::uniform_real_distribution<double> amp(2200.0, 3600.0);
        const double a = amp(rng);
        d.amplitude = {{a, a, a, a * 0.25, a * 0.25, a * 0.25}};
        d.duration = 1200 + i * 600;
        d.peak_ratio = 1.5;
        d.settle_tau = 6.0;
        d.workday_slots = {(8.0 + 0.5 * i) * 3600.0, (10.8 + 0.05 * i) * 3600.0, (14.0 + 0.4 * i) * 3600.0};
        d.random_rate = 0.5;
        d.extra_stable = 2400;
        d.duration_jitter = 300;
        s.devices.push_back(std::move(d));
    }
    // Mid-size devices: mixed shapes and phase mixes.
    for (int i = 0; i < 18; ++i) {
        DeviceSpec d;
        std::uniform_real_distribution<double> amp(700.0, 1800.0);
        const double a = amp(rng);
        const int phase = i % 3;
        if (i % 2 == 0) {
            d.shape = ProfileShape::Step;
            d.amplitude[static_cast<std::size_t>(phase)] = a;
            d.amplitude[static_cast<std::size_t>(phase + 3)] = a * 0.2;
        } else {
            d.shape = ProfileShape::ExponentialSettle;
            for (int c = 0; c < 3; ++c) {
                d.amplitude[static_cast<std::size_t>(c)] = a / 2.0;
                d.amplitude[static_cast<std::size_t>(c + 3)] = a / 7.0;
            }
        }
        std::uniform_int_distribution<std::int64_t> dur(300, 2400);
        d.duration = dur(rng);
        std::uniform_real_distribution<double> slot(7.0, 17.0);
        d.workday_slots = {slot(rng) * 3600.0, (10.6 + 0.03 * i) * 3600.0};
        d.random_rate = 1.0;
        d.extra_stable = 1500;
        d.duration_jitter = 200;
        s.devices.push_back(std::move(d));
    }
    // Small appliances, short cycles, many of them.
    for (int i = 0; i < 28; ++i) {
        DeviceSpec d;
        std::uniform_real_distribution<double> amp(260.0, 900.0);
        const double a = amp(rng);
        const int phase = i % 3;
        d.shape = (i % 5 == 0) ? ProfileShape::OscillatingSinglePhase
                               : (i % 7 == 0 ? ProfileShape::DecayingMultiSpike : ProfileShape::Step);
        d.amplitude[static_cast<std::size_t>(phase)] = a;
        d.amplitude[static_cast<std::size_t>(phase + 3)] = a * 0.15;
        std::uniform_int_distribution<std::int64_t> dur(120, 900);
        d.duration = dur(rng);
        std::uniform_real_distribution<double> slot(6.5, 18.0);
        d.workday_slots = {slot(rng) * 3600.0, (10.7 + 0.02 * i) * 3600.0};
        d.random_rate = 2.0;
        d.extra_stable = 700;
        d.duration_jitter = 150;
        d.weekend_rate = 0.5;
        s.devices.push_back(std::move(d));
    }
    return s;
}

} // namespace

Scenario scenario_preset(const std::string& name, std::int64_t days, std::uint64_t seed) {
    Scenario s;
    if (name == "tiny") s = tiny_scenario();
    else if (name == "small-office") s = small_office_scenario();
    else if (name == "periodic-office") s = periodic_office_scenario();
    else if (name == "paper-like") s = paper_like_scenario();
    else throw std::invalid_argument("unknown scenario preset: " + name);
    s.days = days;
    s.seed = seed;
    return s;
}

} // namespace nilm
