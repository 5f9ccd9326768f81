#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "nilm/types.hpp"

namespace nilm {

enum class ProfileShape { Step, ExponentialSettle, OscillatingSinglePhase, DecayingMultiSpike };

struct DeviceSpec {
    ProfileShape shape = ProfileShape::Step;
    Vec6 amplitude;             // stable-state level per channel (W / var)
    std::int64_t duration = 60; // dynamic profile length d, seconds

    double peak_ratio = 1.5;  // ExponentialSettle: first-sample overshoot factor
    double settle_tau = 5.0;  // ExponentialSettle: settle time constant, s
    double osc_amplitude = 0.2;
    double osc_period = 60.0;
    double spike_ratio = 1.6; // DecayingMultiSpike: spike height over the decaying base

    // Schedule: fixed workday slots (seconds since midnight) repeat every week,
    // random activations come on top.
    std::vector<double> workday_slots;
    double random_rate = 0.0;  // expected random activations per workday
    double weekend_rate = 0.0; // expected activations per weekend day
    std::int64_t extra_stable = 0;    // ON time past the dynamic part, s
    std::int64_t duration_jitter = 0; // uniform jitter on the extra stable time

    // When non-empty, used verbatim instead of the schedule model: (on, off) pairs.
    std::vector<std::pair<std::int64_t, std::int64_t>> explicit_activations;
};

struct Scenario {
    std::string name = "custom";
    std::int64_t days = 1;
    std::int64_t start_timestamp = 1546819200; // 2019-01-07, a Monday, 00:00 UTC
    std::uint64_t seed = 1;
    std::vector<DeviceSpec> devices;

    std::array<double, 6> noise_sigma{}; // i.i.d. Gaussian per channel, W
    double base_min = 0.0;               // slowly varying always-on load, total active W
    double base_max = 0.0;
    std::array<double, 6> base_fractions = {0.34, 0.33, 0.23, 0.04, 0.03, 0.03};
};

struct GeneratedData {
    PowerSeries series;
    StateChangesMatrix truth_states;
    std::vector<DeviceProfile> truth_profiles;
    std::vector<Vec6> base_load; // the epsilon term, per sample
};

// Forward model: reconstruct(truth states, truth profiles, base) + noise.
// Deterministic for a given scenario seed. Overlapping activations of one
// device raise a generation error.
GeneratedData generate(const Scenario& scenario);

// Dynamic profile of a device spec (offsets 1..d), used by generate and tests.
std::vector<Vec6> build_profile_shape(const DeviceSpec& spec);

// Built-in scenario presets addressable from configuration.
//   tiny            3 devices, light schedule (fast pipeline runs)
//   small-office    10 devices, mixed shapes, moderate noise
//   periodic-office 6 devices, weekly-periodic workday slots plus random extras
//   paper-like      52 devices calibrated to commercial-building scale
Scenario scenario_preset(const std::string& name, std::int64_t days, std::uint64_t seed);

} // namespace nilm
