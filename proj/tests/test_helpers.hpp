#pragma once

#include <random>
#include <vector>

#include "nilm/types.hpp"

namespace nilm::test {

inline Vec6 v6(double a, double b = 0, double c = 0, double d = 0, double e = 0, double f = 0) {
    return Vec6{{a, b, c, d, e, f}};
}

// Integer-valued random profile; integer data keeps double sums exact.
inline DeviceProfile random_profile(std::mt19937_64& rng, int id, int max_duration = 20) {
    std::uniform_int_distribution<int> dur(1, max_duration);
    std::uniform_int_distribution<int> amp(1, 500);
    DeviceProfile p;
    p.id = id;
    const int d = dur(rng);
    for (int k = 0; k < d; ++k) {
        Vec6 s;
        for (std::size_t c = 0; c < 6; ++c) s[c] = amp(rng);
        p.dynamic.push_back(s);
    }
    p.stable_state = p.dynamic.back();
    p.cluster_center = p.dynamic.front();
    return p;
}

// Random valid discrete column: alternating ON/OFF at random times.
inline void random_column(std::mt19937_64& rng, StateChangesMatrix& s, std::int32_t device) {
    std::uniform_int_distribution<int> gap(1, 10);
    std::int64_t t = gap(rng);
    bool on = false;
    while (t < s.rows) {
        s.entries.push_back({t, device, on ? -1.0 : 1.0});
        on = !on;
        t += gap(rng);
    }
}

// Brute-force reconstruction oracle: dense state walk per device, no shared
// code with reconstruct() beyond the profile data.
inline std::vector<Vec6> brute_force_reconstruct(const StateChangesMatrix& s,
                                                 const std::vector<DeviceProfile>& profiles,
                                                 const std::vector<Vec6>& epsilon) {
    const std::int64_t T = s.rows;
    std::vector<Vec6> out(static_cast<std::size_t>(T));
    for (std::int64_t t = 0; t < T; ++t) out[static_cast<std::size_t>(t)] = epsilon[static_cast<std::size_t>(t)];
    for (std::size_t dev = 0; dev < profiles.size(); ++dev) {
        // Collect this device's entries in time order.
        std::vector<std::pair<std::int64_t, double>> marks;
        for (const StateChange& e : s.entries)
            if (e.device == static_cast<std::int32_t>(dev)) marks.emplace_back(e.t, e.value);
        for (std::size_t j = 0; j < marks.size(); ++j) {
            if (marks[j].second <= 0) continue;
            std::int64_t off = T;
            for (std::size_t k = j + 1; k < marks.size(); ++k)
                if (marks[k].second < 0) {
                    off = marks[k].first;
                    break;
                }
            const std::int64_t on = marks[j].first;
            const DeviceProfile& p = profiles[dev];
            for (std::int64_t t = on + 1; t < T && t <= off; ++t) {
                const std::int64_t k = t - on;
                if (k <= p.duration())
                    out[static_cast<std::size_t>(t)] += p.dynamic[static_cast<std::size_t>(k - 1)];
                else
                    out[static_cast<std::size_t>(t)] += p.stable_state;
            }
        }
    }
    return out;
}

} // namespace nilm::test
