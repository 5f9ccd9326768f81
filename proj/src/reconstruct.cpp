#include "nilm/reconstruct.hpp"

#include <algorithm>
#include <stdexcept>

namespace nilm {

PowerSeries reconstruct(const StateChangesMatrix& s,
                        const std::vector<DeviceProfile>& profiles,
                        const Epsilon& epsilon,
                        std::int64_t T,
                        double probabilistic_threshold) {
    if (T < 0) throw std::invalid_argument("reconstruct: negative length");
    if (static_cast<std::int32_t>(profiles.size()) != s.cols)
        throw std::length_error("reconstruct: profile count does not match matrix columns");

    const std::size_t n = static_cast<std::size_t>(T);
    std::vector<Vec6> out(n);
    std::vector<Vec6> step_delta(n + 1); // stable-state steps, prefix-summed at the end

    // Per-device entries in time order; the matrix keeps them sorted globally.
    std::vector<std::vector<const StateChange*>> by_device(profiles.size());
    for (const StateChange& e : s.entries) {
        if (e.device < 0 || e.device >= s.cols)
            throw std::length_error("reconstruct: entry device outside matrix columns");
        if (s.discrete && e.value != 1.0 && e.value != -1.0)
            throw std::invalid_argument("reconstruct: discrete entry not in {-1,+1}");
        by_device[static_cast<std::size_t>(e.device)].push_back(&e);
    }
    const double thr = s.discrete ? 0.0 : probabilistic_threshold;

    for (std::size_t dev = 0; dev < profiles.size(); ++dev) {
        auto& ev = by_device[dev];
        std::sort(ev.begin(), ev.end(), [](const StateChange* a, const StateChange* b) { return a->t < b->t; });
        const DeviceProfile& prof = profiles[dev];
        const std::int64_t d = prof.duration();

        for (std::size_t j = 0; j < ev.size(); ++j) {
            const StateChange& e = *ev[j];
            if (e.value > thr) {
                // Next OFF-signed entry truncates the dynamic part.
                std::int64_t off_t = T; // no truncation within range
                for (std::size_t k = j + 1; k < ev.size(); ++k) {
                    if (ev[k]->value < -thr) {
                        off_t = ev[k]->t;
                        break;
                    }
                }
                const std::int64_t d_eff = std::min(d, off_t - e.t);
                for (std::int64_t k = 1; k <= d_eff && e.t + k < T; ++k)
                    out[static_cast<std::size_t>(e.t + k)] += e.value * prof.dynamic[static_cast<std::size_t>(k - 1)];
                // Stable state persists after the dynamic part until an OFF cancels it.
                const std::int64_t tail = e.t + d_eff + 1;
                if (tail < T) step_delta[static_cast<std::size_t>(tail)] += e.value * prof.stable_state;
            } else if (e.value < -thr) {
                const std::int64_t tail = e.t + 1;
                if (tail < T) step_delta[static_cast<std::size_t>(tail)] += e.value * prof.stable_state;
            }
        }
    }

    Vec6 running;
    for (std::size_t t = 0; t < n; ++t) {
        running += step_delta[t];
        out[t] += running;
    }

    if (std::holds_alternative<Vec6>(epsilon)) {
        const Vec6& c = std::get<Vec6>(epsilon);
        for (Vec6& x : out) x += c;
    } else {
        const auto& series = std::get<std::vector<Vec6>>(epsilon);
        if (static_cast<std::int64_t>(series.size()) < T)
            throw std::length_error("reconstruct: epsilon series shorter than requested length");
        for (std::size_t t = 0; t < n; ++t) out[t] += series[t];
    }

    PowerSeries result;
    result.samples = std::move(out);
    return result;
}

} // namespace nilm
