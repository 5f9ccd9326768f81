#include "nilm/profiles.hpp"

#include <algorithm>
#include <stdexcept>

namespace nilm {

DeviceProfile median_blend(const Group& group, const PowerSeries& series, const Vec6& cluster_center,
                           int profile_id, BlendDiagnostics* diag) {
    const std::int64_t d = group.duration;
    const std::int64_t T = series.length();

    // Collect normalized member windows.
    std::vector<std::vector<Vec6>> windows;
    int out_of_bounds = 0, zero_max = 0;
    for (const DurationSample& s : group.members) {
        if (s.on_time < 0 || s.on_time + d >= T) {
            ++out_of_bounds;
            continue;
        }
        double max_tot = 0.0;
        for (std::int64_t k = 1; k <= d; ++k)
            max_tot = std::max(max_tot, series.total_active(s.on_time + k));
        if (max_tot <= 0.0) {
            ++zero_max;
            continue;
        }
        std::vector<Vec6> w;
        w.reserve(static_cast<std::size_t>(d));
        for (std::int64_t k = 1; k <= d; ++k)
            w.push_back(series.samples[static_cast<std::size_t>(s.on_time + k)] * (1.0 / max_tot));
        windows.push_back(std::move(w));
    }
    if (diag) {
        diag->windows_used = static_cast<int>(windows.size());
        diag->windows_out_of_bounds = out_of_bounds;
        diag->windows_zero_max = zero_max;
    }
    if (windows.empty()) throw std::runtime_error("median_blend: no usable member windows");

    // Lower median per offset and channel, then rescale. The center is a W/s
    // signature; one sampling step turns its active total into watts.
    const double scale = cluster_center.active_total() * 1.0;
    DeviceProfile profile;
    profile.id = profile_id;
    profile.cluster_center = cluster_center;
    profile.dynamic.resize(static_cast<std::size_t>(d));
    std::vector<double> column(windows.size());
    for (std::int64_t k = 0; k < d; ++k) {
        for (std::size_t c = 0; c < 6; ++c) {
            for (std::size_t w = 0; w < windows.size(); ++w)
                column[w] = windows[w][static_cast<std::size_t>(k)][c];
            const std::size_t mid = (column.size() - 1) / 2;
            std::nth_element(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(mid), column.end());
            profile.dynamic[static_cast<std::size_t>(k)][c] = scale * column[mid];
        }
    }
    profile.stable_state = stable_state(profile.dynamic);
    return profile;
}

Vec6 stable_state(const std::vector<Vec6>& dynamic, double zero_tolerance, bool* all_zero) {
    if (dynamic.empty()) throw std::invalid_argument("stable_state: empty profile");
    for (auto it = dynamic.rbegin(); it != dynamic.rend(); ++it) {
        if (it->active_total() > zero_tolerance) {
            if (all_zero) *all_zero = false;
            return *it;
        }
    }
    if (all_zero) *all_zero = true;
    return Vec6{};
}

} // namespace nilm
