#pragma once

#include <string>
#include <vector>

#include "nilm/durations.hpp"
#include "nilm/types.hpp"

namespace nilm {

inline constexpr double kStableZeroToleranceW = 1.0; // total-active threshold for "non-zero"

struct BlendDiagnostics {
    int windows_used = 0;
    int windows_out_of_bounds = 0;
    int windows_zero_max = 0;
};

// Median blending: per member, the aggregate window [on+1, on+d] is normalized
// by its maximum total-active value; the per-offset per-channel median across
// members is rescaled with the cluster center (total active W/s, integrated
// over the 1 s sampling step) back to absolute power.
DeviceProfile median_blend(const Group& group, const PowerSeries& series, const Vec6& cluster_center,
                           int profile_id, BlendDiagnostics* diag = nullptr);

// Last dynamic sample whose total-active component exceeds the tolerance;
// a fully-zero profile yields the zero vector.
Vec6 stable_state(const std::vector<Vec6>& dynamic, double zero_tolerance = kStableZeroToleranceW,
                  bool* all_zero = nullptr);

} // namespace nilm
