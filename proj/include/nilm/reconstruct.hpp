#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "nilm/types.hpp"

namespace nilm {

// Always-on component: either a constant vector or a full per-sample series.
using Epsilon = std::variant<Vec6, std::vector<Vec6>>;

// Builds the aggregate signal from state changes and device profiles.
//
// An ON mark at time u plays the dynamic profile at t = u+1 .. u+d and holds the
// stable-state vector afterwards; an OFF mark at time u subtracts the stable
// state for t > u. An OFF arriving before the dynamic part has finished truncates
// it at the OFF time. Probabilistic entries scale their contribution linearly and
// entries with |value| <= threshold are ignored (threshold 0 for discrete input).
PowerSeries reconstruct(const StateChangesMatrix& s,
                        const std::vector<DeviceProfile>& profiles,
                        const Epsilon& epsilon,
                        std::int64_t T,
                        double probabilistic_threshold = 0.1);

} // namespace nilm
