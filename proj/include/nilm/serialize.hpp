#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nilm/types.hpp"

namespace nilm {

// Device profiles: JSON array of {id, duration, cluster_center[6], stable_state[6], dynamic[d][6]}.
void write_profiles_json(const std::string& path, const std::vector<DeviceProfile>& profiles);
std::vector<DeviceProfile> read_profiles_json(const std::string& path);

// State-changes matrix: CSV triplets "t,device,value" with a shape header line.
void write_states_csv(const std::string& path, const StateChangesMatrix& s);
StateChangesMatrix read_states_csv(const std::string& path);

// Power series: "timestamp,P0..P5" rows, the same format ingestion reads.
void write_series_csv(const std::string& path, const PowerSeries& series);

// Catalog index: one row per profile (id, duration, stable-state norm, member count).
void write_profile_catalog(const std::string& path, const std::vector<DeviceProfile>& profiles,
                           const std::vector<int>& member_counts);

// Shared formatting helper: shortest round-trip double representation.
std::string format_double(double x);

} // namespace nilm
