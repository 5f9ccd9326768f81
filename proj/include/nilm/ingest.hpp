#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nilm/types.hpp"

namespace nilm {

// One parsed CSV row; channels may be individually missing.
struct RawRecord {
    std::int64_t timestamp = 0;
    std::array<std::optional<double>, 6> p;
};

// Column mapping for the input CSV. Names must appear in the header row.
struct CsvSchema {
    std::string timestamp_column = "timestamp";
    std::array<std::string, 6> channel_columns = {"P0", "P1", "P2", "P3", "P4", "P5"};
};

struct GapFillStats {
    std::int64_t rows_read = 0;
    std::int64_t duplicate_timestamps = 0; // last row wins
    std::int64_t filled_samples = 0;       // whole missing seconds
    std::int64_t filled_channel_values = 0;
    double fill_percent = 0.0; // filled samples / output length * 100
};

// Gap-free 1 Hz series: missing seconds and missing channel values are filled
// with the most recent known value; leading gaps take the first known value.
PowerSeries load_series(const std::string& path, const CsvSchema& schema, GapFillStats* stats = nullptr);

// Same filling logic on already-parsed records (used by load_series and tests).
PowerSeries fill_records(const std::vector<RawRecord>& records, GapFillStats* stats = nullptr);

struct DerivativeSeries {
    std::vector<Vec6> values;  // dP(t) = P(t+1) - P(t), length T-1
    std::vector<double> total; // sum of the three active-channel derivatives
    std::int64_t length() const { return static_cast<std::int64_t>(values.size()); }
};

DerivativeSeries derivative(const PowerSeries& series);

} // namespace nilm
