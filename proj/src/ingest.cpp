#include "nilm/ingest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nilm {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

PowerSeries load_series(const std::string& path, const CsvSchema& schema, GapFillStats* stats) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");

    // Resolve schema columns against the header row.
    const std::vector<std::string> header = split_csv_line(line);
    auto find_col = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (strip(header[i]) == name) return i;
        throw std::runtime_error(path + ": header does not contain column '" + name + "'");
    };
    const std::size_t ts_col = find_col(schema.timestamp_column);
    std::array<std::size_t, 6> p_col{};
    for (std::size_t c = 0; c < 6; ++c) p_col[c] = find_col(schema.channel_columns[c]);

    std::vector<RawRecord> records;
    std::int64_t line_no = 1;
    std::int64_t duplicates = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (strip(line).empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        auto cell_at = [&](std::size_t i) -> std::string {
            return i < cells.size() ? strip(cells[i]) : std::string{};
        };
        RawRecord rec;
        const std::string ts = cell_at(ts_col);
        if (ts.empty())
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": missing timestamp");
        try {
            rec.timestamp = std::stoll(ts);
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": unparsable timestamp '" + ts + "'");
        }
        for (std::size_t c = 0; c < 6; ++c) {
            const std::string cell = cell_at(p_col[c]);
            if (cell.empty()) continue; // missing channel value
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v))
                throw std::runtime_error(path + ":" + std::to_string(line_no) + ": unparsable value '" + cell +
                                         "' in column " + schema.channel_columns[c]);
            rec.p[c] = v;
        }
        if (!records.empty() && rec.timestamp < records.back().timestamp)
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": timestamps not increasing");
        if (!records.empty() && rec.timestamp == records.back().timestamp) {
            records.back() = rec; // last row wins
            ++duplicates;
            continue;
        }
        records.push_back(rec);
    }
    if (records.empty()) throw std::runtime_error(path + ": no data rows");

    PowerSeries series = fill_records(records, stats);
    if (stats) stats->duplicate_timestamps = duplicates;
    if (series.length() < 2) throw std::runtime_error(path + ": series shorter than 2 samples");
    return series;
}

PowerSeries fill_records(const std::vector<RawRecord>& records, GapFillStats* stats) {
    if (records.empty()) throw std::invalid_argument("fill_records: no records");

    // First known value per channel back-fills leading gaps.
    Vec6 last;
    std::int64_t filled_channels = 0;
    for (std::size_t c = 0; c < 6; ++c) {
        bool found = false;
        for (const RawRecord& r : records) {
            if (r.p[c]) {
                last[c] = *r.p[c];
                found = true;
                break;
            }
        }
        if (!found) last[c] = 0.0; // channel absent from the whole file
    }

    PowerSeries series;
    series.start_timestamp = records.front().timestamp;
    const std::int64_t T = records.back().timestamp - records.front().timestamp + 1;
    series.samples.reserve(static_cast<std::size_t>(T));

    std::int64_t filled_samples = 0;
    std::size_t next = 0;
    for (std::int64_t t = 0; t < T; ++t) {
        const std::int64_t ts = series.start_timestamp + t;
        if (next < records.size() && records[next].timestamp == ts) {
            const RawRecord& r = records[next++];
            for (std::size_t c = 0; c < 6; ++c) {
                if (r.p[c]) last[c] = *r.p[c];
                else ++filled_channels;
            }
        } else {
            ++filled_samples;
        }
        series.samples.push_back(last);
    }

    if (stats) {
        stats->rows_read = static_cast<std::int64_t>(records.size());
        stats->filled_samples = filled_samples;
        stats->filled_channel_values = filled_channels;
        stats->fill_percent = T > 0 ? 100.0 * static_cast<double>(filled_samples) / static_cast<double>(T) : 0.0;
    }
    return series;
}

DerivativeSeries derivative(const PowerSeries& series) {
    if (series.length() < 2) throw std::invalid_argument("derivative: series needs at least 2 samples");
    DerivativeSeries d;
    const std::size_t n = series.samples.size() - 1;
    d.values.reserve(n);
    d.total.reserve(n);
    for (std::size_t t = 0; t < n; ++t) {
        const Vec6 dv = series.samples[t + 1] - series.samples[t];
        d.values.push_back(dv);
        d.total.push_back(dv[0] + dv[1] + dv[2]);
    }
    return d;
}

} // namespace nilm
