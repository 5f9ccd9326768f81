#include "nilm/serialize.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace nilm {

std::string format_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc{}) throw std::runtime_error("format_double failed");
    return std::string(buf, ptr);
}

static nlohmann::json vec6_to_json(const Vec6& v) {
    nlohmann::json a = nlohmann::json::array();
    for (double x : v.v) a.push_back(x);
    return a;
}

static Vec6 vec6_from_json(const nlohmann::json& a) {
    if (!a.is_array() || a.size() != 6) throw std::runtime_error("expected 6-element array");
    Vec6 v;
    for (std::size_t i = 0; i < 6; ++i) v[i] = a[i].get<double>();
    return v;
}

void write_profiles_json(const std::string& path, const std::vector<DeviceProfile>& profiles) {
    nlohmann::json root = nlohmann::json::array();
    for (const DeviceProfile& p : profiles) {
        nlohmann::json j;
        j["id"] = p.id;
        j["duration"] = p.duration();
        j["cluster_center"] = vec6_to_json(p.cluster_center);
        j["stable_state"] = vec6_to_json(p.stable_state);
        nlohmann::json dyn = nlohmann::json::array();
        for (const Vec6& s : p.dynamic) dyn.push_back(vec6_to_json(s));
        j["dynamic"] = dyn;
        root.push_back(std::move(j));
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << root.dump(1) << '\n';
}

std::vector<DeviceProfile> read_profiles_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open profiles file: " + path);
    nlohmann::json root;
    in >> root;
    if (!root.is_array()) throw std::runtime_error("profiles file: expected a JSON array");
    std::vector<DeviceProfile> profiles;
    for (const auto& j : root) {
        DeviceProfile p;
        p.id = j.at("id").get<int>();
        p.cluster_center = vec6_from_json(j.at("cluster_center"));
        p.stable_state = vec6_from_json(j.at("stable_state"));
        for (const auto& s : j.at("dynamic")) p.dynamic.push_back(vec6_from_json(s));
        if (j.at("duration").get<std::int64_t>() != p.duration())
            throw std::runtime_error("profiles file: duration does not match dynamic length");
        profiles.push_back(std::move(p));
    }
    return profiles;
}

void write_states_csv(const std::string& path, const StateChangesMatrix& s) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "# rows=" << s.rows << " cols=" << s.cols << " kind=" << (s.discrete ? "discrete" : "probabilistic")
        << '\n';
    out << "t,device,value\n";
    for (const StateChange& e : s.entries)
        out << e.t << ',' << e.device << ',' << format_double(e.value) << '\n';
}

StateChangesMatrix read_states_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open states file: " + path);
    StateChangesMatrix s;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# rows=", 0) != 0)
        throw std::runtime_error("states file: missing shape header");
    {
        std::istringstream hdr(line.substr(1));
        std::string tok;
        while (hdr >> tok) {
            auto eq = tok.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
            if (key == "rows") s.rows = std::stoll(val);
            else if (key == "cols") s.cols = std::stoi(val);
            else if (key == "kind") s.discrete = (val == "discrete");
        }
    }
    std::getline(in, line); // column header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        StateChange e;
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');
        e.t = std::stoll(cell);
        std::getline(row, cell, ',');
        e.device = std::stoi(cell);
        std::getline(row, cell, ',');
        e.value = std::stod(cell);
        s.entries.push_back(e);
    }
    s.sort_entries();
    return s;
}

void write_series_csv(const std::string& path, const PowerSeries& series) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "timestamp,P0,P1,P2,P3,P4,P5\n";
    for (std::int64_t t = 0; t < series.length(); ++t) {
        out << series.timestamp_at(t);
        const Vec6& p = series.samples[static_cast<std::size_t>(t)];
        for (double x : p.v) out << ',' << format_double(x);
        out << '\n';
    }
}

void write_profile_catalog(const std::string& path, const std::vector<DeviceProfile>& profiles,
                           const std::vector<int>& member_counts) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "id,duration,stable_norm,members\n";
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        const int members = i < member_counts.size() ? member_counts[i] : 0;
        out << profiles[i].id << ',' << profiles[i].duration() << ','
            << format_double(profiles[i].stable_state.norm()) << ',' << members << '\n';
    }
}

} // namespace nilm
