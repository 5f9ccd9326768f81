#include "nilm/events.hpp"

#include <fstream>
#include <stdexcept>

#include "nilm/serialize.hpp"

namespace nilm {

EventSet detect_events(const DerivativeSeries& deriv, double threshold) {
    if (threshold <= 0.0) throw std::invalid_argument("detect_events: threshold must be positive");
    if (deriv.length() < 3) throw std::invalid_argument("detect_events: derivative needs at least 3 samples");

    EventSet out;
    out.threshold = threshold;
    const std::size_t n = deriv.total.size();
    for (std::size_t t = 1; t + 1 < n; ++t) {
        const double prev = deriv.total[t - 1];
        const double cur = deriv.total[t];
        const double next = deriv.total[t + 1];
        if (prev < cur && next < cur && cur >= threshold)
            out.events.push_back({static_cast<std::int64_t>(t), EventKind::On, deriv.values[t]});
        else if (prev > cur && next > cur && cur <= -threshold)
            out.events.push_back({static_cast<std::int64_t>(t), EventKind::Off, deriv.values[t]});
    }
    return out;
}

void write_events_csv(const std::string& path, const EventSet& events) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "t,kind,dP0,dP1,dP2,dP3,dP4,dP5\n";
    for (const Event& e : events.events) {
        out << e.t << ',' << (e.kind == EventKind::On ? "on" : "off");
        for (double x : e.signature.v) out << ',' << format_double(x);
        out << '\n';
    }
}

} // namespace nilm
