#include "nilm/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nilm {

void StateChangesMatrix::sort_entries() {
    std::sort(entries.begin(), entries.end(), [](const StateChange& a, const StateChange& b) {
        if (a.t != b.t) return a.t < b.t;
        return a.device < b.device;
    });
}

bool StateChangesMatrix::valid_discrete(std::string* why) const {
    std::vector<int> state(static_cast<std::size_t>(cols), 0);
    for (const StateChange& e : entries) {
        if (e.device < 0 || e.device >= cols || e.t < 0 || e.t >= rows) {
            if (why) *why = "entry out of matrix bounds";
            return false;
        }
        if (e.value != 1.0 && e.value != -1.0) {
            if (why) *why = "discrete entry not in {-1,+1}";
            return false;
        }
        int& st = state[static_cast<std::size_t>(e.device)];
        st += e.value > 0 ? 1 : -1;
        if (st < 0 || st > 1) {
            if (why) *why = "device " + std::to_string(e.device) + " switched outside {0,1} at t=" + std::to_string(e.t);
            return false;
        }
    }
    return true;
}

std::vector<std::vector<double>> densify(const StateChangesMatrix& s) {
    std::vector<std::vector<double>> dense(static_cast<std::size_t>(s.rows),
                                           std::vector<double>(static_cast<std::size_t>(s.cols), 0.0));
    for (const StateChange& e : s.entries) {
        if (e.t < 0 || e.t >= s.rows || e.device < 0 || e.device >= s.cols)
            throw std::out_of_range("state change entry outside matrix shape");
        dense[static_cast<std::size_t>(e.t)][static_cast<std::size_t>(e.device)] = e.value;
    }
    return dense;
}

StateChangesMatrix sparsify(const std::vector<std::vector<double>>& dense, bool discrete) {
    StateChangesMatrix s;
    s.rows = static_cast<std::int64_t>(dense.size());
    s.cols = dense.empty() ? 0 : static_cast<std::int32_t>(dense.front().size());
    s.discrete = discrete;
    for (std::size_t t = 0; t < dense.size(); ++t)
        for (std::size_t i = 0; i < dense[t].size(); ++i)
            if (dense[t][i] != 0.0)
                s.entries.push_back({static_cast<std::int64_t>(t), static_cast<std::int32_t>(i), dense[t][i]});
    return s;
}

} // namespace nilm
