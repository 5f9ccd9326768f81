#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace nilm {

// Six-channel power value: [0..2] active phases (W), [3..5] reactive phases (var).
struct Vec6 {
    std::array<double, 6> v{};

    double& operator[](std::size_t i) { return v[i]; }
    const double& operator[](std::size_t i) const { return v[i]; }

    static constexpr std::size_t size() { return 6; }

    // Sum of the three active phases (the quantity peak detection runs on).
    double active_total() const { return v[0] + v[1] + v[2]; }

    double squared_norm() const {
        double s = 0.0;
        for (double x : v) s += x * x;
        return s;
    }
    double norm() const { return std::sqrt(squared_norm()); }

    bool is_finite() const {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }

    Vec6& operator+=(const Vec6& o) {
        for (std::size_t i = 0; i < 6; ++i) v[i] += o.v[i];
        return *this;
    }
    Vec6& operator-=(const Vec6& o) {
        for (std::size_t i = 0; i < 6; ++i) v[i] -= o.v[i];
        return *this;
    }
    Vec6& operator*=(double s) {
        for (std::size_t i = 0; i < 6; ++i) v[i] *= s;
        return *this;
    }

    friend Vec6 operator+(Vec6 a, const Vec6& b) { return a += b; }
    friend Vec6 operator-(Vec6 a, const Vec6& b) { return a -= b; }
    friend Vec6 operator*(Vec6 a, double s) { return a *= s; }
    friend Vec6 operator*(double s, Vec6 a) { return a *= s; }
    friend bool operator==(const Vec6& a, const Vec6& b) { return a.v == b.v; }
};

inline double dot(const Vec6& a, const Vec6& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < 6; ++i) s += a.v[i] * b.v[i];
    return s;
}

inline double squared_distance(const Vec6& a, const Vec6& b) { return (a - b).squared_norm(); }
inline double distance(const Vec6& a, const Vec6& b) { return std::sqrt(squared_distance(a, b)); }

} // namespace nilm
