#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "convflow/grid.hpp"

namespace convflow {

/// Flow error statistics over a node mask. Endpoint error in pixels/frame,
/// angular error in degrees using the space-time 3-vector (u1, u2, 1).
struct ErrorStats {
    double mean_endpoint = 0.0;
    double max_endpoint = 0.0;
    double mean_angular_deg = 0.0;
    std::size_t count = 0;
};

inline ErrorStats endpoint_error(const VectorField& u, const VectorField& u_true,
                                 const std::vector<std::uint8_t>& mask = {}) {
    detail::check_same_grid(u.grid, u_true.grid, "endpoint_error");
    if (!mask.empty() && mask.size() != u.u1.size())
        throw std::invalid_argument("endpoint_error: mask size mismatch");
    ErrorStats s;
    double sum_ee = 0.0, sum_ae = 0.0;
    for (std::size_t n = 0; n < u.u1.size(); ++n) {
        if (!mask.empty() && !mask[n]) continue;
        double d1 = u.u1[n] - u_true.u1[n];
        double d2 = u.u2[n] - u_true.u2[n];
        double ee = std::hypot(d1, d2);
        sum_ee += ee;
        s.max_endpoint = std::max(s.max_endpoint, ee);
        double num = u.u1[n] * u_true.u1[n] + u.u2[n] * u_true.u2[n] + 1.0;
        double den = std::sqrt(u.u1[n] * u.u1[n] + u.u2[n] * u.u2[n] + 1.0) *
                     std::sqrt(u_true.u1[n] * u_true.u1[n] + u_true.u2[n] * u_true.u2[n] + 1.0);
        double c = std::min(1.0, std::max(-1.0, num / den));
        sum_ae += std::acos(c) * 180.0 / M_PI;
        ++s.count;
    }
    if (s.count == 0) throw std::invalid_argument("endpoint_error: empty mask");
    s.mean_endpoint = sum_ee / s.count;
    s.mean_angular_deg = sum_ae / s.count;
    return s;
}

/// Rescale a flow field (e.g. between pixels/frame and physical units).
inline VectorField scaled(const VectorField& u, double c) {
    VectorField out = u;
    for (auto& v : out.u1) v *= c;
    for (auto& v : out.u2) v *= c;
    return out;
}

/// Mean speed |u| over a mask.
inline double mean_speed(const VectorField& u, const std::vector<std::uint8_t>& mask = {}) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t n = 0; n < u.u1.size(); ++n) {
        if (!mask.empty() && !mask[n]) continue;
        sum += std::hypot(u.u1[n], u.u2[n]);
        ++count;
    }
    if (count == 0) throw std::invalid_argument("mean_speed: empty mask");
    return sum / count;
}

}  // namespace convflow
