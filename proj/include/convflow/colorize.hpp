#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "convflow/grid.hpp"

namespace convflow {

/// 99th percentile of |u| over the whole field; the default normalization for
/// colorize.
inline double flow_magnitude_percentile(const VectorField& u, double pct = 0.99) {
    std::vector<double> mags(u.u1.size());
    for (std::size_t n = 0; n < mags.size(); ++n) mags[n] = std::hypot(u.u1[n], u.u2[n]);
    std::size_t idx = static_cast<std::size_t>(pct * (mags.size() - 1));
    std::nth_element(mags.begin(), mags.begin() + idx, mags.end());
    return std::max(mags[idx], 1e-12);
}

/// HSV color coding of one flow frame: hue = atan2(u2, u1), saturation =
/// min(|u|/u_max, 1), full value. Zero flow renders white.
inline std::vector<std::uint8_t> colorize_frame(const VectorField& u, int frame,
                                                double u_max) {
    const SpaceTimeGrid& g = u.grid;
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(g.height) * g.width * 3);
    for (int i = 0; i < g.height; ++i)
        for (int j = 0; j < g.width; ++j) {
            std::size_t n = g.index(frame, i, j);
            double v1 = u.u1[n], v2 = u.u2[n];
            double mag = std::hypot(v1, v2);
            double hue = std::atan2(v2, v1);  // [-pi, pi]
            if (hue < 0.0) hue += 2.0 * M_PI;
            double sat = std::min(mag / u_max, 1.0);
            double h6 = hue * 3.0 / M_PI;  // [0, 6)
            int sector = static_cast<int>(h6) % 6;
            double frac = h6 - std::floor(h6);
            double p = 1.0 - sat;
            double q = 1.0 - sat * frac;
            double t = 1.0 - sat * (1.0 - frac);
            double r, gg, b;
            switch (sector) {
                case 0: r = 1; gg = t; b = p; break;
                case 1: r = q; gg = 1; b = p; break;
                case 2: r = p; gg = 1; b = t; break;
                case 3: r = p; gg = q; b = 1; break;
                case 4: r = t; gg = p; b = 1; break;
                default: r = 1; gg = p; b = q; break;
            }
            std::size_t o = (static_cast<std::size_t>(i) * g.width + j) * 3;
            rgb[o] = static_cast<std::uint8_t>(std::lround(r * 255.0));
            rgb[o + 1] = static_cast<std::uint8_t>(std::lround(gg * 255.0));
            rgb[o + 2] = static_cast<std::uint8_t>(std::lround(b * 255.0));
        }
    return rgb;
}

}  // namespace convflow
