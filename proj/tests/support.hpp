#pragma once

#include <cmath>
#include <numbers>

#include "mscv/phase_grid.hpp"

namespace mscv::fixtures {

// Two-bump homogeneous datum used by several suites.
inline Field two_bumps(double z, const VelocityGrid& grid, double rho0 = 0.125, double sigma = 0.5, double s = 0.2) {
    Field f(grid.size());
    const double c1 = 2.0 + s * z, c2 = 1.0 + s * z;
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double a = grid.v1(k), b = grid.v2(k);
        const double d1 = (a - c1) * (a - c1) + (b - c1) * (b - c1);
        const double d2 = (a + c2) * (a + c2) + (b + c2) * (b + c2);
        f[k] = rho0 / (2.0 * std::numbers::pi) * (std::exp(-d1 / sigma) + std::exp(-d2 / sigma));
    }
    return f;
}

inline double l1_diff(const Field& a, const Field& b, const VelocityGrid& grid) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += std::abs(a[k] - b[k]);
    return acc * grid.cell_volume();
}

inline double l1(const Field& a, const VelocityGrid& grid) {
    double acc = 0.0;
    for (double x : a) acc += std::abs(x);
    return acc * grid.cell_volume();
}

}  // namespace mscv::fixtures
