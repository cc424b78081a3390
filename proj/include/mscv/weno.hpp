#pragma once

namespace mscv::weno {

/// Fifth-order Jiang-Shu reconstruction of the value at the right face of
/// the centre cell c from the left-biased stencil (a, b, c, d, e).
/// The mirrored call weno5(e, d, c, b, a) gives the left-face value.
inline double weno5(double a, double b, double c, double d, double e) {
    constexpr double eps = 1e-6;
    const double q0 = (2.0 * a - 7.0 * b + 11.0 * c) / 6.0;
    const double q1 = (-b + 5.0 * c + 2.0 * d) / 6.0;
    const double q2 = (2.0 * c + 5.0 * d - e) / 6.0;
    const double s0 = 13.0 / 12.0 * (a - 2 * b + c) * (a - 2 * b + c) + 0.25 * (a - 4 * b + 3 * c) * (a - 4 * b + 3 * c);
    const double s1 = 13.0 / 12.0 * (b - 2 * c + d) * (b - 2 * c + d) + 0.25 * (b - d) * (b - d);
    const double s2 = 13.0 / 12.0 * (c - 2 * d + e) * (c - 2 * d + e) + 0.25 * (3 * c - 4 * d + e) * (3 * c - 4 * d + e);
    const double a0 = 0.1 / ((eps + s0) * (eps + s0));
    const double a1 = 0.6 / ((eps + s1) * (eps + s1));
    const double a2 = 0.3 / ((eps + s2) * (eps + s2));
    return (a0 * q0 + a1 * q1 + a2 * q2) / (a0 + a1 + a2);
}

inline constexpr int ghost = 3;

}  // namespace mscv::weno
