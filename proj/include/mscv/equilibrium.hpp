#pragma once

#include <array>
#include <span>

#include "mscv/phase_grid.hpp"

namespace mscv {

struct MaxwellianParams {
    double rho = 1.0;
    std::array<double, 2> u{0.0, 0.0};
    double T = 1.0;
};

/// rho / (2 pi T) * exp(-|v - u|^2 / (2T)) sampled at the grid nodes.
Field maxwellian(const MaxwellianParams& params, const VelocityGrid& grid);

/// Result of the discrete moment-matching Newton iteration.
struct MatchedMaxwellian {
    Field values;
    MaxwellianParams params;  ///< analytic parameters after Newton
    double residual = 0.0;    ///< scaled max moment residual
    int iterations = 0;
};

/// Gaussian whose *discrete* moments equal `target` to 1e-12.
///
/// Newton iteration on (rho, u1, u2, T) of the analytic Maxwellian, started
/// from the target's own (rho, u, T). Throws ParameterError for an
/// inadmissible target and NumericalError if 50 iterations do not converge.
MatchedMaxwellian match_maxwellian(const MomentSet& target, const VelocityGrid& grid);

inline Field moment_matched_maxwellian(const MomentSet& target, const VelocityGrid& grid) {
    return match_maxwellian(target, grid).values;
}

/// Matched Maxwellian of f's own moments (the local equilibrium of f).
Field local_equilibrium(std::span<const double> f, const VelocityGrid& grid);

/// g = f - f_inf; throws ConsistencyError if the moments of g exceed 1e-10
/// (relative to the moments of f).
Field micro_macro_split(std::span<const double> f, std::span<const double> f_inf, const VelocityGrid& grid);

}  // namespace mscv
