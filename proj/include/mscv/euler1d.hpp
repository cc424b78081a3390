#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mscv/phase_grid.hpp"

namespace mscv {

/// Conserved variables (rho, rho u_x, rho u_y, E) of the d_v = 2 gas,
/// p = rho T, E = rho |u|^2 / 2 + rho T (adiabatic exponent 2).
using EulerState = std::array<double, 4>;

constexpr double euler_gamma = 2.0;

EulerState to_conserved(const MomentSet& m);
MomentSet to_moments(const EulerState& U);
double pressure(const EulerState& U);

struct ConservedField {
    SpatialGrid1D grid;
    std::vector<EulerState> cells;

    explicit ConservedField(const SpatialGrid1D& g) : grid(g), cells(g.n(), EulerState{}) {}

    /// sum over cells of component k times dx
    double total(int k) const;
};

/// (rho u_x, rho u_x^2 + p, rho u_x u_y, (E + p) u_x). Throws NumericalError if rho <= 0.
EulerState euler_flux(const EulerState& U);

/// Largest |u_x| + c over the field, c = sqrt(2 p / rho).
double max_wave_speed(const ConservedField& U);

/// WENO5 approximation of d/dx of `values` on a periodic grid of spacing dx,
/// upwinded for a wind of the given sign (ties count as positive).
Field weno5_derivative(std::span<const double> values, double wind, double dx);

enum class BoundaryKind { periodic, outflow, diffusive_wall };

/// Boundary treatment shared by the fluid and kinetic solvers. Wall
/// temperatures are only read for diffusive walls.
struct Boundary {
    BoundaryKind left = BoundaryKind::outflow;
    BoundaryKind right = BoundaryKind::outflow;
    double left_wall_T = 1.0;
    double right_wall_T = 1.0;

    static Boundary periodic() { return {BoundaryKind::periodic, BoundaryKind::periodic, 1.0, 1.0}; }
    static Boundary outflow() { return {}; }
    static Boundary walls(double t_left, double t_right) {
        return {BoundaryKind::diffusive_wall, BoundaryKind::diffusive_wall, t_left, t_right};
    }
};

/// Fluid solver setup. Diffusive walls need a velocity grid: the wall flux is
/// evaluated kinetically from the discrete half-space moments of the
/// boundary cell's Maxwellian and the re-emitted wall Maxwellian.
struct EulerSolver {
    Boundary boundary;
    std::optional<VelocityGrid> wall_quadrature;

    /// dU/dt from WENO5 with global Lax-Friedrichs splitting.
    std::vector<EulerState> rate(const ConservedField& U) const;

    /// One SSP-RK2 step; throws NumericalError on loss of positivity.
    ConservedField step(const ConservedField& U, double dt) const;
};

inline ConservedField euler_step(const ConservedField& U, double dt, const Boundary& bc) {
    return EulerSolver{bc, std::nullopt}.step(U, dt);
}

/// Per-cell moment-matched Maxwellian of U.
DistributionField lift_to_equilibrium(const ConservedField& U, const VelocityGrid& grid);

/// Cell-wise conserved variables of a kinetic field.
ConservedField moments_of(const DistributionField& f);

}  // namespace mscv
