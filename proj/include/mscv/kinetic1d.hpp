#pragma once

#include <optional>
#include <span>

#include "mscv/collision_ops.hpp"
#include "mscv/euler1d.hpp"
#include "mscv/phase_grid.hpp"

namespace mscv {

enum class CollisionModel { bgk, boltzmann };

enum class WallSide { left, right };

/// Ghost state of a diffusive wall.
struct WallState {
    Field ghost;       ///< incoming half: rho_w M_Tw; outgoing half: the cell values
    double rho_w = 0;  ///< density of the re-emitted Maxwellian
    double net_flux = 0;
};

/// Diffusive reflection from the values in the boundary cell: particles
/// leaving the domain are re-emitted as rho_w M_{T_w} with rho_w chosen so
/// that the net mass flux through the wall vanishes.
WallState diffusive_wall(std::span<const double> f_cell, double wall_T, WallSide side, const VelocityGrid& grid);

/// Net mass flux per unit of wall, positive in +x, carried by a face density.
double wall_mass_flux(std::span<const double> f_face, const VelocityGrid& grid);

struct KineticStepInfo {
    double max_wall_flux = 0.0;  ///< largest |net mass flux| over walls and stages
    bool cfl_exceeded = false;
};

/// Space-inhomogeneous kinetic solver: upwind WENO5 transport per velocity
/// node plus (1/eps) times the collision operator, SSP-RK2 in time.
class KineticSolver {
public:
    KineticSolver(CollisionModel model, double eps, double b0, const Boundary& boundary,
                  std::optional<SpectralPlan> plan = std::nullopt);

    /// Transport part only, -v_x df/dx.
    DistributionField transport_rate(const DistributionField& f, KineticStepInfo* info = nullptr) const;
    /// Collision part only, (1/eps) C(f), cell by cell.
    DistributionField collision_rate(const DistributionField& f) const;

    DistributionField step(const DistributionField& f, double dt, KineticStepInfo* info = nullptr) const;

    double eps() const { return eps_; }
    const Boundary& boundary() const { return boundary_; }

private:
    CollisionModel model_;
    double eps_;
    CollisionKernel kernel_;
    Boundary boundary_;
    std::optional<SpectralPlan> plan_;
};

/// Pure transport step (SSP-RK2), no collisions.
DistributionField transport_step(const DistributionField& f, double dt, const Boundary& boundary,
                                 KineticStepInfo* info = nullptr);

/// min(dx / (2 v_max), eps)
double kinetic_time_step(const SpatialGrid1D& xg, const VelocityGrid& vg, double eps);

}  // namespace mscv
