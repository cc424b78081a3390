#include "mscv/kinetic1d.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mscv/equilibrium.hpp"
#include "mscv/errors.hpp"
#include "mscv/weno.hpp"

namespace mscv {

namespace {

constexpr int G = weno::ghost;

// +1 if the velocity node enters the domain through this wall
int inward(WallSide side) { return side == WallSide::left ? 1 : -1; }

Field unit_wall_maxwellian(double wall_T, const VelocityGrid& grid) {
    if (!(wall_T > 0.0)) throw ParameterError("wall temperature must be > 0");
    return maxwellian({1.0, {0.0, 0.0}, wall_T}, grid);
}

// rho_w from the outgoing face fluxes vx * f (summed over outgoing nodes).
double balancing_density(double outgoing_flux, const Field& m_wall, WallSide side, const VelocityGrid& grid) {
    const int in = inward(side);
    double incoming = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k)
        if (grid.v1(k) * in > 0.0) incoming += grid.v1(k) * m_wall[k];
    if (incoming == 0.0) {
        if (outgoing_flux != 0.0) throw NumericalError("diffusive wall: no incoming nodes to balance the flux");
        return 0.0;
    }
    return -outgoing_flux / incoming;
}

}  // namespace

double wall_mass_flux(std::span<const double> f_face, const VelocityGrid& grid) {
    double acc = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) acc += grid.v1(k) * f_face[k];
    return acc * grid.cell_volume();
}

WallState diffusive_wall(std::span<const double> f_cell, double wall_T, WallSide side, const VelocityGrid& grid) {
    if (f_cell.size() != grid.size()) throw ShapeError("diffusive_wall: cell does not match the velocity grid");
    const Field m = unit_wall_maxwellian(wall_T, grid);
    const int in = inward(side);
    double out_flux = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k)
        if (grid.v1(k) * in < 0.0) out_flux += grid.v1(k) * f_cell[k];
    WallState w;
    w.rho_w = balancing_density(out_flux, m, side, grid);
    w.ghost.assign(f_cell.begin(), f_cell.end());
    for (std::size_t k = 0; k < grid.size(); ++k)
        if (grid.v1(k) * in > 0.0) w.ghost[k] = w.rho_w * m[k];
    w.net_flux = wall_mass_flux(w.ghost, grid);
    return w;
}

double kinetic_time_step(const SpatialGrid1D& xg, const VelocityGrid& vg, double eps) {
    if (!(eps > 0.0)) throw ParameterError("Knudsen number must be > 0");
    return std::min(xg.spacing() / (2.0 * vg.v_max()), eps);
}

KineticSolver::KineticSolver(CollisionModel model, double eps, double b0, const Boundary& boundary,
                             std::optional<SpectralPlan> plan)
    : model_(model), eps_(eps), kernel_(b0), boundary_(boundary), plan_(std::move(plan)) {
    if (!(eps > 0.0)) throw ParameterError("Knudsen number must be > 0");
    if (model == CollisionModel::boltzmann && !plan_)
        throw ParameterError("the Boltzmann model needs a spectral plan");
    if ((boundary.left == BoundaryKind::periodic) != (boundary.right == BoundaryKind::periodic))
        throw ParameterError("periodic boundaries must be used on both sides");
}

DistributionField KineticSolver::transport_rate(const DistributionField& f, KineticStepInfo* info) const {
    const auto& vg = f.vgrid;
    const int n = f.xgrid.n();
    if (n < 7) throw ParameterError("kinetic solver needs at least 7 cells");
    const std::size_t nv = vg.size();
    const double dx = f.xgrid.spacing();
    const bool periodic = boundary_.left == BoundaryKind::periodic;

    std::optional<WallState> wl, wr;
    Field ml, mr;
    if (boundary_.left == BoundaryKind::diffusive_wall) {
        wl = diffusive_wall(f.cell(0), boundary_.left_wall_T, WallSide::left, vg);
        ml = unit_wall_maxwellian(boundary_.left_wall_T, vg);
    }
    if (boundary_.right == BoundaryKind::diffusive_wall) {
        wr = diffusive_wall(f.cell(n - 1), boundary_.right_wall_T, WallSide::right, vg);
        mr = unit_wall_maxwellian(boundary_.right_wall_T, vg);
    }

    // face k-major: flux[f * nv + k], face f at x_{f - 1/2}
    Field flux(static_cast<std::size_t>(n + 1) * nv);
    std::vector<double> col(n + 2 * G);
    for (std::size_t k = 0; k < nv; ++k) {
        const double a = vg.v1(k);
        for (int i = 0; i < n + 2 * G; ++i) {
            const int j = i - G;
            if (j >= 0 && j < n) {
                col[i] = f.values[static_cast<std::size_t>(j) * nv + k];
            } else if (periodic) {
                col[i] = f.values[static_cast<std::size_t>(((j % n) + n) % n) * nv + k];
            } else if (j < 0) {
                col[i] = wl ? wl->ghost[k] : f.values[k];
            } else {
                col[i] = wr ? wr->ghost[k] : f.values[static_cast<std::size_t>(n - 1) * nv + k];
            }
        }
        for (int fc = 0; fc <= n; ++fc) {
            const int c = fc - 1 + G;
            const double face = a >= 0.0 ? weno::weno5(col[c - 2], col[c - 1], col[c], col[c + 1], col[c + 2])
                                         : weno::weno5(col[c + 3], col[c + 2], col[c + 1], col[c], col[c - 1]);
            flux[static_cast<std::size_t>(fc) * nv + k] = a * face;
        }
    }

    // Wall faces: keep the reconstructed outgoing fluxes, replace the
    // incoming ones by the balancing wall Maxwellian.
    double worst = 0.0;
    auto close_wall = [&](int fc, WallSide side, const Field& m) {
        const int in = inward(side);
        double* fl = flux.data() + static_cast<std::size_t>(fc) * nv;
        double out = 0.0;
        for (std::size_t k = 0; k < nv; ++k)
            if (vg.v1(k) * in < 0.0) out += fl[k];
        const double rho_w = balancing_density(out, m, side, vg);
        double net = 0.0;
        for (std::size_t k = 0; k < nv; ++k) {
            if (vg.v1(k) * in > 0.0) fl[k] = vg.v1(k) * rho_w * m[k];
            else if (vg.v1(k) == 0.0) fl[k] = 0.0;
            net += fl[k];
        }
        worst = std::max(worst, std::abs(net) * vg.cell_volume());
    };
    if (wl) close_wall(0, WallSide::left, ml);
    if (wr) close_wall(n, WallSide::right, mr);
    if (info) info->max_wall_flux = std::max(info->max_wall_flux, worst);

    DistributionField out(f.xgrid, vg);
    for (int i = 0; i < n; ++i)
        for (std::size_t k = 0; k < nv; ++k)
            out.values[static_cast<std::size_t>(i) * nv + k] =
                -(flux[static_cast<std::size_t>(i + 1) * nv + k] - flux[static_cast<std::size_t>(i) * nv + k]) / dx;
    return out;
}

DistributionField KineticSolver::collision_rate(const DistributionField& f) const {
    DistributionField out(f.xgrid, f.vgrid);
    const double inv_eps = 1.0 / eps_;
    for (int i = 0; i < f.xgrid.n(); ++i) {
        const auto cell = f.cell(i);
        Field q;
        if (model_ == CollisionModel::bgk) {
            const double rho = conserved_sums(cell, f.vgrid)[0];
            q = q_bgk(cell, kernel_.b0 * rho, f.vgrid);
        } else {
            q = q_boltzmann_fast(cell, cell, kernel_, *plan_);
        }
        auto dst = out.cell(i);
        for (std::size_t k = 0; k < q.size(); ++k) dst[k] = inv_eps * q[k];
    }
    return out;
}

namespace {

void check_finite(const DistributionField& f, const char* stage) {
    for (double x : f.values)
        if (!std::isfinite(x)) throw NumericalError(std::string("kinetic solver blew up (") + stage + ")");
}

}  // namespace

DistributionField KineticSolver::step(const DistributionField& f, double dt, KineticStepInfo* info) const {
    if (!(dt > 0.0)) throw ParameterError("kinetic step needs dt > 0");
    if (info && dt > f.xgrid.spacing() / (2.0 * f.vgrid.v_max()) * (1.0 + 1e-12)) info->cfl_exceeded = true;
    auto rhs = [&](const DistributionField& g) {
        DistributionField r = transport_rate(g, info);
        const DistributionField c = collision_rate(g);
        for (std::size_t k = 0; k < r.values.size(); ++k) r.values[k] += c.values[k];
        return r;
    };
    DistributionField f1 = f;
    const DistributionField k1 = rhs(f);
    for (std::size_t k = 0; k < f1.values.size(); ++k) f1.values[k] += dt * k1.values[k];
    check_finite(f1, "stage 1");
    const DistributionField k2 = rhs(f1);
    DistributionField out = f;
    for (std::size_t k = 0; k < out.values.size(); ++k)
        out.values[k] = 0.5 * f.values[k] + 0.5 * (f1.values[k] + dt * k2.values[k]);
    check_finite(out, "stage 2");
    return out;
}

DistributionField transport_step(const DistributionField& f, double dt, const Boundary& boundary,
                                 KineticStepInfo* info) {
    // collisions switched off: any model, eps irrelevant
    const KineticSolver s(CollisionModel::bgk, 1.0, 1.0, boundary);
    if (info && dt > f.xgrid.spacing() / (2.0 * f.vgrid.v_max()) * (1.0 + 1e-12)) info->cfl_exceeded = true;
    DistributionField f1 = f;
    const DistributionField k1 = s.transport_rate(f, info);
    for (std::size_t k = 0; k < f1.values.size(); ++k) f1.values[k] += dt * k1.values[k];
    const DistributionField k2 = s.transport_rate(f1, info);
    DistributionField out = f;
    for (std::size_t k = 0; k < out.values.size(); ++k)
        out.values[k] = 0.5 * f.values[k] + 0.5 * (f1.values[k] + dt * k2.values[k]);
    check_finite(out, "transport");
    return out;
}

}  // namespace mscv
