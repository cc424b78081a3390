#include "mscv/euler1d.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mscv/equilibrium.hpp"
#include "mscv/errors.hpp"
#include "mscv/weno.hpp"

namespace mscv {

EulerState to_conserved(const MomentSet& m) { return {m.rho, m.rho * m.u[0], m.rho * m.u[1], m.E}; }

MomentSet to_moments(const EulerState& U) {
    MomentSet m;
    m.rho = U[0];
    if (U[0] != 0.0) m.u = {U[1] / U[0], U[2] / U[0]};
    m.E = U[3];
    return m;
}

double pressure(const EulerState& U) {
    // p = rho T with T = (2E/rho - |u|^2) / 2
    return U[3] - 0.5 * (U[1] * U[1] + U[2] * U[2]) / U[0];
}

double ConservedField::total(int k) const {
    double acc = 0.0;
    for (const auto& c : cells) acc += c[k];
    return acc * grid.spacing();
}

EulerState euler_flux(const EulerState& U) {
    if (!(U[0] > 0.0)) throw NumericalError("euler_flux: density must be > 0, got " + std::to_string(U[0]));
    const double ux = U[1] / U[0];
    const double p = pressure(U);
    return {U[1], U[1] * ux + p, U[2] * ux, (U[3] + p) * ux};
}

namespace {

double sound_speed(const EulerState& U) { return std::sqrt(std::max(0.0, euler_gamma * pressure(U) / U[0])); }

}  // namespace

double max_wave_speed(const ConservedField& U) {
    double a = 0.0;
    for (const auto& c : U.cells) a = std::max(a, std::abs(c[1] / c[0]) + sound_speed(c));
    return a;
}

Field weno5_derivative(std::span<const double> values, double wind, double dx) {
    const int n = static_cast<int>(values.size());
    if (n < 7) throw ParameterError("weno5_derivative needs at least 7 points, got " + std::to_string(n));
    auto at = [&](int i) { return values[((i % n) + n) % n]; };
    // face value at i + 1/2
    Field face(n);
    for (int i = 0; i < n; ++i)
        face[i] = wind >= 0.0 ? weno::weno5(at(i - 2), at(i - 1), at(i), at(i + 1), at(i + 2))
                              : weno::weno5(at(i + 3), at(i + 2), at(i + 1), at(i), at(i - 1));
    Field d(n);
    for (int i = 0; i < n; ++i) d[i] = (face[i] - face[(i - 1 + n) % n]) / dx;
    return d;
}

namespace {

constexpr int G = weno::ghost;

// Kinetic flux through a wall face from the boundary cell state: outgoing
// half of the cell Maxwellian, incoming wall Maxwellian with zero net mass.
// `into` is +1 at the left wall (domain on the +x side) and -1 at the right.
EulerState kinetic_wall_flux(const EulerState& cell, double wall_T, int into, const VelocityGrid& vg) {
    const Field m_cell = moment_matched_maxwellian(to_moments(cell), vg);
    const Field m_wall = maxwellian({1.0, {0.0, 0.0}, wall_T}, vg);
    const double dv = vg.cell_volume();
    EulerState out_part{}, in_part{};
    for (std::size_t k = 0; k < vg.size(); ++k) {
        const double vx = vg.v1(k), vy = vg.v2(k);
        const std::array<double, 4> phi = {1.0, vx, vy, 0.5 * (vx * vx + vy * vy)};
        if (vx * into < 0.0) {
            for (int r = 0; r < 4; ++r) out_part[r] += vx * phi[r] * m_cell[k] * dv;
        } else if (vx * into > 0.0) {
            for (int r = 0; r < 4; ++r) in_part[r] += vx * phi[r] * m_wall[k] * dv;
        }
    }
    const double rho_w = -out_part[0] / in_part[0];
    EulerState F;
    for (int r = 0; r < 4; ++r) F[r] = out_part[r] + rho_w * in_part[r];
    return F;
}

}  // namespace

std::vector<EulerState> EulerSolver::rate(const ConservedField& U) const {
    const int n = U.grid.n();
    if (n < 7) throw ParameterError("Euler solver needs at least 7 cells");
    const double dx = U.grid.spacing();
    const bool periodic = boundary.left == BoundaryKind::periodic;
    if (periodic != (boundary.right == BoundaryKind::periodic))
        throw ParameterError("periodic boundaries must be used on both sides");

    // padded states: ghosts by periodic wrap or constant extrapolation
    std::vector<EulerState> W(n + 2 * G);
    for (int i = 0; i < n + 2 * G; ++i) {
        int j = i - G;
        if (periodic)
            j = ((j % n) + n) % n;
        else
            j = std::clamp(j, 0, n - 1);
        W[i] = U.cells[j];
    }
    double alpha = 0.0;
    std::vector<EulerState> F(W.size());
    for (std::size_t i = 0; i < W.size(); ++i) {
        F[i] = euler_flux(W[i]);
        alpha = std::max(alpha, std::abs(W[i][1] / W[i][0]) + sound_speed(W[i]));
    }

    // face f = 0 is x_{-1/2} ... f = n is x_{n-1/2}; padded index of cell i is i + G
    std::vector<EulerState> face(n + 1);
    for (int f = 0; f <= n; ++f) {
        const int c = f - 1 + G;  // cell left of the face
        for (int r = 0; r < 4; ++r) {
            auto plus = [&](int i) { return 0.5 * (F[i][r] + alpha * W[i][r]); };
            auto minus = [&](int i) { return 0.5 * (F[i][r] - alpha * W[i][r]); };
            face[f][r] = weno::weno5(plus(c - 2), plus(c - 1), plus(c), plus(c + 1), plus(c + 2)) +
                         weno::weno5(minus(c + 3), minus(c + 2), minus(c + 1), minus(c), minus(c - 1));
        }
    }
    if (boundary.left == BoundaryKind::diffusive_wall || boundary.right == BoundaryKind::diffusive_wall) {
        if (!wall_quadrature) throw ParameterError("diffusive walls in the fluid solver need a velocity grid");
        if (boundary.left == BoundaryKind::diffusive_wall)
            face[0] = kinetic_wall_flux(U.cells[0], boundary.left_wall_T, +1, *wall_quadrature);
        if (boundary.right == BoundaryKind::diffusive_wall)
            face[n] = kinetic_wall_flux(U.cells[n - 1], boundary.right_wall_T, -1, *wall_quadrature);
    }

    std::vector<EulerState> dU(n);
    for (int i = 0; i < n; ++i)
        for (int r = 0; r < 4; ++r) dU[i][r] = -(face[i + 1][r] - face[i][r]) / dx;
    return dU;
}

namespace {

void check_admissible(const ConservedField& U, const char* stage) {
    for (int i = 0; i < U.grid.n(); ++i) {
        const auto& c = U.cells[i];
        if (!(c[0] > 0.0) || !(pressure(c) >= 0.0) || !std::isfinite(c[3]))
            throw NumericalError(std::string("Euler solver lost positivity in cell ") + std::to_string(i) + " (" +
                                 stage + ")");
    }
}

}  // namespace

ConservedField EulerSolver::step(const ConservedField& U, double dt) const {
    if (!(dt > 0.0)) throw ParameterError("Euler step needs dt > 0");
    ConservedField U1 = U;
    const auto k1 = rate(U);
    for (std::size_t i = 0; i < U.cells.size(); ++i)
        for (int r = 0; r < 4; ++r) U1.cells[i][r] += dt * k1[i][r];
    check_admissible(U1, "stage 1");
    const auto k2 = rate(U1);
    ConservedField out = U;
    for (std::size_t i = 0; i < U.cells.size(); ++i)
        for (int r = 0; r < 4; ++r) out.cells[i][r] = 0.5 * U.cells[i][r] + 0.5 * (U1.cells[i][r] + dt * k2[i][r]);
    check_admissible(out, "stage 2");
    return out;
}

DistributionField lift_to_equilibrium(const ConservedField& U, const VelocityGrid& grid) {
    DistributionField f(U.grid, grid);
    for (int i = 0; i < U.grid.n(); ++i) {
        const Field m = moment_matched_maxwellian(to_moments(U.cells[i]), grid);
        std::copy(m.begin(), m.end(), f.cell(i).begin());
    }
    return f;
}

ConservedField moments_of(const DistributionField& f) {
    ConservedField U(f.xgrid);
    for (int i = 0; i < f.xgrid.n(); ++i) {
        const auto s = conserved_sums(f.cell(i), f.vgrid);
        U.cells[i] = {s[0], s[1], s[2], s[3]};
    }
    return U;
}

}  // namespace mscv
