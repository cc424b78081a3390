#include "mscv/phase_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mscv/errors.hpp"

namespace mscv {

VelocityGrid::VelocityGrid(int n_per_dim, double v_max) : n_(n_per_dim), v_max_(v_max) {
    if (n_per_dim <= 0) throw ParameterError("velocity grid needs n_per_dim > 0");
    if (!(v_max > 0.0)) throw ParameterError("velocity grid needs v_max > 0");
    spacing_ = 2.0 * v_max / n_per_dim;
}

SpatialGrid1D::SpatialGrid1D(int n_x, double length) : n_(n_x), length_(length) {
    if (n_x <= 0) throw ParameterError("spatial grid needs n_x > 0");
    if (!(length > 0.0)) throw ParameterError("spatial grid needs length > 0");
    spacing_ = length / n_x;
}

Distribution::Distribution(const VelocityGrid& g) : grid(g), values(g.size(), 0.0) {}

Distribution::Distribution(const VelocityGrid& g, Field v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size())
        throw ShapeError("distribution has " + std::to_string(values.size()) + " values, grid has " +
                         std::to_string(grid.size()) + " nodes");
}

DistributionField::DistributionField(const SpatialGrid1D& xg, const VelocityGrid& vg)
    : xgrid(xg), vgrid(vg), values(static_cast<std::size_t>(xg.n()) * vg.size(), 0.0) {}

std::span<const double> DistributionField::cell(int ix) const {
    return std::span<const double>(values).subspan(static_cast<std::size_t>(ix) * vgrid.size(), vgrid.size());
}

std::span<double> DistributionField::cell(int ix) {
    return std::span<double>(values).subspan(static_cast<std::size_t>(ix) * vgrid.size(), vgrid.size());
}

double MomentSet::temperature() const {
    if (rho <= 0.0) return 0.0;
    return (2.0 * E / rho - (u[0] * u[0] + u[1] * u[1])) / VelocityGrid::dim;
}

std::array<double, 4> conserved_sums(std::span<const double> f, const VelocityGrid& grid) {
    if (f.size() != grid.size())
        throw ShapeError("moment input has " + std::to_string(f.size()) + " values, grid has " +
                         std::to_string(grid.size()));
    const int n = grid.n();
    double m0 = 0.0, m1 = 0.0, m2 = 0.0, e = 0.0;
    for (int i = 0; i < n; ++i) {
        const double a = grid.node(i);
        double row0 = 0.0, row2 = 0.0, rowe = 0.0;
        for (int j = 0; j < n; ++j) {
            const double b = grid.node(j);
            const double fv = f[static_cast<std::size_t>(i) * n + j];
            row0 += fv;
            row2 += b * fv;
            rowe += (a * a + b * b) * fv;
        }
        m0 += row0;
        m1 += a * row0;
        m2 += row2;
        e += rowe;
    }
    const double dv = grid.cell_volume();
    return {m0 * dv, m1 * dv, m2 * dv, 0.5 * e * dv};
}

MomentSet compute_moments(std::span<const double> f, const VelocityGrid& grid) {
    const auto s = conserved_sums(f, grid);
    MomentSet m;
    m.rho = s[0];
    m.E = s[3];
    if (s[0] != 0.0) {
        m.u = {s[1] / s[0], s[2] / s[0]};
    }
    return m;
}

MomentSet compute_moments(const Distribution& f) { return compute_moments(f.values, f.grid); }

namespace {

void check_norm_params(int p, int s) {
    if (p != 1 && p != 2) throw ParameterError("weighted norm supports p in {1, 2}, got " + std::to_string(p));
    if (s < 0) throw ParameterError("weighted norm needs s >= 0");
}

// s = 0 is the plain L^p norm (weight 1), not the literal 1 + |v|^0.
double power_weight(double speed2, int s) {
    if (s == 0) return 1.0;
    if (s == 2) return 1.0 + speed2;
    return 1.0 + std::pow(std::sqrt(speed2), s);
}

}  // namespace

Field phase_space_weights(const VelocityGrid& grid, int s, int n_cells, double dx) {
    if (s < 0) throw ParameterError("weighted norm needs s >= 0");
    Field w(grid.size() * static_cast<std::size_t>(n_cells));
    const double dv = grid.cell_volume();
    for (std::size_t k = 0; k < grid.size(); ++k) w[k] = power_weight(grid.speed_squared(k), s) * dv * dx;
    for (int c = 1; c < n_cells; ++c)
        std::copy(w.begin(), w.begin() + static_cast<long>(grid.size()), w.begin() + static_cast<long>(c * grid.size()));
    return w;
}

double weighted_norm(std::span<const double> f, const VelocityGrid& grid, int p, int s) {
    check_norm_params(p, s);
    if (f.size() != grid.size()) throw ShapeError("weighted_norm: field/grid size mismatch");
    const Field w = phase_space_weights(grid, s);
    double acc = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) acc += (p == 1 ? std::abs(f[k]) : f[k] * f[k]) * w[k];
    return acc;
}

double weighted_norm(const DistributionField& f, int p, int s) {
    check_norm_params(p, s);
    const Field w = phase_space_weights(f.vgrid, s, f.xgrid.n(), f.xgrid.spacing());
    double acc = 0.0;
    for (std::size_t k = 0; k < f.values.size(); ++k)
        acc += (p == 1 ? std::abs(f.values[k]) : f.values[k] * f.values[k]) * w[k];
    return acc;
}

double weighted_norm_rooted(std::span<const double> f, const VelocityGrid& grid, int p, int s) {
    const double v = weighted_norm(f, grid, p, s);
    return p == 1 ? v : std::sqrt(v);
}

namespace {

std::vector<double> normalized_z_weights(std::size_t count, std::span<const double> z_weights) {
    if (count == 0) throw ParameterError("uq_error_norm needs at least one sample");
    std::vector<double> w(count, 1.0 / static_cast<double>(count));
    if (!z_weights.empty()) {
        if (z_weights.size() != count) throw ShapeError("uq_error_norm: weight count differs from sample count");
        double total = 0.0;
        for (double x : z_weights) total += x;
        if (!(total > 0.0)) throw ParameterError("uq_error_norm: weights must sum to a positive value");
        for (std::size_t k = 0; k < count; ++k) w[k] = z_weights[k] / total;
    }
    return w;
}

}  // namespace

double uq_error_norm(const std::vector<Field>& deviations, std::span<const double> z_weights,
                     std::span<const double> point_weights, int p) {
    if (p != 1 && p != 2) throw ParameterError("uq_error_norm supports p in {1, 2}");
    const auto w = normalized_z_weights(deviations.size(), z_weights);
    const std::size_t n = point_weights.size();
    for (const auto& d : deviations)
        if (d.size() != n) throw ShapeError("uq_error_norm: deviation field size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double second = 0.0;
        for (std::size_t k = 0; k < deviations.size(); ++k) second += w[k] * deviations[k][i] * deviations[k][i];
        // |E[Z^2]^{1/2}|^p
        acc += (p == 1 ? std::sqrt(second) : second) * point_weights[i];
    }
    return acc;
}

double uq_error_norm_outer(const std::vector<Field>& deviations, std::span<const double> z_weights,
                           std::span<const double> point_weights, int p) {
    if (p != 1 && p != 2) throw ParameterError("uq_error_norm supports p in {1, 2}");
    const auto w = normalized_z_weights(deviations.size(), z_weights);
    double acc = 0.0;
    for (std::size_t k = 0; k < deviations.size(); ++k) {
        const auto& d = deviations[k];
        if (d.size() != point_weights.size()) throw ShapeError("uq_error_norm: deviation field size mismatch");
        double inner = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) inner += (p == 1 ? std::abs(d[i]) : d[i] * d[i]) * point_weights[i];
        acc += w[k] * inner * inner;
    }
    return std::sqrt(acc);
}

}  // namespace mscv
