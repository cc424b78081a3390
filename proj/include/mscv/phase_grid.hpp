#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace mscv {

using Field = std::vector<double>;

/// Cell-centred uniform grid on [-v_max, v_max]^2.
///
/// Flat index convention: idx = i1 * n + i2, where i1 runs over the first
/// velocity component and i2 over the second. Node coordinates are
/// -v_max + (j + 1/2) * spacing, so the grid is symmetric and never has a
/// node at v = 0.
class VelocityGrid {
public:
    static constexpr int dim = 2;

    VelocityGrid(int n_per_dim, double v_max);

    int n() const { return n_; }
    double v_max() const { return v_max_; }
    double spacing() const { return spacing_; }
    std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }
    double cell_volume() const { return spacing_ * spacing_; }

    double node(int j) const { return -v_max_ + (j + 0.5) * spacing_; }
    double v1(std::size_t idx) const { return node(static_cast<int>(idx / n_)); }
    double v2(std::size_t idx) const { return node(static_cast<int>(idx % n_)); }
    double speed_squared(std::size_t idx) const {
        const double a = v1(idx), b = v2(idx);
        return a * a + b * b;
    }

    bool operator==(const VelocityGrid&) const = default;

private:
    int n_;
    double v_max_;
    double spacing_;
};

/// Cell-centred uniform grid on [0, length].
class SpatialGrid1D {
public:
    SpatialGrid1D(int n_x, double length);

    int n() const { return n_; }
    double length() const { return length_; }
    double spacing() const { return spacing_; }
    double center(int i) const { return (i + 0.5) * spacing_; }

    bool operator==(const SpatialGrid1D&) const = default;

private:
    int n_;
    double length_;
    double spacing_;
};

/// Density on a velocity grid (one space point).
struct Distribution {
    VelocityGrid grid;
    Field values;

    explicit Distribution(const VelocityGrid& g);
    Distribution(const VelocityGrid& g, Field v);

    std::span<const double> view() const { return values; }
    std::span<double> view() { return values; }
};

/// Density on space x velocity, stored cell-major: values[ix * nv + iv].
struct DistributionField {
    SpatialGrid1D xgrid;
    VelocityGrid vgrid;
    Field values;

    DistributionField(const SpatialGrid1D& xg, const VelocityGrid& vg);

    std::span<const double> cell(int ix) const;
    std::span<double> cell(int ix);
};

/// Hydrodynamic summary (rho, u, E) of a density at one point.
struct MomentSet {
    double rho = 0.0;
    std::array<double, 2> u{0.0, 0.0};
    double E = 0.0;

    /// T = (2E/rho - |u|^2) / d_v; zero for an empty state.
    double temperature() const;
    double momentum(int k) const { return rho * u[k]; }
};

/// Midpoint-rule moments. A zero-mass input reports u = 0.
MomentSet compute_moments(std::span<const double> f, const VelocityGrid& grid);
MomentSet compute_moments(const Distribution& f);

/// Raw discrete sums (mass, momentum_1, momentum_2, energy) without the
/// division by rho; linear in f.
std::array<double, 4> conserved_sums(std::span<const double> f, const VelocityGrid& grid);

/// Sum |f|^p (1 + |v|^s) dv (dx). No 1/p root is taken.
double weighted_norm(std::span<const double> f, const VelocityGrid& grid, int p, int s);
double weighted_norm(const DistributionField& f, int p, int s);

/// (weighted_norm)^(1/p), for diagnostics that want a true norm.
double weighted_norm_rooted(std::span<const double> f, const VelocityGrid& grid, int p, int s);

/// Quadrature weight times polynomial weight (1 + |v|^s) at every point of a
/// flat field made of n_cells blocks of grid.size() velocity nodes.
Field phase_space_weights(const VelocityGrid& grid, int s, int n_cells = 1, double dx = 1.0);

/// || E_z[Z^2]^{1/2} || with the outer norm sum |.|^p * point_weight.
///
/// `deviations` holds Z(z_k, .) for each node or sample; `z_weights` are the
/// collocation weights, or empty for a plain sample average.
double uq_error_norm(const std::vector<Field>& deviations, std::span<const double> z_weights,
                     std::span<const double> point_weights, int p);

/// Alternate metric E_z[ ||Z||^2 ]^{1/2} (norm inside the expectation).
double uq_error_norm_outer(const std::vector<Field>& deviations, std::span<const double> z_weights,
                           std::span<const double> point_weights, int p);

}  // namespace mscv
