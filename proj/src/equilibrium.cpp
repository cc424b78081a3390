#include "mscv/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mscv/errors.hpp"

namespace mscv {

Field maxwellian(const MaxwellianParams& params, const VelocityGrid& grid) {
    if (params.rho < 0.0) throw ParameterError("maxwellian: rho must be >= 0");
    if (!(params.T > 0.0)) throw ParameterError("maxwellian: temperature must be > 0");
    Field f(grid.size(), 0.0);
    if (params.rho == 0.0) return f;
    const int n = grid.n();
    const double scale = params.rho / (2.0 * std::numbers::pi * params.T);
    // separable: exp(-(a-u1)^2/2T) * exp(-(b-u2)^2/2T)
    std::vector<double> e1(n), e2(n);
    for (int j = 0; j < n; ++j) {
        const double a = grid.node(j) - params.u[0];
        const double b = grid.node(j) - params.u[1];
        e1[j] = std::exp(-a * a / (2.0 * params.T));
        e2[j] = std::exp(-b * b / (2.0 * params.T));
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) f[static_cast<std::size_t>(i) * n + j] = scale * e1[i] * e2[j];
    return f;
}

namespace {

using Vec4 = std::array<double, 4>;
using Mat4 = std::array<Vec4, 4>;

// Gaussian elimination with partial pivoting; returns false if singular.
bool solve4(Mat4 a, Vec4 b, Vec4& x) {
    for (int c = 0; c < 4; ++c) {
        int piv = c;
        for (int r = c + 1; r < 4; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (a[piv][c] == 0.0 || !std::isfinite(a[piv][c])) return false;
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (int r = c + 1; r < 4; ++r) {
            const double m = a[r][c] / a[c][c];
            for (int k = c; k < 4; ++k) a[r][k] -= m * a[c][k];
            b[r] -= m * b[c];
        }
    }
    for (int r = 3; r >= 0; --r) {
        double s = b[r];
        for (int k = r + 1; k < 4; ++k) s -= a[r][k] * x[k];
        x[r] = s / a[r][r];
    }
    return true;
}

// Discrete moment sums of the analytic Maxwellian and their derivatives with
// respect to (rho, u1, u2, T).
void moments_and_jacobian(const MaxwellianParams& p, const VelocityGrid& grid, Field& f, Vec4& sums, Mat4& jac) {
    f = maxwellian(p, grid);
    sums = {0, 0, 0, 0};
    for (auto& row : jac) row = {0, 0, 0, 0};
    const int n = grid.n();
    const double dv = grid.cell_volume();
    for (int i = 0; i < n; ++i) {
        const double a = grid.node(i);
        for (int j = 0; j < n; ++j) {
            const double b = grid.node(j);
            const double m = f[static_cast<std::size_t>(i) * n + j] * dv;
            const double da = a - p.u[0], db = b - p.u[1];
            const double c2 = da * da + db * db;
            // dM/drho = M/rho, dM/du_k = M (v_k - u_k)/T, dM/dT = M (|v-u|^2/(2T^2) - 1/T)
            const Vec4 dm = {m / p.rho, m * da / p.T, m * db / p.T, m * (c2 / (2.0 * p.T * p.T) - 1.0 / p.T)};
            const Vec4 phi = {1.0, a, b, 0.5 * (a * a + b * b)};
            for (int r = 0; r < 4; ++r) {
                sums[r] += phi[r] * m;
                for (int k = 0; k < 4; ++k) jac[r][k] += phi[r] * dm[k];
            }
        }
    }
}

}  // namespace

MatchedMaxwellian match_maxwellian(const MomentSet& target, const VelocityGrid& grid) {
    const double T0 = target.temperature();
    if (!(target.rho > 0.0) || !(T0 > 0.0) || !std::isfinite(T0)) {
        std::ostringstream os;
        os << "moment matching: inadmissible moments rho=" << target.rho << " T=" << T0;
        throw NumericalError(os.str());
    }
    const Vec4 goal = {target.rho, target.rho * target.u[0], target.rho * target.u[1], target.E};
    const Vec4 scale = {target.rho, target.rho * std::sqrt(T0), target.rho * std::sqrt(T0), target.E};

    MatchedMaxwellian out;
    out.params = {target.rho, target.u, T0};
    Field f;
    Vec4 sums;
    Mat4 jac;
    constexpr int max_iter = 50;
    constexpr double tol = 1e-13;
    for (int it = 0; it <= max_iter; ++it) {
        moments_and_jacobian(out.params, grid, f, sums, jac);
        Vec4 res;
        double worst = 0.0;
        for (int r = 0; r < 4; ++r) {
            res[r] = sums[r] - goal[r];
            worst = std::max(worst, std::abs(res[r]) / scale[r]);
        }
        out.residual = worst;
        out.iterations = it;
        if (worst <= tol) {
            out.values = std::move(f);
            return out;
        }
        if (it == max_iter) break;
        Vec4 step{};
        if (!solve4(jac, res, step)) break;
        // keep T positive
        double damp = 1.0;
        while (out.params.T - damp * step[3] <= 0.0 && damp > 1e-8) damp *= 0.5;
        out.params.rho -= damp * step[0];
        out.params.u[0] -= damp * step[1];
        out.params.u[1] -= damp * step[2];
        out.params.T -= damp * step[3];
        if (!(out.params.rho > 0.0) || !std::isfinite(out.params.T)) break;
    }
    // A converged-but-not-below-1e-13 iterate is still accepted at 1e-12.
    if (out.residual <= 1e-12 && !f.empty()) {
        out.values = std::move(f);
        return out;
    }
    std::ostringstream os;
    os << "moment matching did not converge in " << max_iter << " iterations, residual " << out.residual;
    throw NumericalError(os.str());
}

Field local_equilibrium(std::span<const double> f, const VelocityGrid& grid) {
    return match_maxwellian(compute_moments(f, grid), grid).values;
}

Field micro_macro_split(std::span<const double> f, std::span<const double> f_inf, const VelocityGrid& grid) {
    if (f.size() != grid.size() || f_inf.size() != grid.size())
        throw ShapeError("micro_macro_split: operands do not match the grid");
    Field g(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) g[k] = f[k] - f_inf[k];
    const auto mg = conserved_sums(g, grid);
    const auto mf = conserved_sums(f, grid);
    const double ref_mass = std::max(std::abs(mf[0]), 1e-300);
    const double ref_mom = std::max({std::abs(mf[1]), std::abs(mf[2]), ref_mass});
    const double ref_energy = std::max(std::abs(mf[3]), 1e-300);
    const double worst = std::max({std::abs(mg[0]) / ref_mass, std::abs(mg[1]) / ref_mom, std::abs(mg[2]) / ref_mom,
                                   std::abs(mg[3]) / ref_energy});
    if (worst > 1e-10) {
        std::ostringstream os;
        os << "micro_macro_split: moments of g do not vanish (relative residual " << worst << ")";
        throw ConsistencyError(os.str());
    }
    return g;
}

}  // namespace mscv
