#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>

#include "mscv/phase_grid.hpp"

namespace mscv {

/// Maxwell-molecule kernel: constant B = b0 against the normalized angular
/// measure dw / |S^1|, so the loss frequency of Q(f, f) is b0 * rho.
struct CollisionKernel {
    double b0 = 1.0;

    explicit CollisionKernel(double magnitude = 1.0);
};

/// Precomputed Fourier data for the spectral collision operator on one grid.
///
/// Velocity data are treated as periodic on [-v_max, v_max]^2 and collisions
/// are truncated at the support radius R = 2 v_max / (3 + sqrt 2). The plan
/// is immutable and cheap to copy; it can be shared across threads. The
/// O(n^4) table of the direct method is built on first use.
class SpectralPlan {
public:
    static constexpr int default_angles = 8;

    /// Support radius as a fraction of v_max.
    static double support_ratio();

    explicit SpectralPlan(const VelocityGrid& grid, int n_angles = default_angles);

    const VelocityGrid& grid() const;
    int n_angles() const;
    double support_radius() const;

    struct Impl;
    const Impl& impl() const { return *impl_; }

private:
    std::shared_ptr<Impl> impl_;
};

/// Bilinear Q(g, h) by the classical spectral method: restricted convolution
/// over all mode pairs with the exact kernel modes, O(n^4).
Field q_boltzmann_direct(std::span<const double> g, std::span<const double> h, const CollisionKernel& kernel,
                         const SpectralPlan& plan);

/// Bilinear Q(g, h) by the fast method: the kernel modes are split into
/// n_angles separable directions, each evaluated as an FFT convolution,
/// O(n_angles n^2 log n).
Field q_boltzmann_fast(std::span<const double> g, std::span<const double> h, const CollisionKernel& kernel,
                       const SpectralPlan& plan);

/// Kernel mode B(l, m) / b0 of the direct method for integer modes l, m
/// (gain part only; the loss mode is B(m, m)).
double direct_kernel_mode(const SpectralPlan& plan, std::array<int, 2> l, std::array<int, 2> m);

/// Fast-method kernel mode beta(l, m) / b0 with the plan's angular quadrature.
double fast_kernel_mode(const SpectralPlan& plan, std::array<int, 2> l, std::array<int, 2> m);

/// nu * (M[f] - f), M[f] the moment-matched Maxwellian of f.
Field q_bgk(std::span<const double> f, double nu, const VelocityGrid& grid);

enum class SpectralMethod { fast, direct };

/// || Q(f,f) - Q(g,g) - Q(g,f_inf) - Q(f_inf,g) - Q(f_inf,f_inf) ||_{L^1}, g = f - f_inf.
double micro_macro_residual(std::span<const double> f, std::span<const double> f_inf, const CollisionKernel& kernel,
                            const SpectralPlan& plan, SpectralMethod method = SpectralMethod::fast);

/// Time derivative of a homogeneous density: returns df/dt for a given f.
using RateFunction = std::function<Field(std::span<const double>)>;

RateFunction boltzmann_rate(const CollisionKernel& kernel, const SpectralPlan& plan,
                            SpectralMethod method = SpectralMethod::fast);

/// BGK rate with collision frequency nu_per_density * rho(f).
RateFunction bgk_rate(double nu_per_density, const VelocityGrid& grid);

/// Discrete entropy sum f log f dv over the positive part of f.
double discrete_entropy(std::span<const double> f, const VelocityGrid& grid);

}  // namespace mscv
