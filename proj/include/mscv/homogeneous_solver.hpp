#pragma once

#include <functional>
#include <span>
#include <vector>

#include "mscv/collision_ops.hpp"

namespace mscv {

/// One classical RK4 step of df/dt = rate(f). Throws NumericalError naming
/// `step_index` if the result is not finite.
Field rk4_step(std::span<const double> f, double dt, const RateFunction& rate, long step_index = 0);

struct HomogeneousTrajectory {
    std::vector<double> times;
    std::vector<Field> states;  ///< states[k] at times[k]; states[0] = f0
};

/// Number of steps of size dt reaching t_final; ParameterError if t_final is
/// not a multiple of dt up to rounding.
long step_count(double dt, double t_final);

/// Integrate to t_final, keeping every `store_every`-th state (and the last).
HomogeneousTrajectory solve_homogeneous(std::span<const double> f0, const RateFunction& rate, double dt,
                                        double t_final, int store_every = 1);

HomogeneousTrajectory solve_homogeneous(std::span<const double> f0, const CollisionKernel& kernel,
                                        const SpectralPlan& plan, double dt, double t_final);

/// Streaming mode: observer(step, t, f) is called for step 0 and after every
/// step, nothing is stored.
using StateObserver = std::function<void(long, double, std::span<const double>)>;
void solve_homogeneous_streaming(std::span<const double> f0, const RateFunction& rate, double dt, double t_final,
                                 const StateObserver& observer);

/// exp(-nu t) f0 + (1 - exp(-nu t)) f_inf.
Field bgk_exact(std::span<const double> f0, std::span<const double> f_inf, double nu, double t);

/// bgk_exact on precomputed means; the control-variate mean for a
/// deterministic collision frequency.
inline Field bgk_exact_expectation(std::span<const double> f0_mean, std::span<const double> f_inf_mean, double nu,
                                   double t) {
    return bgk_exact(f0_mean, f_inf_mean, nu, t);
}

/// Mean of the BGK solution when nu depends on z:
///   <f_inf> + E_ME[(e^{-nu(z) t} - e^{-nu_bar t})(f0 - f_inf)] + e^{-nu_bar t}(<f0> - <f_inf>).
///
/// `nu_samples` are nu(z_k) on the fine ensemble. `f0_samples` and
/// `f_inf_samples` hold the fields at the same nodes, or a single field each
/// when the data do not depend on z.
Field bgk_random_nu_expectation(const std::vector<Field>& f0_samples, const std::vector<Field>& f_inf_samples,
                                std::span<const double> nu_samples, double nu_bar, std::span<const double> f0_mean,
                                std::span<const double> f_inf_mean, double t);

}  // namespace mscv
