#include "mscv/homogeneous_solver.hpp"

#include <cmath>
#include <string>

#include "mscv/errors.hpp"

namespace mscv {

Field rk4_step(std::span<const double> f, double dt, const RateFunction& rate, long step_index) {
    if (!(dt > 0.0)) throw ParameterError("rk4_step needs dt > 0");
    const std::size_t n = f.size();
    Field stage(n), out(f.begin(), f.end());
    const Field k1 = rate(f);
    for (std::size_t i = 0; i < n; ++i) stage[i] = f[i] + 0.5 * dt * k1[i];
    const Field k2 = rate(stage);
    for (std::size_t i = 0; i < n; ++i) stage[i] = f[i] + 0.5 * dt * k2[i];
    const Field k3 = rate(stage);
    for (std::size_t i = 0; i < n; ++i) stage[i] = f[i] + dt * k3[i];
    const Field k4 = rate(stage);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if (!std::isfinite(out[i])) throw NumericalError("non-finite value after step " + std::to_string(step_index));
    }
    return out;
}

long step_count(double dt, double t_final) {
    if (!(dt > 0.0)) throw ParameterError("time step must be > 0");
    if (!(t_final >= 0.0)) throw ParameterError("final time must be >= 0");
    const long n = std::lround(t_final / dt);
    if (std::abs(static_cast<double>(n) * dt - t_final) > 1e-9 * std::max(1.0, t_final))
        throw ParameterError("final time " + std::to_string(t_final) + " is not a multiple of dt " + std::to_string(dt));
    return n;
}

void solve_homogeneous_streaming(std::span<const double> f0, const RateFunction& rate, double dt, double t_final,
                                 const StateObserver& observer) {
    const long steps = step_count(dt, t_final);
    Field f(f0.begin(), f0.end());
    observer(0, 0.0, f);
    for (long s = 1; s <= steps; ++s) {
        f = rk4_step(f, dt, rate, s);
        observer(s, static_cast<double>(s) * dt, f);
    }
}

HomogeneousTrajectory solve_homogeneous(std::span<const double> f0, const RateFunction& rate, double dt,
                                        double t_final, int store_every) {
    if (store_every < 1) throw ParameterError("store_every must be >= 1");
    const long steps = step_count(dt, t_final);
    HomogeneousTrajectory out;
    solve_homogeneous_streaming(f0, rate, dt, t_final, [&](long s, double t, std::span<const double> f) {
        if (s % store_every == 0 || s == steps) {
            out.times.push_back(t);
            out.states.emplace_back(f.begin(), f.end());
        }
    });
    return out;
}

HomogeneousTrajectory solve_homogeneous(std::span<const double> f0, const CollisionKernel& kernel,
                                        const SpectralPlan& plan, double dt, double t_final) {
    return solve_homogeneous(f0, boltzmann_rate(kernel, plan), dt, t_final);
}

Field bgk_exact(std::span<const double> f0, std::span<const double> f_inf, double nu, double t) {
    if (f0.size() != f_inf.size()) throw ShapeError("bgk_exact: f0 and f_inf differ in size");
    if (!(nu > 0.0)) throw ParameterError("bgk_exact needs nu > 0");
    if (!(t >= 0.0)) throw ParameterError("bgk_exact needs t >= 0");
    const double a = std::exp(-nu * t), b = -std::expm1(-nu * t);
    Field out(f0.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = a * f0[k] + b * f_inf[k];
    return out;
}

Field bgk_random_nu_expectation(const std::vector<Field>& f0_samples, const std::vector<Field>& f_inf_samples,
                                std::span<const double> nu_samples, double nu_bar, std::span<const double> f0_mean,
                                std::span<const double> f_inf_mean, double t) {
    if (nu_samples.empty()) throw ParameterError("bgk_random_nu_expectation needs at least one node");
    if (f0_samples.empty() || f_inf_samples.empty()) throw ParameterError("bgk_random_nu_expectation: no fields");
    if (!(t >= 0.0)) throw ParameterError("bgk_random_nu_expectation needs t >= 0");
    const std::size_t n = f0_mean.size();
    if (f_inf_mean.size() != n) throw ShapeError("bgk_random_nu_expectation: mean fields differ in size");
    const std::size_t count = nu_samples.size();
    const bool broadcast = f0_samples.size() == 1 && f_inf_samples.size() == 1;
    if (!broadcast && (f0_samples.size() != count || f_inf_samples.size() != count))
        throw ShapeError("bgk_random_nu_expectation: field count differs from node count");

    const double e_bar = std::exp(-nu_bar * t);
    Field out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = f_inf_mean[k] + e_bar * (f0_mean[k] - f_inf_mean[k]);
    const double inv = 1.0 / static_cast<double>(count);
    if (broadcast) {
        double corr = 0.0;
        for (double nu : nu_samples) corr += std::exp(-nu * t) - e_bar;
        corr *= inv;
        const Field& a = f0_samples.front();
        const Field& b = f_inf_samples.front();
        for (std::size_t k = 0; k < n; ++k) out[k] += corr * (a[k] - b[k]);
        return out;
    }
    for (std::size_t s = 0; s < count; ++s) {
        const double w = (std::exp(-nu_samples[s] * t) - e_bar) * inv;
        const Field& a = f0_samples[s];
        const Field& b = f_inf_samples[s];
        for (std::size_t k = 0; k < n; ++k) out[k] += w * (a[k] - b[k]);
    }
    return out;
}

}  // namespace mscv
