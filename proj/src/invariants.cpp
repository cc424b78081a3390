#include "mscv/invariants.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>

#include "mscv/collision_ops.hpp"
#include "mscv/equilibrium.hpp"
#include "mscv/euler1d.hpp"
#include "mscv/experiments.hpp"
#include "mscv/kinetic1d.hpp"
#include "mscv/uq_core.hpp"

namespace mscv {

namespace {

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

CheckResult guarded(const std::string& name, const std::function<CheckResult()>& body) {
    try {
        CheckResult r = body();
        r.name = name;
        return r;
    } catch (const std::exception& e) {
        return {name, false, std::string("threw: ") + e.what()};
    }
}

// Paired ensembles built from the counter RNG, so the suite is reproducible.
void synthetic_pair(std::vector<Field>& f, std::vector<Field>& cv, Field& cv_mean) {
    const std::size_t M = 16, n = 40;
    const auto z = sample_z(M * n * 2 + n, 7);
    f.assign(M, Field(n));
    cv.assign(M, Field(n));
    cv_mean.assign(n, 0.0);
    std::size_t c = 0;
    for (std::size_t s = 0; s < M; ++s)
        for (std::size_t k = 0; k < n; ++k) {
            cv[s][k] = z[c++];
            f[s][k] = cv[s][k] + 0.3 * z[c++];
        }
    for (double& x : cv_mean) x = z[c++];
}

}  // namespace

std::vector<CheckResult> invariant_suite() {
    std::vector<CheckResult> out;

    out.push_back(guarded("lambda = 0 reproduces plain MC bit for bit", [] {
        std::vector<Field> f, cv;
        Field mean;
        synthetic_pair(f, cv, mean);
        const Field a = mscv_estimate(f, cv, mean, LambdaMode::zero).expectation;
        const Field b = mc_estimate(f);
        return CheckResult{{}, a == b, a == b ? "identical" : "differs"};
    }));

    out.push_back(guarded("lambda = 1 reproduces the micro-macro estimator bit for bit", [] {
        std::vector<Field> f, cv;
        Field mean;
        synthetic_pair(f, cv, mean);
        const Field a = mscv_estimate(f, cv, mean, LambdaMode::one).expectation;
        bool same = true;
        for (std::size_t k = 0; k < mean.size(); ++k) {
            double acc = 0.0;
            for (std::size_t s = 0; s < f.size(); ++s) acc += f[s][k] - cv[s][k];
            same = same && a[k] == mean[k] + acc / static_cast<double>(f.size());
        }
        return CheckResult{{}, same, same ? "identical" : "differs"};
    }));

    out.push_back(guarded("fast collision operator conserves mass, momentum and energy", [] {
        const ExperimentConfig cfg = build_test(1);
        const VelocityGrid g(cfg.n_v, cfg.v_max);
        const SpectralPlan plan(g, cfg.n_angles);
        const Field f = homogeneous_initial(cfg, 0.5, g);
        const auto s = conserved_sums(q_boltzmann_fast(f, f, CollisionKernel(1.0), plan), g);
        double worst = 0.0;
        for (double x : s) worst = std::max(worst, std::abs(x));
        // mass is exact; momentum and energy sit on the spectral floor
        return CheckResult{{}, std::abs(s[0]) < 1e-15 && worst < 1e-4, "max |moment of Q| = " + sci(worst)};
    }));

    out.push_back(guarded("BGK operator conserves mass, momentum and energy", [] {
        const ExperimentConfig cfg = build_test(1);
        const VelocityGrid g(cfg.n_v, cfg.v_max);
        const Field f = homogeneous_initial(cfg, 0.5, g);
        double worst = 0.0;
        for (double x : conserved_sums(q_bgk(f, 1.0, g), g)) worst = std::max(worst, std::abs(x));
        return CheckResult{{}, worst < 1e-12, "max |moment of Q| = " + sci(worst)};
    }));

    out.push_back(guarded("periodic Euler step conserves mass, momentum and energy", [] {
        const SpatialGrid1D xg(64, 1.0);
        ConservedField U(xg);
        for (int i = 0; i < xg.n(); ++i) {
            const double x = xg.center(i);
            const double rho = 1.0 + 0.2 * std::sin(2.0 * std::numbers::pi * x);
            U.cells[i] = to_conserved(MomentSet{rho, {0.3, -0.1}, rho * (1.0 + 0.5 * (0.09 + 0.01))});
        }
        const ConservedField V = euler_step(U, 0.2 * xg.spacing() / max_wave_speed(U), Boundary::periodic());
        double worst = 0.0;
        for (int k = 0; k < 4; ++k) worst = std::max(worst, std::abs(V.total(k) - U.total(k)));
        return CheckResult{{}, worst < 1e-12, "max drift = " + sci(worst)};
    }));

    out.push_back(guarded("diffusive wall re-emits with zero net mass flux", [] {
        const VelocityGrid g(16, 8.0);
        const Field f = maxwellian({0.7, {0.4, 0.1}, 1.3}, g);
        double worst = 0.0;
        for (WallSide side : {WallSide::left, WallSide::right})
            for (double Tw : {0.5, 1.0, 2.4}) worst = std::max(worst, std::abs(diffusive_wall(f, Tw, side, g).net_flux));
        return CheckResult{{}, worst <= 1e-12, "max |net flux| = " + sci(worst)};
    }));

    out.push_back(guarded("Gauss-Legendre integrates degree 2n-1 exactly", [] {
        double worst = 0.0;
        for (int n = 1; n <= 16; ++n) {
            const Quadrature q = gauss_legendre(n);
            const int deg = 2 * n - 1;
            double acc = 0.0;
            for (std::size_t i = 0; i < q.nodes.size(); ++i) acc += q.weights[i] * std::pow(q.nodes[i], deg);
            worst = std::max(worst, std::abs(acc - 1.0 / (deg + 1)));
        }
        return CheckResult{{}, worst < 1e-14, "max error = " + sci(worst)};
    }));

    out.push_back(guarded("sample allocation gives M_E1 = 1000, M_E2 = 819200 for M = 10", [] {
        const Allocation a = allocate_samples(CostModel{}, 10);
        return CheckResult{{}, a.m_bgk == 1000 && a.m_euler == 819200,
                           std::to_string(a.m_bgk) + " / " + std::to_string(a.m_euler)};
    }));

    out.push_back(guarded("kinetic and fine-ensemble sample streams are distinct", [] {
        const auto a = sample_z(64, 0, 1, kinetic_stream);
        const auto b = sample_z(64, 0, 1, fine_ensemble_stream);
        const bool distinct = hash_samples(a) != hash_samples(b) && a.front() != b.front();
        return CheckResult{{}, distinct, distinct ? "distinct" : "collide"};
    }));

    return out;
}

}  // namespace mscv
