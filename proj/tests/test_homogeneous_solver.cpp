#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mscv/equilibrium.hpp"
#include "mscv/errors.hpp"
#include "mscv/homogeneous_solver.hpp"
#include "support.hpp"

using namespace mscv;

TEST(Rk4, ZeroOperatorLeavesStateUnchanged) {
    const Field f = {1.0, -2.0, 3.5};
    const Field out = rk4_step(f, 0.3, [](std::span<const double> x) { return Field(x.size(), 0.0); });
    EXPECT_EQ(out, f);
}

TEST(Rk4, LinearDecayMatchesStabilityPolynomial) {
    const RateFunction decay = [](std::span<const double> x) {
        Field r(x.begin(), x.end());
        for (double& v : r) v = -v;
        return r;
    };
    for (double dt : {0.4, 0.2, 0.1}) {
        const Field out = rk4_step(Field{1.0}, dt, decay);
        const double poly = 1 - dt + dt * dt / 2 - dt * dt * dt / 6 + dt * dt * dt * dt / 24;
        EXPECT_NEAR(out[0], poly, 4e-16);
        // local error dt^5 / 120
        EXPECT_NEAR(out[0], std::exp(-dt), 1.01 * std::pow(dt, 5) / 120.0);
    }
}

TEST(Rk4, NonFiniteResultNamesTheStep) {
    const RateFunction bad = [](std::span<const double> x) { return Field(x.size(), std::nan("")); };
    try {
        rk4_step(Field{1.0}, 0.1, bad, 42);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("42"), std::string::npos);
    }
    EXPECT_THROW(rk4_step(Field{1.0}, 0.0, bad), ParameterError);
}

TEST(StepCount, RequiresMultipleOfDt) {
    EXPECT_EQ(step_count(0.05, 10.0), 200);
    EXPECT_EQ(step_count(1.0, 70.0), 70);
    EXPECT_THROW(step_count(0.3, 1.0), ParameterError);
}

class HomogeneousTwoBumps : public ::testing::Test {
protected:
    VelocityGrid grid{32, 16.0};
    CollisionKernel kernel{1.0};
    SpectralPlan plan{grid, 8};
    Field f0 = fixtures::two_bumps(0.5, grid);
    Field f_inf = local_equilibrium(f0, grid);
};

TEST_F(HomogeneousTwoBumps, MaxwellianIsAFixedPoint) {
    const auto tr = solve_homogeneous(f_inf, kernel, plan, 0.05, 5.0);
    ASSERT_EQ(tr.states.size(), 101u);
    double worst = 0.0;
    for (std::size_t k = 0; k < f_inf.size(); ++k) worst = std::max(worst, std::abs(tr.states.back()[k] - f_inf[k]));
    EXPECT_LT(worst, 1e-8);
}

TEST_F(HomogeneousTwoBumps, RelaxationIsMonotoneAndConservesMass) {
    const double mass0 = conserved_sums(f0, grid)[0];
    double prev = 1e300;
    long checked = 0;
    solve_homogeneous_streaming(f0, boltzmann_rate(kernel, plan), 1.0, 70.0,
                                [&](long, double t, std::span<const double> f) {
                                    const Field x(f.begin(), f.end());
                                    EXPECT_NEAR(conserved_sums(x, grid)[0], mass0, 1e-12);
                                    if (t >= 1.0) {
                                        const double d = fixtures::l1_diff(x, f_inf, grid);
                                        EXPECT_LT(d, prev) << "t=" << t;
                                        prev = d;
                                        ++checked;
                                    }
                                });
    EXPECT_EQ(checked, 70);
}

TEST_F(HomogeneousTwoBumps, DistanceToEquilibriumAtTimeTen) {
    // Golden value, measured: loss frequency b0 rho = 0.0625 makes the
    // relaxation slow, so f(10) is still far from f_inf.
    const auto tr = solve_homogeneous(f0, boltzmann_rate(kernel, plan), 0.05, 10.0, 200);
    const double d0 = fixtures::l1_diff(f0, f_inf, grid);
    const double d10 = fixtures::l1_diff(tr.states.back(), f_inf, grid);
    EXPECT_NEAR(d0, 9.2841e-2, 1e-5);
    EXPECT_NEAR(d10, 7.2917e-2, 1e-5);
}

TEST_F(HomogeneousTwoBumps, FourthOrderSelfConvergence) {
    const auto rate = boltzmann_rate(kernel, plan);
    // Stiffer kernel so that the time error dominates roundoff.
    const auto fast = boltzmann_rate(CollisionKernel(40.0), plan);
    auto run = [&](double dt) { return solve_homogeneous(f0, fast, dt, 2.0, 1000000).states.back(); };
    const Field a = run(0.2), b = run(0.1), c = run(0.05);
    const double e1 = fixtures::l1_diff(a, b, grid), e2 = fixtures::l1_diff(b, c, grid);
    const double order = std::log2(e1 / e2);
    EXPECT_GT(order, 3.8);
    EXPECT_LT(order, 4.3);
    (void)rate;
}

TEST(BgkExact, ClosedFormValues) {
    const Field f0 = {1.0, 2.0, -0.5}, fi = {0.25, 0.75, 0.5};
    EXPECT_EQ(bgk_exact(f0, fi, 1.3, 0.0), f0);
    const Field late = bgk_exact(f0, fi, 2.0, 1e3 / 2.0);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(late[k], fi[k], 1e-12);
    const Field half = bgk_exact(f0, fi, 1.0, std::log(2.0));
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(half[k], 0.5 * f0[k] + 0.5 * fi[k], 1e-15);
    const Field mean = bgk_exact_expectation(f0, fi, 1.0, std::log(2.0));
    EXPECT_EQ(mean, half);
    EXPECT_THROW(bgk_exact(f0, fi, 0.0, 1.0), ParameterError);
    EXPECT_THROW(bgk_exact(f0, Field{1.0}, 1.0, 1.0), ShapeError);
}

TEST(BgkExact, SatisfiesTheOde) {
    const Field f0 = {1.0, 2.0}, fi = {0.3, 0.1};
    const double nu = 0.7, t = 1.3, h = 1e-4;
    const Field p = bgk_exact(f0, fi, nu, t + h), m = bgk_exact(f0, fi, nu, t - h), c = bgk_exact(f0, fi, nu, t);
    for (std::size_t k = 0; k < 2; ++k) {
        const double dfdt = (p[k] - m[k]) / (2 * h);
        EXPECT_NEAR(dfdt, nu * (fi[k] - c[k]), 1e-8);
    }
}

TEST(BgkExact, MomentsAreConstant) {
    VelocityGrid g(32, 16.0);
    const Field f0 = fixtures::two_bumps(0.1, g), fi = local_equilibrium(f0, g);
    const auto s0 = conserved_sums(f0, g);
    for (double t : {0.5, 3.0, 40.0}) {
        const auto s = conserved_sums(bgk_exact(f0, fi, 0.0625, t), g);
        for (int r = 0; r < 4; ++r) EXPECT_NEAR(s[r], s0[r], 1e-15);
    }
}

TEST(BgkRandomNu, ConstantFrequencyReducesToDeterministicMean) {
    const std::vector<Field> f0 = {{1.0, 2.0}}, fi = {{0.5, 0.5}};
    const std::vector<double> nu(17, 0.8);
    const Field got = bgk_random_nu_expectation(f0, fi, nu, 0.8, f0[0], fi[0], 2.0);
    const Field want = bgk_exact_expectation(f0[0], fi[0], 0.8, 2.0);
    for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(got[k], want[k], 1e-16);
    const Field at0 = bgk_random_nu_expectation(f0, fi, nu, 0.8, f0[0], fi[0], 0.0);
    EXPECT_EQ(at0, f0[0]);
    EXPECT_THROW(bgk_random_nu_expectation(f0, fi, std::vector<double>{}, 0.8, f0[0], fi[0], 1.0), ParameterError);
}

TEST(BgkRandomNu, ScalarToyConvergesToClosedForm) {
    // nu(z) = 1 + 0.2 z, z ~ U(0,1), f0 = 1, f_inf = 0, t = 1:
    // E[exp(-nu)] = e^{-1} (1 - e^{-0.2}) / 0.2
    const double want = std::exp(-1.0) * (1.0 - std::exp(-0.2)) / 0.2;
    EXPECT_NEAR(want, 0.333426, 1e-6);
    const std::vector<Field> f0 = {{1.0}}, fi = {{0.0}};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int me : {1000, 100000}) {
        std::vector<double> nu(me);
        double s = 0, s2 = 0;
        for (double& x : nu) {
            x = 1.0 + 0.2 * U(rng);
            s += std::exp(-x);
            s2 += std::exp(-2 * x);
        }
        const double mean = s / me, sd = std::sqrt((s2 / me - mean * mean) / me);
        const Field got = bgk_random_nu_expectation(f0, fi, nu, 1.1, f0[0], fi[0], 1.0);
        EXPECT_NEAR(got[0], want, 4 * sd) << "M_E=" << me;
    }
}

TEST(BgkRandomNu, PerSampleFieldsMatchBroadcast) {
    const std::vector<double> nu = {0.9, 1.0, 1.2};
    const Field a = {1.0, 0.2}, b = {0.4, 0.6};
    const std::vector<Field> f0(3, a), fi(3, b);
    const Field per = bgk_random_nu_expectation(f0, fi, nu, 1.05, a, b, 0.7);
    const Field bc = bgk_random_nu_expectation({a}, {b}, nu, 1.05, a, b, 0.7);
    for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(per[k], bc[k], 1e-15);
}
