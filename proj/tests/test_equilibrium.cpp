#include <gtest/gtest.h>

#include <cmath>

#include "mscv/equilibrium.hpp"
#include "mscv/errors.hpp"
#include "support.hpp"

using namespace mscv;

TEST(Maxwellian, RejectsNonPositiveTemperature) {
    VelocityGrid g(8, 4.0);
    EXPECT_THROW(maxwellian({1.0, {0.0, 0.0}, 0.0}, g), ParameterError);
    EXPECT_THROW(maxwellian({-1.0, {0.0, 0.0}, 1.0}, g), ParameterError);
    const Field z = maxwellian({0.0, {0.0, 0.0}, 1.0}, g);
    for (double x : z) EXPECT_EQ(x, 0.0);
}

TEST(Maxwellian, PeakValue) {
    VelocityGrid g(2, 1.0);  // nodes at +-0.5
    const Field m = maxwellian({2.0, {0.5, 0.5}, 0.5}, g);
    // node (0.5, 0.5) sits on the mean: rho / (2 pi T)
    EXPECT_NEAR(m[3], 2.0 / (2.0 * M_PI * 0.5), 1e-15);
}

TEST(MatchedMaxwellian, MatchesDiscreteMomentsOnCoarseGrid) {
    // Coarse grid: the analytic Maxwellian's discrete moments are visibly off.
    VelocityGrid g(12, 5.0);
    MomentSet target{0.9, {0.3, -0.4}, 0.0};
    target.E = 0.5 * target.rho * (0.3 * 0.3 + 0.4 * 0.4) + target.rho * 1.2;  // T = 1.2
    const auto raw = compute_moments(maxwellian({0.9, {0.3, -0.4}, 1.2}, g), g);
    EXPECT_GT(std::abs(raw.rho - 0.9), 1e-8);

    const auto mm = match_maxwellian(target, g);
    const auto got = conserved_sums(mm.values, g);
    EXPECT_NEAR(got[0], 0.9, 1e-12);
    EXPECT_NEAR(got[1], 0.9 * 0.3, 1e-12);
    EXPECT_NEAR(got[2], -0.9 * 0.4, 1e-12);
    EXPECT_NEAR(got[3], target.E, 1e-12);
    EXPECT_LE(mm.iterations, 50);
}

TEST(MatchedMaxwellian, TwoBumpEquilibrium) {
    VelocityGrid g(32, 16.0);
    for (double z : {0.0, 0.37, 1.0}) {
        const Field f = fixtures::two_bumps(z, g);
        const Field M = local_equilibrium(f, g);
        const auto a = conserved_sums(f, g), b = conserved_sums(M, g);
        for (int r = 0; r < 4; ++r) EXPECT_NEAR(a[r], b[r], 1e-12 * std::max(1.0, std::abs(a[r])));
        // the equilibrium of an equilibrium is itself
        const Field M2 = local_equilibrium(M, g);
        for (std::size_t k = 0; k < M.size(); ++k) EXPECT_NEAR(M2[k], M[k], 1e-13);
    }
}

TEST(MatchedMaxwellian, InadmissibleTargetsThrow) {
    VelocityGrid g(8, 4.0);
    EXPECT_THROW(match_maxwellian({0.0, {0.0, 0.0}, 0.0}, g), NumericalError);
    EXPECT_THROW(match_maxwellian({-1.0, {0.0, 0.0}, 1.0}, g), NumericalError);
    // energy below kinetic energy of the mean flow
    EXPECT_THROW(match_maxwellian({1.0, {1.0, 0.0}, 0.4}, g), NumericalError);
}

TEST(MicroMacroSplit, MomentsOfPerturbationVanish) {
    VelocityGrid g(32, 16.0);
    const Field f = fixtures::two_bumps(0.5, g);
    const Field M = local_equilibrium(f, g);
    const Field gpart = micro_macro_split(f, M, g);
    const auto s = conserved_sums(gpart, g);
    for (double x : s) EXPECT_LT(std::abs(x), 1e-13);
    for (std::size_t k = 0; k < f.size(); ++k) EXPECT_EQ(gpart[k], f[k] - M[k]);
}

TEST(MicroMacroSplit, WrongEquilibriumIsRejected) {
    VelocityGrid g(32, 16.0);
    const Field f = fixtures::two_bumps(0.5, g);
    const Field other = maxwellian({0.0625, {0.0, 0.0}, 1.0}, g);
    EXPECT_THROW(micro_macro_split(f, other, g), ConsistencyError);
    EXPECT_THROW(micro_macro_split(f, Field(3), g), ShapeError);
}
