#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mscv/equilibrium.hpp"
#include "mscv/errors.hpp"
#include "mscv/phase_grid.hpp"
#include "support.hpp"

using namespace mscv;

TEST(VelocityGrid, NodesAreCellCentredAndSymmetric) {
    VelocityGrid g(8, 4.0);
    EXPECT_DOUBLE_EQ(g.spacing(), 1.0);
    EXPECT_DOUBLE_EQ(g.node(0), -3.5);
    EXPECT_DOUBLE_EQ(g.node(7), 3.5);
    for (int j = 0; j < 8; ++j) EXPECT_DOUBLE_EQ(g.node(j), -g.node(7 - j));
    EXPECT_EQ(g.size(), 64u);
    EXPECT_DOUBLE_EQ(g.v1(8 * 3 + 5), g.node(3));
    EXPECT_DOUBLE_EQ(g.v2(8 * 3 + 5), g.node(5));
}

TEST(VelocityGrid, RejectsBadParameters) {
    EXPECT_THROW(VelocityGrid(0, 1.0), ParameterError);
    EXPECT_THROW(VelocityGrid(4, 0.0), ParameterError);
    EXPECT_THROW(SpatialGrid1D(0, 1.0), ParameterError);
    EXPECT_THROW(SpatialGrid1D(3, -1.0), ParameterError);
}

TEST(Distribution, SizeIsChecked) {
    VelocityGrid g(4, 1.0);
    EXPECT_THROW(Distribution(g, Field(15)), ShapeError);
    EXPECT_NO_THROW(Distribution(g, Field(16)));
}

TEST(Moments, MaxwellianMomentsAtFineResolution) {
    VelocityGrid g(64, 10.0);
    const Field m = maxwellian({1.0, {0.0, 0.0}, 1.0}, g);
    const auto mom = compute_moments(m, g);
    EXPECT_NEAR(mom.rho, 1.0, 1e-10);
    EXPECT_NEAR(mom.u[0], 0.0, 1e-14);
    EXPECT_NEAR(mom.u[1], 0.0, 1e-14);
    EXPECT_NEAR(mom.temperature(), 1.0, 1e-10);
}

TEST(Moments, ShiftedMaxwellian) {
    VelocityGrid g(64, 12.0);
    const Field m = maxwellian({0.7, {0.5, -1.25}, 1.5}, g);
    const auto mom = compute_moments(m, g);
    EXPECT_NEAR(mom.rho, 0.7, 1e-10);
    EXPECT_NEAR(mom.u[0], 0.5, 1e-10);
    EXPECT_NEAR(mom.u[1], -1.25, 1e-10);
    EXPECT_NEAR(mom.temperature(), 1.5, 1e-9);
}

TEST(Moments, TwoBumpsMassIsRhoZeroTimesSigma) {
    VelocityGrid g(64, 16.0);
    for (double z : {0.0, 0.5, 1.0}) {
        const auto mom = compute_moments(fixtures::two_bumps(z, g), g);
        // each bump integrates to rho0 / (2 pi) * pi * sigma
        EXPECT_NEAR(mom.rho, 0.125 * 0.5, 1e-8);
        // mean of the two centres (2+0.2z) and -(1+0.2z)
        EXPECT_NEAR(mom.u[0], 0.5, 1e-8);
        EXPECT_NEAR(mom.u[1], 0.5, 1e-8);
    }
}

TEST(Moments, ZeroMassReportsZeroVelocity) {
    VelocityGrid g(4, 1.0);
    const auto mom = compute_moments(Field(16, 0.0), g);
    EXPECT_EQ(mom.rho, 0.0);
    EXPECT_EQ(mom.u[0], 0.0);
    EXPECT_EQ(mom.temperature(), 0.0);
}

TEST(Moments, LinearInF) {
    VelocityGrid g(16, 5.0);
    const Field a = fixtures::two_bumps(0.3, g), b = maxwellian({1.0, {0.2, 0.1}, 0.8}, g);
    Field c(a.size());
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = 2.0 * a[k] - 3.0 * b[k];
    const auto sa = conserved_sums(a, g), sb = conserved_sums(b, g), sc = conserved_sums(c, g);
    for (int r = 0; r < 4; ++r) EXPECT_NEAR(sc[r], 2.0 * sa[r] - 3.0 * sb[r], 1e-14);
}

TEST(WeightedNorm, UnitMaxwellian) {
    VelocityGrid g(64, 10.0);
    const Field m = maxwellian({1.0, {0.0, 0.0}, 1.0}, g);
    EXPECT_NEAR(weighted_norm(m, g, 1, 0), 1.0, 1e-10);
    // int (1 + |v|^2) M = 1 + 2T
    EXPECT_NEAR(weighted_norm(m, g, 1, 2), 3.0, 1e-9);
    // int M^2 = 1 / (4 pi)
    EXPECT_NEAR(weighted_norm(m, g, 2, 0), 1.0 / (4.0 * std::numbers::pi), 1e-10);
    EXPECT_NEAR(weighted_norm_rooted(m, g, 2, 0), std::sqrt(1.0 / (4.0 * std::numbers::pi)), 1e-10);
}

TEST(WeightedNorm, RejectsUnsupportedP) {
    VelocityGrid g(4, 1.0);
    Field f(16, 1.0);
    EXPECT_THROW(weighted_norm(f, g, 3, 0), ParameterError);
    EXPECT_THROW(weighted_norm(f, g, 1, -1), ParameterError);
    EXPECT_THROW(weighted_norm(Field(3), g, 1, 0), ShapeError);
}

TEST(WeightedNorm, SpaceVelocityField) {
    SpatialGrid1D xg(5, 2.0);
    VelocityGrid vg(32, 8.0);
    DistributionField F(xg, vg);
    const Field m = maxwellian({2.0, {0.0, 0.0}, 1.0}, vg);
    for (int i = 0; i < 5; ++i) std::copy(m.begin(), m.end(), F.cell(i).begin());
    // total mass 2 * length
    EXPECT_NEAR(weighted_norm(F, 1, 0), 4.0, 1e-8);
}

TEST(UqErrorNorm, DeterministicDeviationReducesToNorm) {
    VelocityGrid g(8, 2.0);
    const Field w = phase_space_weights(g, 0);
    Field d(g.size());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = std::sin(0.3 * static_cast<double>(k)) - 0.2;
    const std::vector<Field> devs(3, d);
    EXPECT_NEAR(uq_error_norm(devs, {}, w, 1), weighted_norm(d, g, 1, 0), 1e-14);
    EXPECT_NEAR(uq_error_norm_outer(devs, {}, w, 1), weighted_norm(d, g, 1, 0), 1e-14);
}

TEST(UqErrorNorm, RootMeanSquareAcrossSamples) {
    const std::vector<Field> devs = {{3.0}, {-4.0}};
    const std::vector<double> pw = {1.0};
    // sqrt((9 + 16) / 2)
    EXPECT_NEAR(uq_error_norm(devs, {}, pw, 1), std::sqrt(12.5), 1e-14);
    const std::vector<double> zw = {1.0, 3.0};
    EXPECT_NEAR(uq_error_norm(devs, zw, pw, 1), std::sqrt(0.25 * 9 + 0.75 * 16), 1e-14);
    EXPECT_THROW(uq_error_norm({}, {}, pw, 1), ParameterError);
}
