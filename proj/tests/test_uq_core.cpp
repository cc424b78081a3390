#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mscv/errors.hpp"
#include "mscv/uq_core.hpp"

using namespace mscv;

namespace {

std::vector<Field> scalars(std::initializer_list<double> xs) {
    std::vector<Field> out;
    for (double x : xs) out.push_back({x});
    return out;
}

// correlated standard normal pairs with correlation rho
void gaussian_pairs(double rho, std::size_t M, unsigned seed, std::vector<double>& a, std::vector<double>& b) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> n01;
    a.resize(M);
    b.resize(M);
    for (std::size_t i = 0; i < M; ++i) {
        const double x = n01(gen), y = n01(gen);
        a[i] = x;
        b[i] = rho * x + std::sqrt(1.0 - rho * rho) * y;
    }
}

}  // namespace

TEST(SampleZ, Deterministic) {
    EXPECT_EQ(sample_z(3, 0), sample_z(3, 0));
    EXPECT_NE(sample_z(3, 0), sample_z(3, 1));
    EXPECT_NE(sample_z(3, 0, 1, kinetic_stream), sample_z(3, 0, 1, fine_ensemble_stream));
    EXPECT_TRUE(sample_z(0, 4).empty());
}

TEST(SampleZ, CounterBasedPrefix) {
    const auto a = sample_z(10, 42), b = sample_z(1000, 42);
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
}

TEST(SampleZ, UniformOnOpenInterval) {
    const auto z = sample_z(100000, 7);
    double mean = 0.0;
    for (double x : z) {
        ASSERT_GT(x, 0.0);
        ASSERT_LT(x, 1.0);
        mean += x;
    }
    EXPECT_NEAR(mean / z.size(), 0.5, 0.005);
    EXPECT_EQ(sample_z(5, 1, 3).size(), 15u);
    EXPECT_THROW(sample_z(5, 1, 0), ParameterError);
}

TEST(GaussLegendre, TwoPointRule) {
    const Quadrature q = gauss_legendre(2);
    EXPECT_NEAR(q.nodes[0], 0.5 - 0.5 / std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(q.nodes[1], 0.5 + 0.5 / std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(q.weights[0], 0.5, 1e-15);
    EXPECT_NEAR(q.weights[1], 0.5, 1e-15);
}

TEST(GaussLegendre, ExactForDegreeTwoNMinusOne) {
    for (int n : {1, 3, 8, 16, 32}) {
        const Quadrature q = gauss_legendre(n);
        for (int d = 0; d <= 2 * n - 1; ++d) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += q.weights[i] * std::pow(q.nodes[i], d);
            EXPECT_NEAR(s, 1.0 / (d + 1), 1e-14) << "n=" << n << " d=" << d;
        }
        EXPECT_TRUE(std::is_sorted(q.nodes.begin(), q.nodes.end()));
    }
    const Quadrature q = gauss_legendre(4, -1.0, 3.0);
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += q.weights[i] * q.nodes[i] * q.nodes[i];
    EXPECT_NEAR(s, (27.0 + 1.0) / 3.0, 1e-13);
}

TEST(McEstimate, Examples) {
    const Field f = {1.0, -2.0, 0.5};
    EXPECT_EQ(mc_estimate({f, f, f}), f);
    const Field neg = {-1.0, 2.0, -0.5};
    for (double x : mc_estimate({f, neg})) EXPECT_EQ(x, 0.0);
    EXPECT_DOUBLE_EQ(mc_estimate(scalars({1, 2, 6}))[0], 3.0);
    EXPECT_THROW(mc_estimate({Field{1.0}, Field{1.0, 2.0}}), ShapeError);
    EXPECT_THROW(mc_estimate({}), ParameterError);
}

TEST(VarCov, HandEvaluatedExample) {
    const VarCov vc = var_cov_estimators(scalars({1, 2, 3}), scalars({2, 4, 6}));
    EXPECT_DOUBLE_EQ(vc.cov[0], 2.0);
    EXPECT_DOUBLE_EQ(vc.var_cv[0], 4.0);
    // the zero-variance guard shifts the ratio by 1e-14 relative
    EXPECT_NEAR(lambda_star(scalars({1, 2, 3}), scalars({2, 4, 6}))[0], 0.5, 1e-13);
    EXPECT_DOUBLE_EQ(lambda_star(scalars({1, 2, 3}), scalars({2, 4, 6}), 0.0)[0], 0.5);
}

TEST(VarCov, ConstantControlVariateHasZeroVariance) {
    const VarCov vc = var_cov_estimators(scalars({1, 5, 2}), scalars({3, 3, 3}));
    EXPECT_EQ(vc.var_cv[0], 0.0);
    EXPECT_EQ(vc.cov[0], 0.0);
    EXPECT_EQ(lambda_star(scalars({1, 5, 2}), scalars({3, 3, 3}))[0], 0.0);
}

TEST(VarCov, NeedsTwoSamples) {
    EXPECT_THROW(var_cov_estimators(scalars({1}), scalars({2})), ParameterError);
    EXPECT_THROW(var_cov_estimators(scalars({1, 2}), scalars({2})), ShapeError);
}

TEST(VarCov, PermutedPartnerAveragesToZeroCovariance) {
    // Cov_M of independent partners has mean 0 and std ~ sd(f) sd(cv) / sqrt(M).
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int reps = 400, M = 50;
    double sum = 0.0, sum2 = 0.0;
    for (int r = 0; r < reps; ++r) {
        std::vector<Field> f, cv;
        for (int i = 0; i < M; ++i) f.push_back({u(gen)});
        cv = f;
        std::shuffle(cv.begin(), cv.end(), gen);
        const double c = var_cov_estimators(f, cv).cov[0];
        sum += c;
        sum2 += c * c;
    }
    const double mean = sum / reps;
    const double se = std::sqrt((sum2 / reps - mean * mean) / reps);
    EXPECT_LE(std::abs(mean), 3.0 * se + 1e-3 / M);
}

TEST(LambdaStar, PerfectCorrelationGivesOne) {
    std::vector<Field> f;
    for (int i = 0; i < 8; ++i) f.push_back({0.1 * i, std::sin(i), 2.0});  // last point deterministic
    const Field lam = lambda_star(f, f);
    EXPECT_NEAR(lam[0], 1.0, 1e-12);
    EXPECT_NEAR(lam[1], 1.0, 1e-12);
    EXPECT_EQ(lam[2], 0.0);
}

TEST(LambdaStar, CostCorrection) {
    const Field lam = {0.5, 1.0};
    EXPECT_NEAR(lambda_cost_corrected(lam, 10, 1000000)[1], 1.0, 1e-5);
    EXPECT_DOUBLE_EQ(lambda_cost_corrected(lam, 7, 7)[1], 0.5);
    EXPECT_NEAR(lambda_cost_corrected(lam, 10, 1000)[0], 0.5 * 1000.0 / 1010.0, 1e-15);
    EXPECT_NEAR(lambda_cost_corrected(lam, 10, 1000)[0], 0.49505, 1e-5);
    EXPECT_THROW(lambda_cost_corrected(lam, 0, 10), ParameterError);
}

TEST(LambdaStar, MinimizesEmpiricalVariance) {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> n01;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> f(12), cv(12);
        for (int i = 0; i < 12; ++i) {
            cv[i] = n01(gen);
            f[i] = 0.7 * cv[i] + n01(gen);
        }
        std::vector<Field> F, C;
        for (int i = 0; i < 12; ++i) {
            F.push_back({f[i]});
            C.push_back({cv[i]});
        }
        const double ls = lambda_star(F, C)[0];
        const double mc = mc_estimate(C)[0];
        auto var_at = [&](double lam) {
            double m = 0.0, v = 0.0;
            for (int i = 0; i < 12; ++i) m += f[i] - lam * (cv[i] - mc);
            m /= 12;
            for (int i = 0; i < 12; ++i) v += std::pow(f[i] - lam * (cv[i] - mc) - m, 2);
            return v;
        };
        const double best = var_at(ls);
        for (double lam = -2.0; lam <= 3.0; lam += 0.01) EXPECT_LE(best, var_at(lam) + 1e-12);
    }
}

TEST(MscvEstimate, ZeroModeIsMonteCarloBitForBit) {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Field> f(10, Field(50)), cv(10, Field(50));
    for (auto& s : f) for (double& x : s) x = u(gen);
    for (auto& s : cv) for (double& x : s) x = u(gen);
    Field mean(50);
    for (double& x : mean) x = u(gen);
    const EstimatorResult r = mscv_estimate_homogeneous(f, cv, mean, LambdaMode::zero);
    const Field mc = mc_estimate(f);
    for (std::size_t k = 0; k < 50; ++k) EXPECT_EQ(r.expectation[k], mc[k]);
    EXPECT_FALSE(r.lambda.has_value());
}

TEST(MscvEstimate, OneModeIsMicroMacro) {
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Field> f(10, Field(30)), finf(10, Field(30));
    for (auto& s : f) for (double& x : s) x = u(gen);
    for (auto& s : finf) for (double& x : s) x = u(gen);
    Field mean(30);
    for (double& x : mean) x = u(gen);
    const EstimatorResult r = mscv_estimate_homogeneous(f, finf, mean, LambdaMode::one);
    // <f_inf> + E_M[g], g = f - f_inf, written out independently
    for (std::size_t k = 0; k < 30; ++k) {
        double acc = 0.0;
        for (std::size_t s = 0; s < 10; ++s) acc += f[s][k] - finf[s][k];
        EXPECT_EQ(r.expectation[k], mean[k] + acc / 10.0);
    }
}

TEST(MscvEstimate, EquilibriumSamplesReturnTheMean) {
    std::vector<Field> f;
    for (int i = 0; i < 6; ++i) f.push_back({0.2 * i, 1.0 + i, 3.0});
    const Field mean = {0.41, 3.7, 3.0};
    for (LambdaMode m : {LambdaMode::one, LambdaMode::optimal}) {
        const EstimatorResult r = mscv_estimate_homogeneous(f, f, mean, m);
        // points with variance: exact; the deterministic point keeps E_M[f] which equals the mean
        for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(r.expectation[k], mean[k], 1e-12);
    }
}

TEST(MscvEstimate, ModeArguments) {
    const auto f = scalars({1, 2, 3});
    const Field mean = {2.0};
    EXPECT_THROW(mscv_estimate(f, f, mean, LambdaMode::cost_corrected), ParameterError);
    EXPECT_THROW(mscv_estimate(f, f, mean, LambdaMode::optimal_moment), ParameterError);
    const Field lam = {0.25};
    const EstimatorResult r = mscv_estimate(f, scalars({0, 0, 3}), mean, LambdaMode::optimal_moment, 0, lam);
    EXPECT_DOUBLE_EQ(r.expectation[0], 2.0 - 0.25 * (1.0 - 2.0));
    EXPECT_THROW(mscv_estimate(f, f, Field{1.0, 2.0}, LambdaMode::optimal), ShapeError);
    EXPECT_EQ(parse_lambda_mode("cost-corrected"), LambdaMode::cost_corrected);
    EXPECT_FALSE(parse_lambda_mode("best").has_value());
}

TEST(MscvEstimateField, TelescopesWhenFineEnsembleIsTheSameSamples) {
    TaggedSamples f{{0.1, 0.5, 0.9}, scalars({1, 4, 2})};
    TaggedSamples cv{{0.1, 0.5, 0.9}, scalars({0.3, 0.8, 0.1})};
    // fine ensemble holding the very same inputs is refused ...
    EXPECT_THROW(mscv_estimate_field(f, cv, cv, LambdaMode::one), ContractError);
    // ... while the estimator formula itself telescopes to E_M[f]
    const EstimatorResult r = mscv_estimate(f.values, cv.values, mc_estimate(cv.values), LambdaMode::one);
    EXPECT_NEAR(r.expectation[0], mc_estimate(f.values)[0], 1e-15);
}

TEST(MscvEstimateField, PerfectControlVariate) {
    const auto z = sample_z(10, 3);
    TaggedSamples f{z, {}}, cv{z, {}};
    for (double x : z) {
        f.values.push_back({x});
        cv.values.push_back({x});
    }
    // fine ensemble whose mean is exactly 1/2
    TaggedSamples fine{{0.25, 0.75}, scalars({0.25, 0.75})};
    EXPECT_EQ(mscv_estimate_field(f, cv, fine, LambdaMode::one).expectation[0], 0.5);
    EXPECT_EQ(mscv_estimate_field(f, cv, fine, LambdaMode::zero).expectation[0], mc_estimate(f.values)[0]);
}

TEST(MscvEstimateField, UnpairedSamplesAreRejected) {
    TaggedSamples f{sample_z(4, 1), scalars({1, 2, 3, 4})};
    TaggedSamples cv{sample_z(4, 2), scalars({1, 2, 3, 4})};
    TaggedSamples fine{sample_z(20, 1, 1, fine_ensemble_stream), std::vector<Field>(20, Field{1.0})};
    EXPECT_THROW(mscv_estimate_field(f, cv, fine, LambdaMode::optimal), ContractError);
    cv.z = f.z;
    EXPECT_NO_THROW(mscv_estimate_field(f, cv, fine, LambdaMode::optimal));
}

TEST(Allocation, PublishedConstants) {
    const Allocation a = allocate_samples(CostModel{}, 10);
    EXPECT_EQ(a.m_bgk, 1000u);
    EXPECT_EQ(a.m_euler, 819200u);
}

TEST(Allocation, UnitCaseAndLinearity) {
    CostModel unit;
    unit.c_over_c1 = 1.0;
    unit.n_a = 1;
    unit.n_v = 2;
    unit.d_v = 1;
    EXPECT_EQ(allocate_samples(unit, 13).m_bgk, 13u);
    const Allocation a = allocate_samples(CostModel{}, 10), b = allocate_samples(CostModel{}, 20);
    EXPECT_EQ(b.m_bgk, 2 * a.m_bgk);
    EXPECT_EQ(b.m_euler, 2 * a.m_euler);
    CostModel bad;
    bad.c_over_c2 = 0.0;
    EXPECT_THROW(allocate_samples(bad, 10), ParameterError);
}

TEST(VarianceReduction, PerfectAndIndependent) {
    std::vector<double> a, b;
    gaussian_pairs(0.0, 10000, 1, a, b);
    const VarianceReduction same = variance_reduction_report(a, a);
    ASSERT_TRUE(same.rho.has_value());
    EXPECT_NEAR(*same.rho, 1.0, 1e-12);
    EXPECT_NEAR(same.predicted, 0.0, 1e-12);
    EXPECT_LE(same.observed, 1e-20);
    const VarianceReduction ind = variance_reduction_report(a, b);
    EXPECT_LE(std::abs(*ind.rho), 3.0 / std::sqrt(10000.0));
    EXPECT_NEAR(ind.observed, 1.0, 2.0 * 3.0 / 10000.0);
    const std::vector<double> flat(10, 2.0);
    EXPECT_FALSE(variance_reduction_report(flat, std::span(a).first(10)).rho.has_value());
    EXPECT_THROW(variance_reduction_report(flat, a), ShapeError);
    EXPECT_EQ(variance_reduction_report(flat, std::span(a).first(10)).observed, 1.0);
}

TEST(VarianceReduction, GaussianResidualFollowsOneMinusRhoSquared) {
    for (double rho : {0.5, 0.8, 0.99}) {
        std::vector<double> a, b;
        gaussian_pairs(rho, 100000, 17, a, b);
        const VarianceReduction r = variance_reduction_report(a, b);
        EXPECT_NEAR(r.observed, 1.0 - rho * rho, 0.02) << rho;
        EXPECT_NEAR(r.predicted, r.observed, 1e-10);
    }
}

TEST(HashSamples, DistinguishesInputs) {
    EXPECT_EQ(hash_samples(sample_z(10, 0)), hash_samples(sample_z(10, 0)));
    EXPECT_NE(hash_samples(sample_z(10, 0)), hash_samples(sample_z(10, 1)));
}

TEST(VarCov, IdenticalSamplesGiveExactlyZero) {
    // values whose mean is not representable exactly
    std::vector<Field> cv(10, Field{0.1, 1.0 / 3.0, 2.718281828459045});
    std::vector<Field> f;
    for (int i = 0; i < 10; ++i) f.push_back({0.1 * i, std::sqrt(i + 1.0), -1.0 * i});
    const VarCov vc = var_cov_estimators(f, cv);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_EQ(vc.var_cv[k], 0.0);
        EXPECT_EQ(vc.cov[k], 0.0);
    }
    const Field mean = {0.1, 1.0 / 3.0, 2.718281828459045};
    const EstimatorResult r = mscv_estimate(f, cv, mean, LambdaMode::optimal);
    const Field mc = mc_estimate(f);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(r.expectation[k], mc[k]);
}

TEST(VarCov, AgreesWithTwoPassFormula) {
    std::mt19937_64 gen(21);
    std::normal_distribution<double> n01;
    std::vector<Field> f, cv;
    for (int i = 0; i < 30; ++i) {
        const double a = 1e3 + n01(gen), b = -5.0 + n01(gen);
        f.push_back({a});
        cv.push_back({b + 0.5 * a});
    }
    double mf = 0, mc = 0;
    for (int i = 0; i < 30; ++i) {
        mf += f[i][0];
        mc += cv[i][0];
    }
    mf /= 30;
    mc /= 30;
    double v = 0, c = 0;
    for (int i = 0; i < 30; ++i) {
        v += (cv[i][0] - mc) * (cv[i][0] - mc);
        c += (f[i][0] - mf) * (cv[i][0] - mc);
    }
    const VarCov vc = var_cov_estimators(f, cv);
    EXPECT_NEAR(vc.var_cv[0], v / 29, 1e-10 * v / 29);
    EXPECT_NEAR(vc.cov[0], c / 29, 1e-10 * std::abs(c / 29));
}
