#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mscv/phase_grid.hpp"

namespace mscv {

/// Which model parameter the random input z perturbs.
enum class RandomTarget {
    initial_shift,        ///< bump centres moved by s z
    kernel,               ///< b0 = 1 + s z
    wall_temperature,     ///< T_w = 2 (T0 + s z)
    initial_temperature,  ///< T0(z, x) = T0(x) + s z
};

/// z uniform on [0, 1]^d_z perturbing one parameter with amplitude s.
struct RandomInput {
    int d_z = 1;
    RandomTarget target = RandomTarget::initial_shift;
    double s = 0.0;

    void validate() const;
};

/// Reproducible uniform samples in (0, 1)^d_z, row-major (sample, component).
/// Counter-based: sample i of (seed, stream) is a pure function of the three,
/// so it does not depend on M, on platform or on evaluation order.
std::vector<double> sample_z(std::size_t M, std::uint64_t seed, int d_z = 1, std::uint64_t stream = 0);

/// Stream ids used by the experiment drivers. The paired control-variate
/// samples reuse the kinetic stream; the fine ensemble must not.
inline constexpr std::uint64_t kinetic_stream = 0;
inline constexpr std::uint64_t fine_ensemble_stream = 1;

struct Quadrature {
    std::vector<double> nodes;
    std::vector<double> weights;  ///< sum to b - a
};

/// n-point Gauss-Legendre rule on [a, b].
Quadrature gauss_legendre(int n, double a = 0.0, double b = 1.0);

/// Sample mean, accumulated in index order then divided by M.
Field mc_estimate(const std::vector<Field>& samples);

struct VarCov {
    Field var_cv;  ///< unbiased variance of the control variate
    Field cov;     ///< unbiased covariance of f and the control variate
};

/// Pointwise 1/(M-1) estimators; needs M >= 2 paired samples.
VarCov var_cov_estimators(const std::vector<Field>& f, const std::vector<Field>& cv);

/// Cov / (Var + delta) with delta = rel_delta * max(Var); 0 where Var = 0.
Field lambda_from(const VarCov& vc, double rel_delta = 1e-14);

Field lambda_star(const std::vector<Field>& f, const std::vector<Field>& cv, double rel_delta = 1e-14);

/// Per-cell temperature of each sample, the moment used for lambda(x).
std::vector<Field> temperature_samples(const std::vector<DistributionField>& samples);

/// lambda(x) from the covariance of a chosen moment (default temperature).
Field lambda_star_moment(const std::vector<DistributionField>& f, const std::vector<DistributionField>& cv);

/// n_fine / (M + n_fine) * lambda
Field lambda_cost_corrected(std::span<const double> lambda, std::size_t M, std::size_t n_fine);

enum class LambdaMode { zero, one, optimal, optimal_moment, cost_corrected };

const char* to_string(LambdaMode m);
std::optional<LambdaMode> parse_lambda_mode(std::string_view s);

struct EstimatorResult {
    Field expectation;
    std::optional<Field> lambda;  ///< absent for LambdaMode::zero
    Field var_cv;                 ///< empty for LambdaMode::zero / one
    Field cov;
    std::size_t M = 0;
    std::size_t n_fine = 0;  ///< 0: the control-variate mean is exact
    LambdaMode mode = LambdaMode::zero;
};

/// E_M[f] - lambda (E_M[cv] - cv_mean).
///
/// zero returns mc_estimate(f) untouched; one is evaluated as the
/// micro-macro form cv_mean + E_M[f - cv]. For optimal_moment the caller
/// passes the per-point lambda (lambda(x) expanded over the field); for
/// cost_corrected, n_fine > 0 is required.
EstimatorResult mscv_estimate(const std::vector<Field>& f, const std::vector<Field>& cv, std::span<const double> cv_mean,
                              LambdaMode mode, std::size_t n_fine = 0,
                              std::optional<std::span<const double>> lambda_override = std::nullopt);

/// Homogeneous form: the control-variate mean is known exactly.
inline EstimatorResult mscv_estimate_homogeneous(const std::vector<Field>& f, const std::vector<Field>& cv,
                                                 std::span<const double> cv_mean, LambdaMode mode) {
    return mscv_estimate(f, cv, cv_mean, mode);
}

/// Samples of one model tagged with the random inputs that produced them.
struct TaggedSamples {
    std::vector<double> z;  ///< M * d_z values
    std::vector<Field> values;
};

/// Field form: M kinetic samples, the M paired control-variate samples (same
/// z), and an independent fine ensemble of n_fine control-variate samples.
/// Throws ContractError if the pairing is broken or the fine ensemble reuses
/// the kinetic inputs.
EstimatorResult mscv_estimate_field(const TaggedSamples& f, const TaggedSamples& cv, const TaggedSamples& cv_fine,
                                    LambdaMode mode,
                                    std::optional<std::span<const double>> lambda_override = std::nullopt);

struct CostModel {
    double c_over_c1 = 1.25;  ///< Boltzmann / BGK cost constants
    double c_over_c2 = 1.0;   ///< Boltzmann / Euler cost constants
    int n_a = 8;
    int n_v = 32;  ///< points per velocity dimension
    int n_x = 100;
    int d_v = 2;
    int d_x = 1;

    void validate() const;
};

struct Allocation {
    std::size_t m_bgk = 0;    ///< M_E1
    std::size_t m_euler = 0;  ///< M_E2
};

/// Equal-cost sample counts for the BGK and Euler control variates.
Allocation allocate_samples(const CostModel& cost, std::size_t M);

struct VarianceReduction {
    std::optional<double> rho;  ///< correlation; absent if a variance vanishes
    double predicted = 1.0;     ///< 1 - rho^2
    double observed = 1.0;      ///< Var(f - lambda* (cv - mean cv)) / Var(f)
};

VarianceReduction variance_reduction_report(std::span<const double> f, std::span<const double> cv);

/// FNV-1a over the bit patterns of z, for checking that two runs shared inputs.
std::uint64_t hash_samples(std::span<const double> z);

}  // namespace mscv
