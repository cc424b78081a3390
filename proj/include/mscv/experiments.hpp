#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <string>
#include <utility>
#include <vector>

#include "mscv/euler1d.hpp"
#include "mscv/kinetic1d.hpp"
#include "mscv/phase_grid.hpp"
#include "mscv/uq_core.hpp"

namespace mscv {

enum class CvKind { none, equilibrium, bgk, euler };

const char* to_string(CvKind k);
std::optional<CvKind> parse_cv_kind(std::string_view s);

enum class Scale { desk, paper };

/// One estimator to run next to plain MC on the same samples.
struct Variant {
    CvKind cv = CvKind::none;
    LambdaMode lambda = LambdaMode::zero;

    std::string label() const;  ///< "MC" or "MSCV-<cv>-<lambda>"
};

/// Everything that determines a run, together with the seed.
///
/// Tests 1-2 are space homogeneous (velocity grid only); tests 3-5 add a
/// slab [0, length] with n_x cells and Knudsen number eps.
struct ExperimentConfig {
    int test_id = 1;
    Scale scale = Scale::desk;

    int n_v = 32;  ///< points per velocity dimension
    double v_max = 16.0;
    int n_angles = 8;

    int n_x = 0;
    double length = 1.0;
    double eps = 0.0;
    CollisionModel kinetic_model = CollisionModel::boltzmann;

    double dt = 0.05;  ///< homogeneous step; tests 3-5: 0 selects min(dx / (2 v_max), eps)
    double t_final = 10.0;
    int n_reports = 20;

    std::size_t samples = 10;       ///< M
    std::size_t fine_samples = 0;   ///< independent control-variate samples; 0: collocated mean
    std::vector<Variant> variants;  ///< MC is always run as well
    std::uint64_t seed = 0;

    RandomInput input;
    double rho0 = 0.125;  ///< test 1 bump weight
    double sigma = 0.5;   ///< test 1 bump width
    double b0 = 1.0;      ///< kernel magnitude before perturbation
    double wall_T0 = 1.0;  ///< test 5 reference temperature

    int reference_nodes = 16;  ///< collocation nodes for the reference solution
    int cv_mean_nodes = 32;    ///< collocation nodes for exact control-variate means

    std::vector<std::pair<std::string, std::string>> overrides;  ///< in the order applied

    bool homogeneous() const { return test_id <= 2; }
    void validate() const;
};

/// Defaults for tests 1-5 at the given scale, then `overrides` (key, value)
/// applied in order. Throws ParameterError for an unknown id or key.
ExperimentConfig build_test(int id, Scale scale = Scale::desk,
                            const std::vector<std::pair<std::string, std::string>>& overrides = {});

/// Set one key; the pair is appended to cfg.overrides.
void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// key = value lines that build_test + apply_override read back to the same config.
std::string describe(const ExperimentConfig& cfg);

/// Config from key/value pairs: `test` and `scale` select the defaults, the
/// remaining keys are applied as overrides in order.
ExperimentConfig config_from_pairs(const std::vector<std::pair<std::string, std::string>>& kv);

/// Short name of the kinetic model, flagged when it stands in for Boltzmann.
std::string model_label(const ExperimentConfig& cfg);

// Problem data as functions of the random input z.
Field homogeneous_initial(const ExperimentConfig& cfg, double z, const VelocityGrid& grid);
double kernel_magnitude(const ExperimentConfig& cfg, double z);
DistributionField inhomogeneous_initial(const ExperimentConfig& cfg, double z, const VelocityGrid& vg);
Boundary boundary_for(const ExperimentConfig& cfg, double z);

/// Steps and report steps shared by every model of a run.
struct TimeGrid {
    double dt = 0.0;
    long steps = 0;
    std::vector<long> report_steps;  ///< increasing, starts at 0 and ends at steps
    std::vector<double> times;
};
TimeGrid time_grid(const ExperimentConfig& cfg);

/// The quantity whose expectation is estimated at each report time: the full
/// distribution (homogeneous) or the temperature profile (tests 3-5).
using Observable = std::vector<Field>;  ///< [report]

/// Deterministic solve of the configured kinetic model at one z. `max_wall_flux`
/// receives the largest wall mass flux seen (tests with walls).
Observable solve_kinetic(const ExperimentConfig& cfg, double z, const TimeGrid& tg, double* max_wall_flux = nullptr);

/// Control variate at one z for the given kind, on the same report times.
Observable solve_control_variate(const ExperimentConfig& cfg, CvKind kind, double z, const TimeGrid& tg);

struct ReferenceSolution {
    std::vector<Field> mean;  ///< [report] E[observable]
    /// per report, per cell (one row in the homogeneous case): E of rho, ux, uy, E, T and sigma_T
    std::vector<std::vector<std::array<double, 6>>> moments;
};

/// Gauss-Legendre collocation in z with n_nodes deterministic solves.
ReferenceSolution collocation_reference(const ExperimentConfig& cfg, int n_nodes);

/// Largest relative L1 change of the reference mean between n and 2n nodes,
/// the reference's own error bar.
double collocation_node_change(const ExperimentConfig& cfg, int n_nodes);

struct ErrorPoint {
    double time;
    std::string estimator;
    std::string norm;
    double error;
};

struct LambdaRecord {
    double time;
    int x_index;  ///< -1 for homogeneous runs
    int v1_index;  ///< -1 when lambda does not depend on v
    int v2_index;
    double lambda;
    double var_cv;  ///< Var_M of the control variate at that point (not written to CSV)
};

struct MomentRecord {
    double time;
    int x_index;
    double rho, ux, uy, E, T, sigma_T;
};

struct EstimatorSeries {
    Variant variant;
    std::string label;
    std::vector<Field> expectation;  ///< [report]
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<double> times;
    std::vector<EstimatorSeries> estimators;  ///< estimators[0] is MC
    std::vector<Field> reference;             ///< [report]
    std::vector<ErrorPoint> errors;
    std::vector<LambdaRecord> lambdas;  ///< of the last variant with a data-driven lambda
    std::string lambda_label;
    std::vector<MomentRecord> moments;  ///< collocation reference: expectation and sigma_T
    std::uint64_t z_hash = 0;
    std::uint64_t fine_z_hash = 0;
    double max_wall_flux = 0.0;
    double wall_seconds = 0.0;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Error norms used for the curves: "L1" and "L2" over velocity (homogeneous)
/// or space (temperature profiles).
double error_norm(const ExperimentConfig& cfg, std::span<const double> a, std::span<const double> b, int p);

}  // namespace mscv
