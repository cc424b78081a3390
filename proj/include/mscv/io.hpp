#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mscv/experiments.hpp"

namespace mscv {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Flat `key = value` text. Blank lines and lines starting with '#' are
/// skipped; anything else without '=' is a ParameterError naming the line.
KeyValues parse_key_values(std::istream& in);
KeyValues read_key_values(const std::filesystem::path& path);

/// Cost constants plus the high-fidelity sample count for `allocate`.
/// Keys: M, c_over_c1, c_over_c2, n_a, n_v, n_x, d_v, d_x; missing keys keep the defaults.
struct CostConfig {
    CostModel cost;
    std::size_t M = 10;
};
CostConfig cost_config_from_pairs(const KeyValues& kv);

/// %.17g: round-trips every double and keeps reruns byte-identical.
std::string format_number(double x);

inline const std::vector<std::string> error_curve_header = {"time", "estimator", "norm_id", "error"};
inline const std::vector<std::string> lambda_field_header = {"time", "x_index", "v1_index", "v2_index", "lambda"};
inline const std::vector<std::string> moments_header = {"time", "x_index", "rho", "ux", "uy", "E", "T", "sigma_T"};

void write_error_curve(std::ostream& os, const ExperimentResult& r);
void write_lambda_field(std::ostream& os, const ExperimentResult& r);
void write_moments(std::ostream& os, const ExperimentResult& r);

/// Version string compiled into the library (project version and git revision when known).
const char* version_string();

/// JSON manifest: resolved config, seed, version, wall time, model label and z hashes.
std::string meta_json(const ExperimentResult& r);

/// Writes config.txt, error_curve.csv, lambda_field.csv, moments.csv and
/// meta.json into `dir`, creating it if needed.
void write_outputs(const std::filesystem::path& dir, const ExperimentResult& r);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;  ///< ShapeError if absent
};

/// Reads a comma-separated file; when `expected_header` is non-empty the
/// header must match it exactly. Ragged rows are a ShapeError.
CsvTable read_csv(const std::filesystem::path& path, const std::vector<std::string>& expected_header = {});

}  // namespace mscv
