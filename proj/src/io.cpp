#include "mscv/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mscv/errors.hpp"

#ifndef MSCV_VERSION
#define MSCV_VERSION "unknown"
#endif

namespace mscv {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

void write_row(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw Error("cannot open " + p.string() + " for writing");
    os << text;
    if (!os) throw Error("write failed: " + p.string());
}

}  // namespace

KeyValues parse_key_values(std::istream& in) {
    KeyValues kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ParameterError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw ParameterError("config line " + std::to_string(lineno) + ": empty key");
        kv.emplace_back(std::move(key), std::move(value));
    }
    return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot read config file " + path.string());
    return parse_key_values(in);
}

namespace {

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw ParameterError("cost config: " + key + " is not a number: '" + v + "'");
    return x;
}

long to_long(const std::string& key, const std::string& v) {
    const double x = to_double(key, v);
    if (x != std::floor(x) || x < 0) throw ParameterError("cost config: " + key + " must be a non-negative integer");
    return static_cast<long>(x);
}

}  // namespace

CostConfig cost_config_from_pairs(const KeyValues& kv) {
    CostConfig c;
    for (const auto& [k, v] : kv) {
        if (k == "M") c.M = static_cast<std::size_t>(to_long(k, v));
        else if (k == "c_over_c1") c.cost.c_over_c1 = to_double(k, v);
        else if (k == "c_over_c2") c.cost.c_over_c2 = to_double(k, v);
        else if (k == "n_a") c.cost.n_a = static_cast<int>(to_long(k, v));
        else if (k == "n_v") c.cost.n_v = static_cast<int>(to_long(k, v));
        else if (k == "n_x") c.cost.n_x = static_cast<int>(to_long(k, v));
        else if (k == "d_v") c.cost.d_v = static_cast<int>(to_long(k, v));
        else if (k == "d_x") c.cost.d_x = static_cast<int>(to_long(k, v));
        else throw ParameterError("cost config: unknown key '" + k + "'");
    }
    c.cost.validate();
    if (c.M == 0) throw ParameterError("cost config: M must be positive");
    return c;
}

std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_error_curve(std::ostream& os, const ExperimentResult& r) {
    write_row(os, error_curve_header);
    for (const ErrorPoint& e : r.errors)
        write_row(os, {format_number(e.time), e.estimator, e.norm, format_number(e.error)});
}

void write_lambda_field(std::ostream& os, const ExperimentResult& r) {
    write_row(os, lambda_field_header);
    for (const LambdaRecord& l : r.lambdas)
        write_row(os, {format_number(l.time), std::to_string(l.x_index), std::to_string(l.v1_index),
                       std::to_string(l.v2_index), format_number(l.lambda)});
}

void write_moments(std::ostream& os, const ExperimentResult& r) {
    write_row(os, moments_header);
    for (const MomentRecord& m : r.moments)
        write_row(os, {format_number(m.time), std::to_string(m.x_index), format_number(m.rho), format_number(m.ux),
                       format_number(m.uy), format_number(m.E), format_number(m.T), format_number(m.sigma_T)});
}

const char* version_string() { return MSCV_VERSION; }

std::string meta_json(const ExperimentResult& r) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
    std::istringstream echo(describe(r.config));
    for (const auto& [k, v] : parse_key_values(echo)) cfg[k] = v;
    j["config"] = cfg;
    j["seed"] = r.config.seed;
    j["version"] = version_string();
    j["wall_seconds"] = r.wall_seconds;
    j["kinetic_model"] = model_label(r.config);
    j["lambda_field_estimator"] = r.lambda_label;
    j["z_hash"] = r.z_hash;
    j["fine_z_hash"] = r.fine_z_hash;
    j["max_wall_flux"] = r.max_wall_flux;
    nlohmann::ordered_json est = nlohmann::ordered_json::array();
    for (const auto& s : r.estimators) est.push_back(s.label);
    j["estimators"] = est;
    return j.dump(2) + "\n";
}

void write_outputs(const std::filesystem::path& dir, const ExperimentResult& r) {
    std::filesystem::create_directories(dir);
    write_file(dir / "config.txt", describe(r.config));
    std::ostringstream a, b, c;
    write_error_curve(a, r);
    write_lambda_field(b, r);
    write_moments(c, r);
    write_file(dir / "error_curve.csv", a.str());
    write_file(dir / "lambda_field.csv", b.str());
    write_file(dir / "moments.csv", c.str());
    write_file(dir / "meta.json", meta_json(r));
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw ShapeError("csv: no column '" + name + "'");
}

CsvTable read_csv(const std::filesystem::path& path, const std::vector<std::string>& expected_header) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path.string());
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw ShapeError("csv: " + path.string() + " has no header row");
    t.header = split_commas(line);
    if (!expected_header.empty() && t.header != expected_header)
        throw ShapeError("csv: unexpected header in " + path.string());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto row = split_commas(line);
        if (row.size() != t.header.size())
            throw ShapeError("csv: ragged row " + std::to_string(t.rows.size() + 1) + " in " + path.string());
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace mscv
