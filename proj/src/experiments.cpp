#include "mscv/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numbers>
#include <sstream>

#include "mscv/collision_ops.hpp"
#include "mscv/equilibrium.hpp"
#include "mscv/errors.hpp"
#include "mscv/homogeneous_solver.hpp"

namespace mscv {

namespace {

// Runs fn(i) for i < n over OpenMP threads; the first exception is rethrown.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < n; ++i) {
        try {
            fn(i);
        } catch (...) {
#pragma omp critical(mscv_parallel_error)
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ParameterError("config: '" + key + "' expects a number, got '" + v + "'");
    }
}

long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ParameterError("config: '" + key + "' expects an integer, got '" + v + "'");
    }
}

std::size_t parse_count(const std::string& key, const std::string& v) {
    const long long x = parse_int(key, v);
    if (x < 0) throw ParameterError("config: '" + key + "' must be >= 0");
    return static_cast<std::size_t>(x);
}

std::vector<Variant> parse_variants(const std::string& v) {
    std::vector<Variant> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw ParameterError("config: variant '" + item + "' is not cv:lambda");
        const auto cv = parse_cv_kind(item.substr(0, colon));
        const auto lam = parse_lambda_mode(item.substr(colon + 1));
        if (!cv || !lam) throw ParameterError("config: unknown variant '" + item + "'");
        if (*cv == CvKind::none) continue;
        out.push_back({*cv, *lam});
    }
    return out;
}

const char* to_string(RandomTarget t) {
    switch (t) {
        case RandomTarget::initial_shift: return "initial-shift";
        case RandomTarget::kernel: return "kernel";
        case RandomTarget::wall_temperature: return "wall-temperature";
        case RandomTarget::initial_temperature: return "initial-temperature";
    }
    return "?";
}

bool cv_depends_on_z(const ExperimentConfig& cfg, CvKind kind) {
    if (cfg.input.s == 0.0) return false;
    // Neither the equilibrium nor the Euler system sees the collision kernel.
    if (cfg.input.target == RandomTarget::kernel) return kind == CvKind::bgk;
    return true;
}

std::array<double, 5> cell_moments(std::span<const double> f, const VelocityGrid& vg) {
    const MomentSet m = compute_moments(f, vg);
    return {m.rho, m.u[0], m.u[1], m.E, m.temperature()};
}

std::array<double, 5> cell_moments(const EulerState& U) {
    const MomentSet m = to_moments(U);
    return {m.rho, m.u[0], m.u[1], m.E, m.temperature()};
}

// Per report: per cell (rho, ux, uy, E, T).
using MomentRows = std::vector<std::vector<std::array<double, 5>>>;

struct SolveOut {
    Observable obs;
    MomentRows moments;
};

// Shared, read-only state of a run.
struct Context {
    const ExperimentConfig& cfg;
    VelocityGrid vg;
    TimeGrid tg;
    std::optional<SpectralPlan> plan;

    explicit Context(const ExperimentConfig& c) : cfg(c), vg(c.n_v, c.v_max), tg(time_grid(c)) {
        const bool need_plan = c.homogeneous() || c.kinetic_model == CollisionModel::boltzmann;
        if (need_plan) plan.emplace(vg, c.n_angles);
    }
};

SolveOut kinetic_homogeneous(const Context& ctx, double z) {
    const Field f0 = homogeneous_initial(ctx.cfg, z, ctx.vg);
    const CollisionKernel kernel(kernel_magnitude(ctx.cfg, z));
    const RateFunction rate = boltzmann_rate(kernel, *ctx.plan, SpectralMethod::fast);
    SolveOut out;
    std::size_t next = 0;
    solve_homogeneous_streaming(f0, rate, ctx.tg.dt, ctx.tg.times.back(), [&](long step, double, std::span<const double> f) {
        if (next < ctx.tg.report_steps.size() && step == ctx.tg.report_steps[next]) {
            out.obs.emplace_back(f.begin(), f.end());
            out.moments.push_back({cell_moments(f, ctx.vg)});
            ++next;
        }
    });
    if (out.obs.size() != ctx.tg.report_steps.size()) throw ConsistencyError("homogeneous solve missed a report time");
    return out;
}

Field temperature_profile(const DistributionField& f) {
    Field T(f.xgrid.n());
    for (int i = 0; i < f.xgrid.n(); ++i) T[i] = compute_moments(f.cell(i), f.vgrid).temperature();
    return T;
}

void record(SolveOut& out, const DistributionField& f) {
    out.obs.push_back(temperature_profile(f));
    std::vector<std::array<double, 5>> rows(f.xgrid.n());
    for (int i = 0; i < f.xgrid.n(); ++i) rows[i] = cell_moments(f.cell(i), f.vgrid);
    out.moments.push_back(std::move(rows));
}

void record(SolveOut& out, const ConservedField& U) {
    Field T(U.cells.size());
    std::vector<std::array<double, 5>> rows(U.cells.size());
    for (std::size_t i = 0; i < U.cells.size(); ++i) {
        rows[i] = cell_moments(U.cells[i]);
        T[i] = rows[i][4];
    }
    out.obs.push_back(std::move(T));
    out.moments.push_back(std::move(rows));
}

SolveOut kinetic_slab(const Context& ctx, CollisionModel model, double z, double* max_wall_flux) {
    const KineticSolver solver(model, ctx.cfg.eps, kernel_magnitude(ctx.cfg, z), boundary_for(ctx.cfg, z),
                               model == CollisionModel::boltzmann ? ctx.plan : std::nullopt);
    DistributionField f = inhomogeneous_initial(ctx.cfg, z, ctx.vg);
    SolveOut out;
    record(out, f);
    KineticStepInfo info;
    std::size_t next = 1;
    for (long s = 1; s <= ctx.tg.steps; ++s) {
        f = solver.step(f, ctx.tg.dt, &info);
        if (next < ctx.tg.report_steps.size() && s == ctx.tg.report_steps[next]) {
            record(out, f);
            ++next;
        }
    }
    if (max_wall_flux) *max_wall_flux = info.max_wall_flux;
    return out;
}

SolveOut euler_slab(const Context& ctx, double z) {
    const Boundary bc = boundary_for(ctx.cfg, z);
    const bool walls = bc.left == BoundaryKind::diffusive_wall || bc.right == BoundaryKind::diffusive_wall;
    const EulerSolver solver{bc, walls ? std::optional<VelocityGrid>(ctx.vg) : std::nullopt};
    ConservedField U = moments_of(inhomogeneous_initial(ctx.cfg, z, ctx.vg));
    SolveOut out;
    record(out, U);
    std::size_t next = 1;
    for (long s = 1; s <= ctx.tg.steps; ++s) {
        U = solver.step(U, ctx.tg.dt);
        if (next < ctx.tg.report_steps.size() && s == ctx.tg.report_steps[next]) {
            record(out, U);
            ++next;
        }
    }
    return out;
}

SolveOut solve_kinetic_ctx(const Context& ctx, double z, double* max_wall_flux) {
    if (ctx.cfg.homogeneous()) return kinetic_homogeneous(ctx, z);
    return kinetic_slab(ctx, ctx.cfg.kinetic_model, z, max_wall_flux);
}

Observable homogeneous_cv(const Context& ctx, CvKind kind, double z) {
    const Field f0 = homogeneous_initial(ctx.cfg, z, ctx.vg);
    const Field finf = local_equilibrium(f0, ctx.vg);
    Observable out;
    if (kind == CvKind::equilibrium) {
        out.assign(ctx.tg.times.size(), finf);
        return out;
    }
    const double nu = conserved_sums(f0, ctx.vg)[0] * kernel_magnitude(ctx.cfg, z);
    for (double t : ctx.tg.times) out.push_back(bgk_exact(f0, finf, nu, t));
    return out;
}

Observable solve_cv_ctx(const Context& ctx, CvKind kind, double z) {
    if (ctx.cfg.homogeneous()) {
        if (kind != CvKind::equilibrium && kind != CvKind::bgk)
            throw ParameterError("homogeneous tests take equilibrium or bgk control variates");
        return homogeneous_cv(ctx, kind, z);
    }
    if (kind == CvKind::euler) return euler_slab(ctx, z).obs;
    if (kind == CvKind::bgk) return kinetic_slab(ctx, CollisionModel::bgk, z, nullptr).obs;
    throw ParameterError("space-dependent tests take euler or bgk control variates");
}

void accumulate(Observable& acc, const Observable& x, double w) {
    if (acc.empty()) {
        acc.assign(x.size(), Field());
        for (std::size_t r = 0; r < x.size(); ++r) acc[r].assign(x[r].size(), 0.0);
    }
    for (std::size_t r = 0; r < x.size(); ++r)
        for (std::size_t k = 0; k < x[r].size(); ++k) acc[r][k] += w * x[r][k];
}

// Weighted sums over per-node results, in node order.
Observable weighted_mean(const std::vector<Observable>& per_node, std::span<const double> w) {
    Observable acc;
    for (std::size_t q = 0; q < per_node.size(); ++q) accumulate(acc, per_node[q], w[q]);
    return acc;
}

struct CvMean {
    Observable mean;
    std::size_t n_fine = 0;  // 0 when the mean is collocated
};

CvMean control_variate_mean(const Context& ctx, CvKind kind, std::uint64_t* fine_hash) {
    const ExperimentConfig& cfg = ctx.cfg;
    if (!cv_depends_on_z(cfg, kind)) return {solve_cv_ctx(ctx, kind, 0.5), 0};

    if (cfg.fine_samples == 0) {
        const Quadrature q = gauss_legendre(cfg.cv_mean_nodes);
        std::vector<Observable> nodes(q.nodes.size());
        parallel_for(nodes.size(), [&](std::size_t i) { nodes[i] = solve_cv_ctx(ctx, kind, q.nodes[i]); });
        return {weighted_mean(nodes, q.weights), 0};
    }

    const auto z = sample_z(cfg.fine_samples, cfg.seed, cfg.input.d_z, fine_ensemble_stream);
    if (fine_hash) *fine_hash = hash_samples(z);
    const double w = 1.0 / static_cast<double>(z.size());

    if (cfg.homogeneous() && kind == CvKind::bgk && cfg.input.target == RandomTarget::kernel) {
        // Data do not depend on z, only nu does: mean of the closed form over nu(z).
        const Field f0 = homogeneous_initial(cfg, 0.5, ctx.vg);
        const Field finf = local_equilibrium(f0, ctx.vg);
        const double rho = conserved_sums(f0, ctx.vg)[0];
        std::vector<double> nu(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) nu[i] = rho * kernel_magnitude(cfg, z[i]);
        const double nu_bar = rho * cfg.b0 * (1.0 + 0.5 * cfg.input.s);
        Observable mean;
        for (double t : ctx.tg.times)
            mean.push_back(bgk_random_nu_expectation({f0}, {finf}, nu, nu_bar, f0, finf, t));
        return {mean, z.size()};
    }

    // Running sums in fixed chunks so memory stays O(chunk) and the
    // summation order does not depend on threads.
    constexpr std::size_t chunk = 64;
    Observable acc;
    for (std::size_t start = 0; start < z.size(); start += chunk) {
        const std::size_t n = std::min(chunk, z.size() - start);
        std::vector<Observable> part(n);
        parallel_for(n, [&](std::size_t i) { part[i] = solve_cv_ctx(ctx, kind, z[start + i]); });
        for (const auto& p : part) accumulate(acc, p, w);
    }
    return {acc, z.size()};
}

ReferenceSolution reference_from(const Context& ctx, int n_nodes) {
    if (n_nodes < 1) throw ParameterError("collocation needs at least one node");
    const Quadrature q = gauss_legendre(n_nodes);
    std::vector<SolveOut> nodes(q.nodes.size());
    parallel_for(nodes.size(), [&](std::size_t i) { nodes[i] = solve_kinetic_ctx(ctx, q.nodes[i], nullptr); });

    ReferenceSolution ref;
    std::vector<Observable> obs(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) obs[i] = nodes[i].obs;
    ref.mean = weighted_mean(obs, q.weights);

    const std::size_t n_rep = ctx.tg.times.size();
    ref.moments.resize(n_rep);
    for (std::size_t r = 0; r < n_rep; ++r) {
        const std::size_t cells = nodes[0].moments[r].size();
        ref.moments[r].assign(cells, {0, 0, 0, 0, 0, 0});
        for (std::size_t c = 0; c < cells; ++c) {
            auto& row = ref.moments[r][c];
            double t2 = 0.0;
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                const auto& m = nodes[i].moments[r][c];
                for (int k = 0; k < 5; ++k) row[k] += q.weights[i] * m[k];
                t2 += q.weights[i] * m[4] * m[4];
            }
            row[5] = std::sqrt(std::max(0.0, t2 - row[4] * row[4]));
        }
    }
    return ref;
}

bool data_driven(LambdaMode m) {
    return m == LambdaMode::optimal || m == LambdaMode::optimal_moment || m == LambdaMode::cost_corrected;
}

}  // namespace

const char* to_string(CvKind k) {
    switch (k) {
        case CvKind::none: return "none";
        case CvKind::equilibrium: return "equilibrium";
        case CvKind::bgk: return "bgk";
        case CvKind::euler: return "euler";
    }
    return "?";
}

std::optional<CvKind> parse_cv_kind(std::string_view s) {
    for (CvKind k : {CvKind::none, CvKind::equilibrium, CvKind::bgk, CvKind::euler})
        if (s == to_string(k)) return k;
    return std::nullopt;
}

std::string Variant::label() const {
    if (cv == CvKind::none) return "MC";
    return std::string("MSCV-") + to_string(cv) + "-" + to_string(lambda);
}

void ExperimentConfig::validate() const {
    if (test_id < 1 || test_id > 5) throw ParameterError("unknown test id " + std::to_string(test_id));
    if (n_v < 4 || n_v % 2 != 0) throw ParameterError("n_v must be even and >= 4");
    if (!(v_max > 0.0)) throw ParameterError("v_max must be > 0");
    if (n_angles < 4) throw ParameterError("n_angles must be >= 4");
    if (!(t_final > 0.0)) throw ParameterError("t_final must be > 0");
    if (n_reports < 1) throw ParameterError("reports must be >= 1");
    if (samples < 2) throw ParameterError("samples must be >= 2");
    if (reference_nodes < 1 || cv_mean_nodes < 1) throw ParameterError("collocation node counts must be >= 1");
    input.validate();
    if (homogeneous()) {
        if (!(dt > 0.0)) throw ParameterError("homogeneous tests need dt > 0");
        step_count(dt, t_final);
    } else {
        if (n_x < 7) throw ParameterError("n_x must be >= 7");
        if (!(eps > 0.0)) throw ParameterError("eps must be > 0");
        if (!(length > 0.0)) throw ParameterError("length must be > 0");
        if (dt < 0.0) throw ParameterError("dt must be >= 0");
    }
    for (const auto& v : variants) {
        if (homogeneous() && v.cv == CvKind::euler) throw ParameterError("the euler control variate needs a space-dependent test");
        if (!homogeneous() && v.cv == CvKind::equilibrium)
            throw ParameterError("the equilibrium control variate is for homogeneous tests");
        if (v.lambda == LambdaMode::cost_corrected && fine_samples == 0)
            throw ParameterError("cost-corrected lambda needs fine_samples > 0");
    }
}

ExperimentConfig build_test(int id, Scale scale, const std::vector<std::pair<std::string, std::string>>& overrides) {
    ExperimentConfig c;
    c.test_id = id;
    c.scale = scale;
    const bool paper = scale == Scale::paper;
    switch (id) {
        case 1:
            c.n_v = paper ? 64 : 32;
            c.v_max = 16.0;
            c.dt = 0.05;
            c.t_final = 10.0;
            c.input = {1, RandomTarget::initial_shift, 0.2};
            c.variants = {{CvKind::equilibrium, LambdaMode::one},
                          {CvKind::equilibrium, LambdaMode::optimal},
                          {CvKind::bgk, LambdaMode::optimal}};
            break;
        case 2:
            c.n_v = paper ? 64 : 32;
            c.v_max = 16.0;
            c.dt = 0.05;
            c.t_final = 10.0;
            c.input = {1, RandomTarget::kernel, 0.2};
            c.fine_samples = 100000;
            c.variants = {{CvKind::equilibrium, LambdaMode::optimal}, {CvKind::bgk, LambdaMode::optimal}};
            break;
        case 3:
        case 4:
        case 5:
            c.n_v = paper ? 32 : 16;
            c.v_max = 8.0;
            c.n_x = paper ? 100 : 50;
            c.dt = 0.0;
            c.n_reports = 10;
            c.kinetic_model = paper ? CollisionModel::boltzmann : CollisionModel::bgk;
            c.fine_samples = 1000;
            if (paper)
                c.variants = {{CvKind::euler, LambdaMode::optimal}, {CvKind::bgk, LambdaMode::optimal}};
            else
                c.variants = {{CvKind::euler, LambdaMode::one}, {CvKind::euler, LambdaMode::optimal}};
            if (id == 3) {
                c.eps = 1e-2;
                c.t_final = 0.875;
                c.input = {1, RandomTarget::initial_temperature, 0.25};
            } else if (id == 4) {
                c.eps = 5e-4;
                c.t_final = 0.875;
                c.input = {1, RandomTarget::kernel, 0.99};
                // the BGK equation would make a kernel-driven test trivial: keep Boltzmann
                c.kinetic_model = CollisionModel::boltzmann;
                c.fine_samples = paper ? 1000 : 100;
                c.variants = {{CvKind::euler, LambdaMode::optimal}, {CvKind::bgk, LambdaMode::optimal}};
            } else {
                c.eps = 1e-2;
                c.t_final = 0.9;
                c.input = {1, RandomTarget::wall_temperature, 0.2};
            }
            break;
        default:
            throw ParameterError("unknown test id " + std::to_string(id));
    }
    for (const auto& [k, v] : overrides) apply_override(c, k, v);
    c.validate();
    return c;
}

void apply_override(ExperimentConfig& c, const std::string& key, const std::string& value) {
    if (key == "n_v") c.n_v = static_cast<int>(parse_int(key, value));
    else if (key == "v_max") c.v_max = parse_double(key, value);
    else if (key == "n_angles") c.n_angles = static_cast<int>(parse_int(key, value));
    else if (key == "n_x") c.n_x = static_cast<int>(parse_int(key, value));
    else if (key == "length") c.length = parse_double(key, value);
    else if (key == "eps") c.eps = parse_double(key, value);
    else if (key == "model") {
        if (value == "bgk") c.kinetic_model = CollisionModel::bgk;
        else if (value == "boltzmann") c.kinetic_model = CollisionModel::boltzmann;
        else throw ParameterError("config: model must be bgk or boltzmann");
    } else if (key == "dt") c.dt = parse_double(key, value);
    else if (key == "t_final") c.t_final = parse_double(key, value);
    else if (key == "reports") c.n_reports = static_cast<int>(parse_int(key, value));
    else if (key == "samples") c.samples = parse_count(key, value);
    else if (key == "fine_samples") c.fine_samples = parse_count(key, value);
    else if (key == "variants") c.variants = parse_variants(value);
    else if (key == "cv") {
        const auto k = parse_cv_kind(value);
        if (!k) throw ParameterError("config: unknown control variate '" + value + "'");
        const LambdaMode lam = c.variants.empty() ? LambdaMode::optimal : c.variants.front().lambda;
        c.variants.clear();
        if (*k != CvKind::none) c.variants.push_back({*k, lam});
    } else if (key == "lambda") {
        const auto m = parse_lambda_mode(value);
        if (!m) throw ParameterError("config: unknown lambda mode '" + value + "'");
        for (auto& v : c.variants) v.lambda = *m;
    } else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_count(key, value));
    else if (key == "s") c.input.s = parse_double(key, value);
    else if (key == "rho0") c.rho0 = parse_double(key, value);
    else if (key == "sigma") c.sigma = parse_double(key, value);
    else if (key == "b0") c.b0 = parse_double(key, value);
    else if (key == "wall_T0") c.wall_T0 = parse_double(key, value);
    else if (key == "reference_nodes") c.reference_nodes = static_cast<int>(parse_int(key, value));
    else if (key == "cv_mean_nodes") c.cv_mean_nodes = static_cast<int>(parse_int(key, value));
    else throw ParameterError("config: unknown key '" + key + "'");
    c.overrides.emplace_back(key, value);
}

std::string describe(const ExperimentConfig& c) {
    std::ostringstream os;
    os.precision(17);
    os << "test = " << c.test_id << "\n";
    os << "scale = " << (c.scale == Scale::paper ? "paper" : "desk") << "\n";
    os << "n_v = " << c.n_v << "\nv_max = " << c.v_max << "\nn_angles = " << c.n_angles << "\n";
    if (!c.homogeneous()) {
        os << "n_x = " << c.n_x << "\nlength = " << c.length << "\neps = " << c.eps << "\n";
        os << "model = " << (c.kinetic_model == CollisionModel::bgk ? "bgk" : "boltzmann") << "\n";
    }
    os << "dt = " << c.dt << "\nt_final = " << c.t_final << "\nreports = " << c.n_reports << "\n";
    os << "samples = " << c.samples << "\nfine_samples = " << c.fine_samples << "\n";
    os << "variants = ";
    for (std::size_t i = 0; i < c.variants.size(); ++i)
        os << (i ? "," : "") << to_string(c.variants[i].cv) << ":" << to_string(c.variants[i].lambda);
    os << "\nseed = " << c.seed << "\ns = " << c.input.s << "\n";
    os << "rho0 = " << c.rho0 << "\nsigma = " << c.sigma << "\nb0 = " << c.b0 << "\nwall_T0 = " << c.wall_T0 << "\n";
    os << "reference_nodes = " << c.reference_nodes << "\ncv_mean_nodes = " << c.cv_mean_nodes << "\n";
    return os.str();
}

ExperimentConfig config_from_pairs(const std::vector<std::pair<std::string, std::string>>& kv) {
    int id = 0;
    Scale scale = Scale::desk;
    std::vector<std::pair<std::string, std::string>> rest;
    for (const auto& [k, v] : kv) {
        if (k == "test") id = static_cast<int>(parse_int(k, v));
        else if (k == "scale") {
            if (v == "desk") scale = Scale::desk;
            else if (v == "paper") scale = Scale::paper;
            else throw ParameterError("config: scale must be desk or paper");
        } else rest.emplace_back(k, v);
    }
    if (id == 0) throw ParameterError("config: missing 'test'");
    return build_test(id, scale, rest);
}

std::string model_label(const ExperimentConfig& c) {
    const char* base = c.homogeneous() || c.kinetic_model == CollisionModel::boltzmann ? "boltzmann-fast-spectral" : "bgk";
    std::string s = base;
    if (!c.homogeneous() && c.kinetic_model == CollisionModel::bgk) s += " (stands in for boltzmann)";
    s += "; random input ";
    s += to_string(c.input.target);
    return s;
}

Field homogeneous_initial(const ExperimentConfig& c, double z, const VelocityGrid& grid) {
    Field f(grid.size());
    if (c.test_id == 1) {
        const double shift = c.input.target == RandomTarget::initial_shift ? c.input.s * z : 0.0;
        const double c1 = 2.0 + shift, c2 = 1.0 + shift;
        for (std::size_t k = 0; k < f.size(); ++k) {
            const double a = grid.v1(k), b = grid.v2(k);
            const double d1 = (a - c1) * (a - c1) + (b - c1) * (b - c1);
            const double d2 = (a + c2) * (a + c2) + (b + c2) * (b + c2);
            f[k] = c.rho0 / (2.0 * std::numbers::pi) * (std::exp(-d1 / c.sigma) + std::exp(-d2 / c.sigma));
        }
    } else if (c.test_id == 2) {
        for (std::size_t k = 0; k < f.size(); ++k) {
            const double r2 = grid.speed_squared(k);
            f[k] = r2 * std::exp(-0.5 * r2) / (2.0 * std::numbers::pi * std::numbers::pi);
        }
    } else {
        throw ParameterError("test " + std::to_string(c.test_id) + " is not space homogeneous");
    }
    return f;
}

double kernel_magnitude(const ExperimentConfig& c, double z) {
    return c.input.target == RandomTarget::kernel ? c.b0 * (1.0 + c.input.s * z) : c.b0;
}

DistributionField inhomogeneous_initial(const ExperimentConfig& c, double z, const VelocityGrid& vg) {
    if (c.homogeneous()) throw ParameterError("test " + std::to_string(c.test_id) + " has no space dependence");
    DistributionField f(SpatialGrid1D(c.n_x, c.length), vg);
    if (c.test_id == 5) {
        const Field m = maxwellian({1.0, {0.0, 0.0}, c.wall_T0}, vg);
        for (int i = 0; i < c.n_x; ++i) std::copy(m.begin(), m.end(), f.cell(i).begin());
        return f;
    }
    const double dT = c.input.target == RandomTarget::initial_temperature ? c.input.s * z : 0.0;
    const Field ml = maxwellian({1.0, {0.0, 0.0}, 1.0 + dT}, vg);
    const Field mr = maxwellian({0.125, {0.0, 0.0}, 0.8 + dT}, vg);
    for (int i = 0; i < c.n_x; ++i) {
        const Field& m = f.xgrid.center(i) < 0.5 * c.length ? ml : mr;
        std::copy(m.begin(), m.end(), f.cell(i).begin());
    }
    return f;
}

Boundary boundary_for(const ExperimentConfig& c, double z) {
    if (c.test_id != 5) return Boundary::outflow();
    const double dT = c.input.target == RandomTarget::wall_temperature ? c.input.s * z : 0.0;
    return Boundary::walls(2.0 * (c.wall_T0 + dT), c.wall_T0);
}

TimeGrid time_grid(const ExperimentConfig& c) {
    TimeGrid tg;
    if (c.homogeneous()) {
        tg.dt = c.dt;
        tg.steps = step_count(c.dt, c.t_final);
    } else {
        const SpatialGrid1D xg(c.n_x, c.length);
        const VelocityGrid vg(c.n_v, c.v_max);
        const double rule = c.dt > 0.0 ? c.dt : kinetic_time_step(xg, vg, c.eps);
        tg.steps = std::max(1L, static_cast<long>(std::ceil(c.t_final / rule - 1e-9)));
        tg.dt = c.t_final / static_cast<double>(tg.steps);
    }
    // Evenly spread over the step count; duplicates collapse when steps < reports.
    const long n = std::max(1, c.n_reports);
    for (long k = 0; k <= n; ++k) {
        const long s = (k * tg.steps + n / 2) / n;
        if (tg.report_steps.empty() || s != tg.report_steps.back()) tg.report_steps.push_back(s);
    }
    for (long s : tg.report_steps) tg.times.push_back(s == tg.steps ? c.t_final : static_cast<double>(s) * tg.dt);
    return tg;
}

Observable solve_kinetic(const ExperimentConfig& cfg, double z, const TimeGrid& tg, double* max_wall_flux) {
    cfg.validate();
    Context ctx(cfg);
    ctx.tg = tg;
    return solve_kinetic_ctx(ctx, z, max_wall_flux).obs;
}

Observable solve_control_variate(const ExperimentConfig& cfg, CvKind kind, double z, const TimeGrid& tg) {
    cfg.validate();
    Context ctx(cfg);
    ctx.tg = tg;
    return solve_cv_ctx(ctx, kind, z);
}

ReferenceSolution collocation_reference(const ExperimentConfig& cfg, int n_nodes) {
    cfg.validate();
    const Context ctx(cfg);
    return reference_from(ctx, n_nodes);
}

double collocation_node_change(const ExperimentConfig& cfg, int n_nodes) {
    const ReferenceSolution a = collocation_reference(cfg, n_nodes);
    const ReferenceSolution b = collocation_reference(cfg, 2 * n_nodes);
    double worst = 0.0;
    for (std::size_t r = 0; r < a.mean.size(); ++r) {
        double d = 0.0, n = 0.0;
        for (std::size_t k = 0; k < a.mean[r].size(); ++k) {
            d += std::abs(a.mean[r][k] - b.mean[r][k]);
            n += std::abs(b.mean[r][k]);
        }
        if (n > 0.0) worst = std::max(worst, d / n);
    }
    return worst;
}

double error_norm(const ExperimentConfig& cfg, std::span<const double> a, std::span<const double> b, int p) {
    if (a.size() != b.size()) throw ShapeError("error_norm: sizes differ");
    if (p != 1 && p != 2) throw ParameterError("error_norm: p must be 1 or 2");
    const double w = cfg.homogeneous() ? std::pow(2.0 * cfg.v_max / cfg.n_v, 2) : cfg.length / cfg.n_x;
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = std::abs(a[k] - b[k]);
        acc += p == 1 ? d : d * d;
    }
    acc *= w;
    return p == 1 ? acc : std::sqrt(acc);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    cfg.validate();
    const Context ctx(cfg);
    const std::size_t n_rep = ctx.tg.times.size();

    ExperimentResult res;
    res.config = cfg;
    res.times = ctx.tg.times;

    // Kinetic samples and, for each control variate kind, the paired samples
    // on the very same z values.
    const auto z = sample_z(cfg.samples, cfg.seed, cfg.input.d_z, kinetic_stream);
    res.z_hash = hash_samples(z);
    std::vector<Observable> f(cfg.samples);
    std::vector<double> wall_flux(cfg.samples, 0.0);
    parallel_for(cfg.samples, [&](std::size_t i) { f[i] = solve_kinetic_ctx(ctx, z[i], &wall_flux[i]).obs; });
    res.max_wall_flux = *std::max_element(wall_flux.begin(), wall_flux.end());

    std::vector<CvKind> kinds;
    for (const auto& v : cfg.variants)
        if (std::find(kinds.begin(), kinds.end(), v.cv) == kinds.end()) kinds.push_back(v.cv);
    std::vector<std::vector<Observable>> cv(kinds.size(), std::vector<Observable>(cfg.samples));
    std::vector<CvMean> cv_mean(kinds.size());
    for (std::size_t k = 0; k < kinds.size(); ++k) {
        parallel_for(cfg.samples, [&](std::size_t i) { cv[k][i] = solve_cv_ctx(ctx, kinds[k], z[i]); });
        cv_mean[k] = control_variate_mean(ctx, kinds[k], &res.fine_z_hash);
    }

    const ReferenceSolution ref = reference_from(ctx, cfg.reference_nodes);
    res.reference = ref.mean;

    auto at = [&](const std::vector<Observable>& s, std::size_t r) {
        std::vector<Field> out(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i][r];
        return out;
    };

    res.estimators.push_back({Variant{}, "MC", {}});
    for (const auto& v : cfg.variants) res.estimators.push_back({v, v.label(), {}});
    int lambda_owner = -1;
    for (std::size_t e = 1; e < res.estimators.size(); ++e)
        if (data_driven(res.estimators[e].variant.lambda)) {
            lambda_owner = static_cast<int>(e);
            res.lambda_label = res.estimators[e].label;
        }

    const int n_v = cfg.n_v;
    for (std::size_t r = 0; r < n_rep; ++r) {
        const std::vector<Field> fr = at(f, r);
        res.estimators[0].expectation.push_back(mc_estimate(fr));
        for (std::size_t e = 1; e < res.estimators.size(); ++e) {
            const Variant& v = res.estimators[e].variant;
            const std::size_t k = std::find(kinds.begin(), kinds.end(), v.cv) - kinds.begin();
            const std::vector<Field> cr = at(cv[k], r);
            std::optional<Field> lam_moment;
            if (v.lambda == LambdaMode::optimal_moment) {
                if (cfg.homogeneous()) {
                    // lambda from the temperature of each sample, the same for all v
                    std::vector<Field> tf, tc;
                    for (std::size_t i = 0; i < fr.size(); ++i) {
                        tf.push_back({compute_moments(fr[i], ctx.vg).temperature()});
                        tc.push_back({compute_moments(cr[i], ctx.vg).temperature()});
                    }
                    lam_moment = Field(fr.front().size(), lambda_star(tf, tc)[0]);
                } else {
                    lam_moment = lambda_star(fr, cr);  // the observable already is the temperature
                }
            }
            const EstimatorResult er =
                mscv_estimate(fr, cr, cv_mean[k].mean[r],
                              v.lambda == LambdaMode::optimal_moment ? LambdaMode::optimal_moment : v.lambda,
                              cv_mean[k].n_fine,
                              lam_moment ? std::optional<std::span<const double>>(*lam_moment) : std::nullopt);
            res.estimators[e].expectation.push_back(er.expectation);
            if (static_cast<int>(e) == lambda_owner && er.lambda) {
                const Field& lam = *er.lambda;
                // a moment-based lambda is one number per cell: no velocity index
                const bool per_v = cfg.homogeneous() && v.lambda != LambdaMode::optimal_moment;
                const std::size_t n_rec = cfg.homogeneous() && !per_v ? 1 : lam.size();
                for (std::size_t p = 0; p < n_rec; ++p) {
                    LambdaRecord rec{res.times[r], -1, -1, -1, lam[p], er.var_cv.empty() ? 0.0 : er.var_cv[p]};
                    if (per_v) {
                        rec.v1_index = static_cast<int>(p) / n_v;
                        rec.v2_index = static_cast<int>(p) % n_v;
                    } else if (!cfg.homogeneous()) {
                        rec.x_index = static_cast<int>(p);
                    }
                    res.lambdas.push_back(rec);
                }
            }
        }
        for (const auto& est : res.estimators)
            for (int p : {1, 2})
                res.errors.push_back({res.times[r], est.label, p == 1 ? "L1" : "L2",
                                      error_norm(cfg, est.expectation[r], ref.mean[r], p)});
        for (std::size_t c = 0; c < ref.moments[r].size(); ++c) {
            const auto& m = ref.moments[r][c];
            res.moments.push_back({res.times[r], cfg.homogeneous() ? -1 : static_cast<int>(c), m[0], m[1], m[2], m[3],
                                   m[4], m[5]});
        }
    }
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

}  // namespace mscv
