#include "mscv/uq_core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "mscv/errors.hpp"
#include "mscv/euler1d.hpp"

namespace mscv {

namespace {

constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ULL;

std::uint64_t splitmix64(std::uint64_t z) {
    z += golden;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void check_ensemble(const std::vector<Field>& s, const char* what) {
    if (s.empty()) throw ParameterError(std::string(what) + ": no samples");
    for (const auto& x : s)
        if (x.size() != s.front().size()) throw ShapeError(std::string(what) + ": samples differ in size");
}

void check_pair(const std::vector<Field>& f, const std::vector<Field>& cv, const char* what) {
    check_ensemble(f, what);
    check_ensemble(cv, what);
    if (f.size() != cv.size()) throw ShapeError(std::string(what) + ": ensembles differ in sample count");
    if (f.front().size() != cv.front().size()) throw ShapeError(std::string(what) + ": fields differ in size");
}

}  // namespace

void RandomInput::validate() const {
    if (d_z < 1) throw ParameterError("random input needs d_z >= 1");
    if (!(s >= 0.0)) throw ParameterError("perturbation amplitude must be >= 0");
}

std::vector<double> sample_z(std::size_t M, std::uint64_t seed, int d_z, std::uint64_t stream) {
    if (d_z < 1) throw ParameterError("sample_z needs d_z >= 1");
    const std::uint64_t key = splitmix64(seed ^ splitmix64(stream * golden + 0x632be59bd9b4e019ULL));
    std::vector<double> z(M * static_cast<std::size_t>(d_z));
    for (std::size_t i = 0; i < z.size(); ++i) {
        const std::uint64_t bits = splitmix64(key + i * golden);
        z[i] = (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;  // open interval
    }
    return z;
}

Quadrature gauss_legendre(int n, double a, double b) {
    if (n < 1) throw ParameterError("Gauss-Legendre needs n >= 1");
    Quadrature q;
    q.nodes.resize(n);
    q.weights.resize(n);
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0, p1 = x;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // recompute the derivative at the converged node
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        q.nodes[i] = mid - half * x;
        q.nodes[n - 1 - i] = mid + half * x;
        q.weights[i] = q.weights[n - 1 - i] = half * w;
    }
    return q;
}

Field mc_estimate(const std::vector<Field>& samples) {
    check_ensemble(samples, "mc_estimate");
    Field acc(samples.front().size(), 0.0);
    for (const auto& s : samples)
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += s[k];
    const double M = static_cast<double>(samples.size());
    for (double& a : acc) a /= M;
    return acc;
}

VarCov var_cov_estimators(const std::vector<Field>& f, const std::vector<Field>& cv) {
    check_pair(f, cv, "var_cov_estimators");
    if (f.size() < 2) throw ParameterError("variance estimators need M >= 2 samples");
    // Shifted by the first sample: identical samples give exactly zero, which
    // the lambda guard relies on for deterministic control variates.
    const std::size_t n = f.front().size();
    const Field& f0 = f.front();
    const Field& c0 = cv.front();
    Field sf(n, 0.0), sc(n, 0.0);
    VarCov out{Field(n, 0.0), Field(n, 0.0)};
    for (std::size_t s = 0; s < f.size(); ++s)
        for (std::size_t k = 0; k < n; ++k) {
            const double df = f[s][k] - f0[k], dc = cv[s][k] - c0[k];
            sf[k] += df;
            sc[k] += dc;
            out.var_cv[k] += dc * dc;
            out.cov[k] += df * dc;
        }
    const double M = static_cast<double>(f.size());
    for (std::size_t k = 0; k < n; ++k) {
        out.var_cv[k] = std::max(0.0, (out.var_cv[k] - sc[k] * sc[k] / M) / (M - 1.0));
        out.cov[k] = (out.cov[k] - sf[k] * sc[k] / M) / (M - 1.0);
    }
    return out;
}

Field lambda_from(const VarCov& vc, double rel_delta) {
    const double vmax = vc.var_cv.empty() ? 0.0 : *std::max_element(vc.var_cv.begin(), vc.var_cv.end());
    const double delta = rel_delta * vmax;
    Field lam(vc.var_cv.size(), 0.0);
    for (std::size_t k = 0; k < lam.size(); ++k)
        if (vc.var_cv[k] > 0.0) lam[k] = vc.cov[k] / (vc.var_cv[k] + delta);
    return lam;
}

Field lambda_star(const std::vector<Field>& f, const std::vector<Field>& cv, double rel_delta) {
    return lambda_from(var_cov_estimators(f, cv), rel_delta);
}

std::vector<Field> temperature_samples(const std::vector<DistributionField>& samples) {
    std::vector<Field> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        const ConservedField U = moments_of(s);
        Field T(U.cells.size());
        for (std::size_t i = 0; i < T.size(); ++i) T[i] = to_moments(U.cells[i]).temperature();
        out.push_back(std::move(T));
    }
    return out;
}

Field lambda_star_moment(const std::vector<DistributionField>& f, const std::vector<DistributionField>& cv) {
    return lambda_star(temperature_samples(f), temperature_samples(cv));
}

Field lambda_cost_corrected(std::span<const double> lambda, std::size_t M, std::size_t n_fine) {
    if (M < 1 || n_fine < 1) throw ParameterError("cost correction needs M, n_fine >= 1");
    const double c = static_cast<double>(n_fine) / static_cast<double>(M + n_fine);
    Field out(lambda.begin(), lambda.end());
    for (double& l : out) l *= c;
    return out;
}

const char* to_string(LambdaMode m) {
    switch (m) {
        case LambdaMode::zero: return "zero";
        case LambdaMode::one: return "one";
        case LambdaMode::optimal: return "optimal";
        case LambdaMode::optimal_moment: return "optimal-moment";
        case LambdaMode::cost_corrected: return "cost-corrected";
    }
    return "?";
}

std::optional<LambdaMode> parse_lambda_mode(std::string_view s) {
    for (LambdaMode m : {LambdaMode::zero, LambdaMode::one, LambdaMode::optimal, LambdaMode::optimal_moment,
                         LambdaMode::cost_corrected})
        if (s == to_string(m)) return m;
    return std::nullopt;
}

EstimatorResult mscv_estimate(const std::vector<Field>& f, const std::vector<Field>& cv, std::span<const double> cv_mean,
                              LambdaMode mode, std::size_t n_fine, std::optional<std::span<const double>> lambda_override) {
    EstimatorResult r;
    r.M = f.size();
    r.n_fine = n_fine;
    r.mode = mode;
    if (mode == LambdaMode::zero) {
        check_ensemble(f, "mscv_estimate");
        r.expectation = mc_estimate(f);
        return r;
    }
    check_pair(f, cv, "mscv_estimate");
    const std::size_t n = f.front().size();
    if (cv_mean.size() != n) throw ShapeError("mscv_estimate: control-variate mean has the wrong size");

    if (mode == LambdaMode::one) {
        // micro-macro form: <cv> + E_M[f - cv]
        std::vector<Field> g(f.size(), Field(n));
        for (std::size_t s = 0; s < f.size(); ++s)
            for (std::size_t k = 0; k < n; ++k) g[s][k] = f[s][k] - cv[s][k];
        r.expectation = mc_estimate(g);
        for (std::size_t k = 0; k < n; ++k) r.expectation[k] = cv_mean[k] + r.expectation[k];
        r.lambda = Field(n, 1.0);
        return r;
    }

    Field lam;
    if (f.size() >= 2) {
        const VarCov vc = var_cov_estimators(f, cv);
        r.var_cv = vc.var_cv;
        r.cov = vc.cov;
        lam = lambda_from(vc);
    } else {
        lam.assign(n, 0.0);
    }
    if (mode == LambdaMode::optimal_moment) {
        if (!lambda_override) throw ParameterError("moment-based lambda must be supplied by the caller");
        if (lambda_override->size() != n) throw ShapeError("mscv_estimate: lambda field has the wrong size");
        lam.assign(lambda_override->begin(), lambda_override->end());
    } else if (lambda_override) {
        throw ParameterError("a lambda field is only accepted in optimal-moment mode");
    }
    if (mode == LambdaMode::cost_corrected) {
        if (n_fine == 0) throw ParameterError("cost-corrected lambda needs a finite control-variate ensemble");
        lam = lambda_cost_corrected(lam, f.size(), n_fine);
    }
    const Field ef = mc_estimate(f), ec = mc_estimate(cv);
    r.expectation.resize(n);
    for (std::size_t k = 0; k < n; ++k) r.expectation[k] = ef[k] - lam[k] * (ec[k] - cv_mean[k]);
    r.lambda = std::move(lam);
    return r;
}

EstimatorResult mscv_estimate_field(const TaggedSamples& f, const TaggedSamples& cv, const TaggedSamples& cv_fine,
                                    LambdaMode mode, std::optional<std::span<const double>> lambda_override) {
    if (f.z.size() != cv.z.size() || !std::equal(f.z.begin(), f.z.end(), cv.z.begin()))
        throw ContractError("control-variate samples must reuse the kinetic random inputs");
    if (cv_fine.values.empty()) throw ParameterError("the fine control-variate ensemble is empty");
    // The fine ensemble must be independent; sharing a leading block of inputs is
    // the usual way this goes wrong (same stream).
    if (!f.z.empty() && cv_fine.z.size() >= f.z.size() && std::equal(f.z.begin(), f.z.end(), cv_fine.z.begin()))
        throw ContractError("the fine control-variate ensemble reuses the kinetic random inputs");
    const Field fine_mean = mc_estimate(cv_fine.values);
    return mscv_estimate(f.values, cv.values, fine_mean, mode, cv_fine.values.size(), lambda_override);
}

void CostModel::validate() const {
    if (!(c_over_c1 > 0.0) || !(c_over_c2 > 0.0)) throw ParameterError("cost ratios must be positive");
    if (n_a < 1 || n_v < 1 || n_x < 1 || d_v < 1 || d_x < 1)
        throw ParameterError("cost model counts must be positive");
}

Allocation allocate_samples(const CostModel& c, std::size_t M) {
    c.validate();
    const double log_nv = static_cast<double>(c.d_v) * std::log2(static_cast<double>(c.n_v));
    const double angles = std::pow(static_cast<double>(c.n_a), c.d_v - 1);
    const double nv_total = std::pow(static_cast<double>(c.n_v), c.d_v);
    const double e1 = static_cast<double>(M) * c.c_over_c1 * angles * log_nv;
    const double e2 = static_cast<double>(M) * c.c_over_c2 * angles * nv_total * log_nv;
    // rounded down; the relative nudge keeps exact products from landing one below
    auto down = [](double x) { return static_cast<std::size_t>(std::floor(x * (1.0 + 1e-12))); };
    return {down(e1), down(e2)};
}

VarianceReduction variance_reduction_report(std::span<const double> f, std::span<const double> cv) {
    if (f.size() != cv.size()) throw ShapeError("variance_reduction_report: sizes differ");
    if (f.size() < 2) throw ParameterError("variance_reduction_report needs M >= 2");
    const double M = static_cast<double>(f.size());
    double mf = 0.0, mc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        mf += f[i];
        mc += cv[i];
    }
    mf /= M;
    mc /= M;
    double vf = 0.0, vc = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        vf += (f[i] - mf) * (f[i] - mf);
        vc += (cv[i] - mc) * (cv[i] - mc);
        cov += (f[i] - mf) * (cv[i] - mc);
    }
    VarianceReduction r;
    if (vf == 0.0 || vc == 0.0) return r;
    const double rho = cov / std::sqrt(vf * vc);
    r.rho = rho;
    r.predicted = 1.0 - rho * rho;
    const double lam = cov / vc;
    double mres = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) mres += f[i] - lam * (cv[i] - mc);
    mres /= M;
    double vres = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double d = f[i] - lam * (cv[i] - mc) - mres;
        vres += d * d;
    }
    r.observed = vres / vf;
    return r;
}

std::uint64_t hash_samples(std::span<const double> z) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double x : z) {
        const auto bits = std::bit_cast<std::uint64_t>(x);
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

}  // namespace mscv
