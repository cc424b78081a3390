#include "mscv/collision_ops.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <string>

#include "mscv/equilibrium.hpp"
#include "mscv/errors.hpp"

namespace mscv {

namespace {

using cplx = std::complex<double>;

// FFTW planning is not thread safe; execution with the new-array API is.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

int wrap(int k, int m) { return k < 0 ? k + m : k; }

}  // namespace

CollisionKernel::CollisionKernel(double magnitude) : b0(magnitude) {
    if (!(magnitude > 0.0) || !std::isfinite(magnitude))
        throw ParameterError("collision kernel magnitude must be > 0, got " + std::to_string(magnitude));
}

struct SpectralPlan::Impl {
    VelocityGrid grid;
    int n_angles;
    int n;       // modes per dimension, k in [-n/2, n/2)
    int N;       // padded grid, 2n
    double S;    // support radius
    double xi;   // pi / v_max
    double cut;  // collision truncation, 2S

    // Cell-centre phase factors per 1-D mode (index k + n/2).
    std::vector<cplx> ana_n, syn_n, ana_N, syn_N;
    // Fast method: per-angle separable factors [p * n^2 + mode], already
    // divided by n_angles, and the matching loss modes.
    std::vector<double> gain_a, gain_b, loss_fast;
    // Direct method: J0/J1 at a * xi * sqrt(s) / 2 for integer s = |k|^2.
    std::vector<double> j0_tab, j1_tab, arg_tab;

    fftw_plan fwd_n = nullptr, bwd_n = nullptr, fwd_N = nullptr, bwd_N = nullptr;

    Impl(const VelocityGrid& g, int angles);
    ~Impl();
    Impl(const Impl&) = delete;
    Impl& operator=(const Impl&) = delete;

    std::size_t modes() const { return static_cast<std::size_t>(n) * n; }
    void analyze(std::span<const double> f, std::vector<cplx>& coeffs) const;
    void synthesize_padded(const std::vector<cplx>& coeffs, const double* mult, std::vector<cplx>& out) const;
    void analyze_padded(std::vector<cplx>& values, std::vector<cplx>& coeffs) const;
    Field synthesize(const std::vector<cplx>& coeffs) const;
    double direct_weight(int l1, int l2, int m1, int m2) const;
};

SpectralPlan::Impl::Impl(const VelocityGrid& g, int angles)
    : grid(g), n_angles(angles), n(g.n()), N(2 * g.n()) {
    if (n < 4 || n % 2 != 0) throw ParameterError("spectral plan needs an even n_per_dim >= 4");
    if (angles < 4) throw ParameterError("spectral plan needs n_angles >= 4");
    S = support_ratio() * g.v_max();
    xi = std::numbers::pi / g.v_max();
    cut = 2.0 * S;

    const int h = n / 2;
    auto phases = [&](int size, double sign) {
        std::vector<cplx> out(n);
        for (int k = -h; k < h; ++k)
            out[k + h] = std::polar(1.0, sign * std::numbers::pi * k * (1.0 - 1.0 / size));
        return out;
    };
    ana_n = phases(n, 1.0);
    syn_n = phases(n, -1.0);
    ana_N = phases(N, 1.0);
    syn_N = phases(N, -1.0);

    // phi(s) = int_{-cut}^{cut} exp(i xi t s) dt
    auto phi = [&](double s) { return 2.0 * cut * sinc(xi * cut * s); };
    const std::size_t nm = modes();
    gain_a.assign(nm * angles, 0.0);
    gain_b.assign(nm * angles, 0.0);
    loss_fast.assign(nm, 0.0);
    for (int p = 0; p < angles; ++p) {
        const double th = std::numbers::pi * p / angles;
        const double c = std::cos(th), s = std::sin(th);
        for (int q1 = 0; q1 < n; ++q1)
            for (int q2 = 0; q2 < n; ++q2) {
                const double k1 = q1 - h, k2 = q2 - h;
                const double a = phi(k1 * c + k2 * s);
                const double b = phi(-k1 * s + k2 * c);
                const std::size_t q = static_cast<std::size_t>(q1) * n + q2;
                gain_a[p * nm + q] = a / angles;
                gain_b[p * nm + q] = b;
                loss_fast[q] += a * b / angles;
            }
    }

    const int smax = 2 * n * n;
    j0_tab.resize(smax + 1);
    j1_tab.resize(smax + 1);
    arg_tab.resize(smax + 1);
    for (int s = 0; s <= smax; ++s) {
        const double alpha = 0.5 * xi * std::sqrt(static_cast<double>(s));
        arg_tab[s] = alpha;
        j0_tab[s] = std::cyl_bessel_j(0.0, alpha * cut);
        j1_tab[s] = std::cyl_bessel_j(1.0, alpha * cut);
    }

    std::vector<cplx> small(nm), big(static_cast<std::size_t>(N) * N);
    std::lock_guard lock(fftw_planner_mutex());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fwd_n = fftw_plan_dft_2d(n, n, as_fftw(small.data()), as_fftw(small.data()), FFTW_FORWARD, flags);
    bwd_n = fftw_plan_dft_2d(n, n, as_fftw(small.data()), as_fftw(small.data()), FFTW_BACKWARD, flags);
    fwd_N = fftw_plan_dft_2d(N, N, as_fftw(big.data()), as_fftw(big.data()), FFTW_FORWARD, flags);
    bwd_N = fftw_plan_dft_2d(N, N, as_fftw(big.data()), as_fftw(big.data()), FFTW_BACKWARD, flags);
    if (!fwd_n || !bwd_n || !fwd_N || !bwd_N) throw NumericalError("FFTW plan creation failed");
}

SpectralPlan::Impl::~Impl() {
    std::lock_guard lock(fftw_planner_mutex());
    for (fftw_plan p : {fwd_n, bwd_n, fwd_N, bwd_N})
        if (p) fftw_destroy_plan(p);
}

// c_k = n^-2 sum_j f_j exp(-i xi k.v_j)
void SpectralPlan::Impl::analyze(std::span<const double> f, std::vector<cplx>& coeffs) const {
    std::vector<cplx> buf(f.begin(), f.end());
    fftw_execute_dft(fwd_n, as_fftw(buf.data()), as_fftw(buf.data()));
    coeffs.resize(modes());
    const int h = n / 2;
    const double norm = 1.0 / (static_cast<double>(n) * n);
    for (int q1 = 0; q1 < n; ++q1)
        for (int q2 = 0; q2 < n; ++q2)
            coeffs[static_cast<std::size_t>(q1) * n + q2] =
                buf[static_cast<std::size_t>(wrap(q1 - h, n)) * n + wrap(q2 - h, n)] * ana_n[q1] * ana_n[q2] * norm;
}

// out(w_j) = sum_k mult_k c_k exp(i xi k.w_j) on the 2n grid
void SpectralPlan::Impl::synthesize_padded(const std::vector<cplx>& coeffs, const double* mult,
                                           std::vector<cplx>& out) const {
    out.assign(static_cast<std::size_t>(N) * N, cplx(0.0));
    const int h = n / 2;
    for (int q1 = 0; q1 < n; ++q1)
        for (int q2 = 0; q2 < n; ++q2) {
            const std::size_t q = static_cast<std::size_t>(q1) * n + q2;
            const double m = mult ? mult[q] : 1.0;
            out[static_cast<std::size_t>(wrap(q1 - h, N)) * N + wrap(q2 - h, N)] =
                coeffs[q] * syn_N[q1] * syn_N[q2] * m;
        }
    fftw_execute_dft(bwd_N, as_fftw(out.data()), as_fftw(out.data()));
}

void SpectralPlan::Impl::analyze_padded(std::vector<cplx>& values, std::vector<cplx>& coeffs) const {
    fftw_execute_dft(fwd_N, as_fftw(values.data()), as_fftw(values.data()));
    coeffs.resize(modes());
    const int h = n / 2;
    const double norm = 1.0 / (static_cast<double>(N) * N);
    for (int q1 = 0; q1 < n; ++q1)
        for (int q2 = 0; q2 < n; ++q2)
            coeffs[static_cast<std::size_t>(q1) * n + q2] =
                values[static_cast<std::size_t>(wrap(q1 - h, N)) * N + wrap(q2 - h, N)] * ana_N[q1] * ana_N[q2] *
                norm;
}

Field SpectralPlan::Impl::synthesize(const std::vector<cplx>& coeffs) const {
    std::vector<cplx> buf(modes(), cplx(0.0));
    const int h = n / 2;
    for (int q1 = 0; q1 < n; ++q1)
        for (int q2 = 0; q2 < n; ++q2)
            buf[static_cast<std::size_t>(wrap(q1 - h, n)) * n + wrap(q2 - h, n)] =
                coeffs[static_cast<std::size_t>(q1) * n + q2] * syn_n[q1] * syn_n[q2];
    fftw_execute_dft(bwd_n, as_fftw(buf.data()), as_fftw(buf.data()));
    Field out(modes());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = buf[k].real();
    return out;
}

// 2 pi int_0^cut r J0(alpha r) J0(beta r) dr with alpha = xi|l+m|/2, beta = xi|l-m|/2
double SpectralPlan::Impl::direct_weight(int l1, int l2, int m1, int m2) const {
    const int sp = (l1 + m1) * (l1 + m1) + (l2 + m2) * (l2 + m2);
    const int sm = (l1 - m1) * (l1 - m1) + (l2 - m2) * (l2 - m2);
    const int dot = l1 * m1 + l2 * m2;
    const double a = cut;
    if (dot == 0) return std::numbers::pi * a * a * (j0_tab[sp] * j0_tab[sp] + j1_tab[sp] * j1_tab[sp]);
    const double alpha = arg_tab[sp], beta = arg_tab[sm];
    const double num = alpha * j1_tab[sp] * j0_tab[sm] - beta * j0_tab[sp] * j1_tab[sm];
    // alpha^2 - beta^2 = xi^2 (l.m)
    return 2.0 * std::numbers::pi * a * num / (xi * xi * dot);
}

double SpectralPlan::support_ratio() { return 2.0 / (3.0 + std::numbers::sqrt2); }

SpectralPlan::SpectralPlan(const VelocityGrid& grid, int n_angles) : impl_(std::make_shared<Impl>(grid, n_angles)) {}

const VelocityGrid& SpectralPlan::grid() const { return impl_->grid; }
int SpectralPlan::n_angles() const { return impl_->n_angles; }
double SpectralPlan::support_radius() const { return impl_->S; }

namespace {

void check_operands(std::span<const double> g, std::span<const double> h, const SpectralPlan& plan) {
    const std::size_t want = plan.grid().size();
    if (g.size() != want || h.size() != want)
        throw ShapeError("collision operands have " + std::to_string(g.size()) + "/" + std::to_string(h.size()) +
                         " values, plan grid has " + std::to_string(want));
}

}  // namespace

// Q(g, h) = int int B [g(v'_*) h(v') - g(v_*) h(v)]; the loss mode follows g.
Field q_boltzmann_direct(std::span<const double> g, std::span<const double> h, const CollisionKernel& kernel,
                         const SpectralPlan& plan) {
    check_operands(g, h, plan);
    const auto& P = plan.impl();
    std::vector<cplx> gh, hh;
    P.analyze(g, gh);
    P.analyze(h, hh);
    const int n = P.n, half = n / 2;

    std::vector<double> loss(P.modes());
    for (int m1 = -half; m1 < half; ++m1)
        for (int m2 = -half; m2 < half; ++m2)
            loss[static_cast<std::size_t>(m1 + half) * n + (m2 + half)] = P.direct_weight(m1, m2, m1, m2);

    std::vector<cplx> qh(P.modes(), cplx(0.0));
    for (int l1 = -half; l1 < half; ++l1)
        for (int l2 = -half; l2 < half; ++l2) {
            const cplx hl = hh[static_cast<std::size_t>(l1 + half) * n + (l2 + half)];
            for (int m1 = std::max(-half, -half - l1); m1 < std::min(half, half - l1); ++m1)
                for (int m2 = std::max(-half, -half - l2); m2 < std::min(half, half - l2); ++m2) {
                    const std::size_t qm = static_cast<std::size_t>(m1 + half) * n + (m2 + half);
                    const double w = P.direct_weight(l1, l2, m1, m2) - loss[qm];
                    qh[static_cast<std::size_t>(l1 + m1 + half) * n + (l2 + m2 + half)] += hl * gh[qm] * w;
                }
        }
    // direct_weight carries the 2 pi of the angular integral, the kernel the 1 / (2 pi)
    for (auto& c : qh) c *= kernel.b0;
    return P.synthesize(qh);
}

Field q_boltzmann_fast(std::span<const double> g, std::span<const double> h, const CollisionKernel& kernel,
                       const SpectralPlan& plan) {
    check_operands(g, h, plan);
    const auto& P = plan.impl();
    std::vector<cplx> gh, hh;
    P.analyze(g, gh);
    if (g.data() == h.data())
        hh = gh;
    else
        P.analyze(h, hh);

    const std::size_t nm = P.modes();
    std::vector<cplx> acc, a, b;
    P.synthesize_padded(gh, P.loss_fast.data(), a);
    P.synthesize_padded(hh, nullptr, b);
    acc.resize(a.size());
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] = -a[k] * b[k];
    for (int p = 0; p < P.n_angles; ++p) {
        P.synthesize_padded(hh, P.gain_a.data() + p * nm, a);
        P.synthesize_padded(gh, P.gain_b.data() + p * nm, b);
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += a[k] * b[k];
    }
    std::vector<cplx> qh;
    P.analyze_padded(acc, qh);
    // Carleman weight 2 * b0 / (2 pi) times the pi / n_angles angular step
    // (the 1 / n_angles is folded into the tables).
    for (auto& c : qh) c *= kernel.b0;
    return P.synthesize(qh);
}

double direct_kernel_mode(const SpectralPlan& plan, std::array<int, 2> l, std::array<int, 2> m) {
    const auto& P = plan.impl();
    const int h = P.n / 2;
    for (int c : {l[0], l[1], m[0], m[1]})
        if (c < -h || c >= h) throw ParameterError("kernel mode outside the plan's mode range");
    return P.direct_weight(l[0], l[1], m[0], m[1]);
}

double fast_kernel_mode(const SpectralPlan& plan, std::array<int, 2> l, std::array<int, 2> m) {
    const auto& P = plan.impl();
    const int h = P.n / 2;
    for (int c : {l[0], l[1], m[0], m[1]})
        if (c < -h || c >= h) throw ParameterError("kernel mode outside the plan's mode range");
    const std::size_t nm = P.modes();
    const std::size_t ql = static_cast<std::size_t>(l[0] + h) * P.n + (l[1] + h);
    const std::size_t qm = static_cast<std::size_t>(m[0] + h) * P.n + (m[1] + h);
    double acc = 0.0;
    for (int p = 0; p < P.n_angles; ++p) acc += P.gain_a[p * nm + ql] * P.gain_b[p * nm + qm];
    return acc;
}

Field q_bgk(std::span<const double> f, double nu, const VelocityGrid& grid) {
    if (!(nu >= 0.0)) throw ParameterError("BGK frequency must be >= 0");
    Field out = local_equilibrium(f, grid);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = nu * (out[k] - f[k]);
    return out;
}

double micro_macro_residual(std::span<const double> f, std::span<const double> f_inf, const CollisionKernel& kernel,
                            const SpectralPlan& plan, SpectralMethod method) {
    check_operands(f, f_inf, plan);
    auto Q = [&](std::span<const double> a, std::span<const double> b) {
        return method == SpectralMethod::fast ? q_boltzmann_fast(a, b, kernel, plan)
                                              : q_boltzmann_direct(a, b, kernel, plan);
    };
    Field g(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) g[k] = f[k] - f_inf[k];
    Field r = Q(f, f);
    for (const Field& part : {Q(g, g), Q(g, f_inf), Q(f_inf, g), Q(f_inf, f_inf)})
        for (std::size_t k = 0; k < r.size(); ++k) r[k] -= part[k];
    return weighted_norm(r, plan.grid(), 1, 0);
}

RateFunction boltzmann_rate(const CollisionKernel& kernel, const SpectralPlan& plan, SpectralMethod method) {
    if (method == SpectralMethod::fast)
        return [kernel, plan](std::span<const double> f) { return q_boltzmann_fast(f, f, kernel, plan); };
    return [kernel, plan](std::span<const double> f) { return q_boltzmann_direct(f, f, kernel, plan); };
}

RateFunction bgk_rate(double nu_per_density, const VelocityGrid& grid) {
    if (!(nu_per_density > 0.0)) throw ParameterError("BGK frequency must be > 0");
    return [nu_per_density, grid](std::span<const double> f) {
        const double rho = conserved_sums(f, grid)[0];
        return q_bgk(f, nu_per_density * rho, grid);
    };
}

double discrete_entropy(std::span<const double> f, const VelocityGrid& grid) {
    double acc = 0.0;
    for (double x : f)
        if (x > 0.0) acc += x * std::log(x);
    return acc * grid.cell_volume();
}

}  // namespace mscv
