// weak.cpp — principal-value bath integrals and the second-order mean-force state

#include "meanforce/weak.hpp"

#include "meanforce/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace meanforce {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
constexpr double kQuadTol = 1e-12;
constexpr unsigned kDepth = 15;

double coth_half(double beta, double w)
{
    if (beta == kInf) return 1.0;
    const double x = 0.5 * beta * w;
    if (x < 1e-6) return 1.0 / x + x / 3.0;
    return 1.0 / std::tanh(x);
}

// Integral over [a, b] (b may be inf) split at the Lorentzian's landmarks and
// geometrically above `scale`, where a small |omega_n| puts structure.
template <class F>
double integrate_split(const F& f, double a, double b, const Lorentzian& l, double scale = 0.0)
{
    std::vector<double> edges{a};
    const double w0 = l.omega_0, g = l.gamma_w;
    for (double x : {w0 - 3 * g, w0 - g, w0, w0 + g, w0 + 3 * g, 2 * (w0 + 3 * g)})
        if (x > a && x < b) edges.push_back(x);
    for (double x = 4.0 * scale; scale > 0.0 && x < 0.25 * w0; x *= 4.0)
        if (x > a && x < b) edges.push_back(x);
    std::sort(edges.begin() + 1, edges.end());
    edges.push_back(b);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        total += GK::integrate(f, edges[i], edges[i + 1], kDepth, kQuadTol);
    return total;
}

// gamma_w = 0: J(w) = Q omega_0 delta(w - omega_0), the single mode the reaction coordinate represents exactly.
void check_off_resonance(const Lorentzian& l, double w)
{
    if (std::abs(std::abs(w) - l.omega_0) < 1e-9 * l.omega_0)
        throw ConfigError("an undamped bath is singular at omega_n = omega_0");
}

double single_mode_a(double q, const Lorentzian& l, double beta, double wn)
{
    check_off_resonance(l, wn);
    const double w0 = l.omega_0;
    return q * w0 * (w0 + wn * coth_half(beta, w0)) / (w0 * w0 - wn * wn);
}

BathIntegrals single_mode_combos(double q, const Lorentzian& l, double beta, double w)
{
    check_off_resonance(l, w);
    const double w0 = l.omega_0, c = coth_half(beta, w0);
    const double den = w0 * w0 - w * w;
    BathIntegrals b;
    b.q = q;
    b.a_plus = single_mode_a(q, l, beta, w);
    b.a_minus = single_mode_a(q, l, beta, -w);
    b.sigma = 2.0 * q * w0 * w0 / den;
    b.delta_b = 2.0 * q * w0 * w * c / den;
    b.sigma_prime = 4.0 * q * w0 * w0 * w / (den * den);
    b.delta_b_prime = 2.0 * q * w0 * c * (w0 * w0 + w * w) / (den * den);
    return b;
}

} // namespace

double bath_a(const BathSpec& bath, double beta, double omega_n)
{
    const Lorentzian& l = bath.lorentzian();
    if (!(beta >= 0.0)) throw ConfigError("beta must be >= 0");
    if (omega_n == 0.0) return bath.q();
    if (beta == 0.0) throw ConfigError("A(omega_n) diverges at beta = 0");
    if (l.gamma_w == 0.0) return single_mode_a(bath.q(), l, beta, omega_n);

    auto j = [&](double w) {
        const double d = l.omega_0 * l.omega_0 - w * w;
        return (l.a_lor * l.gamma_w / kPi) * w / (d * d + l.gamma_w * l.gamma_w * w * w);
    };
    const double p = std::abs(omega_n);

    // At T = 0 and omega_n < 0 the numerator cancels the only root of the denominator.
    if (beta == kInf && omega_n < 0.0) {
        auto f = [&](double w) { return j(w) / (w + p); };
        return integrate_split(f, 0.0, kInf, l, p);
    }

    auto g = [&](double w) { return j(w) * (w + omega_n * coth_half(beta, w)) / ((w - p) * (w + p)); };
    auto h = [&](double w) { return j(w) * (w + omega_n * coth_half(beta, w)) / (w + p); };
    const double delta = 0.25 * std::min(p, l.gamma_w);
    // PV over [p - delta, p + delta] folded onto u in (0, delta): the 1/u parts cancel.
    auto core = [&](double u) { return (h(p + u) - h(p - u)) / u; };
    const double left = integrate_split(g, 0.0, p - delta, l);
    const double mid = GK::integrate(core, 0.0, delta, kDepth, kQuadTol);
    const double right = integrate_split(g, p + delta, kInf, l, p);
    return left + mid + right;
}

BathIntegrals bath_combos(const BathSpec& bath, double beta, double omega_l)
{
    const Lorentzian& l = bath.lorentzian();
    if (!(omega_l > 0.0)) throw ConfigError("omega_l must be > 0");
    if (l.gamma_w == 0.0) {
        if (beta == 0.0) throw ConfigError("A(omega_n) diverges at beta = 0");
        return single_mode_combos(bath.q(), l, beta, omega_l);
    }

    using Key = std::tuple<double, double, double, double, double>;
    static std::mutex mu;
    static std::map<Key, BathIntegrals> memo;
    const Key key{l.a_lor, l.omega_0, l.gamma_w, beta, omega_l};
    {
        std::lock_guard<std::mutex> lock(mu);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
    }

    BathIntegrals b;
    b.q = bath.q();
    b.a_plus = bath_a(bath, beta, omega_l);
    b.a_minus = bath_a(bath, beta, -omega_l);
    b.sigma = b.a_plus + b.a_minus;
    b.delta_b = b.a_plus - b.a_minus;

    auto sigma_at = [&](double w) { return bath_a(bath, beta, w) + bath_a(bath, beta, -w); };
    auto delta_at = [&](double w) { return bath_a(bath, beta, w) - bath_a(bath, beta, -w); };
    auto richardson = [&](const auto& f) {
        const double h = 1e-4 * omega_l;
        const double d1 = (f(omega_l + h) - f(omega_l - h)) / (2.0 * h);
        const double d2 = (f(omega_l + 0.5 * h) - f(omega_l - 0.5 * h)) / h;
        return (4.0 * d2 - d1) / 3.0;
    };
    b.sigma_prime = richardson(sigma_at);
    b.delta_b_prime = richardson(delta_at);

    std::lock_guard<std::mutex> lock(mu);
    memo.emplace(key, b);
    return b;
}

SpinExpectation qmf_wk_expectations(const ModelParams& params)
{
    params.validate();
    SpinExpectation out;
    out.method = "qmf-wk";
    if (params.beta == 0.0) return out;

    const double s0 = params.s0();
    const double wl = params.omega_l;
    const auto g = qu_gibbs_stats(params.beta, params.n, wl);
    const auto bi = bath_combos(params.bath, params.beta, wl);
    const double s2 = std::pow(std::sin(params.theta), 2);
    const double c2 = std::pow(std::cos(params.theta), 2);
    const double ss = s0 * (s0 + 1.0);

    double sz = g.m1 + 0.25 * s2 * ((ss - g.m2) * bi.sigma_prime - g.m1 * bi.delta_b_prime);
    if (params.beta != kInf) {
        sz -= params.beta * (0.25 * s2 * ((g.m2 - g.m1 * g.m1) * bi.delta_b + (g.m3 - g.m1 * g.m2) * bi.sigma) -
                             c2 * (g.m3 - g.m1 * g.m2) * bi.q);
    }
    const double sx = std::sin(2.0 * params.theta) / (4.0 * wl) *
                      ((ss - g.m2) * bi.sigma - g.m1 * bi.delta_b - 4.0 * g.m2 * bi.q);
    out.sz = sz / s0;
    out.sx = sx / s0;
    return out;
}

DensityMatrix qmf_wk_state(const ModelParams& params)
{
    params.validate();
    const auto ops = spin_operators(params.n);
    const ComplexMatrix tau = thermal_state(-params.omega_l * ops.sz, params.beta).matrix();
    if (params.beta == 0.0) return DensityMatrix(tau);

    const auto bi = bath_combos(params.bath, params.beta, params.omega_l);
    const double st = std::sin(params.theta), ct = std::cos(params.theta);
    const double wl = params.omega_l;

    struct Eigenop {
        ComplexMatrix x;
        double omega;
        double a;
        double a_prime;
    };
    const std::vector<Eigenop> xs{
        {-0.5 * st * ops.s_minus, wl, bi.a_plus, bi.a_prime_plus()},
        {ct * ops.sz, 0.0, bi.q, 0.0},  // its A' term is a commutator of diagonal matrices
        {-0.5 * st * ops.s_plus, -wl, bi.a_minus, bi.a_prime_minus()},
    };

    ComplexMatrix rho = tau;
    for (const auto& xn : xs) {
        const ComplexMatrix xd = xn.x.adjoint();
        if (xn.omega != 0.0) rho += (xd * tau * xn.x - tau * xn.x * xd) * xn.a_prime;
        if (params.beta != kInf) {
            const ComplexMatrix xxd = xn.x * xd;
            const double mean = (tau * xxd).trace().real();
            rho += params.beta * xn.a * (tau * xxd - mean * tau);
        }
        for (const auto& xm : xs) {
            if (&xm == &xn) continue;
            const ComplexMatrix c1 = xm.x * xd * tau - xd * tau * xm.x;
            const ComplexMatrix c2 = tau * xn.x * xm.x.adjoint() - xm.x.adjoint() * tau * xn.x;
            rho += (c1 + c2) * (xn.a / (xm.omega - xn.omega));
        }
    }
    return DensityMatrix(rho);
}

} // namespace meanforce
