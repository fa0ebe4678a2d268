// classical.cpp — classical mean-force quadrature, closed forms and sampler

#include "meanforce/classical.hpp"

#include "meanforce/error.hpp"
#include "meanforce/quadrature.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace meanforce {

namespace {

// Snap cos/sin of the coupling angle so theta = pi/2 (in floating point)
// behaves like the exact angle in the T = 0 closed forms.
double snapped(double v) { return std::abs(v) < 1e-12 ? 0.0 : v; }

void check(const ClassicalSpin& s)
{
    if (!(s.s0 > 0.0) || !(s.omega_l > 0.0) || !(s.q >= 0.0) || !std::isfinite(s.q) || !(s.beta >= 0.0))
        throw ConfigError("classical spin needs s0 > 0, omega_l > 0, q >= 0, beta >= 0");
}

// Taylor series of Z(x) = sinh(x)/x and its first three derivatives.
std::array<double, 4> gibbs_series(double x)
{
    std::array<double, 4> d{};
    double fact = 1.0;  // (2k+1)!
    for (int k = 0; k < 30; ++k) {
        if (k > 0) fact *= (2.0 * k) * (2.0 * k + 1.0);
        const int p = 2 * k;
        // d^j/dx^j x^p = p!/(p-j)! x^(p-j)
        double falling = 1.0;
        for (int j = 0; j < 4; ++j) {
            if (p - j < 0) break;
            d[j] += falling * std::pow(x, p - j) / fact;
            falling *= (p - j);
        }
    }
    return d;
}

struct Minimum {
    double psi;
    double energy;
    double curvature;
};

std::vector<Minimum> local_minima_xz(const ClassicalSpin& s)
{
    constexpr int grid = 2048;
    const double h = 2.0 * kPi / grid;
    std::vector<double> e(grid);
    for (int i = 0; i < grid; ++i) e[i] = s.energy_xz(i * h);
    std::vector<Minimum> out;
    for (int i = 0; i < grid; ++i) {
        const double prev = e[(i + grid - 1) % grid];
        const double next = e[(i + 1) % grid];
        if (e[i] <= prev && e[i] < next) {
            const double lo = (i - 1) * h, hi = (i + 1) * h;
            auto r = boost::math::tools::brent_find_minima(
                [&](double psi) { return s.energy_xz(psi); }, lo, hi, 52);
            // Brent stops near sqrt(eps) in psi; Newton on E'(psi) = 0 finishes it.
            double psi = r.first;
            for (int it = 0; it < 8; ++it) {
                const double d1 = s.energy_xz_d1(psi), d2 = s.energy_xz_d2(psi);
                if (!(d2 > 0.0)) break;
                const double step = d1 / d2;
                if (std::abs(step) > h) break;
                psi -= step;
                if (std::abs(step) < 1e-16) break;
            }
            psi = std::fmod(psi, 2.0 * kPi);
            if (psi < 0) psi += 2.0 * kPi;
            const double curv = s.energy_xz_d2(psi);
            r.second = s.energy_xz(psi);
            out.push_back({psi, r.second, curv});
        }
    }
    return out;
}

SphericalPoint to_sphere(double psi)
{
    psi = std::fmod(psi, 2.0 * kPi);
    if (psi < 0) psi += 2.0 * kPi;
    if (psi <= kPi) return {psi, 0.0};
    return {2.0 * kPi - psi, kPi};
}

} // namespace

ClassicalSpin ClassicalSpin::from(const ModelParams& p)
{
    p.validate();
    return {p.s0(), p.omega_l, p.theta, p.q(), p.beta};
}

double ClassicalSpin::energy(SphericalPoint p) const
{
    const double st = std::cos(theta) * std::cos(p.v_theta) - std::sin(theta) * std::sin(p.v_theta) * std::cos(p.phi);
    return -omega_l * s0 * std::cos(p.v_theta) - q * s0 * s0 * st * st;
}

double ClassicalSpin::energy_xz(double psi) const
{
    const double st = std::cos(psi + theta);
    return -omega_l * s0 * std::cos(psi) - q * s0 * s0 * st * st;
}

double ClassicalSpin::energy_xz_d1(double psi) const
{
    return omega_l * s0 * std::sin(psi) + q * s0 * s0 * std::sin(2.0 * (psi + theta));
}

double ClassicalSpin::energy_xz_d2(double psi) const
{
    return omega_l * s0 * std::cos(psi) + 2.0 * q * s0 * s0 * std::cos(2.0 * (psi + theta));
}

ClassicalMoments cl_gibbs_stats(double x)
{
    if (!(x >= 0.0)) throw ConfigError("cl_gibbs_stats needs x >= 0");
    ClassicalMoments m;
    if (x == kInf) {
        m.z_part = kInf;
        m.log_z = kInf;
        m.sz = m.sz2 = m.sz3 = 1.0;
        return m;
    }
    if (x < 2.0) {
        const auto d = gibbs_series(x);
        m.z_part = d[0];
        m.log_z = std::log(d[0]);
        m.sz = d[1] / d[0];
        m.sz2 = d[2] / d[0];
        m.sz3 = d[3] / d[0];
        return m;
    }
    const double c = 1.0 / std::tanh(x);
    m.log_z = x - std::log(2.0 * x) + std::log1p(-std::exp(-2.0 * x));
    m.z_part = std::exp(m.log_z);
    m.sz = c - 1.0 / x;
    m.sz2 = 1.0 - 2.0 * c / x + 2.0 / (x * x);
    m.sz3 = c - 3.0 / x + 6.0 * c / (x * x) - 6.0 / (x * x * x);
    return m;
}

LogWeight cmf_logweight(SphericalPoint p, const ModelParams& params)
{
    const auto spin = ClassicalSpin::from(params);
    const double e = spin.energy(p);
    if (spin.beta == kInf) return {-e, true};
    return {-spin.beta * e, false};
}

std::vector<SphericalPoint> cmf_ground_orientations(const ClassicalSpin& spin)
{
    check(spin);
    const auto minima = local_minima_xz(spin);
    double emin = kInf, emax = -kInf;
    for (const auto& m : minima) emin = std::min(emin, m.energy);
    for (int i = 0; i < 256; ++i) emax = std::max(emax, spin.energy_xz(2.0 * kPi * i / 256));
    const double tol = 1e-9 * std::max(emax - emin, 1e-300);
    std::vector<double> psis;
    for (const auto& m : minima) {
        if (m.energy > emin + tol) continue;
        const bool dup = std::any_of(psis.begin(), psis.end(), [&](double p) {
            const double d = std::abs(p - m.psi);
            return std::min(d, 2.0 * kPi - d) < 1e-6;
        });
        if (!dup) psis.push_back(m.psi);
    }
    std::vector<SphericalPoint> out;
    for (double p : psis) out.push_back(to_sphere(p));
    return out;
}

ClassicalMoments cmf_expectations(const ModelParams& params, const CmfOptions& opt)
{
    return cmf_expectations(ClassicalSpin::from(params), opt);
}

ClassicalMoments cmf_expectations(const ClassicalSpin& spin, const CmfOptions& opt)
{
    check(spin);
    ClassicalMoments m;
    if (spin.beta == 0.0) return m;  // uniform sphere
    if (spin.beta == kInf) {
        const auto ground = cmf_ground_orientations(spin);
        for (const auto& g : ground) {
            m.sz += std::cos(g.v_theta);
            m.sx += std::sin(g.v_theta) * std::cos(g.phi);
        }
        m.sz /= ground.size();
        m.sx /= ground.size();
        m.z_part = m.log_z = kInf;
        return m;
    }

    const auto minima = local_minima_xz(spin);
    double emin = kInf;
    for (const auto& mn : minima) emin = std::min(emin, mn.energy);
    const double shift = -spin.beta * emin;  // max of the log-weight

    // Peak locations and widths seed the panel edges.
    std::vector<double> vt_breaks, phi_breaks;
    for (const auto& mn : minima) {
        const auto sp = to_sphere(mn.psi);
        const double width = mn.curvature > 0 ? 1.0 / std::sqrt(spin.beta * mn.curvature) : 0.1;
        for (double k : {-10.0, -3.0, -1.0, 0.0, 1.0, 3.0, 10.0}) vt_breaks.push_back(sp.v_theta + k * width);
        for (double k : {1.0, 3.0, 10.0}) {
            phi_breaks.push_back(k * width);
            phi_breaks.push_back(kPi - k * width);
        }
    }

    const double ct = std::cos(spin.theta), st = std::sin(spin.theta);
    const double bq = spin.beta * spin.q * spin.s0 * spin.s0;
    const double bw = spin.beta * spin.omega_l * spin.s0;

    quad::Options inner_opt;
    inner_opt.rel_tol = opt.rel_tol * 0.1;
    inner_opt.abs_tol = 1e-20;
    inner_opt.max_panels = opt.max_panels;
    // exp() of an argument of size A carries a relative error of about A * eps.
    inner_opt.noise = 4e-16 * (1.0 + bw + bq);
    bool inner_ok = true;

    // The integrand is even in phi about pi, so integrate [0, pi] and double.
    auto outer = [&](double vt) -> std::array<double, 3> {
        const double cv = std::cos(vt), sv = std::sin(vt);
        auto inner = [&](double phi) -> std::array<double, 2> {
            const double s_th = ct * cv - st * sv * std::cos(phi);
            const double w = std::exp(bw * cv + bq * s_th * s_th - shift);
            return {w, w * std::cos(phi)};
        };
        auto r = quad::integrate<2>(inner, 0.0, kPi, inner_opt, phi_breaks);
        if (!r.converged) inner_ok = false;
        return {sv * r.value[0], sv * cv * r.value[0], sv * sv * r.value[1]};
    };

    quad::Options outer_opt;
    outer_opt.rel_tol = opt.rel_tol;
    outer_opt.max_panels = opt.max_panels;
    outer_opt.noise = inner_opt.rel_tol + inner_opt.noise;
    const auto res = quad::integrate<3>(outer, 0.0, kPi, outer_opt, vt_breaks);
    if (!res.converged || !inner_ok) throw ConvergenceError("quadrature not converged");

    const double i0 = res.value[0];
    m.log_z = shift + std::log(2.0 * i0 / (4.0 * kPi));
    m.z_part = std::exp(m.log_z);
    m.sz = res.value[1] / i0;
    m.sx = res.value[2] / i0;
    m.quad_err = res.error / i0;
    return m;
}

ClassicalMoments cmf_wk_expectations(const ModelParams& params)
{
    return cmf_wk_expectations(ClassicalSpin::from(params));
}

ClassicalMoments cmf_wk_expectations(const ClassicalSpin& spin)
{
    check(spin);
    const double z = spin.q * spin.s0 / spin.omega_l;
    const double y = spin.beta * spin.omega_l * spin.s0;  // beta' omega_l
    const auto g = cl_gibbs_stats(y);
    double b_z, b_x;  // brackets multiplying the sz and sx corrections
    if (y == kInf) {
        b_z = 0.0;
        b_x = 1.0;
    } else if (y < 2.0) {
        // Moment form of the same brackets; avoids the 1/y^k cancellations.
        b_z = 0.5 * y * (g.sz3 - g.sz * g.sz2);
        b_x = 0.5 * y * (g.sz - g.sz3);
    } else {
        const double c = 1.0 / std::tanh(y);
        const double csch = 1.0 / std::sinh(y);
        b_z = csch * csch + c / y - 2.0 / (y * y);
        b_x = 1.0 - 3.0 * c / y + 3.0 / (y * y);
    }
    ClassicalMoments m = g;
    m.sz = g.sz + 0.5 * z * (1.0 + 3.0 * std::cos(2.0 * spin.theta)) * b_z;
    m.sx = -z * std::sin(2.0 * spin.theta) * b_x;
    return m;
}

ClassicalMoments cl_us_expectations(const ModelParams& params)
{
    params.validate();
    const double c = snapped(std::cos(params.theta));
    const double s = std::sin(params.theta);
    ClassicalMoments m;
    const double b = c == 0.0 ? 0.0 : params.beta * params.omega_l * params.s0() * c;
    const double t = std::tanh(b);
    m.sz = c * t;
    m.sx = -s * t;
    m.log_z = b == kInf ? kInf : std::abs(b) + std::log1p(std::exp(-2.0 * std::abs(b))) - std::log(2.0);
    m.z_part = std::exp(m.log_z);
    return m;
}

ClassicalMoments cmf_sample(const ModelParams& params, std::uint64_t seed, std::size_t count)
{
    return cmf_sample(ClassicalSpin::from(params), seed, count);
}

ClassicalMoments cmf_sample(const ClassicalSpin& spin, std::uint64_t seed, std::size_t count)
{
    check(spin);
    if (spin.beta == kInf) throw ConfigError("sampling undefined at T = 0");
    if (count < 1) throw ConfigError("sample count must be >= 1");
    double emin = kInf;
    for (const auto& mn : local_minima_xz(spin)) emin = std::min(emin, mn.energy);
    const double shift = -spin.beta * emin;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double sw = 0, sw2 = 0;
    std::array<double, 2> swf{}, sw2f{}, sw2f2{};
    for (std::size_t i = 0; i < count; ++i) {
        const double cv = 2.0 * uni(rng) - 1.0;
        const double phi = 2.0 * kPi * uni(rng);
        const double sv = std::sqrt(std::max(0.0, 1.0 - cv * cv));
        const double vt = std::acos(cv);
        const double w = std::exp(-spin.beta * spin.energy({vt, phi}) - shift);
        const std::array<double, 2> f{cv, sv * std::cos(phi)};
        sw += w;
        sw2 += w * w;
        for (int k = 0; k < 2; ++k) {
            swf[k] += w * f[k];
            sw2f[k] += w * w * f[k];
            sw2f2[k] += w * w * f[k] * f[k];
        }
    }
    ClassicalMoments m;
    std::array<double, 2> mu{}, se{};
    for (int k = 0; k < 2; ++k) {
        mu[k] = swf[k] / sw;
        const double v = sw2f2[k] - 2.0 * mu[k] * sw2f[k] + mu[k] * mu[k] * sw2;
        se[k] = std::sqrt(std::max(0.0, v)) / sw;
    }
    m.sz = mu[0];
    m.sx = mu[1];
    m.err_sz = se[0];
    m.err_sx = se[1];
    m.log_z = shift + std::log(sw / static_cast<double>(count));
    m.z_part = std::exp(m.log_z);
    return m;
}

double cmf_density(SphericalPoint p, const ClassicalSpin& spin, double log_z)
{
    return std::exp(-spin.beta * spin.energy(p) - log_z);
}

} // namespace meanforce
