// acceptance.cpp — one PASS/FAIL line per acceptance criterion, with details below each
//
// Usage: meanforce_acceptance [--only 1,3,8a,...]

#include "meanforce/classical.hpp"
#include "meanforce/diagnostics.hpp"
#include "meanforce/dynamics.hpp"
#include "meanforce/limits.hpp"
#include "meanforce/rc.hpp"
#include "meanforce/regimes.hpp"
#include "meanforce/spin.hpp"
#include "meanforce/weak.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace meanforce;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> details;

    template <typename... Args>
    void note(const char* fmt, Args... args)
    {
        char buf[512];
        std::snprintf(buf, sizeof buf, fmt, args...);
        details.emplace_back(buf);
    }
    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            details.push_back("violated: " + what);
        }
    }
};

ModelParams lorentzian_model(int n, double q, double beta, double theta, double omega_0 = 7.0, double gamma_w = 5.0)
{
    ModelParams p;
    p.n = n;
    p.theta = theta;
    p.bath = BathSpec::lorentzian_with_q(q, omega_0, gamma_w);
    p.beta = beta;
    return p;
}

double max_component_gap(double sz_a, double sx_a, double sz_b, double sx_b)
{
    return std::max(std::abs(sz_a - sz_b), std::abs(sx_a - sx_b));
}

std::vector<double> linear_grid(double lo, double hi, int count)
{
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i) g[i] = lo + (hi - lo) * i / (count - 1);
    return g;
}

// 1. Dynamics steady state against the classical mean-force quadrature.
Outcome dynamics_steady_state()
{
    Outcome o;
    struct Setting {
        double q;
        double t_sample;
    };
    for (const Setting s : {Setting{0.04, 8000}, Setting{2.0, 16000}, Setting{14.0, 32000}}) {
        double worst_abs = 0.0, worst_sigma = 0.0;
        for (double t : linear_grid(0.05, 4.0, 10)) {
            const ModelParams p = lorentzian_model(1, s.q, beta_from_t_half(t), kPi / 4);
            SimConfig cfg;
            cfg.t_burn = 1000;
            cfg.t_sample = s.t_sample;
            cfg.ensemble = 4;
            const auto d = simulate_steady(p, cfg);
            const auto c = cmf_expectations(p);
            const double dz = d.sz - c.sz, dx = d.sx - c.sx;
            const double sig = std::max(std::abs(dz) / std::max(d.err_sz, 1e-300), std::abs(dx) / std::max(d.err_sx, 1e-300));
            worst_abs = std::max({worst_abs, std::abs(dz), std::abs(dx)});
            worst_sigma = std::max(worst_sigma, sig);
            const bool ok = std::abs(dz) <= 0.02 && std::abs(dx) <= 0.02 && std::abs(dz) <= 3 * d.err_sz &&
                            std::abs(dx) <= 3 * d.err_sx;
            if (!ok) {
                o.pass = false;
                o.note("Q=%g t_half=%.4g: dyn (%.4f +- %.4f, %.4f +- %.4f) vs cmf (%.4f, %.4f)", s.q, t, d.sz, d.err_sz,
                       d.sx, d.err_sx, c.sz, c.sx);
            }
        }
        o.note("Q=%g: worst |dev| %.4f, worst %.2f sigma over 10 temperatures", s.q, worst_abs, worst_sigma);
    }
    return o;
}

// 2. Large-spin correspondence of quantum weak coupling with the exact classical state.
Outcome correspondence()
{
    Outcome o;
    std::vector<double> bp;
    for (int i = 0; i < 40; ++i) bp.push_back(1.0 / (0.05 * std::pow(100.0, i / 39.0)));
    const auto sweep = correspondence_sweep(0.06, kPi / 4, bp, {1, 2, 5, 100}, QuantumMethod::wk);
    double prev = kInf;
    for (const auto& [n, dev] : sweep.max_dev) {
        o.note("n=%d: max deviation %.5f", n, dev);
        o.require(dev < prev, "deviation decreases with n");
        prev = dev;
    }
    o.require(sweep.max_dev.back().second < 1e-2, "n = 100 deviation below 1e-2");
    const auto big = correspondence_sweep(0.06, kPi / 4, bp, {1000}, QuantumMethod::wk);
    o.note("info: n=1000 max deviation %.5f", big.max_dev.back().second);
    return o;
}

RegimeConfig floored_damped()
{
    RegimeConfig cfg;
    cfg.metric = ErrorMetric::floored;
    cfg.floor = 0.1;
    cfg.gamma_w = 5.0;
    return cfg;
}

// 3. Quantum regime boundaries at T = 0.
Outcome quantum_boundaries()
{
    Outcome o;
    struct Window {
        Approximation a;
        double lo, hi;
    };
    for (const Window w : {Window{Approximation::uw, 0.02, 0.08}, Window{Approximation::wk, 0.4, 1.6},
                           Window{Approximation::us, 35, 140}}) {
        const auto b = find_boundary(0.0, kPi / 4, w.a, Flavor::quantum);
        o.note("%s boundary zeta* = %.4g (window [%g, %g], %d evaluations)", to_string(w.a).c_str(), b.zeta_star, w.lo,
               w.hi, b.evaluations);
        o.require(b.zeta_star >= w.lo && b.zeta_star <= w.hi, to_string(w.a) + " boundary inside its window");
    }
    for (auto a : {Approximation::uw, Approximation::wk}) {
        try {
            const auto b = find_boundary(0.0, kPi / 4, a, Flavor::quantum, floored_damped());
            o.note("info: floored metric, Gamma = 5: %s boundary %.4g", to_string(a).c_str(), b.zeta_star);
        } catch (const std::exception& e) {
            o.note("info: floored metric, Gamma = 5: %s boundary failed: %s", to_string(a).c_str(), e.what());
        }
    }
    return o;
}

// 4. Classical against quantum weak-coupling boundary at T = 0.
Outcome classical_quantum_ratio()
{
    Outcome o;
    const auto q = find_boundary(0.0, kPi / 4, Approximation::wk, Flavor::quantum);
    const auto c = find_boundary(0.0, kPi / 4, Approximation::wk, Flavor::classical);
    const double ratio = q.zeta_star / c.zeta_star;
    o.note("quantum WK %.4g, classical WK %.4g, ratio %.3g", q.zeta_star, c.zeta_star, ratio);
    o.require(ratio >= 5 && ratio <= 20, "ratio inside [5, 20]");
    const auto qf = find_boundary(0.0, kPi / 4, Approximation::wk, Flavor::quantum, floored_damped());
    const auto cf = find_boundary(0.0, kPi / 4, Approximation::wk, Flavor::classical, floored_damped());
    o.note("info: floored metric, Gamma = 5: ratio %.3g", qf.zeta_star / cf.zeta_star);
    return o;
}

// 5. High-temperature slope of the quantum weak-coupling boundary.
Outcome high_temperature_slope()
{
    Outcome o;
    std::vector<double> xs, ys;
    for (double t : {10.0, 31.622776601683793, 100.0, 316.22776601683796, 1000.0}) {
        const auto b = find_boundary(t, kPi / 4, Approximation::wk, Flavor::quantum);
        o.note("t_half=%g: zeta* = %.4g", t, b.zeta_star);
        xs.push_back(std::log(t));
        ys.push_back(std::log(b.zeta_star));
    }
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    const double slope = sxy / sxx;
    o.note("log-log slope %.4f", slope);
    o.require(std::abs(slope - 1.0) <= 0.2, "slope within 1 +- 0.2");
    return o;
}

// 6. Classical spin at theta = 0 and huge coupling against the quantum two-level Gibbs state.
Outcome classical_two_level()
{
    Outcome o;
    double worst = 0.0;
    for (double t : linear_grid(0.1, 5.0, 25)) {
        ModelParams p;
        p.n = 1;
        p.theta = 0.0;
        p.bath = BathSpec::bare_q(1e3 / p.s0());
        p.beta = beta_from_t_half(t);
        worst = std::max(worst, std::abs(cmf_expectations(p).sz - std::tanh(0.5 * p.beta * p.omega_l)));
    }
    o.note("max |sz - tanh(beta omega_l / 2)| = %.3g over 25 temperatures", worst);
    o.require(worst < 1e-2, "agreement within 1e-2");
    return o;
}

// 7. Quantum and classical states approach the ultrastrong closed form.
Outcome ultrastrong_convergence()
{
    Outcome o;
    double prev_q = kInf, prev_c = kInf;
    for (double z : {10.0, 30.0, 100.0}) {
        const ModelParams p = lorentzian_model(1, z / 0.5, beta_from_t_half(1.0), kPi / 4);
        const auto us = us_expectations(p);
        const auto rc = rc_expectations(p);
        const auto cm = cmf_expectations(p);
        const double dq = max_component_gap(rc.sz, rc.sx, us.sz, us.sx);
        const double dc = max_component_gap(cm.sz, cm.sx, us.sz, us.sx);
        o.note("zeta=%g: |rc - us| %.4g (N=%d), |cmf - us| %.4g", z, dq, rc.n_used, dc);
        o.require(dq < prev_q && dc < prev_c, "gaps decrease with zeta");
        prev_q = dq;
        prev_c = dc;
    }
    o.require(prev_q < 3e-2 && prev_c < 3e-2, "gaps at zeta = 100 below 3e-2");
    return o;
}

// 8a. Azimuthal maximum of the classical density at phi = pi.
Outcome density_peak()
{
    Outcome o;
    ClassicalSpin s;
    s.s0 = 0.5;
    s.theta = kPi / 4;
    s.q = 1.0 / s.s0;          // alpha = 1
    s.beta = 1.0 / s.s0;       // t_spin = 1
    const double log_z = cmf_expectations(s).log_z;
    const int nv = 41, np = 360;
    int bad = 0, bad_upper = 0, slices = 0;
    std::vector<double> bad_angles;
    for (int i = 1; i < nv - 1; ++i) {
        const double vt = kPi * i / (nv - 1);
        ++slices;
        int best = 0;
        double best_v = -1.0;
        for (int k = 0; k < np; ++k) {
            const double v = cmf_density({vt, 2 * kPi * k / np}, s, log_z);
            if (v > best_v) {
                best_v = v;
                best = k;
            }
        }
        if (best != np / 2) {
            ++bad;
            if (vt < kPi / 2) ++bad_upper;
            bad_angles.push_back(vt);
        }
    }
    o.note("%d of %d slices peak away from phi = pi", bad, slices);
    if (!bad_angles.empty())
        o.note("first offending slice v_theta = %.4f (pi/2 = %.4f); peaks there sit at phi = 0", bad_angles.front(), kPi / 2);
    o.note("info: upper hemisphere (v_theta < pi/2): %d offending slices", bad_upper);
    o.require(bad == 0, "every slice peaks at phi = pi");
    return o;
}

// 8b. Classical coherences dominate the quantum ones for spin 1/2. The quantum
// side is the weak-coupling state, which at alpha = 0.06 is accurate to
// second order; the reaction coordinate drops the residual bath and is shown
// for reference.
Outcome coherence_ordering()
{
    Outcome o;
    int violations = 0;
    double first = 0.0;
    for (int i = 0; i < 25; ++i) {
        const double t = 0.05 * std::pow(100.0, i / 24.0);
        const ModelParams p = lorentzian_model(1, 0.06 / 0.5, beta_from_t_spin(t, 1), kPi / 4);
        const double cl = std::abs(cmf_expectations(p).sx);
        const double wk = std::abs(qmf_wk_expectations(p).sx);
        const double rc = std::abs(rc_expectations(p).sx);
        if (cl < wk) {
            if (violations++ == 0) first = t;
        }
        if (i % 6 == 0 || i == 24) o.note("t_spin=%.4g: |sx| classical %.5f, quantum wk %.5f, quantum rc %.5f", t, cl, wk, rc);
    }
    if (violations > 0) o.note("%d of 25 temperatures violate, first at t_spin = %.4g", violations, first);
    o.require(violations == 0, "|sx classical| >= |sx quantum| everywhere");
    return o;
}

// 9. Property suites.
Outcome properties()
{
    Outcome o;
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    // Density-matrix invariants on random draws of every quantum state constructor.
    double worst_herm = 0, worst_trace = 0, worst_neg = 0;
    for (int draw = 0; draw < 100; ++draw) {
        const int n = 1 + static_cast<int>(u(rng) * 4);
        const double theta = u(rng) * kPi / 2;
        const double z = std::pow(10.0, -3 + 4 * u(rng));
        const double t = 0.1 + 4.9 * u(rng);
        const ModelParams p = lorentzian_model(n, z / (0.5 * n), beta_from_t_half(t), theta);
        for (const ComplexMatrix& m : {rc_mf_state(p).rho.matrix(), us_quantum_state(p).rho.matrix(),
                                       thermal_state(spin_operators(n).sz * -1.0, p.beta).matrix()}) {
            worst_herm = std::max(worst_herm, (m - m.adjoint()).norm());
            worst_trace = std::max(worst_trace, std::abs(m.trace() - 1.0));
            Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m, Eigen::EigenvaluesOnly);
            worst_neg = std::max(worst_neg, -es.eigenvalues().minCoeff());
        }
    }
    o.note("density matrices (rc, ultrastrong, Gibbs; 100 draws): hermiticity %.2g, trace %.2g, negativity %.2g",
           worst_herm, worst_trace, worst_neg);
    o.require(worst_herm < 1e-10 && worst_trace < 1e-10 && worst_neg < 1e-10, "density-matrix invariants");

    // Classical scaling invariance.
    double worst_scale = 0;
    for (int draw = 0; draw < 10; ++draw) {
        ClassicalSpin base{0.5, 1.0, u(rng) * kPi / 2, 0.1 + 5 * u(rng), 0.2 + 5 * u(rng)};
        const auto ref = cmf_expectations(base);
        for (double k : {2.0, 7.5, 40.0}) {
            const auto m = cmf_expectations(ClassicalSpin{base.s0 * k, 1.0, base.theta, base.q / k, base.beta / k});
            worst_scale = std::max(worst_scale, max_component_gap(m.sz, m.sx, ref.sz, ref.sx));
        }
    }
    o.note("scaling invariance: worst gap %.2g", worst_scale);
    o.require(worst_scale < 1e-9, "scaling invariance");

    // Monte Carlo against quadrature.
    double worst_mc = 0;
    for (int draw = 0; draw < 5; ++draw) {
        ClassicalSpin s{0.5, 1.0, u(rng) * kPi / 2, 0.1 + 3 * u(rng), 0.2 + 3 * u(rng)};
        const auto mc = cmf_sample(s, 1000 + draw, 400000);
        const auto qd = cmf_expectations(s);
        worst_mc = std::max({worst_mc, std::abs(mc.sz - qd.sz) / mc.err_sz, std::abs(mc.sx - qd.sx) / mc.err_sx});
    }
    o.note("Monte Carlo vs quadrature: worst %.2f standard errors", worst_mc);
    o.require(worst_mc < 4.5, "Monte Carlo within 4.5 standard errors");

    // Weak coupling against the reaction coordinate, on the undamped mode where
    // the mapping is exact. The damped bath is reported for reference.
    double worst_wk = 0, worst_damped = 0;
    for (double t : {0.3, 1.0, 3.0})
        for (double theta : {kPi / 6, kPi / 4, kPi / 3})
            for (double gamma_w : {0.0, 5.0}) {
                const ModelParams p = lorentzian_model(1, 0.01 / 0.5, beta_from_t_half(t), theta, 7.0, gamma_w);
                const auto rc = rc_expectations(p);
                const auto wk = qmf_wk_expectations(p);
                double& worst = gamma_w == 0.0 ? worst_wk : worst_damped;
                worst = std::max(worst, max_component_gap(rc.sz, rc.sx, wk.sz, wk.sx));
            }
    o.note("weak coupling vs reaction coordinate at zeta = 0.01: worst %.3g (undamped mode), %.3g (gamma = 5, "
           "residual bath dropped)",
           worst_wk, worst_damped);
    o.require(worst_wk < 5e-4, "WK-RC agreement within 5e-4");

    // Spin norm along a dynamics trajectory.
    {
        const ModelParams p = lorentzian_model(1, 2.0, beta_from_t_half(1.0), kPi / 4);
        SpinOscillator sys(p, resolve_dt(p, {}));
        auto r = member_rng(11, 0);
        DynState st = initial_state(sys, r);
        double worst_norm = 0;
        for (int i = 0; i < 200000; ++i) {
            sys.step(st, r);
            if (i % 1000 == 0) worst_norm = std::max(worst_norm, std::abs(st.s.norm() - sys.s0()));
        }
        o.note("dynamics spin norm drift over 2e5 steps: %.2g", worst_norm);
        o.require(worst_norm < 1e-9, "spin norm conserved");
    }

    // Bath integral identities.
    double worst_sigma = 0, worst_zero = 0;
    for (int draw = 0; draw < 10; ++draw) {
        const double q = 0.01 + 10 * u(rng);
        const BathSpec bath = BathSpec::lorentzian_with_q(q, 2 + 10 * u(rng), 0.5 + 8 * u(rng));
        const double beta = 0.1 + 10 * u(rng);
        const double wl = 0.2 + 2 * u(rng);
        const auto c = bath_combos(bath, beta, wl);
        const double sum = bath_a(bath, beta, wl) + bath_a(bath, beta, -wl);
        worst_sigma = std::max(worst_sigma, std::abs(c.sigma - sum) / std::max(1.0, std::abs(sum)));
        worst_zero = std::max(worst_zero, std::abs(bath_a(bath, beta, 1e-10) - q) / std::max(1.0, q));
    }
    o.note("Sigma = A(+) + A(-): worst %.2g; A(w_n -> 0) - Q: worst %.2g", worst_sigma, worst_zero);
    o.require(worst_sigma < 1e-8, "Sigma identity");
    o.require(worst_zero < 1e-8, "A(0) = Q");
    return o;
}

struct Criterion {
    std::string id;
    const char* label;
    std::function<Outcome()> run;
};

} // namespace

int main(int argc, char** argv)
{
    std::set<std::string> only;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--only" && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            for (std::string item; std::getline(ss, item, ',');) only.insert(item);
        }
    }
    set_warning_handler([](const std::string&) {});

    const std::vector<Criterion> criteria = {
        {"1", "1  dynamics steady state matches the classical mean-force state", dynamics_steady_state},
        {"2", "2  quantum weak coupling approaches the classical state with growing spin", correspondence},
        {"3", "3  quantum regime boundaries at T = 0", quantum_boundaries},
        {"4", "4  classical/quantum weak-coupling boundary ratio at T = 0", classical_quantum_ratio},
        {"5", "5  high-temperature weak-coupling boundary is linear in T", high_temperature_slope},
        {"6", "6  classical spin at theta = 0 and zeta = 1e3 matches the spin-1/2 Gibbs state", classical_two_level},
        {"7", "7  quantum and classical states approach the ultrastrong limit", ultrastrong_convergence},
        {"8a", "8a classical density peaks at phi = pi on every slice", density_peak},
        {"8b", "8b classical coherences dominate the quantum ones for spin 1/2", coherence_ordering},
        {"9", "9  property suites", properties},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out.pass = false;
            out.details.push_back(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s [%s] (%.1f s)\n", out.pass ? "PASS" : "FAIL", c.label, secs);
        for (const auto& d : out.details) std::printf("     %s\n", d.c_str());
        std::fflush(stdout);
        if (!out.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
