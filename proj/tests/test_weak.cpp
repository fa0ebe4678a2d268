#include "meanforce/classical.hpp"
#include "meanforce/error.hpp"
#include "meanforce/weak.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <Eigen/Eigenvalues>
#include <doctest.h>

#include <cmath>
#include <random>

using namespace meanforce;

namespace {

const BathSpec kBath = BathSpec::lorentzian(98, 7, 5);

// Second PV scheme: a Gauss rule mirrored about the pole so the 1/(w - p)
// singularity cancels node by node, tanh-sinh / exp-sinh elsewhere.
double bath_a_symmetric_grid(const Lorentzian& l, double beta, double wn)
{
    auto j_over_w = [&](double w) {
        const double d = l.omega_0 * l.omega_0 - w * w;
        return (l.a_lor * l.gamma_w / kPi) / (d * d + l.gamma_w * l.gamma_w * w * w);
    };
    // w coth(beta w / 2) = (2 / beta) x coth(x), finite at w = 0
    auto w_coth = [&](double w) {
        if (beta == kInf) return w;
        const double x = 0.5 * beta * w;
        return x == 0.0 ? 2.0 / beta : (2.0 / beta) * x / std::tanh(x);
    };
    auto g = [&](double w) { return j_over_w(w) * (w * w + wn * w_coth(w)) / (w * w - wn * wn); };
    const double p = std::abs(wn);
    const double half = 0.5 * p;
    double mirrored = 0.0;
    const int panels = 64;
    for (int k = 0; k < panels; ++k) {
        const double a = half * k / panels, b = half * (k + 1) / panels;
        mirrored += boost::math::quadrature::gauss<double, 30>::integrate(
            [&](double u) { return g(p + u) + g(p - u); }, a, b);
    }
    boost::math::quadrature::tanh_sinh<double> ts;
    boost::math::quadrature::exp_sinh<double> es;
    const double left = ts.integrate(g, 0.0, p - half, 1e-14);
    const double far = std::max(3 * l.omega_0, 2 * (p + half));
    const double right = ts.integrate(g, p + half, far, 1e-14) + es.integrate(g, far, kInf, 1e-14);
    return left + mirrored + right;
}

ModelParams wk_params(int n, double alpha, double t_spin, double theta)
{
    ModelParams p;
    p.n = n;
    p.theta = theta;
    p.bath = BathSpec::lorentzian_with_q(alpha_scaling(alpha, spin_length(n)), 7, 5);
    p.beta = beta_from_t_spin(t_spin, n);
    return p;
}

} // namespace

TEST_CASE("bath_a at zero frequency is Q")
{
    CHECK(bath_a(kBath, 1.0, 0.0) == kBath.q());
    CHECK(bath_a(kBath, kInf, 0.0) == kBath.q());
    CHECK(std::abs(bath_a(BathSpec::lorentzian(3.3, 2.0, 0.4), 0.7, 0.0) - lorentzian_q(3.3, 2.0, 0.4)) < 1e-8);
}

TEST_CASE("bath_a reference values")
{
    // mpmath, 30 digits, subtraction over [0, 2p] and direct quadrature beyond
    CHECK(bath_a(kBath, 1.0, 1.0) == doctest::Approx(1.14836720574836158).epsilon(1e-11));
    CHECK(bath_a(kBath, 1.0, -1.0) == doctest::Approx(0.871383760331501023).epsilon(1e-11));
    CHECK(bath_a(kBath, kInf, 1.0) == doctest::Approx(1.22786510334128421).epsilon(1e-11));
    CHECK(bath_a(kBath, kInf, -1.0) == doctest::Approx(0.791885862738578389).epsilon(1e-11));
}

TEST_CASE("pole subtraction agrees with a mirrored-grid principal value")
{
    for (double beta : {0.1, 1.0, 5.0, kInf})
        for (double wn : {1.0, -1.0, 0.3, -2.5, 6.9, 12.0}) {
            for (const auto& bath : {kBath, BathSpec::lorentzian(1.0, 2.0, 0.5)}) {
                const double a = bath_a(bath, beta, wn);
                const double b = bath_a_symmetric_grid(bath.lorentzian(), beta, wn);
                CAPTURE(beta);
                CAPTURE(wn);
                CAPTURE(bath.describe());
                CHECK(std::abs(a - b) <= 1e-7 * std::max(1.0, std::abs(b)));
            }
        }
}

TEST_CASE("bath_a rejects what it cannot evaluate")
{
    CHECK_THROWS_AS((void)bath_a(BathSpec::bare_q(1.0), 1.0, 1.0), ConfigError);
    CHECK_THROWS_AS((void)bath_a(kBath, 0.0, 1.0), ConfigError);
    CHECK(bath_a(kBath, 0.0, 0.0) == kBath.q());
}

TEST_CASE("bath_combos")
{
    for (double beta : {1.0, kInf}) {
        const auto b = bath_combos(kBath, beta, 1.0);
        CHECK(b.sigma == doctest::Approx(b.a_plus + b.a_minus).epsilon(1e-9));
        CHECK(b.delta_b == doctest::Approx(b.a_plus - b.a_minus).epsilon(1e-9));
        CHECK(b.q == kBath.q());
        // Sigma does not depend on temperature
        CHECK(b.sigma_prime == doctest::Approx(0.0389886806283127907).epsilon(1e-7));
    }
    const auto b1 = bath_combos(kBath, 1.0, 1.0);
    CHECK(b1.delta_b_prime == doctest::Approx(0.275765272068067498).epsilon(1e-7));
    const auto binf = bath_combos(kBath, kInf, 1.0);
    CHECK(binf.delta_b_prime == doctest::Approx(0.318743503659852172).epsilon(1e-7));
    // at T = 0, A'(-omega_l) is the smooth integral of J/(w + omega_l)^2 > 0
    CHECK(binf.a_prime_minus() > 0.0);

    const auto small = bath_combos(kBath, kInf, 1e-4);
    CHECK(small.sigma == doctest::Approx(2.0 * kBath.q()).epsilon(1e-6));
}

TEST_CASE("qmf_wk_expectations simple limits")
{
    auto p = wk_params(1, 0.06, 1.0, 0.0);
    CHECK(qmf_wk_expectations(p).sx == 0.0);

    for (int n : {1, 3, 10}) {
        p = wk_params(n, 1e-9, 0.7, kPi / 4);
        const auto m = qmf_wk_expectations(p);
        CHECK(m.sz == doctest::Approx(qu_gibbs_stats(p.beta, n).m1 / spin_length(n)).epsilon(1e-8));
        CHECK(std::abs(m.sx) < 1e-8);
    }

    p.beta = 0.0;
    const auto hot = qmf_wk_expectations(p);
    CHECK(hot.sz == 0.0);
    CHECK(hot.sx == 0.0);
}

TEST_CASE("qmf_wk_expectations spin-1/2 ground-state fixture")
{
    // At T = 0 for spin 1/2: sz = 1 - sin^2(th) int J/(w+1)^2 / 2,
    // sx = sin(2 th) (int J/(w+1) - Q) / 2; mpmath at 30 digits.
    auto p = wk_params(1, 0.06, 0.0, kPi / 4);
    const auto m = qmf_wk_expectations(p);
    CHECK(m.sz == doctest::Approx(0.995803677654526909).epsilon(1e-10));
    CHECK(m.sx == doctest::Approx(-0.0124868482356852962).epsilon(1e-8));
}

TEST_CASE("qmf_wk_state reproduces the closed forms")
{
    for (int n : {1, 2, 3, 6})
        for (double t : {0.0, 0.1, 1.0, 4.0})
            for (double th : {0.0, 0.4, kPi / 4, kPi / 2}) {
                const auto p = wk_params(n, 0.03, t, th);
                const auto rho = qmf_wk_state(p);
                const auto ops = spin_operators(n);
                const auto m = qmf_wk_expectations(p);
                const double s0 = spin_length(n);
                CAPTURE(n);
                CAPTURE(t);
                CAPTURE(th);
                CHECK(std::abs(rho.matrix().trace().real() - 1.0) < 1e-12);
                CHECK(rho.hermiticity_defect() < 1e-12);
                CHECK(std::abs(rho.expectation(ops.sz) / s0 - m.sz) < 1e-10);
                CHECK(std::abs(rho.expectation(ops.sx) / s0 - m.sx) < 1e-10);
                CHECK(std::abs(rho.expectation(ops.sy)) < 1e-12);
            }
}

TEST_CASE("qmf_wk_state: trace, Hermiticity and bounded negativity on random parameters")
{
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 40; ++k) {
        ModelParams p;
        p.n = 1 + static_cast<int>(u(rng) * 6);
        p.theta = u(rng) * kPi / 2;
        const double z = std::pow(10.0, -3.0 + 2.5 * u(rng));
        p.bath = BathSpec::lorentzian_with_q(z / spin_length(p.n), 1.0 + 9.0 * u(rng), 0.5 + 6.0 * u(rng));
        p.beta = u(rng) < 0.1 ? kInf : std::pow(10.0, -2.0 + 4.0 * u(rng));
        const auto rho = qmf_wk_state(p);
        CAPTURE(k);
        CHECK(std::abs(rho.matrix().trace().real() - 1.0) < 1e-12);
        CHECK(rho.hermiticity_defect() < 1e-12);
        CHECK(rho.min_eigenvalue() >= -10.0 * z * z);
    }
}

TEST_CASE("qmf_wk_state at zero coupling is the Gibbs state")
{
    auto p = wk_params(3, 0.0, 0.5, 0.6);
    const auto ops = spin_operators(3);
    const auto rho = qmf_wk_state(p);
    const auto tau = thermal_state(-1.0 * ops.sz, p.beta);
    CHECK((rho.matrix() - tau.matrix()).norm() < 1e-14);
}

TEST_CASE("classical coherences exceed the quantum ones for spin 1/2 at low temperature")
{
    // The ordering flips near t_spin = 0.55; the reaction-coordinate solver shows the same crossover.
    for (int i = 0; i <= 12; ++i) {
        const double t = 0.05 * std::pow(10.0, i / 12.0);
        const auto p = wk_params(1, 0.06, t, kPi / 4);
        const auto q = qmf_wk_expectations(p);
        const auto cl = cmf_wk_expectations(ClassicalSpin::from(p));
        CAPTURE(t);
        CHECK(std::abs(cl.sx) >= std::abs(q.sx));
    }
    for (double t : {1.0, 2.0, 5.0}) {
        const auto p = wk_params(1, 0.06, t, kPi / 4);
        CAPTURE(t);
        CHECK(std::abs(cmf_wk_expectations(ClassicalSpin::from(p)).sx) < std::abs(qmf_wk_expectations(p).sx));
    }
}

TEST_CASE("quantum weak coupling approaches the classical weak coupling at large spin")
{
    std::vector<double> devs;
    for (int n : {1, 2, 5, 100}) {
        double worst = 0.0;
        for (int i = 0; i <= 16; ++i) {
            const double t = 0.05 * std::pow(100.0, i / 16.0);
            const auto p = wk_params(n, 0.06, t, kPi / 4);
            const auto q = qmf_wk_expectations(p);
            const auto c = cmf_wk_expectations(ClassicalSpin::from(p));
            worst = std::max({worst, std::abs(q.sz - c.sz), std::abs(q.sx - c.sx)});
        }
        devs.push_back(worst);
    }
    for (std::size_t i = 1; i < devs.size(); ++i) CHECK(devs[i] < devs[i - 1]);
    CHECK(devs.back() < 1e-2);
}
