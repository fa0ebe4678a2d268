#include "meanforce/classical.hpp"
#include "meanforce/diagnostics.hpp"
#include "meanforce/error.hpp"
#include "meanforce/rc.hpp"
#include "meanforce/weak.hpp"

#include <Eigen/Eigenvalues>
#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

using namespace meanforce;

namespace {

ModelParams rc_model(int n, double zeta_value, double beta, double theta = kPi / 4)
{
    ModelParams p;
    p.n = n;
    p.theta = theta;
    p.bath = BathSpec::lorentzian_with_q(zeta_value / p.s0(), 7, 5);
    p.beta = beta;
    return p;
}

struct SilenceWarnings {
    std::vector<std::string> seen;
    WarningHandler old;
    SilenceWarnings() { old = set_warning_handler([this](const std::string& m) { seen.push_back(m); }); }
    ~SilenceWarnings() { set_warning_handler(old); }
};

} // namespace

TEST_CASE("rc parameters follow from the Lorentzian shape")
{
    SilenceWarnings quiet;
    const auto rc = rc_params(BathSpec::lorentzian(98, 7, 5));
    CHECK(rc.omega_rc == 7.0);
    CHECK(rc.lambda_rc == doctest::Approx(std::sqrt(7.0)).epsilon(1e-14));
    CHECK(rc.gamma_rc == doctest::Approx(5.0 / (14.0 * kPi)).epsilon(1e-14));
    REQUIRE(quiet.seen.size() == 1);
    CHECK(quiet.seen[0].find("gamma_rc") != std::string::npos);

    CHECK(rc_params(BathSpec::lorentzian(0, 7, 5)).lambda_rc == 0.0);
    CHECK(rc_params(BathSpec::lorentzian_with_q(70, 7, 5)).lambda_rc == doctest::Approx(std::sqrt(490.0)));

    quiet.seen.clear();
    rc_params(BathSpec::lorentzian(98, 7, 0.5));
    CHECK(quiet.seen.empty());
    CHECK_THROWS_AS(rc_params(BathSpec::bare_q(1.0)), ConfigError);
}

TEST_CASE("rc Hamiltonian structure")
{
    SilenceWarnings quiet;
    SUBCASE("decoupled spectrum")
    {
        auto p = rc_model(2, 0.0, 1.0);
        const RcParams rc{7.0, 0.0, 0.0, 5};
        const RealMatrix h = rc_hamiltonian(p, rc);
        CHECK(h.rows() == 15);
        CHECK((h - RealMatrix(h.diagonal().asDiagonal())).norm() == 0.0);
        for (int s = 0; s < 3; ++s)
            for (int k = 0; k < 5; ++k) CHECK(h(s * 5 + k, s * 5 + k) == doctest::Approx(-(1.0 - s) + 7.0 * k));
    }
    SUBCASE("symmetric for random parameters")
    {
        std::mt19937_64 gen(11);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < 20; ++i) {
            auto p = rc_model(1 + static_cast<int>(u(gen) * 6), 50 * u(gen), 1.0, u(gen) * kPi / 2);
            const RealMatrix h = rc_hamiltonian(p, rc_params(p.bath, 8 + static_cast<int>(u(gen) * 20)));
            CHECK((h - h.transpose()).norm() <= 1e-12 * h.norm());
        }
    }
    SUBCASE("theta = 0 block spectrum is a displaced ladder")
    {
        auto p = rc_model(1, 2.0, 1.0, 0.0);
        const auto rc = rc_params(p.bath, 60);
        Eigen::SelfAdjointEigenSolver<RealMatrix> es(rc_hamiltonian(p, rc));
        // lowest level: m = +1/2 with polaron shift lambda^2 m^2 / Omega
        const double shift = rc.lambda_rc * rc.lambda_rc * 0.25 / rc.omega_rc;
        CHECK(es.eigenvalues()[0] == doctest::Approx(-0.5 - shift).epsilon(1e-10));
        CHECK(es.eigenvalues()[1] == doctest::Approx(0.5 - shift).epsilon(1e-10));
    }
    SUBCASE("dimension guard")
    {
        auto p = rc_model(9, 1.0, 1.0);
        CHECK_THROWS_AS(rc_hamiltonian(p, RcParams{7, 1, 0, 2001}), ConfigError);
        CHECK_NOTHROW(rc_hamiltonian(p, RcParams{7, 1, 0, 4}));
        CHECK_THROWS_AS(rc_hamiltonian(p, RcParams{7, 1, 0, 1}), ConfigError);
    }
}

TEST_CASE("rc reduced state limits")
{
    SilenceWarnings quiet;
    SUBCASE("no coupling gives the bare Gibbs state for any cutoff")
    {
        for (int n : {1, 3}) {
            auto p = rc_model(n, 0.0, 0.7);
            const auto ops = spin_operators(n);
            const auto gibbs = thermal_state(-p.omega_l * ops.sz, p.beta);
            for (int nl : {2, 16, 40}) {
                const auto r = rc_fixed_state(p, RcParams{7, 0, 0, nl});
                CHECK((r.rho.matrix() - gibbs.matrix()).norm() < 1e-13);
            }
            const auto e = rc_expectations(rc_mf_state(p), ops);
            CHECK(std::abs(e.sx) < 1e-10);
        }
    }
    SUBCASE("infinite temperature gives the maximally mixed state")
    {
        auto p = rc_model(3, 5.0, 0.0);
        const auto r = rc_mf_state(p);
        CHECK((r.rho.matrix() - ComplexMatrix::Identity(4, 4) / 4.0).norm() < 1e-15);
        CHECK(r.z_mf == doctest::Approx(4.0));
    }
    SUBCASE("theta = 0 reduces to exp(beta (omega_l m + Q m^2))")
    {
        auto p = rc_model(2, 1.5, 1.3, 0.0);
        const auto r = rc_mf_state(p, 1e-10);
        const double q = p.q();
        Eigen::VectorXd w(3);
        for (int s = 0; s < 3; ++s) {
            const double m = 1.0 - s;
            w[s] = std::exp(p.beta * (m + q * m * m));
        }
        w /= w.sum();
        for (int s = 0; s < 3; ++s) CHECK(r.rho.matrix()(s, s).real() == doctest::Approx(w[s]).epsilon(1e-9));
        CHECK(std::abs(r.rho.matrix()(0, 1)) < 1e-12);
    }
    SUBCASE("theta = pi/2 has no coherence")
    {
        for (double beta : {0.5, 2.0, kInf}) {
            const auto e = rc_expectations(rc_model(1, 3.0, beta, kPi / 2));
            CHECK(std::abs(e.sx) < 1e-8);
        }
    }
}

TEST_CASE("rc states are valid density matrices with vanishing sy")
{
    SilenceWarnings quiet;
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 25; ++i) {
        const int n = 1 + static_cast<int>(u(gen) * 4);
        const double zeta_value = std::pow(10.0, -2.0 + 4.0 * u(gen));
        const double beta = i % 5 == 0 ? kInf : std::pow(10.0, -1.0 + 2.0 * u(gen));
        auto p = rc_model(n, zeta_value, beta, u(gen) * kPi / 2);
        const auto r = rc_mf_state(p);
        const auto e = rc_expectations(r, spin_operators(n));
        CAPTURE(n);
        CAPTURE(zeta_value);
        CAPTURE(beta);
        CHECK(r.converged);
        CHECK(r.rho.min_eigenvalue() >= -1e-10);
        CHECK(std::abs(r.rho.matrix().trace() - 1.0) < 1e-12);
        CHECK(std::abs(e.sy) <= 1e-9);
        CHECK(e.sz * e.sz + e.sx * e.sx <= 1.0 + 1e-10);
    }
}

TEST_CASE("rc convergence bookkeeping")
{
    SilenceWarnings quiet;
    auto p = rc_model(1, 100.0, 1.0);
    RcOptions opt;
    opt.n_max = 32;
    CHECK_THROWS_WITH_AS(rc_mf_state(p, opt), "not converged at n_max", ConvergenceError);
    opt.throw_on_failure = false;
    const auto r = rc_mf_state(p, opt);
    CHECK_FALSE(r.converged);
    CHECK(r.n_used == 32);

    const auto ok = rc_mf_state(p);
    CHECK(ok.converged);
    CHECK(ok.last_change < 1e-6);
}

TEST_CASE("Chebyshev route agrees with diagonalization")
{
    SilenceWarnings quiet;
    for (double beta : {0.3, 2.0, 20.0}) {
        auto p = rc_model(3, 5.0, beta, 0.6);
        const auto rc = rc_params(p.bath, 150);
        const auto a = rc_fixed_state(p, rc, RcMethod::eigen);
        const auto b = rc_fixed_state(p, rc, RcMethod::chebyshev);
        CAPTURE(beta);
        CHECK((a.rho.matrix() - b.rho.matrix()).norm() < 1e-11);
        CHECK(a.log_z_mf == doctest::Approx(b.log_z_mf).epsilon(1e-11));
    }
    auto p = rc_model(1, 1.0, kInf);
    CHECK_THROWS_AS(rc_fixed_state(p, rc_params(p.bath, 8), RcMethod::chebyshev), ConfigError);
}

TEST_CASE("rc agrees with weak coupling at small zeta")
{
    SilenceWarnings quiet;
    auto p = rc_model(1, 0.01, beta_from_t_half(1.0));
    const auto rc = rc_expectations(p);
    const auto wk = qmf_wk_expectations(p);
    CHECK(std::abs(rc.sz - wk.sz) < 5e-4);
    CHECK(std::abs(rc.sx - wk.sx) < 5e-4);

    // With a narrow Lorentzian the dropped residual bath is negligible and the agreement is much closer.
    ModelParams narrow = p;
    narrow.bath = BathSpec::lorentzian_with_q(p.q(), 7, 0.01);
    const auto rc_n = rc_expectations(narrow);
    const auto wk_n = qmf_wk_expectations(narrow);
    CHECK(std::abs(rc_n.sz - wk_n.sz) < 1e-5);
    CHECK(std::abs(rc_n.sx - wk_n.sx) < 1e-5);
}

TEST_CASE("mean-force partition function approaches the classical one with growing spin")
{
    SilenceWarnings quiet;
    const double alpha = 0.06, beta_prime = 1.0;
    std::vector<double> gaps;
    double classical = 0.0;
    for (int n : {1, 2, 5}) {
        ModelParams p;
        p.n = n;
        p.theta = kPi / 4;
        p.bath = BathSpec::lorentzian_with_q(alpha_scaling(alpha, p.s0()), 7, 5);
        p.beta = beta_prime / p.s0();
        const auto r = rc_mf_state(p, 1e-9);
        classical = cmf_expectations(p).z_part;
        gaps.push_back(std::abs(r.z_mf / (n + 1) - classical));
    }
    CHECK(gaps[1] < gaps[0]);
    CHECK(gaps[2] < gaps[1]);
    CHECK(classical > 1.0);
}
