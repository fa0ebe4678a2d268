// limits.cpp — ultrastrong states, correspondence sweeps, bare-spin partition ratio

#include "meanforce/limits.hpp"

#include "meanforce/classical.hpp"
#include "meanforce/error.hpp"
#include "meanforce/rc.hpp"
#include "meanforce/weak.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>

namespace meanforce {

namespace {

double log_sinhc(double x)
{
    if (x < 1e-4) return x * x / 6.0;
    if (x > 20.0) return x + std::log1p(-std::exp(-2.0 * x)) - std::log(2.0 * x);
    return std::log(std::sinh(x) / x);
}

} // namespace

SpinExpectation us_expectations(const ModelParams& params)
{
    const auto m = cl_us_expectations(params);
    SpinExpectation e;
    e.method = "us";
    e.sz = m.sz;
    e.sx = m.sx;
    return e;
}

ComplexMatrix spin_rotation_y(int n, double angle)
{
    const auto ops = spin_operators(n);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(ops.sy);
    const Eigen::VectorXcd phases =
        (std::complex<double>(0.0, angle) * es.eigenvalues().cast<std::complex<double>>()).array().exp();
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

UsState us_quantum_state(const ModelParams& params)
{
    params.validate();
    const int d = params.n + 1;
    const ComplexMatrix u = spin_rotation_y(params.n, params.theta);
    const Eigen::VectorXcd up = u.col(0), down = u.col(d - 1);
    const ComplexMatrix p_plus = up * up.adjoint();
    const ComplexMatrix p_minus = down * down.adjoint();
    const double c = std::cos(params.theta);
    const double t = c < 1e-15 ? 0.0 : std::tanh(params.beta * params.omega_l * params.s0() * c);
    ComplexMatrix rho = 0.5 * ((p_plus + p_minus) + t * (p_plus - p_minus));
    UsState out;
    out.rho = DensityMatrix(rho);
    const auto ops = spin_operators(params.n);
    out.sz = out.rho.expectation(ops.sz) / params.s0();
    out.sx = out.rho.expectation(ops.sx) / params.s0();
    return out;
}

CorrespondenceSweep correspondence_sweep(double alpha, double theta, const std::vector<double>& beta_prime_grid,
                                         const std::vector<int>& n_list, QuantumMethod method,
                                         const CorrespondenceOptions& opt)
{
    if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
    for (double bp : beta_prime_grid)
        if (!(bp > 0.0)) throw ConfigError("beta' grid values must be > 0");
    CorrespondenceSweep out;

    std::vector<CorrespondenceRow> classical;
    for (double bp : beta_prime_grid) {
        ClassicalSpin cs;
        cs.s0 = 1.0;
        cs.omega_l = opt.omega_l;
        cs.theta = theta;
        cs.q = alpha * opt.omega_l;
        cs.beta = bp;
        const auto m = cmf_expectations(cs);
        CorrespondenceRow r;
        r.n = 0;
        r.beta_prime = bp;
        r.sz = m.sz;
        r.sx = m.sx;
        classical.push_back(r);
    }
    out.rows = classical;

    for (int n : n_list) {
        double worst = 0.0;
        for (std::size_t i = 0; i < beta_prime_grid.size(); ++i) {
            ModelParams p;
            p.n = n;
            p.omega_l = opt.omega_l;
            p.theta = theta;
            p.bath = BathSpec::lorentzian_with_q(alpha_scaling(alpha, p.s0(), opt.omega_l), opt.omega_0, opt.gamma_w);
            p.beta = beta_prime_grid[i] / p.s0();
            SpinExpectation e;
            if (method == QuantumMethod::wk) {
                e = qmf_wk_expectations(p);
            } else {
                RcOptions ro;
                ro.tol = opt.rc_tol;
                e = rc_expectations(p, ro);
            }
            CorrespondenceRow r;
            r.n = n;
            r.beta_prime = beta_prime_grid[i];
            r.sz = e.sz;
            r.sx = e.sx;
            r.converged = e.converged;
            r.dev = std::max(std::abs(e.sz - classical[i].sz), std::abs(e.sx - classical[i].sx));
            worst = std::max(worst, r.dev);
            out.rows.push_back(r);
        }
        out.max_dev.emplace_back(n, worst);
    }
    return out;
}

SweepTable CorrespondenceSweep::table(const std::string& method_name) const
{
    SweepTable t;
    t.columns = {"method", "n", "beta_prime", "sz", "sx", "dev"};
    for (const auto& r : rows) {
        Cell n = r.n == 0 ? Cell{} : Cell{static_cast<long long>(r.n)};
        t.add_row({r.n == 0 ? std::string("cmf") : method_name, n, r.beta_prime, r.sz, r.sx,
                   r.n == 0 ? Cell{} : Cell{r.dev}});
    }
    for (const auto& [n, d] : max_dev) t.metadata.emplace_back("max_dev n=" + std::to_string(n), format_number(d));
    return t;
}

double mll_bare_ratio(double beta_prime, int n, double omega_l)
{
    if (!(beta_prime >= 0.0) || beta_prime == kInf) throw ConfigError("beta' must be finite and >= 0");
    const double s0 = 0.5 * n;
    const auto g = qu_gibbs_stats(beta_prime / s0, n, omega_l);
    return std::exp(g.log_z0 - std::log(n + 1.0) - log_sinhc(beta_prime * omega_l));
}

} // namespace meanforce
