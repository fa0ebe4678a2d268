// rc.cpp — reaction-coordinate Hamiltonian, reduced Gibbs state and cutoff convergence

#include "meanforce/rc.hpp"

#include "meanforce/diagnostics.hpp"
#include "meanforce/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

#include <cmath>
#include <random>
#include <utility>
#include <sstream>
#include <vector>

namespace meanforce {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct Reduced {
    RealMatrix rho;      // (n+1) x (n+1), unit trace
    double log_z_tot;
};

void check_dimension(int n, int levels)
{
    if (levels < 2) throw ConfigError("reaction-coordinate truncation needs N >= 2");
    const long d = static_cast<long>(n + 1) * levels;
    if (d > kRcMaxDimension) {
        std::ostringstream os;
        os << "dimension overflow: (n+1) N = " << d << " exceeds " << kRcMaxDimension;
        throw ConfigError(os.str());
    }
}

SparseMatrix sparse_hamiltonian(const ModelParams& p, const RcParams& rc)
{
    check_dimension(p.n, rc.n_levels);
    const int ds = p.n + 1, nl = rc.n_levels;
    const auto ops = spin_operators(p.n);
    const RealMatrix s_theta = ops.s_theta(p.theta).real();
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(ds) * nl * (2 * ds + 1));
    for (int s = 0; s < ds; ++s) {
        const double m = ops.s0() - s;
        for (int k = 0; k < nl; ++k) t.emplace_back(s * nl + k, s * nl + k, -p.omega_l * m + rc.omega_rc * k);
    }
    if (rc.lambda_rc != 0.0) {
        for (int s = 0; s < ds; ++s)
            for (int r = 0; r < ds; ++r) {
                const double c = rc.lambda_rc * s_theta(s, r);
                if (c == 0.0) continue;
                for (int k = 0; k + 1 < nl; ++k) {
                    const double v = c * std::sqrt(k + 1.0);
                    t.emplace_back(s * nl + k, r * nl + k + 1, v);
                    t.emplace_back(s * nl + k + 1, r * nl + k, v);
                }
            }
    }
    SparseMatrix h(ds * nl, ds * nl);
    h.setFromTriplets(t.begin(), t.end());
    return h;
}

// rho_S(s, r) = sum_k sum_j F(sN + k, j) F(rN + k, j) for rho_tot = F F^T.
RealMatrix partial_trace_of_square(const RealMatrix& f, int ds, int nl)
{
    RealMatrix rho(ds, ds);
    for (int s = 0; s < ds; ++s)
        for (int r = s; r < ds; ++r) {
            const double v = f.middleRows(s * nl, nl).cwiseProduct(f.middleRows(r * nl, nl)).sum();
            rho(s, r) = rho(r, s) = v;
        }
    return rho;
}

Reduced reduce_by_eigen(const SparseMatrix& h, double beta, int ds, int nl)
{
    Eigen::SelfAdjointEigenSolver<RealMatrix> es{RealMatrix(h)};
    const Eigen::VectorXd& e = es.eigenvalues();
    const Eigen::VectorXd w = detail::boltzmann_weights(e, beta);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < w.size(); ++j)
        if (w[j] > 1e-300) keep.push_back(j);
    RealMatrix f(h.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) f.col(c) = es.eigenvectors().col(keep[c]) * std::sqrt(w[keep[c]]);

    Reduced out;
    out.rho = partial_trace_of_square(f, ds, nl);
    out.rho /= out.rho.trace();
    if (beta == kInf) {
        out.log_z_tot = kInf;
    } else {
        const double e0 = e.minCoeff();
        out.log_z_tot = -beta * e0 + std::log((-beta * (e.array() - e0)).exp().sum());
    }
    return out;
}

std::pair<double, double> gershgorin(const SparseMatrix& h)
{
    double lo = kInf, hi = -kInf;
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
        double diag = 0.0, off = 0.0;
        for (SparseMatrix::InnerIterator it(h, i); it; ++it) {
            if (it.col() == i)
                diag = it.value();
            else
                off += std::abs(it.value());
        }
        lo = std::min(lo, diag - off);
        hi = std::max(hi, diag + off);
    }
    return {lo, hi};
}

// Lower bound on the ground energy: smallest Lanczos Ritz value minus its
// residual norm, never below the Gershgorin bound.
double ground_energy_bound(const SparseMatrix& h, double gersh_lo, double gersh_hi)
{
    const Eigen::Index d = h.rows();
    const int m = static_cast<int>(std::min<Eigen::Index>(d, 80));
    RealMatrix v(d, m + 1);
    std::mt19937_64 gen(12345);
    std::normal_distribution<double> normal;
    for (Eigen::Index i = 0; i < d; ++i) v(i, 0) = normal(gen);
    v.col(0).normalize();
    Eigen::VectorXd alpha(m), beta(m);
    int steps = 0;
    for (int j = 0; j < m; ++j) {
        Eigen::VectorXd w = h * v.col(j);
        alpha[j] = v.col(j).dot(w);
        for (int pass = 0; pass < 2; ++pass)
            w -= v.leftCols(j + 1) * (v.leftCols(j + 1).transpose() * w);
        beta[j] = w.norm();
        steps = j + 1;
        if (beta[j] < 1e-12 * (gersh_hi - gersh_lo)) break;
        v.col(j + 1) = w / beta[j];
    }
    Eigen::SelfAdjointEigenSolver<RealMatrix> es;
    RealMatrix t = RealMatrix::Zero(steps, steps);
    for (int j = 0; j < steps; ++j) {
        t(j, j) = alpha[j];
        if (j + 1 < steps) t(j, j + 1) = t(j + 1, j) = beta[j];
    }
    es.compute(t);
    const double ritz = es.eigenvalues()[0];
    const double residual = std::abs(beta[steps - 1] * es.eigenvectors()(steps - 1, 0));
    const double bound = ritz - residual - 1e-10 * (gersh_hi - gersh_lo);
    return std::max(bound, gersh_lo);
}

int chebyshev_degree(double a) { return static_cast<int>(std::ceil(a + 12.0 * std::sqrt(a) + 40.0)); }

// Rough operation counts: dense eigensolver ~ 10 d^3, Chebyshev ~ 2 K d nnz.
RcMethod pick_method(const SparseMatrix& h, double beta)
{
    if (beta == kInf || h.rows() <= 512) return RcMethod::eigen;
    const auto [lo, hi] = gershgorin(h);
    const double d = static_cast<double>(h.rows());
    const double cheb = 2.0 * chebyshev_degree(0.5 * beta * (hi - lo)) * d * static_cast<double>(h.nonZeros());
    return cheb < 10.0 * d * d * d ? RcMethod::chebyshev : RcMethod::eigen;
}

// e^{-a} I_k(a) for k = 0..kmax by Miller's backward recurrence, normalized
// with 1 = sum_k e^{-a} I_k(a) (1 for k = 0, 2 otherwise).
std::vector<double> scaled_bessel_i(double a, int kmax)
{
    const int start = kmax + 30 + static_cast<int>(std::sqrt(40.0 * (kmax + 1)));
    std::vector<double> v(start + 2, 0.0);
    v[start] = 1e-300;
    for (int k = start; k >= 1; --k) {
        v[k - 1] = v[k + 1] + (2.0 * k / a) * v[k];
        if (v[k - 1] > 1e250)
            for (int j = k - 1; j <= start; ++j) v[j] *= 1e-250;
    }
    double norm = v[0];
    for (int k = 1; k <= start; ++k) norm += 2.0 * v[k];
    v.resize(kmax + 1);
    for (double& x : v) x /= norm;
    return v;
}

// exp(-beta (H - E_g)) as a Chebyshev series in H' = (H - c)/w, with [E_g, E_g + 2w]
// the Gershgorin interval, applied to blocks of unit columns. Only the
// oscillator-diagonal entries are kept, which is all the partial trace needs.
Reduced reduce_by_chebyshev(const SparseMatrix& h, double beta, int ds, int nl)
{
    const Eigen::Index d = h.rows();
    const auto [g_lo, hi] = gershgorin(h);
    const double lo = ground_energy_bound(h, g_lo, hi);
    const double c = 0.5 * (hi + lo);
    const double w = std::max(0.5 * (hi - lo), 1e-300);
    const double a = beta * w;

    // Terms beyond k ~ a + 12 sqrt(a) + 40 are below 1e-18 of the leading ones.
    const int kmax = chebyshev_degree(a);
    const std::vector<double> ib = scaled_bessel_i(a, kmax);
    int kend = kmax;
    while (kend > 1 && ib[kend] < 1e-18 * ib[0]) --kend;

    RealMatrix rho = RealMatrix::Zero(ds, ds);
    double trace = 0.0;
    const Eigen::Index block = 256;
    for (Eigen::Index j0 = 0; j0 < d; j0 += block) {
        const Eigen::Index m = std::min(block, d - j0);
        RealMatrix t_prev = RealMatrix::Zero(d, m);
        for (Eigen::Index j = 0; j < m; ++j) t_prev(j0 + j, j) = 1.0;
        RealMatrix t_cur = (h * t_prev - c * t_prev) / w;
        RealMatrix acc = ib[0] * t_prev - 2.0 * ib[1] * t_cur;
        for (int k = 2; k <= kend; ++k) {
            RealMatrix t_next = (2.0 / w) * (h * t_cur - c * t_cur) - t_prev;
            t_prev.swap(t_cur);
            t_cur.swap(t_next);
            acc += ((k % 2) ? -2.0 : 2.0) * ib[k] * t_cur;
        }
        for (Eigen::Index j = 0; j < m; ++j) {
            const Eigen::Index col = j0 + j;
            const Eigen::Index sp = col / nl, k = col % nl;
            for (int s = 0; s < ds; ++s) rho(s, sp) += acc(s * nl + k, j);
            trace += acc(col, j);
        }
    }
    rho = 0.5 * (rho + rho.transpose()).eval();

    Reduced out;
    out.rho = rho / trace;
    out.log_z_tot = -beta * lo + std::log(trace);
    return out;
}

double log_z_oscillator(double beta, double omega, int levels)
{
    if (beta == 0.0) return std::log(static_cast<double>(levels));
    const double x = beta * omega;
    return std::log(-std::expm1(-x * levels)) - std::log(-std::expm1(-x));
}

} // namespace

RcParams rc_params(const BathSpec& bath, int n_levels)
{
    const Lorentzian& l = bath.lorentzian();
    RcParams rc;
    rc.omega_rc = l.omega_0;
    rc.lambda_rc = std::sqrt(bath.q() * l.omega_0);
    rc.gamma_rc = l.gamma_w / (2.0 * kPi * l.omega_0);
    rc.n_levels = n_levels;
    if (rc.gamma_rc > 0.05) {
        std::ostringstream os;
        os.precision(4);
        os << "reaction-coordinate damping gamma_rc = " << rc.gamma_rc
           << " exceeds 0.05; the residual-bath-free mean-force state is less accurate";
        warn(os.str());
    }
    return rc;
}

RealMatrix rc_hamiltonian(const ModelParams& params, const RcParams& rc)
{
    params.validate();
    return RealMatrix(sparse_hamiltonian(params, rc));
}

RcResult rc_fixed_state(const ModelParams& params, const RcParams& rc, RcMethod method)
{
    params.validate();
    const int ds = params.n + 1, nl = rc.n_levels;
    const SparseMatrix h = sparse_hamiltonian(params, rc);
    RcResult res;
    res.n_used = nl;
    res.converged = true;

    Reduced red;
    if (params.beta == 0.0) {
        red.rho = RealMatrix::Identity(ds, ds) / ds;
        red.log_z_tot = std::log(static_cast<double>(ds) * nl);
    } else {
        if (method == RcMethod::automatic) method = pick_method(h, params.beta);
        if (method == RcMethod::chebyshev && params.beta == kInf)
            throw ConfigError("the Chebyshev route needs a finite beta");
        red = method == RcMethod::eigen ? reduce_by_eigen(h, params.beta, ds, nl)
                                        : reduce_by_chebyshev(h, params.beta, ds, nl);
    }
    res.rho = DensityMatrix(red.rho.cast<std::complex<double>>());
    res.log_z_mf = red.log_z_tot == kInf ? kInf : red.log_z_tot - log_z_oscillator(params.beta, rc.omega_rc, nl);
    res.z_mf = std::exp(res.log_z_mf);
    return res;
}

RcResult rc_mf_state(const ModelParams& params, const RcOptions& opt)
{
    params.validate();
    if (!(opt.tol > 0.0) || opt.n_start < 2) throw ConfigError("rc options need tol > 0 and n_start >= 2");
    RcParams rc = rc_params(params.bath, opt.n_start);
    const auto ops = spin_operators(params.n);
    const double s0 = params.s0();

    RcResult prev;
    bool have_prev = false;
    for (int nl = opt.n_start;; nl *= 2) {
        const bool too_big = nl > opt.n_max || static_cast<long>(params.n + 1) * nl > kRcMaxDimension;
        if (too_big) {
            if (opt.throw_on_failure) throw ConvergenceError("not converged at n_max");
            prev.converged = false;
            return prev;
        }
        rc.n_levels = nl;
        RcResult cur = rc_fixed_state(params, rc, opt.method);
        if (have_prev) {
            const double dz = std::abs(cur.rho.expectation(ops.sz) - prev.rho.expectation(ops.sz)) / s0;
            const double dx = std::abs(cur.rho.expectation(ops.sx) - prev.rho.expectation(ops.sx)) / s0;
            cur.last_change = std::max(dz, dx);
            if (dz < opt.tol && dx < opt.tol) {
                cur.converged = true;
                return cur;
            }
        }
        cur.converged = false;
        prev = std::move(cur);
        have_prev = true;
    }
}

RcResult rc_mf_state(const ModelParams& params, double tol, int n_max)
{
    RcOptions opt;
    opt.tol = tol;
    opt.n_max = n_max;
    return rc_mf_state(params, opt);
}

SpinExpectation rc_expectations(const RcResult& result, const SpinOperators& ops)
{
    if (result.rho.dim() != ops.dim) throw ConfigError("spin dimension mismatch");
    const double s0 = ops.s0();
    SpinExpectation e;
    e.method = "qmf-rc";
    e.sz = result.rho.expectation(ops.sz) / s0;
    e.sx = result.rho.expectation(ops.sx) / s0;
    e.sy = result.rho.expectation(ops.sy) / s0;
    e.err_sz = e.err_sx = result.last_change;
    e.converged = result.converged;
    e.n_used = result.n_used;
    return e;
}

SpinExpectation rc_expectations(const ModelParams& params, const RcOptions& opt)
{
    return rc_expectations(rc_mf_state(params, opt), spin_operators(params.n));
}

} // namespace meanforce
