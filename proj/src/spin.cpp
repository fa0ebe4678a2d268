// spin.cpp — ladder-operator construction, thermal states, Gibbs closed forms

#include "meanforce/spin.hpp"

#include "meanforce/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace meanforce {

namespace {

double log_sinh(double x)
{
    if (x > 20.0) return x + std::log1p(-std::exp(-2.0 * x)) - std::log(2.0);
    return std::log(std::sinh(x));
}

QuantumGibbsStats gibbs_by_sum(double b, int n)
{
    const double s0 = 0.5 * n;
    double z = 0, a1 = 0, a2 = 0, a3 = 0;
    for (int i = 0; i <= n; ++i) {
        const double m = s0 - i;
        const double w = std::exp(b * (m - s0));
        z += w;
        a1 += w * m;
        a2 += w * m * m;
        a3 += w * m * m * m;
    }
    QuantumGibbsStats g;
    g.log_z0 = b * s0 + std::log(z);
    g.z0 = std::exp(g.log_z0);
    g.m1 = a1 / z;
    g.m2 = a2 / z;
    g.m3 = a3 / z;
    return g;
}

} // namespace

ComplexMatrix SpinOperators::s_theta(double theta) const
{
    return std::cos(theta) * sz - std::sin(theta) * sx;
}

SpinOperators spin_operators(int n)
{
    if (n < 1) throw ConfigError("spin length index n must be >= 1");
    const int d = n + 1;
    const double s0 = 0.5 * n;
    SpinOperators ops;
    ops.dim = d;
    ops.sz = ComplexMatrix::Zero(d, d);
    ops.s_plus = ComplexMatrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        const double m = s0 - i;
        ops.sz(i, i) = m;
        if (i + 1 < d) {
            const double mlow = m - 1.0;  // S+ |mlow> = c |m>
            ops.s_plus(i, i + 1) = std::sqrt(s0 * (s0 + 1.0) - mlow * (mlow + 1.0));
        }
    }
    ops.s_minus = ops.s_plus.adjoint();
    ops.sx = 0.5 * (ops.s_plus + ops.s_minus);
    ops.sy = std::complex<double>(0.0, -0.5) * (ops.s_plus - ops.s_minus);
    return ops;
}

DensityMatrix::DensityMatrix(ComplexMatrix m) : m_(std::move(m))
{
    if (m_.rows() != m_.cols() || m_.rows() == 0) throw ConfigError("density matrix must be square and non-empty");
    const double scale = std::max(1.0, m_.norm());
    if (hermiticity_defect() > kHermitianTol * scale) throw ConfigError("density matrix is not Hermitian");
    const auto tr = m_.trace();
    if (std::abs(tr - 1.0) > kTraceTol * scale) throw ConfigError("density matrix trace differs from 1");
    m_ = 0.5 * (m_ + m_.adjoint()).eval();
}

double DensityMatrix::expectation(const ComplexMatrix& op) const { return (m_ * op).trace().real(); }

double DensityMatrix::min_eigenvalue() const
{
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double DensityMatrix::hermiticity_defect() const { return (m_ - m_.adjoint()).norm(); }

QuantumGibbsStats qu_gibbs_stats(double beta, int n, double omega_l)
{
    if (n < 1) throw ConfigError("spin length index n must be >= 1");
    if (!(beta >= 0.0)) throw ConfigError("beta must be >= 0");
    const double s0 = 0.5 * n;
    if (beta == kInf) {
        QuantumGibbsStats g;
        g.log_z0 = g.z0 = kInf;
        g.m1 = s0;
        g.m2 = s0 * s0;
        g.m3 = s0 * s0 * s0;
        return g;
    }
    const double b = beta * omega_l;
    // The closed forms cancel like 1/b^k near b = 0; the finite sum is exact there.
    if (b < 0.05) return gibbs_by_sum(b, n);

    const double a = s0 + 0.5;
    const double ca = 1.0 / std::tanh(a * b);
    const double ch = 1.0 / std::tanh(0.5 * b);
    QuantumGibbsStats g;
    g.log_z0 = log_sinh(a * b) - log_sinh(0.5 * b);
    g.z0 = std::exp(g.log_z0);
    g.m1 = a * ca - 0.5 * ch;
    g.m2 = a * a - a * ch * ca + 0.25 * (2.0 * ch * ch - 1.0);
    g.m3 = a * a * a * ca - 1.5 * a * a * ch + 0.75 * a * ca * (2.0 * ch * ch - 1.0) - 0.75 * ch * ch * ch +
           0.625 * ch;
    return g;
}

namespace detail {

Eigen::VectorXd boltzmann_weights(const Eigen::VectorXd& evals, double beta)
{
    const Eigen::Index d = evals.size();
    const double e0 = evals.minCoeff();
    Eigen::VectorXd w(d);
    if (beta == kInf) {
        const double span = evals.maxCoeff() - e0;
        const double tol = 1e-9 * std::max(span, 1e-300);
        for (Eigen::Index i = 0; i < d; ++i) w[i] = (evals[i] - e0 <= tol) ? 1.0 : 0.0;
    } else {
        for (Eigen::Index i = 0; i < d; ++i) w[i] = std::exp(-beta * (evals[i] - e0));
    }
    return w / w.sum();
}

} // namespace detail

DensityMatrix thermal_state(const ComplexMatrix& h, double beta)
{
    if (h.rows() != h.cols()) throw ConfigError("Hamiltonian must be square");
    if (!(beta >= 0.0)) throw ConfigError("beta must be >= 0");
    if ((h - h.adjoint()).norm() > 1e-10 * std::max(1.0, h.norm())) throw ConfigError("non-Hermitian input");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
    const Eigen::VectorXd w = detail::boltzmann_weights(es.eigenvalues(), beta);
    const ComplexMatrix& v = es.eigenvectors();
    ComplexMatrix rho = v * w.cast<std::complex<double>>().asDiagonal() * v.adjoint();
    return DensityMatrix(rho);
}

} // namespace meanforce
