// spin.hpp — spin-S0 operators, density matrices and quantum Gibbs statistics

#pragma once

#include "meanforce/model.hpp"

#include <Eigen/Dense>

namespace meanforce {

using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;

/// Angular-momentum matrices in the Sz eigenbasis ordered m = S0, S0-1, ..., -S0.
struct SpinOperators {
    int dim = 2;
    ComplexMatrix sx, sy, sz, s_plus, s_minus;

    /// S_theta = Sz cos(theta) - Sx sin(theta).
    [[nodiscard]] ComplexMatrix s_theta(double theta) const;
    [[nodiscard]] double s0() const { return 0.5 * (dim - 1); }
};

SpinOperators spin_operators(int n);

/// Hermitian, unit-trace matrix. Construction checks the invariants.
class DensityMatrix {
public:
    static constexpr double kHermitianTol = 1e-12;
    static constexpr double kTraceTol = 1e-12;

    DensityMatrix() = default;
    /// Throws ConfigError when `m` is not Hermitian with unit trace (to 1e-12 scaled).
    explicit DensityMatrix(ComplexMatrix m);

    [[nodiscard]] const ComplexMatrix& matrix() const { return m_; }
    [[nodiscard]] int dim() const { return static_cast<int>(m_.rows()); }
    [[nodiscard]] double expectation(const ComplexMatrix& op) const;
    [[nodiscard]] double min_eigenvalue() const;
    [[nodiscard]] double hermiticity_defect() const;

private:
    ComplexMatrix m_;
};

/// Unnormalized moments <Sz^k>_0 of the bare Gibbs state of -omega_l Sz.
struct QuantumGibbsStats {
    double log_z0 = 0.0;
    double z0 = 1.0;
    double m1 = 0.0;
    double m2 = 0.0;
    double m3 = 0.0;
};

QuantumGibbsStats qu_gibbs_stats(double beta, int n, double omega_l = 1.0);

/// exp(-beta h)/tr exp(-beta h) by eigendecomposition with shifted exponents.
/// beta = inf gives the uniform mixture over the ground eigenspace
/// (levels within 1e-9 of the spectral span count as degenerate).
DensityMatrix thermal_state(const ComplexMatrix& h, double beta);

/// Shared helpers for real-symmetric spectra (the reaction-coordinate solver uses them too).
namespace detail {
/// Boltzmann weights, normalized to sum 1, for sorted-or-not eigenvalues.
Eigen::VectorXd boltzmann_weights(const Eigen::VectorXd& evals, double beta);
} // namespace detail

} // namespace meanforce
