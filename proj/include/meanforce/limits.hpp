// limits.hpp — ultrastrong limit and the large-spin quantum-classical correspondence
//
// As Q grows the spin is pinned to the eigenbasis of S_theta and only the two
// extremal projections +-S0 survive, for quantum and classical spins alike:
//
//     rho_US = (1/2) [ (P+ + P-) + (P+ - P-) tanh(beta omega_l S0 cos(theta)) ],
//
// with P+- the projectors on |+-S0>_theta = exp(i theta Sy) |+-S0>.

#pragma once

#include "meanforce/model.hpp"
#include "meanforce/spin.hpp"
#include "meanforce/table.hpp"

#include <vector>

namespace meanforce {

/// sz = cos(th) tanh(b), sx = -sin(th) tanh(b), b = beta omega_l S0 cos(th). Method "us".
SpinExpectation us_expectations(const ModelParams& params);

struct UsState {
    DensityMatrix rho;
    double sz = 0.0;
    double sx = 0.0;
};

/// Builds the rotated extremal projectors explicitly; the rotation comes from diagonalizing Sy.
UsState us_quantum_state(const ModelParams& params);

/// exp(i angle Sy) for spin n/2.
ComplexMatrix spin_rotation_y(int n, double angle);

enum class QuantumMethod { wk, rc };

struct CorrespondenceOptions {
    double omega_0 = 7.0;      ///< Lorentzian shape used for the quantum solvers
    double gamma_w = 5.0;
    double omega_l = 1.0;
    double rc_tol = 1e-6;
};

struct CorrespondenceRow {
    int n = 0;                  ///< 0 marks the classical row
    double beta_prime = 0.0;    ///< beta S0
    double sz = 0.0;
    double sx = 0.0;
    double dev = 0.0;           ///< max(|dsz|, |dsx|) against the classical row at the same beta'
    bool converged = true;
};

struct CorrespondenceSweep {
    std::vector<CorrespondenceRow> rows;
    std::vector<std::pair<int, double>> max_dev;  ///< per n, worst deviation over the beta' grid
    [[nodiscard]] SweepTable table(const std::string& method_name) const;
};

/// Q = alpha omega_l / S0 and beta = beta'/S0 for every (n, beta') pair; the
/// classical reference is the exact classical mean-force state.
CorrespondenceSweep correspondence_sweep(double alpha, double theta, const std::vector<double>& beta_prime_grid,
                                         const std::vector<int>& n_list, QuantumMethod method,
                                         const CorrespondenceOptions& opt = {});

/// [(1/(n+1)) Z0(beta'/S0, n)] / [sinh(beta' omega_l)/(beta' omega_l)]: the bare-spin
/// quantum partition function against the classical one.
double mll_bare_ratio(double beta_prime, int n, double omega_l = 1.0);

} // namespace meanforce
