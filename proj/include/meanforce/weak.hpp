// weak.hpp — second-order (weak-coupling) quantum mean-force state
//
// The reservoir enters through the principal-value integrals
//
//     A(w_n) = PV int_0^inf J(w) [w + w_n coth(beta w / 2)] / (w^2 - w_n^2) dw
//
// and their derivatives in w_n. The spin operator coupled to the bath,
// S_theta, is split into eigenoperators of H_S = -omega_l Sz with Bohr
// frequencies +omega_l (S-), 0 (Sz) and -omega_l (S+).

#pragma once

#include "meanforce/model.hpp"
#include "meanforce/spin.hpp"

namespace meanforce {

struct BathIntegrals {
    double a_plus = 0.0;         ///< A(+omega_l)
    double a_minus = 0.0;        ///< A(-omega_l)
    double sigma = 0.0;          ///< A(+) + A(-)
    double delta_b = 0.0;        ///< A(+) - A(-)
    double delta_b_prime = 0.0;  ///< d delta_b / d omega_n
    double sigma_prime = 0.0;    ///< d sigma / d omega_n
    double q = 0.0;              ///< A(0)

    /// dA/dw_n at w_n = +omega_l.
    [[nodiscard]] double a_prime_plus() const { return 0.5 * (sigma_prime + delta_b_prime); }
    /// A' evaluated at w_n = -omega_l (derivative with respect to the argument).
    [[nodiscard]] double a_prime_minus() const { return 0.5 * (delta_b_prime - sigma_prime); }
};

/// A(omega_n) for a Lorentzian bath. omega_n = 0 returns Q exactly. Throws
/// ConfigError for a BareQ bath, or for beta = 0 with omega_n != 0 (divergent).
/// An undamped bath (gamma_w = 0) uses the single-mode closed form.
double bath_a(const BathSpec& bath, double beta, double omega_n);

/// Sums, differences and their omega_n derivatives at omega_n = omega_l.
/// Results are memoized per (bath, beta, omega_l).
BathIntegrals bath_combos(const BathSpec& bath, double beta, double omega_l);

/// Closed-form second-order <Sz>/S0 and <Sx>/S0.
SpinExpectation qmf_wk_expectations(const ModelParams& params);

/// Full second-order mean-force density matrix, renormalized to unit trace
/// consistently to second order. Not necessarily positive.
DensityMatrix qmf_wk_state(const ModelParams& params);

} // namespace meanforce
