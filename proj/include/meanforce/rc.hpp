// rc.hpp — numerically exact quantum mean-force states via the reaction coordinate
//
// A Lorentzian bath is equivalent to a single damped mode (the reaction
// coordinate) of frequency omega_0 coupled with strength sqrt(Q omega_0).
// Dropping the residual damping, the spin mean-force state is the reduced
// Gibbs state of
//
//     H = -omega_l Sz (x) 1 + Omega 1 (x) a^dag a + lambda S_theta (x) (a + a^dag)
//
// in a truncated number basis, which is real symmetric.

#pragma once

#include "meanforce/model.hpp"
#include "meanforce/spin.hpp"

namespace meanforce {

struct RcParams {
    double omega_rc = 0.0;
    double lambda_rc = 0.0;
    double gamma_rc = 0.0;
    int n_levels = 16;
};

/// Warns (see diagnostics.hpp) when gamma_rc > 0.05. Throws ConfigError for a BareQ bath.
RcParams rc_params(const BathSpec& bath, int n_levels = 16);

inline constexpr long kRcMaxDimension = 20000;

/// Dense H in the basis |m> (x) |k>, index = spin_index * N + k, spin_index = S0 - m.
/// Throws ConfigError if (n+1) N exceeds kRcMaxDimension or N < 2.
RealMatrix rc_hamiltonian(const ModelParams& params, const RcParams& rc);

enum class RcMethod {
    automatic,    ///< whichever of the two is estimated cheaper; eigen at T = 0
    eigen,
    chebyshev,    ///< Chebyshev series of exp(-beta H) applied with sparse products; finite beta only
};

struct RcOptions {
    double tol = 1e-6;
    int n_start = 16;
    int n_max = 2048;
    RcMethod method = RcMethod::automatic;
    /// Throw ConvergenceError("not converged at n_max") instead of returning converged = false.
    bool throw_on_failure = true;
};

struct RcResult {
    DensityMatrix rho;     ///< spin-reduced state
    int n_used = 0;
    bool converged = false;
    double log_z_mf = 0.0; ///< log(Z_tot / Z_RC), both traced in the truncated space; +inf at T = 0
    double z_mf = 1.0;
    double last_change = 0.0;
};

/// Reduced state for a fixed truncation rc.n_levels (no convergence loop).
RcResult rc_fixed_state(const ModelParams& params, const RcParams& rc, RcMethod method = RcMethod::automatic);

/// Doubles N from opt.n_start until sz and sx change by less than opt.tol.
RcResult rc_mf_state(const ModelParams& params, const RcOptions& opt = {});
RcResult rc_mf_state(const ModelParams& params, double tol, int n_max = 2048);

SpinExpectation rc_expectations(const RcResult& result, const SpinOperators& ops);
SpinExpectation rc_expectations(const ModelParams& params, const RcOptions& opt = {});

} // namespace meanforce
