// classical.hpp — classical mean-force state of the theta-angled spin-boson model
//
// Tracing out a harmonic reservoir from the classical global Gibbs state
// leaves the spin with the effective energy
//
//     H_eff(vt, phi) = -omega_l S0 cos(vt) - Q S0^2 (cos(th) cos(vt) - sin(th) sin(vt) cos(phi))^2
//
// on the sphere of radius S0. Everything in this module is an integral of
// exp(-beta H_eff) against the normalized measure sin(vt) dvt dphi / (4 pi).

#pragma once

#include "meanforce/model.hpp"

#include <cstdint>
#include <vector>

namespace meanforce {

struct ClassicalMoments {
    double z_part = 1.0;    ///< partition function (1/(4 pi) normalization); may overflow to inf
    double log_z = 0.0;     ///< log of z_part, finite where z_part overflows
    double sz = 0.0;        ///< <Sz>/S0
    double sx = 0.0;        ///< <Sx>/S0
    double sz2 = 0.0;       ///< <Sz^2>/S0^2 (Gibbs only)
    double sz3 = 0.0;       ///< <Sz^3>/S0^3 (Gibbs only)
    double quad_err = 0.0;  ///< quadrature error estimate (relative to Z)
    double err_sz = 0.0;    ///< statistical standard errors (sampler only)
    double err_sx = 0.0;
};

struct SphericalPoint {
    double v_theta = 0.0;   ///< polar angle in [0, pi]
    double phi = 0.0;       ///< azimuth in [0, 2 pi)
};

/// The four numbers the classical solvers actually depend on. Unlike
/// ModelParams this allows non-half-integer S0 and angles outside [0, pi/2],
/// which the scaling and symmetry checks need.
struct ClassicalSpin {
    double s0 = 0.5;
    double omega_l = 1.0;
    double theta = 0.0;
    double q = 0.0;
    double beta = 1.0;

    static ClassicalSpin from(const ModelParams& p);
    /// H_eff at a point on the sphere.
    [[nodiscard]] double energy(SphericalPoint p) const;
    /// H_eff restricted to the x-z plane, s = S0 (sin psi, 0, cos psi).
    [[nodiscard]] double energy_xz(double psi) const;
    [[nodiscard]] double energy_xz_d1(double psi) const;
    [[nodiscard]] double energy_xz_d2(double psi) const;
};

/// Closed-form Gibbs statistics of a free classical spin as functions of x = beta omega_l S0.
ClassicalMoments cl_gibbs_stats(double x);

struct LogWeight {
    double value = 0.0;
    bool zero_temperature = false;  ///< value is -H_eff itself (beta = inf)
};

/// -beta H_eff(point). At beta = inf returns the unscaled -H_eff with the flag set.
LogWeight cmf_logweight(SphericalPoint p, const ModelParams& params);

struct CmfOptions {
    double rel_tol = 1e-12;
    int max_panels = 4000;
};

/// Exact classical mean-force expectations by adaptive 2-D quadrature.
/// beta = inf averages over the degenerate global minima of H_eff.
ClassicalMoments cmf_expectations(const ModelParams& params, const CmfOptions& opt = {});
ClassicalMoments cmf_expectations(const ClassicalSpin& spin, const CmfOptions& opt = {});

/// Global minimizers of H_eff (T = 0 orientations), as points in the x-z plane.
std::vector<SphericalPoint> cmf_ground_orientations(const ClassicalSpin& spin);

/// Second-order (in Q) classical expectations; intended for zeta <~ 0.8.
ClassicalMoments cmf_wk_expectations(const ModelParams& params);
ClassicalMoments cmf_wk_expectations(const ClassicalSpin& spin);

/// Q -> infinity limit: sz = cos(th) tanh(b), sx = -sin(th) tanh(b), b = beta omega_l S0 cos(th).
ClassicalMoments cl_us_expectations(const ModelParams& params);

/// Self-normalized importance sampling of exp(-beta H_eff) with a uniform
/// sphere proposal. Deterministic for a fixed seed; rejects beta = inf.
ClassicalMoments cmf_sample(const ModelParams& params, std::uint64_t seed, std::size_t count);
ClassicalMoments cmf_sample(const ClassicalSpin& spin, std::uint64_t seed, std::size_t count);

/// Normalized classical mean-force density tau_MF(vt, phi) with respect to sin(vt) dvt dphi / (4 pi).
double cmf_density(SphericalPoint p, const ClassicalSpin& spin, double log_z);

} // namespace meanforce
