// dynamics.hpp — classical spin coupled to a damped reaction-coordinate oscillator
//
//     H = -omega_l Sz + c S_theta X + (P^2 + omega_0^2 X^2) / 2,   c = omega_0 sqrt(2 Q),
//
// with friction Gamma and white noise of strength 2 Gamma T on P. The joint
// stationary law is exp(-beta H); integrating out (X, P) leaves exactly the
// classical mean-force state. Each Strang sub-step (exact Ornstein-Uhlenbeck
// update of (X, P) at fixed spin, exact precession at fixed X) leaves that law
// invariant, so the time step affects correlation times but not the target.

#pragma once

#include "meanforce/model.hpp"
#include "meanforce/table.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <tuple>
#include <vector>

namespace meanforce {

struct DynState {
    Eigen::Vector3d s{0.0, 0.0, 0.5};
    double x = 0.0;
    double p = 0.0;
    double t = 0.0;
};

enum class Estimator {
    conditional,  ///< time average of E[s | X] = L(beta S0 |B|) B_hat, same mean, lower variance
    plain,        ///< time average of s itself
};

struct SimConfig {
    double dt = 0.0;          ///< 0 picks the largest allowed step, 0.05 / max(omega_l, omega_0, Gamma)
    double t_burn = 200.0;
    double t_sample = 2000.0;
    int stride = 10;          ///< steps between recorded samples
    std::uint64_t seed = 1;
    int ensemble = 4;
    int threads = 0;          ///< 0 = hardware concurrency
    int blocks = 16;          ///< finest blocks per member for the blocking error analysis
    Estimator estimator = Estimator::conditional;
    /// Replica exchange with hotter copies when the coupling barrier Q S0^2 exceeds
    /// T: temperatures T r^k (r <= 1.5) up to Q S0^2, swaps every swap_every steps.
    bool tempering = true;
    int swap_every = 20;
};

/// Temperatures of the replica ladder used by simulate_steady (first entry is the target).
std::vector<double> tempering_ladder(const ModelParams& params, const SimConfig& cfg);

/// Precomputed constants of one simulation: couplings and the exact
/// half-step propagator of the damped oscillator.
class SpinOscillator {
public:
    SpinOscillator(const ModelParams& params, double dt);

    [[nodiscard]] double coupling() const { return c_; }
    [[nodiscard]] double dt() const { return dt_; }
    [[nodiscard]] double s0() const { return s0_; }
    /// B_eff = omega_l z - c X theta_hat, theta_hat = (-sin(theta), 0, cos(theta)).
    [[nodiscard]] Eigen::Vector3d field(double x) const;
    [[nodiscard]] double energy(const DynState& st) const;
    /// Conditional Gibbs law of X at fixed spin: (centre X*, T, omega_0); X ~ N(X*, T / omega_0^2).
    [[nodiscard]] std::tuple<double, double, double> oscillator_equilibrium(const DynState& st) const;

    /// One Strang step: half oscillator update, precession, half oscillator update.
    void step(DynState& st, std::mt19937_64& rng) const;
    /// Exact precession ds/dt = s x B for time h at fixed B.
    static void precess(Eigen::Vector3d& s, const Eigen::Vector3d& b, double h);

private:
    void oscillator_half(DynState& st, std::mt19937_64& rng) const;

    double omega_l_, theta_, c_, omega_0_, gamma_, temperature_, s0_, dt_;
    Eigen::Matrix2d prop_;   // exp(A dt/2)
    Eigen::Matrix2d noise_;  // lower Cholesky factor of the half-step covariance
};

/// Checks the step bound of SimConfig and the bath; throws ConfigError.
double resolve_dt(const ModelParams& params, const SimConfig& cfg);

/// Free function form of SpinOscillator::step.
DynState langevin_step(const DynState& state, const SpinOscillator& system, std::mt19937_64& rng);

/// Stationary-law sample for the oscillator given the spin, and a uniform spin; used as initial state.
DynState initial_state(const SpinOscillator& system, std::mt19937_64& rng);

/// Member generator: seed and member index mixed through SplitMix64.
std::mt19937_64 member_rng(std::uint64_t seed, std::uint64_t member);

/// Time and ensemble average of s / S0 after burn-in with block standard
/// errors in err_sz / err_sx. Method "cdyn". Rejects theta = 0, which leaves
/// Sz conserved so the spin never equilibrates.
/// Replica swaps and the conditional estimator both leave the sampled law
/// exp(-beta H) unchanged.
SpinExpectation simulate_steady(const ModelParams& params, const SimConfig& cfg = {});

/// Single trajectory of member 0 (no burn-in) with columns t, sx, sy, sz, X, P every stride steps.
SweepTable simulate_trajectory(const ModelParams& params, const SimConfig& cfg, double t_total);

} // namespace meanforce
