// regimes.hpp — coupling-regime classification (UW / WK / IM / US) and boundary search
//
// A point (zeta, T) is labelled by the first approximation, in the order
// ultraweak (bare Gibbs), weak coupling, ultrastrong, whose error against the
// exact mean-force state is below tol; otherwise it is intermediate (IM).

#pragma once

#include "meanforce/cache.hpp"
#include "meanforce/classical.hpp"
#include "meanforce/model.hpp"
#include "meanforce/rc.hpp"
#include "meanforce/table.hpp"

#include <optional>
#include <string>
#include <vector>

namespace meanforce {

enum class ErrorMetric {
    floored,        ///< max_k |a_k - e_k| / max(|e_k|, floor), k in {z, x}
    relative_norm,  ///< |a - e| / max(|e|, floor) with Euclidean norms of (sz, sx)
};

std::string to_string(ErrorMetric m);
ErrorMetric parse_error_metric(const std::string& s);

double approx_error(const SpinExpectation& exact, const SpinExpectation& approx,
                    ErrorMetric metric = ErrorMetric::floored, double floor = 0.1);

enum class Regime { UW, WK, IM, US };
enum class Approximation { uw, wk, us };
enum class Flavor { quantum, classical };

std::string to_string(Regime r);
std::string to_string(Approximation a);
std::string to_string(Flavor f);
Approximation parse_approximation(const std::string& s);
Flavor parse_flavor(const std::string& s);

/// Precedence UW > WK > US > IM.
Regime regime_label(double err_uw, double err_wk, double err_us, double tol);

/// The defaults compare against the undamped bath (gamma_w = 0), for which the
/// reaction-coordinate state is exact, and use the plain relative error of the
/// vector (sz, sx).
struct RegimeConfig {
    int n = 1;
    double omega_l = 1.0;
    double omega_0 = 7.0;
    double gamma_w = 0.0;
    double tol = 4e-3;
    ErrorMetric metric = ErrorMetric::relative_norm;
    double floor = 0.0;
    RcOptions rc;
};

/// t_half = 0 denotes T = 0.
ModelParams regime_params(double zeta, double t_half, double theta, const RegimeConfig& cfg);

struct RegimePoint {
    double zeta = 0.0;
    double t_half = 0.0;
    double err_uw = 0.0;
    double err_wk = 0.0;
    double err_us = 0.0;
    Regime label = Regime::IM;
    int n_rc_used = 0;      ///< 0 for the classical backend
    std::string backend;    ///< "rc" or "cmf"
    std::string failure;    ///< non-empty when the exact solver failed; errors are then nan
};

struct ExactAndApprox {
    SpinExpectation exact, uw, wk, us;
};

/// Exact state plus the three approximations at one point.
ExactAndApprox regime_states(double zeta, double t_half, double theta, Flavor flavor, const RegimeConfig& cfg);

RegimePoint classify(double zeta, double t_half, double theta, Flavor flavor, const RegimeConfig& cfg);

struct BoundaryResult {
    double zeta_star = 0.0;
    double lower = 0.0;     ///< bracket after bisection, lower < zeta_star < upper
    double upper = 0.0;
    int evaluations = 0;
};

/// Locates, on the grid of 12 points per decade over [1e-3, 1e4], where the
/// approximation changes validity (UW/WK stop being valid, US becomes valid;
/// a single change is assumed), then bisects in log zeta to 2% relative
/// width. Throws ConvergenceError
/// ("no crossing in scan range [1e-3, 1e4]") when nothing changes.
BoundaryResult find_boundary(double t_half, double theta, Approximation approx, Flavor flavor,
                             const RegimeConfig& cfg = {});

struct AtlasOptions {
    std::string cache_file;  ///< empty disables caching
    int threads = 0;         ///< 0 = hardware concurrency
    CacheStats* stats = nullptr;  ///< receives hit/miss counts when set
};

/// One row per (zeta, t_half) cell, zeta varying fastest. Columns:
/// zeta, t_half, err_uw, err_wk, err_us, label, n_rc_used, backend.
SweepTable regime_atlas(double theta, const std::vector<double>& zeta_grid, const std::vector<double>& t_grid,
                        Flavor flavor, const RegimeConfig& cfg = {}, const AtlasOptions& opt = {});

/// Logarithmically spaced grid including both ends.
std::vector<double> log_grid(double lo, double hi, int count);

} // namespace meanforce
