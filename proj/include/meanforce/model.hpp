// model.hpp — parameter records, unit conventions and derived quantities
//
// Natural units: hbar = kB = 1. The spin length is carried as the integer
// n = 2*S0 so that the quantum Hilbert-space dimension n+1 stays exact.
// Inverse temperature beta = +infinity is a legal value (T = 0).

#pragma once

#include <limits>
#include <string>
#include <variant>

namespace meanforce {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

/// Underdamped spectral density J(w) = (A G / pi) w / ((w0^2 - w^2)^2 + G^2 w^2).
/// G = 0 is the undamped limit J(w) = Q w0 delta(w - w0), a single bath mode.
struct Lorentzian {
    double a_lor = 0.0;
    double omega_0 = 7.0;
    double gamma_w = 5.0;
};

/// Bath known only through its reorganization energy (enough for classical spins).
struct BareQ {
    double q = 0.0;
};

class BathSpec {
public:
    BathSpec() : shape_(BareQ{}) {}
    static BathSpec lorentzian(double a_lor, double omega_0, double gamma_w);
    /// Lorentzian of given shape whose amplitude is chosen to give reorganization energy q.
    static BathSpec lorentzian_with_q(double q, double omega_0, double gamma_w);
    static BathSpec bare_q(double q);

    [[nodiscard]] bool is_lorentzian() const { return std::holds_alternative<Lorentzian>(shape_); }
    /// Throws ConfigError("spectral shape unavailable") for a BareQ bath.
    [[nodiscard]] const Lorentzian& lorentzian() const;
    [[nodiscard]] double q() const;
    /// Same spectral shape, rescaled to reorganization energy q.
    [[nodiscard]] BathSpec with_q(double q) const;
    [[nodiscard]] std::string describe() const;

private:
    explicit BathSpec(std::variant<Lorentzian, BareQ> s) : shape_(s) {}
    std::variant<Lorentzian, BareQ> shape_;
};

struct ModelParams {
    int n = 1;              ///< spin length S0 = n/2
    double omega_l = 1.0;   ///< Larmor frequency
    double theta = 0.0;     ///< coupling angle in [0, pi/2]
    BathSpec bath;
    double beta = 1.0;      ///< inverse temperature, may be +infinity

    /// Throws ConfigError on violated invariants.
    void validate() const;
    [[nodiscard]] double s0() const { return 0.5 * n; }
    [[nodiscard]] double q() const { return bath.q(); }
    [[nodiscard]] double zeta() const;
    [[nodiscard]] bool zero_temperature() const { return beta == kInf; }
};

/// Normalized spin expectation values s_k = <S_k>/S0 plus diagnostics.
struct SpinExpectation {
    double sz = 0.0;
    double sx = 0.0;
    double sy = 0.0;          ///< diagnostic only, ~0 for this model
    double err_sz = 0.0;      ///< statistical or quadrature error estimate
    double err_sx = 0.0;
    std::string method;
    bool converged = true;
    int n_used = 0;           ///< oscillator levels, samples, ... (method specific)
};

[[nodiscard]] double spin_length(int n);
[[nodiscard]] double lorentzian_q(double a_lor, double omega_0, double gamma_w);
[[nodiscard]] double zeta(double q, double s0, double omega_l);
/// Q = alpha * omega_l / S0 (the coupling scaling that keeps the classical state S0-invariant).
[[nodiscard]] double alpha_scaling(double alpha, double s0, double omega_l = 1.0);
/// Throws ConfigError for a BareQ bath.
[[nodiscard]] double j_eval(const BathSpec& bath, double omega);

/// Temperature axes: t_half = 2T/omega_l and t_spin = T/(S0 omega_l); t_half = n * t_spin.
struct TemperatureScale {
    double t_half = 0.0;
    double t_spin = 0.0;
};

[[nodiscard]] double beta_from_t_half(double t_half, double omega_l = 1.0);
[[nodiscard]] double beta_from_t_spin(double t_spin, int n, double omega_l = 1.0);
[[nodiscard]] TemperatureScale temperature_scale(double beta, int n, double omega_l = 1.0);

} // namespace meanforce
