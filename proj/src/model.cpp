// model.cpp — parameter validation and derived-quantity arithmetic

#include "meanforce/model.hpp"

#include "meanforce/error.hpp"

#include <cmath>
#include <sstream>

namespace meanforce {

BathSpec BathSpec::lorentzian(double a_lor, double omega_0, double gamma_w)
{
    if (!(a_lor >= 0.0) || !(omega_0 > 0.0) || !(gamma_w >= 0.0) || !std::isfinite(gamma_w))
        throw ConfigError("Lorentzian bath needs a_lor >= 0, omega_0 > 0, gamma_w >= 0");
    return BathSpec(Lorentzian{a_lor, omega_0, gamma_w});
}

BathSpec BathSpec::lorentzian_with_q(double q, double omega_0, double gamma_w)
{
    if (!(q >= 0.0)) throw ConfigError("reorganization energy must be >= 0");
    return lorentzian(2.0 * omega_0 * omega_0 * q, omega_0, gamma_w);
}

BathSpec BathSpec::bare_q(double q)
{
    if (!(q >= 0.0) || !std::isfinite(q)) throw ConfigError("reorganization energy must be finite and >= 0");
    return BathSpec(BareQ{q});
}

const Lorentzian& BathSpec::lorentzian() const
{
    if (const auto* l = std::get_if<Lorentzian>(&shape_)) return *l;
    throw ConfigError("spectral shape unavailable: bath is specified by its reorganization energy only");
}

double BathSpec::q() const
{
    if (const auto* l = std::get_if<Lorentzian>(&shape_))
        return lorentzian_q(l->a_lor, l->omega_0, l->gamma_w);
    return std::get<BareQ>(shape_).q;
}

BathSpec BathSpec::with_q(double q) const
{
    if (const auto* l = std::get_if<Lorentzian>(&shape_))
        return lorentzian_with_q(q, l->omega_0, l->gamma_w);
    return bare_q(q);
}

std::string BathSpec::describe() const
{
    std::ostringstream os;
    os.precision(12);
    if (const auto* l = std::get_if<Lorentzian>(&shape_))
        os << "lorentzian(a_lor=" << l->a_lor << ",omega_0=" << l->omega_0 << ",gamma_w=" << l->gamma_w << ")";
    else
        os << "bare_q(q=" << std::get<BareQ>(shape_).q << ")";
    return os.str();
}

void ModelParams::validate() const
{
    if (n < 1) throw ConfigError("spin length index n must be >= 1");
    if (!(omega_l > 0.0) || !std::isfinite(omega_l)) throw ConfigError("omega_l must be a positive finite number");
    if (!(theta >= 0.0 && theta <= 0.5 * kPi + 1e-12)) throw ConfigError("theta must lie in [0, pi/2]");
    if (!(beta >= 0.0)) throw ConfigError("beta must be >= 0 (or +infinity)");
    (void)bath.q();
}

double ModelParams::zeta() const { return meanforce::zeta(q(), s0(), omega_l); }

double spin_length(int n) { return 0.5 * n; }

double lorentzian_q(double a_lor, double omega_0, double /*gamma_w*/)
{
    return a_lor / (2.0 * omega_0 * omega_0);
}

double zeta(double q, double s0, double omega_l) { return q * s0 / omega_l; }

double alpha_scaling(double alpha, double s0, double omega_l) { return alpha * omega_l / s0; }

double j_eval(const BathSpec& bath, double omega)
{
    const Lorentzian& l = bath.lorentzian();
    if (l.gamma_w == 0.0) throw ConfigError("an undamped bath (gamma_w = 0) has a delta-function spectral density");
    const double d = l.omega_0 * l.omega_0 - omega * omega;
    return (l.a_lor * l.gamma_w / kPi) * omega / (d * d + l.gamma_w * l.gamma_w * omega * omega);
}

double beta_from_t_half(double t_half, double omega_l)
{
    if (!(t_half >= 0.0)) throw ConfigError("temperature must be >= 0");
    if (t_half == 0.0) return kInf;
    return 2.0 / (omega_l * t_half);
}

double beta_from_t_spin(double t_spin, int n, double omega_l)
{
    if (!(t_spin >= 0.0)) throw ConfigError("temperature must be >= 0");
    if (t_spin == 0.0) return kInf;
    return 1.0 / (spin_length(n) * omega_l * t_spin);
}

TemperatureScale temperature_scale(double beta, int n, double omega_l)
{
    if (beta == kInf) return {0.0, 0.0};
    if (beta == 0.0) return {kInf, kInf};
    return {2.0 / (omega_l * beta), 1.0 / (spin_length(n) * omega_l * beta)};
}

} // namespace meanforce
