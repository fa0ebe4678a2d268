// bindings.cpp — Python module _meanforce

#include "meanforce/classical.hpp"
#include "meanforce/dynamics.hpp"
#include "meanforce/error.hpp"
#include "meanforce/limits.hpp"
#include "meanforce/rc.hpp"
#include "meanforce/regimes.hpp"
#include "meanforce/spin.hpp"
#include "meanforce/table.hpp"
#include "meanforce/weak.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

namespace py = pybind11;
using namespace meanforce;

namespace {

using OptD = std::optional<double>;

ModelParams make_model(int n, double theta, OptD zeta, OptD q, OptD alpha, OptD t_half, OptD t_spin, OptD beta,
                       double omega_l, double omega_0, double gamma)
{
    if (n < 1) throw ConfigError("n must be >= 1");
    const double s0 = 0.5 * n;
    const int couplings = zeta.has_value() + q.has_value() + alpha.has_value();
    const int temps = t_half.has_value() + t_spin.has_value() + beta.has_value();
    if (couplings != 1) throw ConfigError("give exactly one of zeta, q, alpha");
    if (temps != 1) throw ConfigError("give exactly one of t_half, t_spin, beta");
    const double qv = q ? *q : (zeta ? *zeta : *alpha) * omega_l / s0;
    ModelParams p;
    p.n = n;
    p.omega_l = omega_l;
    p.theta = theta;
    p.bath = BathSpec::lorentzian_with_q(qv, omega_0, gamma);
    p.beta = beta ? *beta : (t_half ? beta_from_t_half(*t_half, omega_l) : beta_from_t_spin(*t_spin, n, omega_l));
    p.validate();
    return p;
}

SpinExpectation from_moments(const ClassicalMoments& m, const char* method)
{
    SpinExpectation e;
    e.sz = m.sz;
    e.sx = m.sx;
    e.err_sz = m.err_sz;
    e.err_sx = m.err_sx;
    e.method = method;
    return e;
}

RegimeConfig regime_config(int n, double gamma, double tol, const std::string& metric, double floor, double rc_tol)
{
    RegimeConfig cfg;
    cfg.n = n;
    cfg.gamma_w = gamma;
    cfg.tol = tol;
    cfg.metric = parse_error_metric(metric);
    cfg.floor = floor;
    cfg.rc.tol = rc_tol;
    return cfg;
}

} // namespace

PYBIND11_MODULE(_meanforce, m)
{
    m.doc() = "Equilibrium mean-force states of the theta-angled spin-boson model";
    m.attr("__version__") = MEANFORCE_VERSION;
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

    py::class_<ModelParams>(m, "ModelParams")
        .def_readonly("n", &ModelParams::n)
        .def_readonly("omega_l", &ModelParams::omega_l)
        .def_readonly("theta", &ModelParams::theta)
        .def_readonly("beta", &ModelParams::beta)
        .def_property_readonly("q", &ModelParams::q)
        .def_property_readonly("s0", &ModelParams::s0)
        .def_property_readonly("zeta", &ModelParams::zeta)
        .def_property_readonly("bath", [](const ModelParams& p) { return p.bath.describe(); })
        .def("__repr__", [](const ModelParams& p) {
            std::ostringstream os;
            os << "ModelParams(n=" << p.n << ", theta=" << p.theta << ", q=" << p.q() << ", beta=" << p.beta
               << ", omega_l=" << p.omega_l << ", bath='" << p.bath.describe() << "')";
            return os.str();
        });

    py::class_<SpinExpectation>(m, "SpinExpectation")
        .def_readonly("sz", &SpinExpectation::sz)
        .def_readonly("sx", &SpinExpectation::sx)
        .def_readonly("sy", &SpinExpectation::sy)
        .def_readonly("err_sz", &SpinExpectation::err_sz)
        .def_readonly("err_sx", &SpinExpectation::err_sx)
        .def_readonly("method", &SpinExpectation::method)
        .def_readonly("converged", &SpinExpectation::converged)
        .def_readonly("n_used", &SpinExpectation::n_used)
        .def("__repr__", [](const SpinExpectation& e) {
            std::ostringstream os;
            os.precision(12);
            os << "SpinExpectation(method='" << e.method << "', sz=" << e.sz << ", sx=" << e.sx << ")";
            return os.str();
        });

    py::class_<BoundaryResult>(m, "BoundaryResult")
        .def_readonly("zeta_star", &BoundaryResult::zeta_star)
        .def_readonly("lower", &BoundaryResult::lower)
        .def_readonly("upper", &BoundaryResult::upper)
        .def_readonly("evaluations", &BoundaryResult::evaluations);

    m.def("model", &make_model, "Model parameters; give one coupling (zeta, q, alpha) and one temperature.",
          py::kw_only(), py::arg("n") = 1, py::arg("theta") = kPi / 4, py::arg("zeta") = py::none(),
          py::arg("q") = py::none(), py::arg("alpha") = py::none(), py::arg("t_half") = py::none(),
          py::arg("t_spin") = py::none(), py::arg("beta") = py::none(), py::arg("omega_l") = 1.0,
          py::arg("omega_0") = 7.0, py::arg("gamma") = 5.0);
    m.def("beta_from_t_half", &beta_from_t_half, py::arg("t_half"), py::arg("omega_l") = 1.0);
    m.def("beta_from_t_spin", &beta_from_t_spin, py::arg("t_spin"), py::arg("n"), py::arg("omega_l") = 1.0);

    m.def("cgibbs", [](const ModelParams& p) {
        if (p.beta == kInf) {
            SpinExpectation e;
            e.sz = 1.0;
            e.method = "cgibbs";
            return e;
        }
        return from_moments(cl_gibbs_stats(p.beta * p.omega_l * p.s0()), "cgibbs");
    });
    m.def("qgibbs", [](const ModelParams& p) {
        SpinExpectation e;
        const auto g = qu_gibbs_stats(p.beta, p.n, p.omega_l);
        e.sz = g.m1 / p.s0();
        e.method = "qgibbs";
        return e;
    });
    m.def(
        "cmf",
        [](const ModelParams& p, double rel_tol) {
            CmfOptions o;
            o.rel_tol = rel_tol;
            return from_moments(cmf_expectations(p, o), "cmf");
        },
        py::arg("params"), py::arg("rel_tol") = 1e-12, py::call_guard<py::gil_scoped_release>());
    m.def("cmf_wk", [](const ModelParams& p) { return from_moments(cmf_wk_expectations(p), "cmf-wk"); });
    m.def("cmf_us", [](const ModelParams& p) { return from_moments(cl_us_expectations(p), "cmf-us"); });
    m.def(
        "cmf_density",
        [](const ModelParams& p, py::array_t<double> v_theta, py::array_t<double> phi) {
            const ClassicalSpin spin = ClassicalSpin::from(p);
            const double log_z = cmf_expectations(spin).log_z;
            auto f = [&](double vt, double ph) { return cmf_density({vt, ph}, spin, log_z); };
            return py::vectorize(f)(v_theta, phi);
        },
        py::arg("params"), py::arg("v_theta"), py::arg("phi"),
        "Normalized classical mean-force density with respect to sin(vt) dvt dphi / (4 pi).");
    m.def("qmf_wk", [](const ModelParams& p) {
        auto e = qmf_wk_expectations(p);
        e.method = "qmf-wk";
        return e;
    });
    m.def(
        "qmf_rc",
        [](const ModelParams& p, double tol, int n_max) {
            RcOptions o;
            o.tol = tol;
            o.n_max = n_max;
            auto e = rc_expectations(p, o);
            e.method = "qmf-rc";
            return e;
        },
        py::arg("params"), py::arg("tol") = 1e-6, py::arg("n_max") = 2048, py::call_guard<py::gil_scoped_release>());
    m.def("qmf_us", [](const ModelParams& p) {
        auto e = us_expectations(p);
        e.method = "qmf-us";
        return e;
    });
    m.def(
        "rc_state",
        [](const ModelParams& p, double tol, int n_max) {
            RcOptions o;
            o.tol = tol;
            o.n_max = n_max;
            RcResult r;
            {
                py::gil_scoped_release release;
                r = rc_mf_state(p, o);
            }
            py::dict d;
            d["rho"] = ComplexMatrix(r.rho.matrix());
            d["n_used"] = r.n_used;
            d["converged"] = r.converged;
            d["log_z_mf"] = r.log_z_mf;
            return d;
        },
        py::arg("params"), py::arg("tol") = 1e-6, py::arg("n_max") = 2048,
        "Reduced spin density matrix from the reaction-coordinate mapping (Sz basis, m = S0 first).");
    m.def(
        "cdyn",
        [](const ModelParams& p, double t_sample, double t_burn, std::uint64_t seed, int ensemble, double dt,
           const std::string& estimator, bool tempering, int threads) {
            SimConfig c;
            c.t_sample = t_sample;
            c.t_burn = t_burn;
            c.seed = seed;
            c.ensemble = ensemble;
            c.dt = dt;
            c.tempering = tempering;
            c.threads = threads;
            if (estimator == "conditional") c.estimator = Estimator::conditional;
            else if (estimator == "plain") c.estimator = Estimator::plain;
            else throw ConfigError("estimator must be conditional or plain");
            py::gil_scoped_release release;
            return simulate_steady(p, c);
        },
        py::arg("params"), py::kw_only(), py::arg("t_sample") = 2000.0, py::arg("t_burn") = 200.0,
        py::arg("seed") = 1, py::arg("ensemble") = 4, py::arg("dt") = 0.0, py::arg("estimator") = "conditional",
        py::arg("tempering") = true, py::arg("threads") = 0);
    m.def(
        "bath_a",
        [](double q, double omega_0, double gamma, double beta, double omega_n) {
            return bath_a(BathSpec::lorentzian_with_q(q, omega_0, gamma), beta, omega_n);
        },
        py::arg("q"), py::arg("omega_0"), py::arg("gamma"), py::arg("beta"), py::arg("omega_n"));
    m.def(
        "find_boundary",
        [](double t_half, double theta, const std::string& approx, const std::string& flavor, int n, double gamma,
           double tol, const std::string& metric, double floor, double rc_tol) {
            const auto cfg = regime_config(n, gamma, tol, metric, floor, rc_tol);
            const auto a = parse_approximation(approx);
            const auto f = parse_flavor(flavor);
            py::gil_scoped_release release;
            return find_boundary(t_half, theta, a, f, cfg);
        },
        py::arg("t_half"), py::arg("theta") = kPi / 4, py::arg("approx") = "wk", py::arg("flavor") = "quantum",
        py::kw_only(), py::arg("n") = 1, py::arg("gamma") = 0.0, py::arg("tol") = 4e-3,
        py::arg("metric") = "relative-norm", py::arg("floor") = 0.0, py::arg("rc_tol") = 1e-6);
    m.def(
        "classify",
        [](double zeta, double t_half, double theta, const std::string& flavor, int n, double gamma, double tol,
           const std::string& metric, double floor) {
            const auto cfg = regime_config(n, gamma, tol, metric, floor, 1e-6);
            const auto f = parse_flavor(flavor);
            RegimePoint pt;
            {
                py::gil_scoped_release release;
                pt = classify(zeta, t_half, theta, f, cfg);
            }
            py::dict d;
            d["zeta"] = pt.zeta;
            d["t_half"] = pt.t_half;
            d["err_uw"] = pt.err_uw;
            d["err_wk"] = pt.err_wk;
            d["err_us"] = pt.err_us;
            d["label"] = to_string(pt.label);
            d["n_rc_used"] = pt.n_rc_used;
            d["backend"] = pt.backend;
            d["failure"] = pt.failure;
            return d;
        },
        py::arg("zeta"), py::arg("t_half"), py::arg("theta") = kPi / 4, py::arg("flavor") = "quantum", py::kw_only(),
        py::arg("n") = 1, py::arg("gamma") = 0.0, py::arg("tol") = 4e-3, py::arg("metric") = "relative-norm",
        py::arg("floor") = 0.0);
    m.def(
        "correspondence",
        [](double alpha, double theta, const std::vector<double>& t_spin, const std::vector<int>& n_list,
           const std::string& quantum) {
            std::vector<double> bp;
            for (double t : t_spin) {
                if (!(t > 0.0)) throw ConfigError("t_spin must be > 0");
                bp.push_back(1.0 / t);
            }
            QuantumMethod qm;
            if (quantum == "wk") qm = QuantumMethod::wk;
            else if (quantum == "rc") qm = QuantumMethod::rc;
            else throw ConfigError("quantum must be wk or rc");
            CorrespondenceSweep s;
            {
                py::gil_scoped_release release;
                s = correspondence_sweep(alpha, theta, bp, n_list, qm);
            }
            py::dict max_dev;
            for (const auto& [n, d] : s.max_dev) max_dev[py::int_(n)] = d;
            py::dict out;
            out["max_dev"] = max_dev;
            out["csv"] = to_csv(s.table(quantum == "wk" ? "qmf-wk" : "qmf-rc"));
            return out;
        },
        py::arg("alpha"), py::arg("theta"), py::arg("t_spin"), py::arg("n_list"), py::arg("quantum") = "wk");
    m.def(
        "regime_atlas",
        [](double theta, const std::vector<double>& zeta_grid, const std::vector<double>& t_grid,
           const std::string& flavor, int n, double gamma, double tol, const std::string& metric, double floor,
           const std::string& cache_file, int threads) {
            const auto cfg = regime_config(n, gamma, tol, metric, floor, 1e-6);
            const auto f = parse_flavor(flavor);
            AtlasOptions ao;
            ao.cache_file = cache_file;
            ao.threads = threads;
            py::gil_scoped_release release;
            return to_csv(regime_atlas(theta, zeta_grid, t_grid, f, cfg, ao));
        },
        py::arg("theta"), py::arg("zeta_grid"), py::arg("t_grid"), py::arg("flavor") = "quantum", py::kw_only(),
        py::arg("n") = 1, py::arg("gamma") = 0.0, py::arg("tol") = 4e-3, py::arg("metric") = "relative-norm",
        py::arg("floor") = 0.0, py::arg("cache_file") = "", py::arg("threads") = 0,
        "Atlas as CSV text (columns zeta, t_half, err_uw, err_wk, err_us, label, n_rc_used, backend, status).");
}
