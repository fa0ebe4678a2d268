// regimes.cpp — regime labels, boundary bisection and the cached (zeta, T) atlas

#include "meanforce/regimes.hpp"

#include "meanforce/cache.hpp"

#include "meanforce/error.hpp"
#include "meanforce/limits.hpp"
#include "meanforce/spin.hpp"
#include "meanforce/weak.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace meanforce {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

SpinExpectation from_moments(const ClassicalMoments& m, const char* method)
{
    SpinExpectation e;
    e.sz = m.sz;
    e.sx = m.sx;
    e.method = method;
    return e;
}

} // namespace

std::string to_string(ErrorMetric m) { return m == ErrorMetric::floored ? "floored" : "relative-norm"; }

ErrorMetric parse_error_metric(const std::string& s)
{
    if (s == "floored") return ErrorMetric::floored;
    if (s == "relative-norm") return ErrorMetric::relative_norm;
    throw ConfigError("unknown error metric '" + s + "' (expected floored or relative-norm)");
}

double approx_error(const SpinExpectation& exact, const SpinExpectation& approx, ErrorMetric metric, double floor)
{
    auto ratio = [](double num, double den) { return num == 0.0 ? 0.0 : (den > 0.0 ? num / den : kInf); };
    if (metric == ErrorMetric::floored) {
        const double ez = ratio(std::abs(approx.sz - exact.sz), std::max(std::abs(exact.sz), floor));
        const double ex = ratio(std::abs(approx.sx - exact.sx), std::max(std::abs(exact.sx), floor));
        return std::max(ez, ex);
    }
    const double diff = std::hypot(approx.sz - exact.sz, approx.sx - exact.sx);
    return ratio(diff, std::max(std::hypot(exact.sz, exact.sx), floor));
}

std::string to_string(Regime r)
{
    switch (r) {
    case Regime::UW: return "UW";
    case Regime::WK: return "WK";
    case Regime::IM: return "IM";
    case Regime::US: return "US";
    }
    return "?";
}

std::string to_string(Approximation a)
{
    switch (a) {
    case Approximation::uw: return "uw";
    case Approximation::wk: return "wk";
    case Approximation::us: return "us";
    }
    return "?";
}

std::string to_string(Flavor f) { return f == Flavor::quantum ? "quantum" : "classical"; }

Approximation parse_approximation(const std::string& s)
{
    if (s == "uw" || s == "UW") return Approximation::uw;
    if (s == "wk" || s == "WK") return Approximation::wk;
    if (s == "us" || s == "US") return Approximation::us;
    throw ConfigError("unknown approximation '" + s + "' (expected uw, wk or us)");
}

Flavor parse_flavor(const std::string& s)
{
    if (s == "quantum") return Flavor::quantum;
    if (s == "classical") return Flavor::classical;
    throw ConfigError("unknown flavor '" + s + "' (expected quantum or classical)");
}

Regime regime_label(double err_uw, double err_wk, double err_us, double tol)
{
    if (err_uw < tol) return Regime::UW;
    if (err_wk < tol) return Regime::WK;
    if (err_us < tol) return Regime::US;
    return Regime::IM;
}

ModelParams regime_params(double zeta_value, double t_half, double theta, const RegimeConfig& cfg)
{
    if (!(zeta_value >= 0.0) || !(t_half >= 0.0)) throw ConfigError("zeta and t_half must be >= 0");
    ModelParams p;
    p.n = cfg.n;
    p.omega_l = cfg.omega_l;
    p.theta = theta;
    p.bath = BathSpec::lorentzian_with_q(zeta_value * cfg.omega_l / p.s0(), cfg.omega_0, cfg.gamma_w);
    p.beta = t_half == 0.0 ? kInf : beta_from_t_half(t_half, cfg.omega_l);
    p.validate();
    return p;
}

ExactAndApprox regime_states(double zeta_value, double t_half, double theta, Flavor flavor, const RegimeConfig& cfg)
{
    const ModelParams p = regime_params(zeta_value, t_half, theta, cfg);
    ExactAndApprox out;
    if (flavor == Flavor::quantum) {
        const auto g = qu_gibbs_stats(p.beta, p.n, p.omega_l);
        out.uw.sz = g.m1 / p.s0();
        out.uw.method = "qg";
        // The cutoff tolerance must resolve errors of size tol relative to |s|, which is small at high T.
        RcOptions ro = cfg.rc;
        if (std::abs(out.uw.sz) > 0.0) ro.tol = std::min(ro.tol, 1e-2 * cfg.tol * std::abs(out.uw.sz));
        out.exact = rc_expectations(p, ro);
        out.wk = qmf_wk_expectations(p);
        out.us = us_expectations(p);
    } else {
        const auto exact = cmf_expectations(p);
        out.exact = from_moments(exact, "cmf");
        out.uw = from_moments(cl_gibbs_stats(p.beta * p.omega_l * p.s0()), "cg");
        out.wk = from_moments(cmf_wk_expectations(p), "cmf-wk");
        out.us = from_moments(cl_us_expectations(p), "cmf-us");
    }
    return out;
}

RegimePoint classify(double zeta_value, double t_half, double theta, Flavor flavor, const RegimeConfig& cfg)
{
    RegimePoint pt;
    pt.zeta = zeta_value;
    pt.t_half = t_half;
    pt.backend = flavor == Flavor::quantum ? "rc" : "cmf";
    try {
        const auto s = regime_states(zeta_value, t_half, theta, flavor, cfg);
        pt.err_uw = approx_error(s.exact, s.uw, cfg.metric, cfg.floor);
        pt.err_wk = approx_error(s.exact, s.wk, cfg.metric, cfg.floor);
        pt.err_us = approx_error(s.exact, s.us, cfg.metric, cfg.floor);
        pt.label = regime_label(pt.err_uw, pt.err_wk, pt.err_us, cfg.tol);
        pt.n_rc_used = flavor == Flavor::quantum ? s.exact.n_used : 0;
    } catch (const std::exception& e) {
        pt.err_uw = pt.err_wk = pt.err_us = kNan;
        pt.label = Regime::IM;
        pt.failure = e.what();
    }
    return pt;
}

BoundaryResult find_boundary(double t_half, double theta, Approximation approx, Flavor flavor,
                             const RegimeConfig& cfg)
{
    BoundaryResult res;
    auto valid = [&](double z) {
        ++res.evaluations;
        const auto s = regime_states(z, t_half, theta, flavor, cfg);
        const SpinExpectation& a = approx == Approximation::uw ? s.uw : approx == Approximation::wk ? s.wk : s.us;
        return approx_error(s.exact, a, cfg.metric, cfg.floor) < cfg.tol;
    };
    // UW and WK hold below their boundary, US above it.
    const bool valid_below = approx != Approximation::us;
    const double lo_end = 1e-3, hi_end = 1e4;
    const int per_decade = 12;
    const int steps = static_cast<int>(std::lround(std::log10(hi_end / lo_end) * per_decade));

    // Grid points lo_end * 10^(i / per_decade); monotonicity lets the scan
    // advance a decade at a time and then bisect on the grid indices.
    auto grid = [&](int i) { return lo_end * std::pow(10.0, static_cast<double>(i) / per_decade); };
    if (valid(grid(0)) != valid_below) throw ConvergenceError("no crossing in scan range [1e-3, 1e4]");
    int below = 0, above = -1;
    for (int i = per_decade; above < 0; i += per_decade) {
        const int idx = std::min(i, steps);
        if (valid(grid(idx)) != valid_below)
            above = idx;
        else if (idx == steps)
            throw ConvergenceError("no crossing in scan range [1e-3, 1e4]");
        else
            below = idx;
    }
    while (above - below > 1) {
        const int mid = (above + below) / 2;
        if (valid(grid(mid)) == valid_below)
            below = mid;
        else
            above = mid;
    }
    const double prev = grid(below), cur = grid(above);

    double lo = prev, hi = cur;
    while (hi / lo > 1.02) {
        const double mid = std::sqrt(lo * hi);
        if (valid(mid) == valid_below)
            lo = mid;
        else
            hi = mid;
    }
    res.lower = lo;
    res.upper = hi;
    res.zeta_star = std::sqrt(lo * hi);
    return res;
}

std::vector<double> log_grid(double lo, double hi, int count)
{
    if (!(lo > 0.0) || !(hi >= lo) || count < 1) throw ConfigError("log grid needs 0 < lo <= hi and count >= 1");
    std::vector<double> g(count);
    if (count == 1) {
        g[0] = lo;
        return g;
    }
    for (int i = 0; i < count; ++i) g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
    g.back() = hi;
    return g;
}

namespace {

std::string cell_key(double theta, double zeta_value, double t_half, Flavor flavor, const RegimeConfig& cfg)
{
    std::ostringstream os;
    os << "atlas;" << to_string(flavor) << ';' << key_number(theta) << ';' << key_number(zeta_value) << ';' << key_number(t_half)
       << ';' << cfg.n << ';' << key_number(cfg.omega_l) << ';' << key_number(cfg.omega_0) << ';'
       << key_number(cfg.gamma_w) << ';' << to_string(cfg.metric) << ';' << key_number(cfg.floor) << ';'
       << key_number(cfg.rc.tol) << ';' << cfg.rc.n_max;
    return versioned_key(os.str());
}

std::string encode(const RegimePoint& p)
{
    std::ostringstream os;
    os << key_number(p.err_uw) << ' ' << key_number(p.err_wk) << ' ' << key_number(p.err_us) << ' ' << p.n_rc_used;
    return os.str();
}

bool decode(const std::string& s, RegimePoint& p)
{
    std::istringstream is(s);
    std::string a, b, c;
    int n = 0;
    if (!(is >> a >> b >> c >> n)) return false;
    try {
        p.err_uw = parse_key_number(a);
        p.err_wk = parse_key_number(b);
        p.err_us = parse_key_number(c);
    } catch (const std::exception&) {
        return false;
    }
    p.n_rc_used = n;
    return true;
}

} // namespace

SweepTable regime_atlas(double theta, const std::vector<double>& zeta_grid, const std::vector<double>& t_grid,
                        Flavor flavor, const RegimeConfig& cfg, const AtlasOptions& opt)
{
    struct Cell {
        double zeta, t_half;
        std::string key;
        RegimePoint point;
        bool done = false;
    };
    std::vector<Cell> cells;
    for (double t : t_grid)
        for (double z : zeta_grid) cells.push_back({z, t, cell_key(theta, z, t, flavor, cfg), {}, false});

    ResultCache cache(opt.cache_file);
    for (auto& c : cells) {
        const auto hit = cache.get(c.key);
        if (!hit) continue;
        RegimePoint p;
        p.zeta = c.zeta;
        p.t_half = c.t_half;
        p.backend = flavor == Flavor::quantum ? "rc" : "cmf";
        if (decode(*hit, p)) {
            p.label = regime_label(p.err_uw, p.err_wk, p.err_us, cfg.tol);
            c.point = p;
            c.done = true;
        }
    }

    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < cells.size(); ++i)
        if (!cells[i].done) todo.push_back(i);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < todo.size(); k = next++) {
            Cell& c = cells[todo[k]];
            c.point = classify(c.zeta, c.t_half, theta, flavor, cfg);
            if (c.point.failure.empty()) cache.put(c.key, encode(c.point));
        }
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t n_threads = std::min<std::size_t>(opt.threads > 0 ? opt.threads : hw, todo.size());
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    if (!todo.empty()) worker();
    for (auto& t : pool) t.join();

    if (opt.stats) *opt.stats = cache.stats();

    SweepTable table;
    table.metadata = {{"tol", format_number(cfg.tol)},
                      {"metric", to_string(cfg.metric)},
                      {"floor", format_number(cfg.floor)},
                      {"flavor", to_string(flavor)},
                      {"theta", format_number(theta)},
                      {"n", std::to_string(cfg.n)},
                      {"bath", "lorentzian omega_0=" + format_number(cfg.omega_0) +
                                   " gamma=" + format_number(cfg.gamma_w)},
                      {"rc_tol", format_number(cfg.rc.tol)},
                      {"version", MEANFORCE_VERSION}};
    table.columns = {"zeta", "t_half", "err_uw", "err_wk", "err_us", "label", "n_rc_used", "backend", "status"};
    for (const auto& c : cells) {
        const auto& p = c.point;
        table.add_row({p.zeta, p.t_half, p.err_uw, p.err_wk, p.err_us, to_string(p.label),
                       static_cast<long long>(p.n_rc_used), p.backend, p.failure.empty() ? "ok" : p.failure});
    }
    return table;
}

} // namespace meanforce
