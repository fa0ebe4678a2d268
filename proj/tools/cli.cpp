// cli.cpp — subcommands, cached evaluation of grid cells, CSV emission

#include "cli.hpp"

#include "parse.hpp"

#include "meanforce/cache.hpp"
#include "meanforce/classical.hpp"
#include "meanforce/diagnostics.hpp"
#include "meanforce/dynamics.hpp"
#include "meanforce/error.hpp"
#include "meanforce/limits.hpp"
#include "meanforce/rc.hpp"
#include "meanforce/regimes.hpp"
#include "meanforce/spin.hpp"
#include "meanforce/table.hpp"
#include "meanforce/weak.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

namespace meanforce::cli {

namespace {

const std::vector<std::string> kMethods = {"cgibbs", "qgibbs", "cmf",    "cmf-wk", "cmf-us",
                                           "qmf-wk", "qmf-rc", "qmf-us", "cdyn"};

// Raw option text as given; resolved once the subcommand is known.
struct Options {
    int n = 1;
    double omega_l = 1.0;
    std::string theta = "pi/4";
    double omega_0 = 7.0;
    std::string gamma;
    std::string zeta, q, alpha;
    std::string t_half, t_spin, beta;
    std::string methods = "cmf";
    std::string output = "-";
    std::string cache_dir;
    bool no_cache = false;
    bool no_wall_time = false;
    int threads = 0;

    double cmf_tol = 1e-12;
    double rc_tol = 1e-6;
    int rc_n_max = 2048;
    std::string rc_method = "automatic";

    double dt = 0.0;
    double t_burn = 200.0;
    double t_sample = 2000.0;
    int stride = 10;
    std::uint64_t seed = 1;
    int ensemble = 4;
    int blocks = 16;
    std::string estimator = "conditional";
    bool no_tempering = false;
    int swap_every = 20;
    double trajectory_time = 0.0;

    std::string flavor = "quantum";
    std::string mode = "boundaries";
    std::string approx = "uw,wk,us";
    double tol = 4e-3;
    std::string metric = "relative-norm";
    double floor = 0.0;

    int vt_count = 61;
    int phi_count = 121;

    std::string n_list = "1,2,5,100";
    std::string quantum = "wk";
};

// Everything a single-point solver needs besides the model itself.
struct Tolerances {
    CmfOptions cmf;
    RcOptions rc;
    SimConfig sim;
};

struct Coupling {
    std::string name;  // zeta, q or alpha, as given
    std::vector<double> values;
};

struct Temperature {
    std::string name;  // t-half, t-spin or beta
    std::vector<double> values;
};

struct Cell {
    double q = 0.0;
    double beta = 1.0;
};

double beta_of(const Temperature& t, double v, int n, double omega_l)
{
    if (t.name == "beta") {
        if (!(v >= 0.0)) throw ConfigError("beta must be >= 0");
        return v;
    }
    if (!(v >= 0.0)) throw ConfigError(t.name + " must be >= 0");
    return t.name == "t-half" ? beta_from_t_half(v, omega_l) : beta_from_t_spin(v, n, omega_l);
}

double q_of(const Coupling& c, double v, int n, double omega_l)
{
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(c.name + " must be finite and >= 0");
    if (c.name == "q") return v;
    return v * omega_l / (0.5 * n);  // zeta and alpha both fix Q = value * omega_l / S0
}

Coupling resolve_coupling(const Options& o, const char* fallback)
{
    std::vector<Coupling> given;
    if (!o.zeta.empty()) given.push_back({"zeta", parse_grid(o.zeta)});
    if (!o.q.empty()) given.push_back({"q", parse_grid(o.q)});
    if (!o.alpha.empty()) given.push_back({"alpha", parse_grid(o.alpha)});
    if (given.size() > 1) throw ConfigError("give only one of --zeta, --q, --alpha");
    if (given.empty()) {
        if (!fallback) throw ConfigError("one of --zeta, --q, --alpha is required");
        return {"zeta", parse_grid(fallback)};
    }
    return given.front();
}

Temperature resolve_temperature(const Options& o, const char* fallback)
{
    std::vector<Temperature> given;
    if (!o.t_half.empty()) given.push_back({"t-half", parse_grid(o.t_half)});
    if (!o.t_spin.empty()) given.push_back({"t-spin", parse_grid(o.t_spin)});
    if (!o.beta.empty()) given.push_back({"beta", parse_grid(o.beta)});
    if (given.size() > 1) throw ConfigError("give only one of --t-half, --t-spin, --beta");
    if (given.empty()) {
        if (!fallback) throw ConfigError("one of --t-half, --t-spin, --beta is required");
        return {"t-half", parse_grid(fallback)};
    }
    return given.front();
}

double resolve_gamma(const Options& o, double fallback)
{
    return o.gamma.empty() ? fallback : parse_number(o.gamma);
}

ModelParams make_params(const Options& o, double theta, double gamma, Cell c)
{
    ModelParams p;
    p.n = o.n;
    p.omega_l = o.omega_l;
    p.theta = theta;
    p.bath = BathSpec::lorentzian_with_q(c.q, o.omega_0, gamma);
    p.beta = c.beta;
    p.validate();
    return p;
}

Tolerances make_tolerances(const Options& o, bool inner_parallel)
{
    Tolerances t;
    t.cmf.rel_tol = o.cmf_tol;
    t.rc.tol = o.rc_tol;
    t.rc.n_max = o.rc_n_max;
    t.rc.throw_on_failure = false;
    if (o.rc_method == "automatic") t.rc.method = RcMethod::automatic;
    else if (o.rc_method == "eigen") t.rc.method = RcMethod::eigen;
    else if (o.rc_method == "chebyshev") t.rc.method = RcMethod::chebyshev;
    else throw ConfigError("rc-method must be automatic, eigen or chebyshev");
    t.sim.dt = o.dt;
    t.sim.t_burn = o.t_burn;
    t.sim.t_sample = o.t_sample;
    t.sim.stride = o.stride;
    t.sim.seed = o.seed;
    t.sim.ensemble = o.ensemble;
    t.sim.blocks = o.blocks;
    t.sim.tempering = !o.no_tempering;
    t.sim.swap_every = o.swap_every;
    t.sim.threads = inner_parallel ? o.threads : 1;
    if (o.estimator == "conditional") t.sim.estimator = Estimator::conditional;
    else if (o.estimator == "plain") t.sim.estimator = Estimator::plain;
    else throw ConfigError("estimator must be conditional or plain");
    return t;
}

std::string tolerance_key(const std::string& method, const Tolerances& t)
{
    std::ostringstream os;
    if (method == "cmf") os << "cmf_tol=" << key_number(t.cmf.rel_tol);
    if (method == "qmf-rc")
        os << "rc_tol=" << key_number(t.rc.tol) << ",n_max=" << t.rc.n_max << ",rc_method=" << static_cast<int>(t.rc.method);
    if (method == "cdyn")
        os << "dt=" << key_number(t.sim.dt) << ",burn=" << key_number(t.sim.t_burn)
           << ",sample=" << key_number(t.sim.t_sample) << ",stride=" << t.sim.stride << ",seed=" << t.sim.seed
           << ",ensemble=" << t.sim.ensemble << ",blocks=" << t.sim.blocks
           << ",estimator=" << static_cast<int>(t.sim.estimator) << ",tempering=" << t.sim.tempering
           << ",swap=" << t.sim.swap_every;
    return os.str();
}

std::string model_key(const ModelParams& p)
{
    const Lorentzian& l = p.bath.lorentzian();
    std::ostringstream os;
    os << "n=" << p.n << ",wl=" << key_number(p.omega_l) << ",theta=" << key_number(p.theta)
       << ",w0=" << key_number(l.omega_0) << ",gamma=" << key_number(l.gamma_w) << ",q=" << key_number(p.q())
       << ",beta=" << key_number(p.beta);
    return os.str();
}

SpinExpectation from_moments(const ClassicalMoments& m, const std::string& method, bool quad)
{
    SpinExpectation e;
    e.sz = m.sz;
    e.sx = m.sx;
    e.err_sz = quad ? m.quad_err : m.err_sz;
    e.err_sx = quad ? m.quad_err : m.err_sx;
    e.method = method;
    return e;
}

SpinExpectation evaluate(const std::string& method, const ModelParams& p, const Tolerances& t)
{
    if (method == "cgibbs") {
        if (p.beta == kInf) {
            SpinExpectation e;
            e.sz = 1.0;
            e.method = method;
            return e;
        }
        return from_moments(cl_gibbs_stats(p.beta * p.omega_l * p.s0()), method, false);
    }
    if (method == "qgibbs") {
        SpinExpectation e;
        e.sz = qu_gibbs_stats(p.beta, p.n, p.omega_l).m1 / p.s0();
        e.method = method;
        return e;
    }
    if (method == "cmf") return from_moments(cmf_expectations(p, t.cmf), method, true);
    if (method == "cmf-wk") return from_moments(cmf_wk_expectations(p), method, false);
    if (method == "cmf-us") return from_moments(cl_us_expectations(p), method, false);
    SpinExpectation e;
    if (method == "qmf-wk") e = qmf_wk_expectations(p);
    else if (method == "qmf-rc") e = rc_expectations(p, t.rc);
    else if (method == "qmf-us") e = us_expectations(p);
    else if (method == "cdyn") e = simulate_steady(p, t.sim);
    else throw ConfigError("unknown method '" + method + "'");
    e.method = method;
    return e;
}

std::string encode(const SpinExpectation& e)
{
    std::ostringstream os;
    os << key_number(e.sz) << ' ' << key_number(e.sx) << ' ' << key_number(e.err_sz) << ' ' << key_number(e.err_sx)
       << ' ' << e.n_used << ' ' << (e.converged ? 1 : 0);
    return os.str();
}

std::optional<SpinExpectation> decode(const std::string& s, const std::string& method)
{
    std::istringstream is(s);
    std::string a, b, c, d;
    int n_used = 0, conv = 0;
    if (!(is >> a >> b >> c >> d >> n_used >> conv)) return std::nullopt;
    SpinExpectation e;
    try {
        e.sz = parse_key_number(a);
        e.sx = parse_key_number(b);
        e.err_sz = parse_key_number(c);
        e.err_sx = parse_key_number(d);
    } catch (const std::exception&) {
        return std::nullopt;
    }
    e.n_used = n_used;
    e.converged = conv != 0;
    e.method = method;
    return e;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn)
{
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t n = std::min<std::size_t>(threads > 0 ? threads : hw, count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) fn(i);
    };
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < n; ++i) pool.emplace_back(worker);
    if (count > 0) worker();
    for (auto& t : pool) t.join();
}

// Run-wide state: cache, exit status and report lines.
class Session {
public:
    Session(const Options& o, const std::string& command, std::ostream& err) : err_(err)
    {
        std::string dir = o.cache_dir;
        if (dir.empty())
            if (const char* env = std::getenv("MEANFORCE_CACHE_DIR")) dir = env;
        if (!o.no_cache && !dir.empty()) cache_ = std::make_unique<ResultCache>((std::filesystem::path(dir) / (command + ".cache")).string());
        else cache_ = std::make_unique<ResultCache>();
    }

    ResultCache& cache() { return *cache_; }
    void add_stats(const CacheStats& st)
    {
        extra_.hits += st.hits;
        extra_.misses += st.misses;
    }

    void note_failure(int code)
    {
        int cur = status_.load();
        while (code > cur && !status_.compare_exchange_weak(cur, code)) {}
    }
    [[nodiscard]] int status() const { return status_.load(); }

    void report_cache()
    {
        if (!cache_->enabled()) {
            err_ << "meanforce: cache: disabled\n";
            return;
        }
        auto s = cache_->stats();
        s.hits += extra_.hits;
        s.misses += extra_.misses;
        const std::size_t total = s.hits + s.misses;
        if (total == 0) {
            err_ << "meanforce: cache: nothing cacheable in this run\n";
            return;
        }
        const double pct = total == 0 ? 100.0 : 100.0 * static_cast<double>(s.hits) / static_cast<double>(total);
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.0f", pct);
        err_ << "meanforce: cache: " << s.hits << "/" << total << " hits (" << buf << "%) in "
             << std::filesystem::path(cache_->path()).parent_path().string() << '\n';
    }

private:
    std::ostream& err_;
    std::unique_ptr<ResultCache> cache_;
    std::atomic<int> status_{kExitOk};
    CacheStats extra_;
};

// One evaluated cell of a sweep; status "ok" or the failure text.
struct Evaluated {
    SpinExpectation e;
    std::string status = "ok";
};

Evaluated evaluate_cached(Session& s, const std::string& method, const ModelParams& p, const Tolerances& t)
{
    const std::string key = versioned_key("point;" + method + ";" + model_key(p) + ";" + tolerance_key(method, t));
    Evaluated out;
    if (auto hit = s.cache().get(key)) {
        if (auto e = decode(*hit, method)) {
            out.e = *e;
            if (!out.e.converged) out.status = "not converged";
            if (!out.e.converged) s.note_failure(kExitConvergence);
            return out;
        }
    }
    try {
        out.e = evaluate(method, p, t);
        if (!out.e.converged) {
            out.status = "not converged";
            s.note_failure(kExitConvergence);
        }
        s.cache().put(key, encode(out.e));
    } catch (const ConvergenceError& ex) {
        out.e.sz = out.e.sx = out.e.err_sz = out.e.err_sx = std::nan("");
        out.e.converged = false;
        out.status = ex.what();
        s.note_failure(kExitConvergence);
    } catch (const ConfigError& ex) {
        out.e.sz = out.e.sx = out.e.err_sz = out.e.err_sx = std::nan("");
        out.e.converged = false;
        out.status = ex.what();
        s.note_failure(kExitConfig);
    }
    return out;
}

void check_methods(const std::vector<std::string>& methods, double theta)
{
    for (const auto& m : methods) {
        if (std::find(kMethods.begin(), kMethods.end(), m) == kMethods.end())
            throw ConfigError("unknown method '" + m + "'");
        if (m == "cdyn" && theta == 0.0) throw ConfigError("method cdyn requires theta > 0");
    }
}

SweepTable sweep_table(const Options& o, double theta, double gamma, const Coupling& coupling,
                       const Temperature& temperature, const std::vector<std::string>& methods, Session& s)
{
    struct Job {
        std::string method;
        double cv, tv;
        ModelParams p;
        Evaluated r;
    };
    std::vector<Job> jobs;
    for (const auto& m : methods)
        for (double cv : coupling.values)
            for (double tv : temperature.values) {
                const Cell c{q_of(coupling, cv, o.n, o.omega_l), beta_of(temperature, tv, o.n, o.omega_l)};
                jobs.push_back({m, cv, tv, make_params(o, theta, gamma, c), {}});
            }
    const Tolerances tol = make_tolerances(o, jobs.size() == 1);
    parallel_for(jobs.size(), o.threads, [&](std::size_t i) { jobs[i].r = evaluate_cached(s, jobs[i].method, jobs[i].p, tol); });

    SweepTable table;
    table.columns = {"method", "zeta",   "q",      "t_half",  "t_spin",    "beta",  "sz",
                     "sx",     "err_sz", "err_sx", "n_used",  "converged", "status"};
    for (const auto& j : jobs) {
        const auto ts = temperature_scale(j.p.beta, j.p.n, j.p.omega_l);
        table.add_row({j.method, j.p.zeta(), j.p.q(), ts.t_half, ts.t_spin, j.p.beta, j.r.e.sz, j.r.e.sx, j.r.e.err_sz,
                       j.r.e.err_sx, static_cast<long long>(j.r.e.n_used), static_cast<long long>(j.r.e.converged),
                       j.r.status});
    }
    return table;
}

int cmd_sweep(const Options& o, bool over_temperature, SweepTable& table, Session& s)
{
    const double theta = parse_angle(o.theta);
    const double gamma = resolve_gamma(o, 5.0);
    const auto methods = parse_word_list(o.methods);
    check_methods(methods, theta);
    const Coupling c = resolve_coupling(o, nullptr);
    const Temperature t = resolve_temperature(o, nullptr);
    if (over_temperature && c.values.size() != 1) throw ConfigError("sweep-temperature takes a single coupling value");
    if (!over_temperature && t.values.size() != 1) throw ConfigError("sweep-coupling takes a single temperature value");
    table = sweep_table(o, theta, gamma, c, t, methods, s);
    return s.status();
}

int cmd_dynamics(const Options& o, SweepTable& table, Session& s)
{
    const double theta = parse_angle(o.theta);
    if (theta == 0.0) throw ConfigError("dynamics requires theta > 0");
    const double gamma = resolve_gamma(o, 5.0);
    const Coupling c = resolve_coupling(o, nullptr);
    const Temperature t = resolve_temperature(o, nullptr);
    if (c.values.size() != 1) throw ConfigError("dynamics takes a single coupling value");
    if (o.trajectory_time > 0.0) {
        if (t.values.size() != 1) throw ConfigError("a trajectory needs a single temperature");
        const Cell cell{q_of(c, c.values[0], o.n, o.omega_l), beta_of(t, t.values[0], o.n, o.omega_l)};
        table = simulate_trajectory(make_params(o, theta, gamma, cell), make_tolerances(o, true).sim, o.trajectory_time);
        return s.status();
    }
    table = sweep_table(o, theta, gamma, c, t, {"cdyn"}, s);
    return s.status();
}

int cmd_regimes(const Options& o, SweepTable& table, Session& s)
{
    const double theta = parse_angle(o.theta);
    const Flavor flavor = parse_flavor(o.flavor);
    RegimeConfig cfg;
    cfg.n = o.n;
    cfg.omega_l = o.omega_l;
    cfg.omega_0 = o.omega_0;
    cfg.gamma_w = resolve_gamma(o, 0.0);
    cfg.tol = o.tol;
    cfg.metric = parse_error_metric(o.metric);
    cfg.floor = o.floor;
    cfg.rc.tol = o.rc_tol;
    cfg.rc.n_max = o.rc_n_max;
    if (!(cfg.tol > 0.0)) throw ConfigError("tol must be > 0");
    if (!o.t_spin.empty() || !o.beta.empty()) throw ConfigError("regimes takes its temperature axis as --t-half");
    const auto t_grid = parse_grid(o.t_half.empty() ? "0" : o.t_half);
    for (double t : t_grid)
        if (!(t >= 0.0)) throw ConfigError("t-half must be >= 0");

    if (o.mode == "atlas") {
        if (!o.q.empty() || !o.alpha.empty()) throw ConfigError("the atlas grid is given as --zeta");
        const auto z_grid = parse_grid(o.zeta.empty() ? "1e-3:1e4:85:log" : o.zeta);
        AtlasOptions ao;
        ao.threads = o.threads;
        CacheStats stats;
        ao.stats = &stats;
        std::string path;
        if (s.cache().enabled()) path = (std::filesystem::path(s.cache().path()).parent_path() / "regimes-atlas.cache").string();
        ao.cache_file = path;
        table = regime_atlas(theta, z_grid, t_grid, flavor, cfg, ao);
        for (std::size_t r = 0; r < table.rows.size(); ++r)
            if (std::get<std::string>(table.rows[r][table.column("status")]) != "ok") s.note_failure(kExitConvergence);
        s.add_stats(stats);
        return s.status();
    }
    if (o.mode != "boundaries") throw ConfigError("mode must be boundaries or atlas");
    if (!o.zeta.empty() || !o.q.empty() || !o.alpha.empty())
        throw ConfigError("boundaries scan zeta themselves; use --mode atlas for a zeta grid");

    std::vector<Approximation> approx;
    for (const auto& a : parse_word_list(o.approx)) approx.push_back(parse_approximation(a));
    struct Job {
        double t;
        Approximation a;
        BoundaryResult r;
        std::string status = "ok";
    };
    std::vector<Job> jobs;
    for (double t : t_grid)
        for (auto a : approx) jobs.push_back({t, a, {}});
    parallel_for(jobs.size(), o.threads, [&](std::size_t i) {
        Job& j = jobs[i];
        std::ostringstream key;
        key << "boundary;" << to_string(flavor) << ";" << to_string(j.a) << ";t=" << key_number(j.t)
            << ";theta=" << key_number(theta) << ";n=" << cfg.n << ";wl=" << key_number(cfg.omega_l)
            << ";w0=" << key_number(cfg.omega_0) << ";gamma=" << key_number(cfg.gamma_w)
            << ";tol=" << key_number(cfg.tol) << ";metric=" << to_string(cfg.metric)
            << ";floor=" << key_number(cfg.floor) << ";rc_tol=" << key_number(cfg.rc.tol) << ";n_max=" << cfg.rc.n_max;
        const std::string k = versioned_key(key.str());
        if (auto hit = s.cache().get(k)) {
            std::istringstream is(*hit);
            std::string a, b, c;
            int ev = 0;
            if (is >> a >> b >> c >> ev) {
                try {
                    j.r.zeta_star = parse_key_number(a);
                    j.r.lower = parse_key_number(b);
                    j.r.upper = parse_key_number(c);
                    j.r.evaluations = ev;
                    return;
                } catch (const std::exception&) {
                }
            }
        }
        try {
            j.r = find_boundary(j.t, theta, j.a, flavor, cfg);
            s.cache().put(k, key_number(j.r.zeta_star) + " " + key_number(j.r.lower) + " " + key_number(j.r.upper) +
                                 " " + std::to_string(j.r.evaluations));
        } catch (const ConvergenceError& e) {
            j.r.zeta_star = j.r.lower = j.r.upper = std::nan("");
            j.status = e.what();
            // A missing crossing is a result, not a solver failure.
            if (j.status.find("no crossing") == std::string::npos) s.note_failure(kExitConvergence);
        }
    });
    table.metadata = {{"tol", format_number(cfg.tol)},
                      {"metric", to_string(cfg.metric)},
                      {"floor", format_number(cfg.floor)},
                      {"bath", "lorentzian omega_0=" + format_number(cfg.omega_0) + " gamma=" + format_number(cfg.gamma_w)}};
    table.columns = {"flavor", "theta", "t_half", "approx", "zeta_star", "lower", "upper", "evaluations", "status"};
    for (const auto& j : jobs)
        table.add_row({to_string(flavor), theta, j.t, to_string(j.a), j.r.zeta_star, j.r.lower, j.r.upper,
                       static_cast<long long>(j.r.evaluations), j.status});
    return s.status();
}

int cmd_density_map(const Options& o, SweepTable& table, Session& s)
{
    const double theta = parse_angle(o.theta);
    const Coupling c = resolve_coupling(o, "1");
    const Temperature t = resolve_temperature(o, nullptr);
    if (c.values.size() != 1 || t.values.size() != 1) throw ConfigError("density-map takes single coupling and temperature values");
    if (o.vt_count < 2 || o.phi_count < 2) throw ConfigError("vt-count and phi-count must be >= 2");
    ClassicalSpin spin;
    spin.s0 = 0.5 * o.n;
    spin.omega_l = o.omega_l;
    spin.theta = theta;
    spin.q = q_of(c, c.values[0], o.n, o.omega_l);
    spin.beta = beta_of(t, t.values[0], o.n, o.omega_l);
    if (spin.beta == kInf) throw ConfigError("the density map needs T > 0");
    if (o.n < 1) throw ConfigError("n must be >= 1");

    CmfOptions co;
    co.rel_tol = o.cmf_tol;
    const std::string key = versioned_key("logz;s0=" + key_number(spin.s0) + ";wl=" + key_number(spin.omega_l) +
                                          ";theta=" + key_number(theta) + ";q=" + key_number(spin.q) +
                                          ";beta=" + key_number(spin.beta) + ";cmf_tol=" + key_number(co.rel_tol));
    double log_z = 0.0;
    bool have = false;
    if (auto hit = s.cache().get(key)) {
        try {
            log_z = parse_key_number(*hit);
            have = true;
        } catch (const std::exception&) {
        }
    }
    if (!have) {
        log_z = cmf_expectations(spin, co).log_z;
        s.cache().put(key, key_number(log_z));
    }
    table.metadata = {{"log_z", format_number(log_z)}};
    table.columns = {"v_theta", "phi", "density"};
    for (int i = 0; i < o.vt_count; ++i) {
        const double vt = kPi * i / (o.vt_count - 1);
        for (int k = 0; k < o.phi_count; ++k) {
            const double phi = 2.0 * kPi * k / (o.phi_count - 1);
            table.add_row({vt, phi, cmf_density({vt, phi}, spin, log_z)});
        }
    }
    return s.status();
}

int cmd_correspondence(const Options& o, SweepTable& table, Session& s)
{
    const double theta = parse_angle(o.theta);
    if (!o.zeta.empty() || !o.q.empty()) throw ConfigError("correspondence fixes the coupling through --alpha");
    const double alpha = parse_number(o.alpha.empty() ? "0.06" : o.alpha);
    if (!o.t_half.empty() || !o.beta.empty()) throw ConfigError("correspondence takes its temperature axis as --t-spin");
    const auto t_grid = parse_grid(o.t_spin.empty() ? "0.05:5:40:log" : o.t_spin);
    std::vector<double> bp;
    for (double t : t_grid) {
        if (!(t > 0.0)) throw ConfigError("t-spin must be > 0");
        bp.push_back(1.0 / (t * o.omega_l));
    }
    const auto n_list = parse_int_list(o.n_list);
    QuantumMethod qm;
    if (o.quantum == "wk") qm = QuantumMethod::wk;
    else if (o.quantum == "rc") qm = QuantumMethod::rc;
    else throw ConfigError("quantum must be wk or rc");
    CorrespondenceOptions co;
    co.omega_0 = o.omega_0;
    co.gamma_w = resolve_gamma(o, 5.0);
    co.omega_l = o.omega_l;
    co.rc_tol = o.rc_tol;

    std::ostringstream key;
    key << "correspondence;alpha=" << key_number(alpha) << ";theta=" << key_number(theta) << ";quantum=" << o.quantum
        << ";w0=" << key_number(co.omega_0) << ";gamma=" << key_number(co.gamma_w) << ";wl=" << key_number(co.omega_l)
        << ";rc_tol=" << key_number(co.rc_tol) << ";bp=";
    for (double b : bp) key << key_number(b) << ',';
    key << ";n=";
    for (int n : n_list) key << n << ',';
    const std::string k = versioned_key(key.str());

    CorrespondenceSweep sweep;
    bool have = false;
    if (auto hit = s.cache().get(k)) {
        std::istringstream is(*hit);
        std::string tok;
        try {
            while (is >> tok) {
                std::istringstream fs(tok);
                std::string kind;
                std::getline(fs, kind, ',');
                std::vector<std::string> f;
                for (std::string x; std::getline(fs, x, ',');) f.push_back(x);
                if (kind == "r" && f.size() == 6) {
                    sweep.rows.push_back({std::stoi(f[0]), parse_key_number(f[1]), parse_key_number(f[2]),
                                          parse_key_number(f[3]), parse_key_number(f[4]), f[5] == "1"});
                } else if (kind == "m" && f.size() == 2) {
                    sweep.max_dev.emplace_back(std::stoi(f[0]), parse_key_number(f[1]));
                } else {
                    throw std::invalid_argument("bad record");
                }
            }
            have = true;
        } catch (const std::exception&) {
            sweep = {};
        }
    }
    if (!have) {
        sweep = correspondence_sweep(alpha, theta, bp, n_list, qm, co);
        std::ostringstream payload;
        for (const auto& r : sweep.rows)
            payload << "r," << r.n << ',' << key_number(r.beta_prime) << ',' << key_number(r.sz) << ','
                    << key_number(r.sx) << ',' << key_number(r.dev) << ',' << (r.converged ? 1 : 0) << ' ';
        for (const auto& [n, d] : sweep.max_dev) payload << "m," << n << ',' << key_number(d) << ' ';
        std::string p = payload.str();
        if (!p.empty()) p.pop_back();
        s.cache().put(k, p);
    }
    for (const auto& r : sweep.rows)
        if (!r.converged) s.note_failure(kExitConvergence);
    table = sweep.table(o.quantum == "wk" ? "qmf-wk" : "qmf-rc");
    for (const auto& [n, d] : sweep.max_dev) table.metadata.emplace_back("max_dev_n" + std::to_string(n), format_number(d));
    return s.status();
}

// Option registration shared by the subcommands.
void add_model(CLI::App* sub, Options& o)
{
    sub->add_option("--n", o.n, "spin length index, S0 = n/2")->capture_default_str();
    sub->add_option("--omega-l", o.omega_l, "Larmor frequency")->capture_default_str();
    sub->add_option("--theta", o.theta, "coupling angle in radians or as pi/4, pi/2, ...")->capture_default_str();
    sub->add_option("--omega-0", o.omega_0, "Lorentzian peak frequency")->capture_default_str();
    sub->add_option("--gamma", o.gamma, "Lorentzian width (default 5; 0 for regimes)");
}

void add_coupling(CLI::App* sub, Options& o)
{
    sub->add_option("--zeta", o.zeta, "dimensionless coupling Q S0 / omega_l (value or grid)");
    sub->add_option("--q", o.q, "reorganization energy Q (value or grid)");
    sub->add_option("--alpha", o.alpha, "coupling with Q = alpha omega_l / S0 (value or grid)");
}

void add_temperature(CLI::App* sub, Options& o)
{
    sub->add_option("--t-half", o.t_half, "2T / omega_l (value or grid min:max:count[:log])");
    sub->add_option("--t-spin", o.t_spin, "T / (S0 omega_l) (value or grid)");
    sub->add_option("--beta", o.beta, "inverse temperature (value or grid)");
}

void add_solver(CLI::App* sub, Options& o)
{
    sub->add_option("--cmf-tol", o.cmf_tol, "relative tolerance of the classical quadrature")->capture_default_str();
    sub->add_option("--rc-tol", o.rc_tol, "reaction-coordinate cutoff convergence tolerance")->capture_default_str();
    sub->add_option("--rc-n-max", o.rc_n_max, "largest reaction-coordinate cutoff")->capture_default_str();
    sub->add_option("--rc-method", o.rc_method, "automatic, eigen or chebyshev")->capture_default_str();
}

void add_dynamics(CLI::App* sub, Options& o)
{
    sub->add_option("--dt", o.dt, "time step (0 = largest allowed)")->capture_default_str();
    sub->add_option("--t-burn", o.t_burn, "burn-in time")->capture_default_str();
    sub->add_option("--t-sample", o.t_sample, "sampling time per ensemble member")->capture_default_str();
    sub->add_option("--stride", o.stride, "steps between samples")->capture_default_str();
    sub->add_option("--seed", o.seed, "random seed")->capture_default_str();
    sub->add_option("--ensemble", o.ensemble, "independent trajectories")->capture_default_str();
    sub->add_option("--blocks", o.blocks, "finest blocks per trajectory for the blocking error analysis")->capture_default_str();
    sub->add_option("--estimator", o.estimator, "conditional or plain")->capture_default_str();
    sub->add_flag("--no-tempering", o.no_tempering, "disable replica exchange");
    sub->add_option("--swap-every", o.swap_every, "steps between replica swap attempts")->capture_default_str();
}

void add_output(CLI::App* sub, Options& o)
{
    sub->add_option("--output,-o", o.output, "CSV path, - for stdout")->capture_default_str();
    sub->add_option("--cache-dir", o.cache_dir, "cache directory (default $MEANFORCE_CACHE_DIR)");
    sub->add_flag("--no-cache", o.no_cache, "neither read nor write the cache");
    sub->add_flag("--no-wall-time", o.no_wall_time, "omit the wall-time line, making reruns byte-identical");
    sub->add_option("--threads", o.threads, "worker threads (0 = all cores)")->capture_default_str();
    sub->add_option("--config", "flat key = value file; flags override it");
}

// Pulls --config out of the argument list and splices its entries in as
// --key=value tokens placed before the explicit flags, so flags win.
std::vector<std::string> expand_config(const std::vector<std::string>& args)
{
    std::vector<std::string> rest;
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw ConfigError("--config needs a file");
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (path.empty()) return rest;
    const auto entries = read_config_file(path);
    std::string command;
    std::vector<std::string> tokens;
    for (const auto& [k, v] : entries) {
        if (k == "command") command = v;
        else tokens.push_back("--" + k + "=" + v);
    }
    std::vector<std::string> out;
    std::size_t start = 0;
    if (!rest.empty() && rest[0].rfind("-", 0) != 0) {
        out.push_back(rest[0]);
        start = 1;
    } else if (!command.empty()) {
        out.push_back(command);
    } else {
        throw ConfigError("no command given");
    }
    out.insert(out.end(), tokens.begin(), tokens.end());
    out.insert(out.end(), rest.begin() + static_cast<long>(start), rest.end());
    return out;
}

std::vector<std::pair<std::string, std::string>> echo_options(const CLI::App* sub)
{
    std::vector<std::pair<std::string, std::string>> echo;
    for (const CLI::Option* opt : sub->get_options()) {
        const std::string name = opt->get_single_name();
        if (name == "help" || name == "config" || name == "output" || name == "cache-dir") continue;
        std::string value;
        if (opt->count() > 0) {
            const auto res = opt->results();
            value = res.empty() ? "true" : res.back();
        } else {
            value = opt->get_default_str();
        }
        if (!value.empty()) echo.emplace_back(name, value);
    }
    return echo;
}

} // namespace

int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err)
{
    const auto started = std::chrono::steady_clock::now();
    Options o;
    CLI::App app{"meanforce: equilibrium mean-force states of the theta-angled spin-boson model"};
    app.set_version_flag("--version", std::string(MEANFORCE_VERSION));
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    auto* st = app.add_subcommand("sweep-temperature", "spin expectations over a temperature grid");
    auto* sc = app.add_subcommand("sweep-coupling", "spin expectations over a coupling grid");
    auto* rg = app.add_subcommand("regimes", "coupling-regime boundaries or a (zeta, T) atlas");
    auto* dm = app.add_subcommand("density-map", "classical mean-force density on a (v_theta, phi) grid");
    auto* dy = app.add_subcommand("dynamics", "stochastic spin dynamics: steady states or a trajectory");
    auto* co = app.add_subcommand("correspondence", "quantum spins of growing length against the classical state");
    for (auto* sub : {st, sc, rg, dm, dy, co}) {
        sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        add_output(sub, o);
    }
    for (auto* sub : {st, sc}) {
        add_model(sub, o);
        add_coupling(sub, o);
        add_temperature(sub, o);
        sub->add_option("--methods", o.methods, "comma list of cgibbs, qgibbs, cmf, cmf-wk, cmf-us, qmf-wk, qmf-rc, qmf-us, cdyn")
            ->capture_default_str();
        add_solver(sub, o);
        add_dynamics(sub, o);
    }
    add_model(rg, o);
    rg->add_option("--flavor", o.flavor, "quantum or classical")->capture_default_str();
    rg->add_option("--mode", o.mode, "boundaries or atlas")->capture_default_str();
    rg->add_option("--t-half", o.t_half, "2T / omega_l, 0 for T = 0 (value or grid; default 0)");
    rg->add_option("--zeta", o.zeta, "atlas zeta grid (default 1e-3:1e4:85:log)");
    rg->add_option("--approx", o.approx, "boundaries to locate: uw, wk, us")->capture_default_str();
    rg->add_option("--tol", o.tol, "validity threshold of an approximation")->capture_default_str();
    rg->add_option("--metric", o.metric, "relative-norm or floored")->capture_default_str();
    rg->add_option("--floor", o.floor, "denominator floor of the floored metric")->capture_default_str();
    rg->add_option("--rc-tol", o.rc_tol, "reaction-coordinate cutoff convergence tolerance")->capture_default_str();
    rg->add_option("--rc-n-max", o.rc_n_max, "largest reaction-coordinate cutoff")->capture_default_str();
    // Unused by regimes but registered so that the shared error messages make sense.
    rg->add_option("--q", o.q)->group("");
    rg->add_option("--alpha", o.alpha)->group("");
    rg->add_option("--t-spin", o.t_spin)->group("");
    rg->add_option("--beta", o.beta)->group("");

    add_model(dm, o);
    add_coupling(dm, o);
    add_temperature(dm, o);
    dm->add_option("--vt-count", o.vt_count, "polar grid points on [0, pi]")->capture_default_str();
    dm->add_option("--phi-count", o.phi_count, "azimuth grid points on [0, 2 pi]")->capture_default_str();
    dm->add_option("--cmf-tol", o.cmf_tol, "relative tolerance of the partition function")->capture_default_str();

    add_model(dy, o);
    add_coupling(dy, o);
    add_temperature(dy, o);
    add_dynamics(dy, o);
    dy->add_option("--trajectory-time", o.trajectory_time, "dump one trajectory of this length instead of steady states")
        ->capture_default_str();

    co->add_option("--alpha", o.alpha, "coupling, Q = alpha omega_l / S0 (default 0.06)");
    co->add_option("--theta", o.theta, "coupling angle")->capture_default_str();
    co->add_option("--t-spin", o.t_spin, "T / (S0 omega_l) grid (default 0.05:5:40:log)");
    co->add_option("--n-list", o.n_list, "quantum spin lengths n = 2 S0")->capture_default_str();
    co->add_option("--quantum", o.quantum, "quantum solver: wk or rc")->capture_default_str();
    co->add_option("--omega-l", o.omega_l, "Larmor frequency")->capture_default_str();
    co->add_option("--omega-0", o.omega_0, "Lorentzian peak frequency")->capture_default_str();
    co->add_option("--gamma", o.gamma, "Lorentzian width (default 5)");
    co->add_option("--rc-tol", o.rc_tol, "reaction-coordinate cutoff tolerance")->capture_default_str();
    co->add_option("--zeta", o.zeta)->group("");
    co->add_option("--q", o.q)->group("");
    co->add_option("--t-half", o.t_half)->group("");
    co->add_option("--beta", o.beta)->group("");

    std::vector<std::string> args;
    try {
        args = expand_config(args_in);
    } catch (const ConfigError& e) {
        err << "meanforce: error: " << e.what() << '\n';
        return kExitConfig;
    }
    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "meanforce: error: " << e.what() << '\n';
        return kExitConfig;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();

    // Route library warnings to the error stream of this call.
    auto seen = std::make_shared<std::set<std::string>>();
    std::mutex warn_mu;
    const WarningHandler previous = set_warning_handler([&err, seen, &warn_mu](const std::string& m) {
        std::lock_guard<std::mutex> lock(warn_mu);
        if (seen->insert(m).second) err << "meanforce: warning: " << m << '\n';
    });
    struct Restore {
        WarningHandler h;
        ~Restore() { set_warning_handler(h); }
    } restore{previous};

    int code = kExitOk;
    SweepTable table;
    try {
        if (o.n < 1) throw ConfigError("n must be >= 1");
        Session session(o, command, err);
        if (command == "sweep-temperature") code = cmd_sweep(o, true, table, session);
        else if (command == "sweep-coupling") code = cmd_sweep(o, false, table, session);
        else if (command == "regimes") code = cmd_regimes(o, table, session);
        else if (command == "density-map") code = cmd_density_map(o, table, session);
        else if (command == "dynamics") code = cmd_dynamics(o, table, session);
        else code = cmd_correspondence(o, table, session);
        session.report_cache();
    } catch (const ConfigError& e) {
        err << "meanforce: error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ConvergenceError& e) {
        err << "meanforce: error: " << e.what() << '\n';
        return kExitConvergence;
    } catch (const std::exception& e) {
        err << "meanforce: error: " << e.what() << '\n';
        return 1;
    }

    std::vector<std::pair<std::string, std::string>> meta = {{"command", command}, {"version", MEANFORCE_VERSION}};
    for (auto& kv : echo_options(sub)) meta.push_back(kv);
    for (auto& kv : table.metadata) meta.push_back(kv);
    if (!o.no_wall_time) {
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        meta.emplace_back("wall_time_s", format_number(wall));
    }
    table.metadata = meta;

    if (o.output == "-") {
        write_csv(table, out);
    } else {
        std::ofstream f(o.output, std::ios::binary);
        if (!f) {
            err << "meanforce: error: cannot write " << o.output << '\n';
            return 1;
        }
        write_csv(table, f);
    }
    return code;
}

} // namespace meanforce::cli
