// dynamics.cpp — exact sub-steps of the spin + reaction-coordinate Langevin dynamics

#include "meanforce/dynamics.hpp"

#include "meanforce/error.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <tuple>
#include <vector>

namespace meanforce {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

std::mt19937_64 member_rng(std::uint64_t seed, std::uint64_t member)
{
    const std::uint64_t a = splitmix64(seed);
    const std::uint64_t b = splitmix64(a ^ splitmix64(member + 0x632be59bd9b4e019ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

double resolve_dt(const ModelParams& params, const SimConfig& cfg)
{
    params.validate();
    const Lorentzian& l = params.bath.lorentzian();
    const double limit = 0.05 / std::max({params.omega_l, l.omega_0, l.gamma_w});
    const double dt = cfg.dt == 0.0 ? limit : cfg.dt;
    if (!(dt > 0.0) || dt > limit * (1.0 + 1e-12))
        throw ConfigError("dt must lie in (0, 0.05 / max(omega_l, omega_0, Gamma)] = (0, " + format_number(limit) +
                          "]");
    if (!(cfg.t_burn > 0.0) || !(cfg.t_sample > 0.0)) throw ConfigError("t_burn and t_sample must be > 0");
    if (cfg.stride < 1 || cfg.ensemble < 1 || cfg.blocks < 2) throw ConfigError("stride, ensemble >= 1 and blocks >= 2");
    return dt;
}

SpinOscillator::SpinOscillator(const ModelParams& params, double dt)
{
    params.validate();
    const Lorentzian& l = params.bath.lorentzian();
    omega_l_ = params.omega_l;
    theta_ = params.theta;
    omega_0_ = l.omega_0;
    gamma_ = l.gamma_w;
    c_ = omega_0_ * std::sqrt(2.0 * params.q());
    temperature_ = params.beta == kInf ? 0.0 : 1.0 / params.beta;
    s0_ = params.s0();
    dt_ = dt;

    // d(X, P) = A (X - X*, P) dt + (0, sqrt(2 Gamma T)) dW; exact over h = dt / 2.
    Eigen::Matrix2d a;
    a << 0.0, 1.0, -omega_0_ * omega_0_, -gamma_;
    prop_ = (a * (0.5 * dt)).exp();
    // The stationary covariance is the Gibbs one, so the step covariance is S - M S M^T.
    Eigen::Matrix2d eq = Eigen::Matrix2d::Zero();
    eq(0, 0) = temperature_ / (omega_0_ * omega_0_);
    eq(1, 1) = temperature_;
    Eigen::Matrix2d cov = eq - prop_ * eq * prop_.transpose();
    cov = 0.5 * (cov + cov.transpose()).eval();
    noise_.setZero();
    if (cov(0, 0) > 0.0) {
        noise_(0, 0) = std::sqrt(cov(0, 0));
        noise_(1, 0) = cov(1, 0) / noise_(0, 0);
        noise_(1, 1) = std::sqrt(std::max(0.0, cov(1, 1) - noise_(1, 0) * noise_(1, 0)));
    } else if (cov(1, 1) > 0.0) {
        noise_(1, 1) = std::sqrt(cov(1, 1));
    }
}

Eigen::Vector3d SpinOscillator::field(double x) const
{
    return {c_ * x * std::sin(theta_), 0.0, omega_l_ - c_ * x * std::cos(theta_)};
}

double SpinOscillator::energy(const DynState& st) const
{
    const double s_theta = std::cos(theta_) * st.s.z() - std::sin(theta_) * st.s.x();
    return -omega_l_ * st.s.z() + c_ * s_theta * st.x + 0.5 * (st.p * st.p + omega_0_ * omega_0_ * st.x * st.x);
}

void SpinOscillator::precess(Eigen::Vector3d& s, const Eigen::Vector3d& b, double h)
{
    const double norm = b.norm();
    if (norm == 0.0) return;
    const Eigen::Vector3d k = b / norm;
    const double phi = -norm * h;  // ds/dt = s x B = -|B| k x s
    const double cp = std::cos(phi), sp = std::sin(phi);
    const double len = s.norm();
    s = s * cp + k.cross(s) * sp + k * (k.dot(s) * (1.0 - cp));
    s *= len / s.norm();
}

std::tuple<double, double, double> SpinOscillator::oscillator_equilibrium(const DynState& st) const
{
    const double s_theta = std::cos(theta_) * st.s.z() - std::sin(theta_) * st.s.x();
    return {-c_ * s_theta / (omega_0_ * omega_0_), temperature_, omega_0_};
}

void SpinOscillator::oscillator_half(DynState& st, std::mt19937_64& rng) const
{
    const double x_star = std::get<0>(oscillator_equilibrium(st));
    Eigen::Vector2d y(st.x - x_star, st.p);
    y = prop_ * y;
    std::normal_distribution<double> normal;
    const Eigen::Vector2d xi(normal(rng), normal(rng));
    y += noise_ * xi;
    st.x = y[0] + x_star;
    st.p = y[1];
}

void SpinOscillator::step(DynState& st, std::mt19937_64& rng) const
{
    oscillator_half(st, rng);
    precess(st.s, field(st.x), dt_);
    oscillator_half(st, rng);
    st.t += dt_;
}

DynState langevin_step(const DynState& state, const SpinOscillator& system, std::mt19937_64& rng)
{
    DynState next = state;
    system.step(next, rng);
    return next;
}

DynState initial_state(const SpinOscillator& system, std::mt19937_64& rng)
{
    std::normal_distribution<double> normal;
    DynState st;
    Eigen::Vector3d v(normal(rng), normal(rng), normal(rng));
    st.s = system.s0() * v.normalized();
    const auto [x_star, temperature, omega_0] = system.oscillator_equilibrium(st);
    st.x = x_star + std::sqrt(temperature) / omega_0 * normal(rng);
    st.p = std::sqrt(temperature) * normal(rng);
    return st;
}

std::vector<double> tempering_ladder(const ModelParams& params, const SimConfig& cfg)
{
    if (params.beta == kInf) return {0.0};
    const double t = 1.0 / params.beta;
    std::vector<double> ladder{t};
    if (!cfg.tempering) return ladder;
    const double s0 = params.s0();
    const double top = params.q() * s0 * s0;
    if (top <= t) return ladder;
    const int rungs = static_cast<int>(std::ceil(std::log(top / t) / std::log(1.5)));
    const double r = std::pow(top / t, 1.0 / rungs);
    for (int k = 1; k <= rungs; ++k) ladder.push_back(t * std::pow(r, k));
    return ladder;
}

namespace {

// E[s | X] / S0 for the conditional estimator: Langevin function along B(X).
Eigen::Vector3d conditional_mean(const Eigen::Vector3d& b, double beta, double s0)
{
    const double norm = b.norm();
    if (norm == 0.0) return Eigen::Vector3d::Zero();
    if (beta == kInf) return b / norm;
    const double y = beta * s0 * norm;
    const double lang = y < 1e-3 ? y / 3.0 - y * y * y / 45.0 : 1.0 / std::tanh(y) - 1.0 / y;
    return (lang / norm) * b;
}

} // namespace

SpinExpectation simulate_steady(const ModelParams& params, const SimConfig& cfg)
{
    params.validate();
    if (params.theta == 0.0)
        throw ConfigError("theta = 0 leaves Sz conserved: the spin has no dissipation channel and cannot equilibrate");
    const double dt = resolve_dt(params, cfg);
    if (cfg.swap_every < 1) throw ConfigError("swap_every must be >= 1");

    const std::vector<double> ladder = tempering_ladder(params, cfg);
    std::vector<SpinOscillator> systems;
    std::vector<double> betas;
    for (double t : ladder) {
        ModelParams p = params;
        p.beta = t == 0.0 ? kInf : 1.0 / t;
        systems.emplace_back(p, dt);
        betas.push_back(p.beta);
    }
    const SpinOscillator& sys = systems.front();
    const std::size_t n_rep = systems.size();

    const long burn_steps = static_cast<long>(std::ceil(cfg.t_burn / dt));
    const long sample_steps = static_cast<long>(std::ceil(cfg.t_sample / dt));
    const long samples = std::max(1L, sample_steps / cfg.stride);
    const int blocks = static_cast<int>(std::min<long>(cfg.blocks, samples));
    const long per_block = samples / blocks;

    // block means per member: [member][block] -> (sz, sx)
    std::vector<std::vector<Eigen::Vector2d>> means(cfg.ensemble, std::vector<Eigen::Vector2d>(blocks));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int m = next++; m < cfg.ensemble; m = next++) {
            auto rng = member_rng(cfg.seed, static_cast<std::uint64_t>(m));
            std::uniform_real_distribution<double> uniform(0.0, 1.0);
            std::vector<DynState> reps;
            for (const auto& s : systems) reps.push_back(initial_state(s, rng));
            long step_count = 0;
            int parity = 0;
            auto advance = [&] {
                for (std::size_t k = 0; k < n_rep; ++k) systems[k].step(reps[k], rng);
                if (n_rep > 1 && ++step_count % cfg.swap_every == 0) {
                    for (std::size_t k = parity; k + 1 < n_rep; k += 2) {
                        const double log_acc = (betas[k] - betas[k + 1]) *
                                               (sys.energy(reps[k]) - sys.energy(reps[k + 1]));
                        if (log_acc >= 0.0 || uniform(rng) < std::exp(log_acc)) {
                            std::swap(reps[k].s, reps[k + 1].s);
                            std::swap(reps[k].x, reps[k + 1].x);
                            std::swap(reps[k].p, reps[k + 1].p);
                        }
                    }
                    parity ^= 1;
                }
            };
            for (long i = 0; i < burn_steps; ++i) advance();
            for (int b = 0; b < blocks; ++b) {
                Eigen::Vector2d acc = Eigen::Vector2d::Zero();
                for (long k = 0; k < per_block; ++k) {
                    for (int i = 0; i < cfg.stride; ++i) advance();
                    const DynState& st = reps.front();
                    if (cfg.estimator == Estimator::conditional) {
                        const Eigen::Vector3d u = conditional_mean(sys.field(st.x), params.beta, sys.s0());
                        acc += Eigen::Vector2d(u.z(), u.x());
                    } else {
                        acc += Eigen::Vector2d(st.s.z(), st.s.x()) / sys.s0();
                    }
                }
                means[m][b] = acc / static_cast<double>(per_block);
            }
        }
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int n_threads = std::min<int>(cfg.threads > 0 ? cfg.threads : static_cast<int>(hw), cfg.ensemble);
    std::vector<std::thread> pool;
    for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (const auto& mb : means)
        for (const auto& v : mb) mean += v;
    mean /= static_cast<double>(cfg.ensemble) * blocks;

    // Blocking analysis: merge neighbouring blocks pairwise and keep the
    // largest standard error, stopping at two blocks per member.
    Eigen::Vector2d err2 = Eigen::Vector2d::Zero();
    for (int width = blocks; width >= 2; width /= 2) {
        const double count = static_cast<double>(cfg.ensemble) * width;
        Eigen::Vector2d var = Eigen::Vector2d::Zero();
        for (const auto& mb : means)
            for (const auto& v : mb) var += (v - mean).cwiseAbs2();
        err2 = err2.cwiseMax(var / (count * (count - 1.0)));
        for (auto& mb : means) {
            std::vector<Eigen::Vector2d> merged(width / 2);
            for (int b = 0; b < width / 2; ++b) merged[b] = 0.5 * (mb[2 * b] + mb[2 * b + 1]);
            mb = std::move(merged);
        }
    }

    SpinExpectation e;
    e.method = "cdyn";
    e.sz = mean[0];
    e.sx = mean[1];
    e.err_sz = std::sqrt(err2[0]);
    e.err_sx = std::sqrt(err2[1]);
    e.n_used = static_cast<int>(std::min<long>(samples * cfg.ensemble, 2147483647L));
    return e;
}

SweepTable simulate_trajectory(const ModelParams& params, const SimConfig& cfg, double t_total)
{
    const double dt = resolve_dt(params, cfg);
    if (!(t_total > 0.0)) throw ConfigError("trajectory length must be > 0");
    const SpinOscillator sys(params, dt);
    auto rng = member_rng(cfg.seed, 0);
    DynState st = initial_state(sys, rng);
    SweepTable table;
    table.columns = {"t", "sx", "sy", "sz", "X", "P"};
    const long steps = static_cast<long>(std::ceil(t_total / dt));
    auto record = [&] {
        const Eigen::Vector3d u = st.s / sys.s0();
        table.add_row({st.t, u.x(), u.y(), u.z(), st.x, st.p});
    };
    record();
    for (long i = 1; i <= steps; ++i) {
        sys.step(st, rng);
        if (i % cfg.stride == 0) record();
    }
    return table;
}

} // namespace meanforce
