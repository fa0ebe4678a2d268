// quadrature.hpp — Gauss-Legendre rules and a globally adaptive panel integrator
//
// The integrator works on vector-valued integrands (std::array<double, K>) so
// a partition function and its moments share one set of panels. Panels are
// split where the local error estimate (order-n rule versus the same rule on
// both halves) is largest until the total estimate meets the tolerance.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <vector>

namespace meanforce::quad {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule, computed once per n and cached (thread-safe).
const GaussRule& gauss_legendre(int n);

template <std::size_t K>
struct Result {
    std::array<double, K> value{};
    double error = 0.0;
    int panels = 0;
    bool converged = true;
};

struct Options {
    int order = 20;
    double rel_tol = 1e-12;
    double abs_tol = 0.0;
    int max_panels = 4000;
    /// Component whose magnitude sets the relative tolerance (the normalizer).
    std::size_t scale_component = 0;
    /// Relative accuracy of the integrand values themselves. A panel whose
    /// error estimate is below noise * integral(|f|) over it is not split again.
    double noise = 1e-15;
};

namespace detail {

// Returns the rule applied to each component plus the rule applied to
// max_k |f_k| in the last slot.
template <std::size_t K, class F>
std::array<double, K + 1> apply_rule(const GaussRule& r, const F& f, double a, double b)
{
    std::array<double, K + 1> acc{};
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        const std::array<double, K> v = f(c + h * r.nodes[i]);
        double mx = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            acc[k] += r.weights[i] * v[k];
            mx = std::max(mx, std::abs(v[k]));
        }
        acc[K] += r.weights[i] * mx;
    }
    for (auto& x : acc) x *= h;
    return acc;
}

template <std::size_t K>
struct Panel {
    double a, b;
    std::array<double, K> value;
    double error;
    double floor;
    bool operator<(const Panel& o) const { return error < o.error; }
};

} // namespace detail

/// Integrate f over [a, b]. `breaks` are optional interior points where the
/// integrand is known to be sharply peaked; they seed the initial panels.
template <std::size_t K, class F>
Result<K> integrate(const F& f, double a, double b, const Options& opt = {},
                    const std::vector<double>& breaks = {})
{
    const GaussRule& rule = gauss_legendre(opt.order);
    std::vector<double> edges{a};
    for (double x : breaks)
        if (x > a && x < b) edges.push_back(x);
    edges.push_back(b);
    std::sort(edges.begin(), edges.end());

    auto make = [&](double lo, double hi) {
        const double mid = 0.5 * (lo + hi);
        const auto whole = detail::apply_rule<K>(rule, f, lo, hi);
        const auto left = detail::apply_rule<K>(rule, f, lo, mid);
        const auto right = detail::apply_rule<K>(rule, f, mid, hi);
        detail::Panel<K> p{lo, hi, {}, 0.0, opt.noise * (left[K] + right[K])};
        for (std::size_t k = 0; k < K; ++k) {
            p.value[k] = left[k] + right[k];
            p.error = std::max(p.error, std::abs(p.value[k] - whole[k]));
        }
        return p;
    };

    // Panels at the noise floor are settled: they still count toward the
    // value and error but are never split.
    std::priority_queue<detail::Panel<K>> heap;
    std::vector<detail::Panel<K>> settled;
    std::array<double, K> sum{};
    double err = 0.0;
    auto add = [&](const detail::Panel<K>& p) {
        for (std::size_t k = 0; k < K; ++k) sum[k] += p.value[k];
        err += p.error;
        if (p.error <= p.floor)
            settled.push_back(p);
        else
            heap.push(p);
    };
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) add(make(edges[i], edges[i + 1]));

    Result<K> res;
    while (!heap.empty()) {
        const double scale = std::abs(sum[opt.scale_component]);
        if (err <= std::max(opt.abs_tol, opt.rel_tol * scale)) break;
        if (static_cast<int>(heap.size() + settled.size()) >= opt.max_panels) {
            res.converged = false;
            break;
        }
        const auto worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {  // cannot split further
            res.converged = false;
            break;
        }
        heap.pop();
        for (std::size_t k = 0; k < K; ++k) sum[k] -= worst.value[k];
        err -= worst.error;
        add(make(worst.a, mid));
        add(make(mid, worst.b));
    }

    // Recompute the totals from scratch; the running sums drift slightly.
    auto collect = [&](const detail::Panel<K>& p) {
        for (std::size_t k = 0; k < K; ++k) res.value[k] += p.value[k];
        res.error += p.error;
    };
    for (const auto& p : settled) collect(p);
    res.panels = static_cast<int>(heap.size() + settled.size());
    while (!heap.empty()) {
        collect(heap.top());
        heap.pop();
    }
    return res;
}

} // namespace meanforce::quad
