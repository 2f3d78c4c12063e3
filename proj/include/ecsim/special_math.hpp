#ifndef ECSIM_SPECIAL_MATH_HPP
#define ECSIM_SPECIAL_MATH_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "errors.hpp"

// Self-contained numerical primitives: error function, Gauss-Legendre
// panels with adaptive bisection, multistart Nelder-Mead maximization,
// and bracketed bisection. No dependency on libm's erf so the rest of
// the code can be checked against an independent series oracle.

namespace ecsim {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double sqrt_pi = 1.77245385090551602730;

// ---------------------------------------------------------------------------
// Error function
// ---------------------------------------------------------------------------

namespace detail {

// erf(x) = 2 x e^{-x^2}/sqrt(pi) * sum_n (2x^2)^n / (2n+1)!!
// All terms positive, so no cancellation for moderate x.
inline double erf_series(double ax) {
    const double q = 2.0 * ax * ax;
    double term = 1.0, sum = 1.0;
    for (int n = 1; n < 300; ++n) {
        term *= q / (2.0 * n + 1.0);
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return 2.0 * ax * std::exp(-ax * ax) / sqrt_pi * sum;
}

// erfc(x) = e^{-x^2}/sqrt(pi) / (x + (1/2)/(x + (2/2)/(x + (3/2)/(x + ...))))
// evaluated with the modified Lentz algorithm.
inline double erfc_cf(double ax) {
    const double tiny = 1e-300;
    double f = ax, c = f, d = 0.0;
    for (int n = 1; n < 300; ++n) {
        const double a = 0.5 * n;
        d = ax + a * d;
        if (std::abs(d) < tiny) d = tiny;
        c = ax + a / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-17) break;
    }
    return std::exp(-ax * ax) / (sqrt_pi * f);
}

} // namespace detail

/// Error function, odd and monotone, absolute accuracy well below 1e-12.
inline double erf(double x) {
    const double ax = std::abs(x);
    if (ax == 0.0) return 0.0;
    double r;
    if (ax < 3.2)
        r = detail::erf_series(ax);
    else
        r = 1.0 - detail::erfc_cf(ax);
    return x < 0.0 ? -r : r;
}

// ---------------------------------------------------------------------------
// Gauss-Legendre quadrature
// ---------------------------------------------------------------------------

struct quadrature_rule {
    std::vector<double> nodes;
    std::vector<double> weights;
    double lo = -1.0;
    double hi = 1.0;
};

/// Gauss-Legendre rule of order n on [lo, hi]; nodes by Newton iteration
/// on the Legendre recurrence.
inline quadrature_rule gauss_legendre(int n, double lo, double hi) {
    quadrature_rule rule;
    rule.lo = lo;
    rule.hi = hi;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = mid - half * x;
        rule.nodes[n - 1 - i] = mid + half * x;
        rule.weights[i] = half * w;
        rule.weights[n - 1 - i] = half * w;
    }
    return rule;
}

namespace detail {

inline const quadrature_rule& unit_gl40() {
    static const quadrature_rule rule = gauss_legendre(40, -1.0, 1.0);
    return rule;
}

inline double abs_norm(double v) { return std::abs(v); }
inline double abs_norm(const std::complex<double>& v) { return std::abs(v); }

template <typename F, typename T>
T panel_sum(F& f, double lo, double hi, T zero) {
    const auto& rule = unit_gl40();
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    T acc = zero;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        acc += f(mid + half * rule.nodes[i]) * (half * rule.weights[i]);
    return acc;
}

} // namespace detail

/// Adaptive integration of f over [lo, hi]: order-40 Gauss-Legendre per
/// panel, panels bisected until the whole-vs-halves discrepancy is below
/// tol. Works for real- and complex-valued integrands (and any value type
/// providing +, *, and an abs_norm overload in ecsim::detail).
template <typename F>
auto integrate(F&& f, double lo, double hi, double tol, int max_panels = 4096)
    -> decltype(f(lo)) {
    using T = decltype(f(lo));
    if (!(lo < hi)) throw numeric_error("integrate: requires lo < hi");
    const T zero = T{} * 0.0;
    struct panel {
        double lo, hi, tol;
        T estimate;
    };
    std::vector<panel> stack;
    stack.push_back({lo, hi, tol, detail::panel_sum(f, lo, hi, zero)});
    T total = zero;
    int used = 1;
    while (!stack.empty()) {
        panel p = stack.back();
        stack.pop_back();
        const double mid = 0.5 * (p.lo + p.hi);
        const T left = detail::panel_sum(f, p.lo, mid, zero);
        const T right = detail::panel_sum(f, mid, p.hi, zero);
        used += 2;
        using detail::abs_norm; // ADL picks up overloads for custom value types
        if (abs_norm(left + right - p.estimate) <= p.tol ||
            (p.hi - p.lo) < 1e-14 * (hi - lo)) {
            total += left + right;
            continue;
        }
        if (used > max_panels)
            throw non_convergence("integrate: panel budget exhausted");
        stack.push_back({p.lo, mid, 0.5 * p.tol, left});
        stack.push_back({mid, p.hi, 0.5 * p.tol, right});
    }
    return total;
}

// ---------------------------------------------------------------------------
// Multistart Nelder-Mead maximization
// ---------------------------------------------------------------------------

struct optimizer_report {
    std::vector<double> best_point;
    double best_value = 0.0;
    int starts_used = 0;
    bool converged = false;
};

namespace detail {

inline double u01(std::mt19937_64& rng) {
    return (rng() >> 11) * 0x1.0p-53;
}

template <typename G>
struct nm_result {
    std::vector<double> x;
    double f;
    bool converged;
};

// Standard Nelder-Mead descent of g (a minimizer); points are clamped to
// the box.
template <typename G>
nm_result<G> nelder_mead_min(G& g, std::vector<double> x0,
                             std::span<const std::pair<double, double>> bounds,
                             double ftol, int max_iter) {
    const int dim = static_cast<int>(x0.size());
    auto clamp = [&](std::vector<double>& x) {
        for (int i = 0; i < dim; ++i)
            x[i] = std::clamp(x[i], bounds[i].first, bounds[i].second);
    };
    std::vector<std::vector<double>> simplex(dim + 1, x0);
    for (int i = 0; i < dim; ++i) {
        double h = 0.08 * (bounds[i].second - bounds[i].first);
        if (simplex[i + 1][i] + h > bounds[i].second) h = -h;
        simplex[i + 1][i] += h;
    }
    std::vector<double> fv(dim + 1);
    for (int i = 0; i <= dim; ++i) {
        clamp(simplex[i]);
        fv[i] = g(simplex[i]);
    }
    std::vector<int> order(dim + 1);
    bool converged = false;
    for (int iter = 0; iter < max_iter; ++iter) {
        for (int i = 0; i <= dim; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return fv[a] < fv[b]; });
        const int best = order[0], worst = order[dim], second = order[dim - 1];
        if (fv[worst] - fv[best] < ftol * (std::abs(fv[best]) + 1e-12)) {
            converged = true;
            break;
        }
        std::vector<double> centroid(dim, 0.0);
        for (int i = 0; i <= dim; ++i)
            if (i != worst)
                for (int k = 0; k < dim; ++k) centroid[k] += simplex[i][k] / dim;
        auto blend = [&](double t) {
            std::vector<double> x(dim);
            for (int k = 0; k < dim; ++k)
                x[k] = centroid[k] + t * (centroid[k] - simplex[worst][k]);
            clamp(x);
            return x;
        };
        std::vector<double> xr = blend(1.0);
        const double fr = g(xr);
        if (fr < fv[order[0]]) {
            std::vector<double> xe = blend(2.0);
            const double fe = g(xe);
            if (fe < fr) {
                simplex[worst] = std::move(xe);
                fv[worst] = fe;
            } else {
                simplex[worst] = std::move(xr);
                fv[worst] = fr;
            }
        } else if (fr < fv[second]) {
            simplex[worst] = std::move(xr);
            fv[worst] = fr;
        } else {
            std::vector<double> xc = blend(fr < fv[worst] ? 0.5 : -0.5);
            const double fc = g(xc);
            if (fc < std::min(fr, fv[worst])) {
                simplex[worst] = std::move(xc);
                fv[worst] = fc;
            } else {
                for (int i = 0; i <= dim; ++i) {
                    if (i == best) continue;
                    for (int k = 0; k < dim; ++k)
                        simplex[i][k] =
                            0.5 * (simplex[i][k] + simplex[best][k]);
                    fv[i] = g(simplex[i]);
                }
            }
        }
    }
    int best = 0;
    for (int i = 1; i <= dim; ++i)
        if (fv[i] < fv[best]) best = i;
    return {simplex[best], fv[best], converged};
}

} // namespace detail

/// Maximize f over a box by multistart Nelder-Mead: a stratified grid of
/// starts (m points per dimension, m^dim <= n_starts) plus seeded random
/// starts up to n_starts. Deterministic for a fixed seed.
template <typename F>
optimizer_report maximize(F&& f, int dim,
                          std::span<const std::pair<double, double>> bounds,
                          int n_starts, std::uint64_t seed = 0,
                          double ftol = 1e-10, int max_iter = 600,
                          const std::vector<std::vector<double>>& extra_starts = {}) {
    if (dim < 1 || n_starts < 1)
        throw numeric_error("maximize: dim and n_starts must be positive");
    auto g = [&](const std::vector<double>& x) { return -f(x); };
    using G = decltype(g);

    std::vector<std::vector<double>> starts;
    for (const auto& x : extra_starts) {
        if (static_cast<int>(x.size()) != dim)
            throw numeric_error("maximize: extra start has wrong dimension");
        starts.push_back(x);
    }
    int m = 1;
    while (std::pow(static_cast<double>(m + 1), dim) <= n_starts + 0.5) ++m;
    std::vector<int> idx(dim, 0);
    for (;;) {
        std::vector<double> x(dim);
        for (int k = 0; k < dim; ++k) {
            const auto [lo, hi] = bounds[k];
            x[k] = lo + (hi - lo) * (idx[k] + 0.5) / m;
        }
        starts.push_back(std::move(x));
        int k = 0;
        while (k < dim && ++idx[k] == m) idx[k++] = 0;
        if (k == dim) break;
    }
    std::mt19937_64 rng(seed);
    while (static_cast<int>(starts.size()) < n_starts) {
        std::vector<double> x(dim);
        for (int k = 0; k < dim; ++k) {
            const auto [lo, hi] = bounds[k];
            x[k] = lo + (hi - lo) * detail::u01(rng);
        }
        starts.push_back(std::move(x));
    }

    optimizer_report report;
    report.starts_used = static_cast<int>(starts.size());
    double best_start_value = -std::numeric_limits<double>::infinity();
    bool first = true;
    for (auto& x0 : starts) {
        best_start_value = std::max(best_start_value, f(x0));
        auto r = detail::nelder_mead_min(g, x0, bounds, ftol, max_iter);
        if (first || -r.f > report.best_value) {
            report.best_value = -r.f;
            report.best_point = r.x;
            report.converged = r.converged;
            first = false;
        }
    }
    // never report below the best start actually evaluated
    report.best_value = std::max(report.best_value, best_start_value);
    return report;
}

// ---------------------------------------------------------------------------
// Bracketed bisection
// ---------------------------------------------------------------------------

/// Bisection root finding; requires a sign change over [lo, hi], returns
/// the bracket midpoint once the bracket width is <= tol.
template <typename F>
double bisect(F&& f, double lo, double hi, double tol) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw no_sign_change("bisect: f(lo) and f(hi) have the same sign");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace ecsim

#endif
