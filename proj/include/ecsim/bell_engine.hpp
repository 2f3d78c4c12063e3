#ifndef ECSIM_BELL_ENGINE_HPP
#define ECSIM_BELL_ENGINE_HPP

#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

#include "correlators.hpp"
#include "special_math.hpp"

// CHSH combination of the homodyne correlators, its optimization over the
// four local rotation angles, and threshold finding in alpha.

namespace ecsim {

struct angle_set {
    double a1, a2, b1, b2;

    /// Wrap all four angles into [-pi, pi).
    angle_set canonical() const {
        auto wrap = [](double t) {
            t = std::fmod(t + pi, 2.0 * pi);
            if (t < 0.0) t += 2.0 * pi;
            return t - pi;
        };
        return {wrap(a1), wrap(a2), wrap(b1), wrap(b2)};
    }
};

struct bell_result {
    double value;
    angle_set angles;
};

/// B = C(a1,b1) + C(a1,b2) + C(a2,b1) - C(a2,b2).
inline double bell_value(const angle_set& ang, const scenario_config& cfg,
                         eval_method method, double tol = 1e-10) {
    cfg.validate();
    if (method == eval_method::closed_form) {
        auto c = [&](double a, double b) {
            return detail::closed_form_correlation(a, b, cfg);
        };
        return c(ang.a1, ang.b1) + c(ang.a1, ang.b2) + c(ang.a2, ang.b1) -
               c(ang.a2, ang.b2);
    }
    if (method != eval_method::quadrature)
        throw numeric_error("bell_value: oracle evaluation lives in fock_oracle");
    // each angle's quadrant integrals are reused across the four terms
    std::map<double, detail::mode_integrals> cache;
    auto mi = [&](double theta) -> const detail::mode_integrals& {
        auto it = cache.find(theta);
        if (it == cache.end())
            it = cache.emplace(theta,
                               detail::compute_mode_integrals(theta, cfg, tol))
                     .first;
        return it->second;
    };
    auto c = [&](double a, double b) {
        return detail::assemble_probs(mi(a), mi(b)).correlation();
    };
    return c(ang.a1, ang.b1) + c(ang.a1, ang.b2) + c(ang.a2, ang.b1) -
           c(ang.a2, ang.b2);
}

struct bell_optimum {
    bell_result result;
    optimizer_report report;
};

/// Maximize |B| over the four angles with the multistart simplex search.
/// The local realistic bound is on |B|, and for these correlators the
/// largest magnitude sits on the negative branch (the denominator
/// suppression flips sign with nu), so the signed maximum would
/// underestimate the violation.
inline bell_optimum optimize_bell(const scenario_config& cfg, eval_method method,
                                  std::size_t n_starts = 100,
                                  std::uint64_t seed = 0,
                                  double quad_tol = 1e-8,
                                  const angle_set* hint = nullptr) {
    cfg.validate();
    std::vector<std::pair<double, double>> bounds(4, {-pi, pi});
    const double ftol = method == eval_method::closed_form ? 1e-10 : 1e-7;
    std::vector<std::vector<double>> extra;
    if (hint) {
        const auto h = hint->canonical();
        extra.push_back({h.a1, h.a2, h.b1, h.b2});
    }
    auto rep = maximize(
        [&](const std::vector<double>& x) {
            // extreme angle corners can defeat the adaptive quadrature
            // (violently oscillatory kernels); score them as worthless
            // rather than aborting the whole search
            try {
                return std::abs(
                    bell_value({x[0], x[1], x[2], x[3]}, cfg, method, quad_tol));
            } catch (const non_convergence&) {
                return 0.0;
            }
        },
        4, bounds, n_starts, seed, ftol, 600, extra);
    angle_set ang{rep.best_point[0], rep.best_point[1], rep.best_point[2],
                  rep.best_point[3]};
    return {{rep.best_value, ang.canonical()}, rep};
}

/// Smallest alpha in [lo, hi] where the optimized B crosses 2, found by
/// bisection on f(alpha) = max_B - 2 to within tol.
inline double violation_threshold(scenario_config cfg, eval_method method,
                                  double lo = 0.05, double hi = 1.5,
                                  double tol = 1e-3, std::size_t n_starts = 100,
                                  std::uint64_t seed = 0,
                                  double quad_tol = 1e-8) {
    // chaining the best angles from the previous alpha as an extra start
    // keeps the optimized curve smooth through the bisection
    angle_set hint{};
    bool have_hint = false;
    auto f = [&](double a) {
        cfg.alpha = a;
        auto opt = optimize_bell(cfg, method, n_starts, seed, quad_tol,
                                 have_hint ? &hint : nullptr);
        hint = opt.result.angles;
        have_hint = true;
        return opt.result.value - 2.0;
    };
    // pre-scan to locate a single sign change before bisecting
    const int n_scan = 8;
    std::vector<double> xs(n_scan + 1), fs(n_scan + 1);
    for (int i = 0; i <= n_scan; ++i) {
        xs[i] = lo + (hi - lo) * i / n_scan;
        fs[i] = f(xs[i]);
    }
    int crossing = -1;
    for (int i = 0; i < n_scan; ++i) {
        if (fs[i] == 0.0) return xs[i];
        // first upward crossing wins; later dips are optimizer noise
        if (fs[i] < 0.0 && fs[i + 1] >= 0.0) {
            crossing = i;
            break;
        }
    }
    if (crossing < 0)
        throw no_sign_change(
            "violation_threshold: no upward crossing of B = 2 in bracket");
    return bisect(f, xs[crossing], xs[crossing + 1], tol);
}

/// Gain needed for the first-order amplifier to emulate the amplitude
/// alpha_bar starting from alpha_a: g = 1 + ln(alpha_bar / alpha_a).
inline double required_gain(double alpha_bar, double alpha_a) {
    if (!(alpha_a > 0.0) || !(alpha_bar > 0.0))
        throw invalid_amplitudes("required_gain: amplitudes must be positive");
    if (alpha_bar < alpha_a)
        throw invalid_amplitudes(
            "required_gain: target amplitude below input amplitude");
    return 1.0 + std::log(alpha_bar / alpha_a);
}

} // namespace ecsim

#endif
