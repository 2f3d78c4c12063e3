#ifndef ECSIM_FOCK_ORACLE_HPP
#define ECSIM_FOCK_ORACLE_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "correlators.hpp"
#include "errors.hpp"
#include "special_math.hpp"

// Independent cross-check of the kernel formulas: everything is rebuilt from
// scratch in a truncated Fock basis. Rotations are applied as operators
// (the effective one literally as Kerr-displace-Kerr), the amplifier as a
// diagonal, detector loss as explicit beam-splitter Kraus maps, and the
// homodyne statistics come from the number-state wavefunctions.

namespace ecsim {

using fock_vector = std::vector<complex>;

/// Truncation suited to coherent amplitude a (Poisson mean a^2 plus a wide
/// safety band).
inline std::size_t default_cutoff(double a) {
    a = std::abs(a);
    return static_cast<std::size_t>(std::ceil(a * a + 10.0 * a + 24.0));
}

/// Coherent state |beta> in the first ncut number states. Throws if the
/// truncated tail carries more than tail_tol of the norm.
inline fock_vector coherent_fock(complex beta, std::size_t ncut,
                                 double tail_tol = 1e-12) {
    if (ncut < 2) throw truncation_too_small("coherent_fock: ncut < 2");
    fock_vector v(ncut);
    if (beta == complex(0.0)) {
        v[0] = 1.0;
        return v;
    }
    const double b2 = std::norm(beta);
    const double arg = std::arg(beta);
    // log-magnitude recurrence keeps large-amplitude states finite
    double logmag = -0.5 * b2;
    double captured = 0.0;
    for (std::size_t n = 0; n < ncut; ++n) {
        v[n] = std::polar(std::exp(logmag), double(n) * arg);
        captured += std::norm(v[n]);
        logmag += 0.5 * std::log(b2 / double(n + 1));
    }
    if (1.0 - captured > tail_tol)
        throw truncation_too_small("coherent_fock: truncated tail too heavy");
    return v;
}

namespace detail_fock {

inline double vec_norm2(const fock_vector& v) {
    double s = 0.0;
    for (const auto& c : v) s += std::norm(c);
    return s;
}

/// Diagonal amplifier action. full_exp applies e^{(g-1) n} in log space
/// against the coefficient magnitudes; first_order applies 1 + (g-1) n.
inline void apply_amplifier(fock_vector& v, const amplifier_model& amp) {
    const double gm = amp.effective_gain() - 1.0;
    switch (amp.kind) {
    case amplifier_kind::none:
        return;
    case amplifier_kind::first_order:
        for (std::size_t n = 0; n < v.size(); ++n) v[n] *= 1.0 + gm * double(n);
        return;
    case amplifier_kind::full_exp:
    default:
        for (std::size_t n = 0; n < v.size(); ++n) {
            if (v[n] == complex(0.0)) continue;
            const double lm = std::log(std::abs(v[n])) + gm * double(n);
            v[n] = (v[n] / std::abs(v[n])) * std::exp(lm);
        }
        return;
    }
}

/// The cat-making Kerr-type gate: diagonal phases (-i)^{n^2}, i.e. 1 on
/// even n and -i on odd n.
inline void apply_kerr(fock_vector& v) {
    const complex mi(0.0, -1.0);
    for (std::size_t n = 1; n < v.size(); n += 2) v[n] *= mi;
}

/// Displacement exp(delta a^dag - conj(delta) a) by repeated short Taylor
/// steps (scaling and squaring on the vector), which stays well
/// conditioned for large |delta|.
inline void apply_displacement(fock_vector& v, complex delta) {
    const double mag = std::abs(delta);
    if (mag == 0.0) return;
    int steps = 1;
    while (mag / steps > 0.25) steps *= 2;
    const complex d = delta / double(steps);
    const complex dc = std::conj(d);
    const std::size_t n = v.size();
    fock_vector term(n), next(n);
    for (int s = 0; s < steps; ++s) {
        term = v;
        for (int k = 1; k < 40; ++k) {
            for (std::size_t m = 0; m < n; ++m) {
                complex acc = 0.0;
                if (m > 0) acc += d * std::sqrt(double(m)) * term[m - 1];
                if (m + 1 < n) acc -= dc * std::sqrt(double(m + 1)) * term[m + 1];
                next[m] = acc / double(k);
            }
            term.swap(next);
            double tn = 0.0, vn = 0.0;
            for (std::size_t m = 0; m < n; ++m) {
                v[m] += term[m];
                tn += std::norm(term[m]);
                vn += std::norm(v[m]);
            }
            if (tn < 1e-32 * vn) break;
        }
    }
}

inline void check_tail(const fock_vector& v, const char* where) {
    const double total = vec_norm2(v);
    if (!(total > 0.0)) throw zero_norm(where);
    double tail = 0.0;
    const std::size_t n = v.size();
    for (std::size_t m = n > 5 ? n - 5 : 0; m < n; ++m) tail += std::norm(v[m]);
    if (tail > 1e-8 * total)
        throw truncation_too_small(where);
}

/// Harmonic oscillator wavefunctions for x = (a^dag + a)/2, evaluated by
/// upward recurrence: psi_0 = (2/pi)^{1/4} e^{-x^2}.
inline void homodyne_wavefunctions(double x, std::size_t ncut,
                                   std::vector<double>& psi) {
    psi.resize(ncut);
    const double z = std::sqrt(2.0) * x;
    psi[0] = std::pow(2.0 / pi, 0.25) * std::exp(-x * x);
    if (ncut > 1) psi[1] = std::sqrt(2.0) * z * psi[0];
    for (std::size_t n = 1; n + 1 < ncut; ++n)
        psi[n + 1] = std::sqrt(2.0 / double(n + 1)) * z * psi[n] -
                     std::sqrt(double(n) / double(n + 1)) * psi[n - 1];
}

/// Per-mode branch vector for the scenario: rotation and amplifier applied
/// as Fock-space operators in the configured order.
inline std::array<fock_vector, 2> branch_vectors(double theta,
                                                 const scenario_config& cfg,
                                                 std::size_t ncut) {
    std::array<fock_vector, 2> u;
    const bool before = cfg.ordering == op_ordering::amp_before_rotation;
    if (cfg.rotation == rotation_kind::effective) {
        const complex delta(0.0, theta / cfg.alpha);
        for (int br = 0; br < 2; ++br) {
            const double sign = br == 0 ? 1.0 : -1.0;
            fock_vector v = coherent_fock(sign * cfg.alpha, ncut);
            if (before) apply_amplifier(v, cfg.amplifier);
            apply_kerr(v);
            apply_displacement(v, delta);
            apply_kerr(v);
            if (!before) apply_amplifier(v, cfg.amplifier);
            check_tail(v, "branch_vectors: effective rotation outgrew cutoff");
            u[br] = std::move(v);
        }
        return u;
    }
    // ideal rotation mixes the two coherent branches linearly
    fock_vector base[2] = {coherent_fock(cfg.alpha, ncut),
                           coherent_fock(-cfg.alpha, ncut)};
    if (before)
        for (auto& b : base) apply_amplifier(b, cfg.amplifier);
    const auto rot = ideal_rotation(theta).m;
    for (int br = 0; br < 2; ++br) {
        fock_vector v(ncut, 0.0);
        for (std::size_t n = 0; n < ncut; ++n)
            v[n] = rot[0][br] * base[0][n] + rot[1][br] * base[1][n];
        if (!before) apply_amplifier(v, cfg.amplifier);
        check_tail(v, "branch_vectors: state outgrew cutoff");
        u[br] = std::move(v);
    }
    return u;
}

inline std::size_t scenario_cutoff(const scenario_config& cfg, double theta_a,
                                   double theta_b) {
    double a = cfg.amplified_alpha();
    if (cfg.rotation == rotation_kind::effective) {
        const double tmax = std::max(std::abs(theta_a), std::abs(theta_b));
        const double chi = std::hypot(cfg.alpha, tmax / cfg.alpha);
        const double scale =
            cfg.amplifier.kind == amplifier_kind::full_exp
                ? std::exp(cfg.gain() - 1.0)
                : 1.0;
        a = std::max(a, chi * scale);
    }
    return default_cutoff(a);
}

/// Quadrant integrals J[k][g][g'] of the per-mode branch profiles, with
/// detector loss folded in through beam-splitter Kraus operators
/// A_j |k> = sqrt(C(k,j)) eta^{k-j} r^j |k-j>.
inline detail::mode_integrals oracle_mode_integrals(double theta,
                                            const scenario_config& cfg,
                                            std::size_t ncut, double tol) {
    const auto u = branch_vectors(theta, cfg, ncut);
    // Kraus images w[branch][j][m] = (A_j u_branch)_m
    const double t = cfg.eta;
    const double r = std::sqrt(std::max(0.0, 1.0 - t * t));
    const std::size_t nj = cfg.eta < 1.0 ? ncut : 1;
    std::vector<std::array<fock_vector, 2>> w(nj);
    if (cfg.eta < 1.0) {
        // log binomial via lgamma
        for (std::size_t j = 0; j < nj; ++j)
            for (int br = 0; br < 2; ++br) {
                fock_vector wv(ncut - j, 0.0);
                for (std::size_t k = j; k < ncut; ++k) {
                    const double logc = std::lgamma(double(k + 1)) -
                                        std::lgamma(double(j + 1)) -
                                        std::lgamma(double(k - j + 1));
                    const double amp = std::exp(0.5 * logc +
                                                double(k - j) * std::log(t) +
                                                double(j) * std::log(r));
                    wv[k - j] = amp * u[br][k];
                }
                w[j][br] = std::move(wv);
            }
    } else {
        w[0] = u;
    }

    std::vector<double> psi;
    auto profile = [&](double x) -> detail::triple {
        homodyne_wavefunctions(x, ncut, psi);
        complex b00 = 0.0, b11 = 0.0, b01 = 0.0;
        for (std::size_t j = 0; j < nj; ++j) {
            complex phi[2] = {0.0, 0.0};
            for (int br = 0; br < 2; ++br) {
                const auto& wv = w[j][br];
                complex acc = 0.0;
                for (std::size_t m = 0; m < wv.size(); ++m)
                    acc += wv[m] * psi[m];
                phi[br] = acc;
            }
            b00 += phi[0] * std::conj(phi[0]);
            b11 += phi[1] * std::conj(phi[1]);
            b01 += phi[0] * std::conj(phi[1]);
        }
        return {b00, b11, b01};
    };

    const double reach = std::sqrt(double(ncut)) + 4.0;
    detail::mode_integrals mi;
    for (int k = 0; k < 2; ++k) {
        const double lo = k == 0 ? 0.0 : -reach;
        const double hi = k == 0 ? reach : 0.0;
        const detail::triple tr = integrate(profile, lo, hi, tol);
        mi.j[k][0][0] = tr.a;
        mi.j[k][1][1] = tr.b;
        mi.j[k][0][1] = tr.c;
        mi.j[k][1][0] = std::conj(tr.c);
    }
    return mi;
}

} // namespace detail_fock

/// Two-mode pure state (eta = 1 only): amp[na * ncut + nb].
struct two_mode_state {
    std::size_t ncut;
    fock_vector amp;

    double norm2() const { return detail_fock::vec_norm2(amp); }
};

/// The full two-mode state after rotations and amplification, before
/// normalization (so norm checks against the analytic normalization
/// constant are possible). Pure states only, hence eta = 1.
inline two_mode_state build_state(double theta_a, double theta_b,
                                  const scenario_config& cfg,
                                  std::size_t ncut = 0) {
    cfg.validate();
    if (cfg.eta < 1.0)
        throw numeric_error("build_state: eta < 1 gives a mixed state");
    if (ncut == 0) ncut = detail_fock::scenario_cutoff(cfg, theta_a, theta_b);
    const auto ua = detail_fock::branch_vectors(theta_a, cfg, ncut);
    const auto ub = detail_fock::branch_vectors(theta_b, cfg, ncut);
    two_mode_state st{ncut, fock_vector(ncut * ncut, 0.0)};
    for (std::size_t na = 0; na < ncut; ++na)
        for (std::size_t nb = 0; nb < ncut; ++nb)
            st.amp[na * ncut + nb] =
                ua[0][na] * ub[0][nb] + ua[1][na] * ub[1][nb];
    if (!(st.norm2() > 0.0)) throw zero_norm("build_state: zero norm");
    return st;
}

/// Dichotomized outcome table computed entirely in the Fock picture.
inline outcome_probs oracle_probabilities(double theta_a, double theta_b,
                                          const scenario_config& cfg,
                                          std::size_t ncut = 0,
                                          double tol = 1e-10) {
    cfg.validate();
    if (ncut == 0) ncut = detail_fock::scenario_cutoff(cfg, theta_a, theta_b);
    const auto ma = detail_fock::oracle_mode_integrals(theta_a, cfg, ncut, tol);
    const auto mb = detail_fock::oracle_mode_integrals(theta_b, cfg, ncut, tol);
    return detail::assemble_probs(ma, mb);
}

inline double oracle_correlation(double theta_a, double theta_b,
                                 const scenario_config& cfg,
                                 std::size_t ncut = 0, double tol = 1e-10) {
    return oracle_probabilities(theta_a, theta_b, cfg, ncut, tol).correlation();
}

/// CHSH value with every correlator evaluated by the oracle.
inline double oracle_bell_value(double a1, double a2, double b1, double b2,
                                const scenario_config& cfg,
                                std::size_t ncut = 0, double tol = 1e-10) {
    return oracle_correlation(a1, b1, cfg, ncut, tol) +
           oracle_correlation(a1, b2, cfg, ncut, tol) +
           oracle_correlation(a2, b1, cfg, ncut, tol) -
           oracle_correlation(a2, b2, cfg, ncut, tol);
}

} // namespace ecsim

#endif
