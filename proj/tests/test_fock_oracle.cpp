#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "ecsim/fock_oracle.hpp"

using namespace ecsim;

namespace {

scenario_config make_cfg(double alpha, amplifier_kind kind = amplifier_kind::none,
                         double g = 1.0, double eta = 1.0,
                         rotation_kind rot = rotation_kind::ideal) {
    scenario_config cfg;
    cfg.alpha = alpha;
    cfg.amplifier = {kind, g};
    cfg.eta = eta;
    cfg.rotation = rot;
    return cfg;
}

complex fock_inner(const fock_vector& a, const fock_vector& b) {
    complex s = 0.0;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t m = 0; m < n; ++m) s += std::conj(a[m]) * b[m];
    return s;
}

} // namespace

TEST_CASE("coherent Fock vectors are normalized and reproduce overlaps") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> re(-1.8, 1.8);
    for (int i = 0; i < 30; ++i) {
        const complex b1(re(rng), re(rng)), b2(re(rng), re(rng));
        const auto v1 = coherent_fock(b1, 80);
        const auto v2 = coherent_fock(b2, 80);
        CHECK(detail_fock::vec_norm2(v1) == doctest::Approx(1.0).epsilon(1e-12));
        const complex got = fock_inner(v1, v2);
        const complex want = coherent_overlap(b1, b2);
        CHECK(std::abs(got - want) <= 1e-11);
    }
    CHECK_THROWS_AS(coherent_fock(4.0, 8), truncation_too_small);
    CHECK_THROWS_AS(coherent_fock(0.5, 1), truncation_too_small);
}

TEST_CASE("displacement operator builds coherent states from vacuum") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> re(-1.5, 1.5);
    for (int i = 0; i < 12; ++i) {
        const complex d(re(rng), re(rng));
        fock_vector v(70, 0.0);
        v[0] = 1.0;
        detail_fock::apply_displacement(v, d);
        const auto want = coherent_fock(d, 70);
        for (std::size_t n = 0; n < 40; ++n)
            CHECK(std::abs(v[n] - want[n]) <= 1e-12);
    }
    // composing two displacements differs from the direct one only by the
    // Weyl phase exp(i Im(d2 conj(d1)))
    const complex d1(0.6, -0.3), d2(-0.4, 0.9);
    fock_vector v(70, 0.0);
    v[0] = 1.0;
    detail_fock::apply_displacement(v, d1);
    detail_fock::apply_displacement(v, d2);
    const auto direct = coherent_fock(d1 + d2, 70);
    const complex phase = std::exp(complex(0.0, std::imag(d2 * std::conj(d1))));
    for (std::size_t n = 0; n < 40; ++n)
        CHECK(std::abs(v[n] - phase * direct[n]) <= 1e-12);
}

TEST_CASE("full amplifier maps a coherent state to a rescaled one") {
    for (double a : {0.3, 0.8, 1.4})
        for (double g : {1.2, 1.7, 2.0}) {
            auto v = coherent_fock(a, 120);
            detail_fock::apply_amplifier(v, {amplifier_kind::full_exp, g});
            const double at = full_amp_amplitude(a, g);
            const auto want = coherent_fock(at, 120);
            // G|a> = e^{(at^2 - a^2)/2} |at>
            const double c = std::exp(0.5 * (at * at - a * a));
            for (std::size_t n = 0; n < 120; ++n)
                CHECK(std::abs(v[n] - c * want[n]) <= 1e-10 * c);
        }
    // first order is literally 1 + (g-1) n on each coefficient
    auto v = coherent_fock(0.9, 40);
    auto w = v;
    detail_fock::apply_amplifier(w, {amplifier_kind::first_order, 1.3});
    for (std::size_t n = 0; n < 40; ++n)
        CHECK(std::abs(w[n] - v[n] * (1.0 + 0.3 * double(n))) <=
              1e-14 * std::abs(w[n]));
}

TEST_CASE("homodyne wavefunctions are orthonormal") {
    constexpr std::size_t nmax = 7;
    std::vector<double> psi;
    for (std::size_t m = 0; m < nmax; ++m)
        for (std::size_t n = m; n < nmax; ++n) {
            const double got = integrate(
                [&](double x) {
                    detail_fock::homodyne_wavefunctions(x, nmax, psi);
                    return psi[m] * psi[n];
                },
                -8.0, 8.0, 1e-12);
            CHECK(got == doctest::Approx(m == n ? 1.0 : 0.0).epsilon(1e-10));
        }
}

TEST_CASE("coherent position wavefunction matches the Gaussian kernel") {
    // sum_n c_n psi_n(x) must collapse to (2/pi)^{1/4} e^{-(x-a)^2} for
    // real amplitude a
    std::vector<double> psi;
    for (double a : {0.5, 1.1})
        for (double x : {-0.7, 0.3, 1.4}) {
            const auto v = coherent_fock(a, 60);
            detail_fock::homodyne_wavefunctions(x, 60, psi);
            complex got = 0.0;
            for (std::size_t n = 0; n < 60; ++n) got += v[n] * psi[n];
            const double want =
                std::pow(2.0 / pi, 0.25) * std::exp(-(x - a) * (x - a));
            CHECK(std::abs(got - want) <= 1e-12);
        }
}

TEST_CASE("oracle agrees with the exact quadrature pipeline") {
    struct {
        scenario_config cfg;
        double ta, tb;
    } pts[] = {
        {make_cfg(0.7), 0.3, -0.5},
        {make_cfg(0.5, amplifier_kind::first_order, 1.2), -0.2, 0.9},
        {make_cfg(0.6, amplifier_kind::full_exp, 1.5, 0.9), 0.4, 0.1},
        {make_cfg(0.9, amplifier_kind::none, 1.0, 0.85), 1.1, -0.3},
        {make_cfg(0.8, amplifier_kind::none, 1.0, 1.0, rotation_kind::effective),
         0.6, -0.4},
        {make_cfg(0.7, amplifier_kind::first_order, 1.25, 1.0,
                  rotation_kind::effective),
         -0.8, 0.2},
    };
    for (const auto& p : pts) {
        const double q =
            correlation(p.ta, p.tb, p.cfg, eval_method::quadrature, 1e-10).value;
        const double o = oracle_correlation(p.ta, p.tb, p.cfg);
        CHECK(std::abs(q - o) <= 1e-8);
    }
}

TEST_CASE("oracle matches the lossy closed form at unit gain") {
    auto cfg = make_cfg(0.8, amplifier_kind::none, 1.0, 0.9);
    for (double ta : {0.2, -0.6})
        for (double tb : {0.5, -0.1}) {
            const double c =
                correlation(ta, tb, cfg, eval_method::closed_form).value;
            const double o = oracle_correlation(ta, tb, cfg);
            CHECK(c == doctest::Approx(o).epsilon(1e-8));
        }
}

TEST_CASE("doubling the truncation leaves the oracle unchanged") {
    auto cfg = make_cfg(0.7, amplifier_kind::first_order, 1.3);
    const std::size_t n0 = detail_fock::scenario_cutoff(cfg, 0.4, -0.2);
    const double c1 = oracle_correlation(0.4, -0.2, cfg, n0);
    const double c2 = oracle_correlation(0.4, -0.2, cfg, 2 * n0);
    CHECK(c1 == doctest::Approx(c2).epsilon(1e-9));
}

TEST_CASE("two-mode state norm follows the branch Gram matrix") {
    // the rotated, amplified state is always a 2x2 combination over the
    // coherent branches, so its norm is fixed by the branch overlaps;
    // compute that reference directly from inner products of the per-mode
    // vectors and compare with the assembled two-mode norm
    for (auto cfg : {make_cfg(0.8), make_cfg(0.6, amplifier_kind::first_order, 1.3),
                     make_cfg(0.5, amplifier_kind::full_exp, 1.6)}) {
        const double ta = 0.35, tb = -0.7;
        const auto st = build_state(ta, tb, cfg);
        const auto ua = detail_fock::branch_vectors(ta, cfg, st.ncut);
        const auto ub = detail_fock::branch_vectors(tb, cfg, st.ncut);
        complex want = 0.0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                want += fock_inner(ua[i], ua[j]) * fock_inner(ub[i], ub[j]);
        CHECK(st.norm2() == doctest::Approx(std::real(want)).epsilon(1e-10));
    }
    // unrotated, unamplified: the bare superposition norm 2 + 2 e^{-4 a^2}
    const double a = 0.8;
    const auto st = build_state(0.0, 0.0, make_cfg(a));
    CHECK(st.norm2() ==
          doctest::Approx(2.0 + 2.0 * std::exp(-4.0 * a * a)).epsilon(1e-12));
}

TEST_CASE("effective gadget at zero angle acts as parity on both modes") {
    // Kerr-displace(0)-Kerr flips each branch, which maps the resource
    // state to itself, so every zero-angle correlation matches the ideal
    // rotation at zero angle
    auto ideal = make_cfg(0.7);
    auto eff = make_cfg(0.7, amplifier_kind::none, 1.0, 1.0,
                        rotation_kind::effective);
    CHECK(oracle_correlation(0.0, 0.0, ideal) ==
          doctest::Approx(oracle_correlation(0.0, 0.0, eff)).epsilon(1e-10));
    const auto u = detail_fock::branch_vectors(0.0, eff, 60);
    const auto plus = coherent_fock(0.7, 60);
    const auto minus = coherent_fock(-0.7, 60);
    // branch images land on the opposite coherent state
    CHECK(std::abs(fock_inner(minus, u[0])) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(fock_inner(plus, u[1])) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("error paths") {
    CHECK_THROWS_AS(build_state(0.1, 0.2, make_cfg(0.7, amplifier_kind::none,
                                                   1.0, 0.9)),
                    numeric_error);
    CHECK(default_cutoff(0.0) == 24);
    CHECK(default_cutoff(2.0) > default_cutoff(1.0));
}
