#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "ecsim/special_math.hpp"

using namespace ecsim;

TEST_CASE("erf matches reference values") {
    CHECK(ecsim::erf(0.0) == 0.0);
    CHECK(ecsim::erf(1.0) == doctest::Approx(0.842700792949715).epsilon(1e-12));
    CHECK(ecsim::erf(-0.37) == doctest::Approx(-ecsim::erf(0.37)).epsilon(1e-14));
    // std::erf as an independent implementation
    for (double x = -6.0; x <= 6.0; x += 0.13)
        CHECK(ecsim::erf(x) == doctest::Approx(std::erf(x)).epsilon(1e-12));
    CHECK(ecsim::erf(10.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("erf is odd and monotone") {
    double prev = ecsim::erf(-4.0);
    for (double x = -4.0 + 0.05; x <= 4.0; x += 0.05) {
        const double v = ecsim::erf(x);
        CHECK(v > prev);
        CHECK(ecsim::erf(-x) == doctest::Approx(-v).epsilon(1e-14));
        prev = v;
    }
}

TEST_CASE("integrate handles Gaussian integrals") {
    auto gauss = [](double x) { return std::exp(-x * x); };
    CHECK(integrate(gauss, -10.0, 10.0, 1e-12) ==
          doctest::Approx(sqrt_pi).epsilon(1e-12));
    CHECK(integrate([](double) { return 1.0; }, 0.0, 3.0, 1e-12) ==
          doctest::Approx(3.0).epsilon(1e-13));
    // shift of variable: int x e^{-(x-1)^2} = sqrt(pi)
    CHECK(integrate([](double x) { return x * std::exp(-(x - 1) * (x - 1)); },
                    -10.0, 10.0, 1e-12) ==
          doctest::Approx(sqrt_pi).epsilon(1e-12));
}

TEST_CASE("integrate works on complex integrands") {
    // int e^{ikx} e^{-x^2} = sqrt(pi) e^{-k^2/4}
    const double k = 1.7;
    auto f = [&](double x) {
        return std::exp(std::complex<double>(0.0, k * x)) * std::exp(-x * x);
    };
    const std::complex<double> got = integrate(f, -12.0, 12.0, 1e-12);
    CHECK(got.real() == doctest::Approx(sqrt_pi * std::exp(-k * k / 4)).epsilon(1e-11));
    CHECK(std::abs(got.imag()) < 1e-11);
}

TEST_CASE("integrate matches antiderivatives of Gaussian-times-polynomial") {
    // moments of e^{-x^2} over the whole line
    const double full = sqrt_pi;
    const double m2 = sqrt_pi / 2.0;
    const double m4 = 3.0 * sqrt_pi / 4.0;
    auto mom = [&](int p) {
        return integrate(
            [p](double x) { return std::pow(x, p) * std::exp(-x * x); }, -10.0,
            10.0, 1e-12);
    };
    CHECK(mom(0) == doctest::Approx(full).epsilon(1e-12));
    CHECK(mom(2) == doctest::Approx(m2).epsilon(1e-12));
    CHECK(mom(4) == doctest::Approx(m4).epsilon(1e-12));
    CHECK(std::abs(mom(1)) < 1e-12);
}

TEST_CASE("integrate reports non-convergence on exhausted budget") {
    auto nasty = [](double x) { return std::cos(4000.0 * x); };
    CHECK_THROWS_AS(integrate(nasty, 0.0, 50.0, 1e-14, 8), non_convergence);
    CHECK_THROWS_AS(integrate([](double x) { return x; }, 1.0, 0.0, 1e-10),
                    numeric_error);
}

TEST_CASE("maximize finds simple optima") {
    auto quad = [](const std::vector<double>& x) {
        double s = 0.0;
        for (double xi : x) s -= (xi - 0.3) * (xi - 0.3);
        return s;
    };
    std::vector<std::pair<double, double>> box{{-2.0, 2.0}, {-2.0, 2.0}};
    auto r = maximize(quad, 2, box, 20, 7);
    CHECK(r.best_value == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(r.best_point[0] == doctest::Approx(0.3).epsilon(1e-4));
    CHECK(r.best_point[1] == doctest::Approx(0.3).epsilon(1e-4));
    CHECK(r.converged);

    auto cosf = [](const std::vector<double>& x) { return std::cos(2 * x[0]); };
    std::vector<std::pair<double, double>> box1{{-pi, pi}};
    auto r1 = maximize(cosf, 1, box1, 10, 0);
    CHECK(r1.best_value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("maximize is deterministic and never below its starts") {
    auto bumpy = [](const std::vector<double>& x) {
        return std::sin(3 * x[0]) * std::cos(2 * x[1]) +
               0.3 * std::sin(7 * x[0] + 1);
    };
    std::vector<std::pair<double, double>> b{{-pi, pi}, {-pi, pi}};
    auto r1 = maximize(bumpy, 2, b, 30, 42);
    auto r2 = maximize(bumpy, 2, b, 30, 42);
    CHECK(r1.best_value == r2.best_value);
    CHECK(r1.best_point == r2.best_point);
    // sampled points can never beat the reported optimum by a margin
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-pi, pi);
    for (int i = 0; i < 200; ++i)
        CHECK(bumpy({u(rng), u(rng)}) <= r1.best_value + 1e-9);
}

TEST_CASE("bisect locates roots") {
    CHECK(bisect([](double x) { return x - 0.5; }, 0.0, 1.0, 1e-10) ==
          doctest::Approx(0.5).epsilon(1e-9));
    // inverse error function value cross-checked by Newton iteration
    const double root =
        bisect([](double x) { return ecsim::erf(x) - 0.5; }, 0.0, 2.0, 1e-12);
    CHECK(root == doctest::Approx(0.476936276204470).epsilon(1e-10));
    CHECK_THROWS_AS(bisect([](double x) { return x * x + 1.0; }, -1.0, 1.0, 1e-6),
                    no_sign_change);
}

TEST_CASE("bisect result is bracketed") {
    auto f = [](double x) { return std::cos(x) - 0.2; };
    const double tol = 1e-5;
    const double r = bisect(f, 0.0, 2.0, tol);
    CHECK(f(r - tol) * f(r + tol) < 0.0);
}

TEST_CASE("gauss_legendre integrates polynomials exactly") {
    auto rule = gauss_legendre(8, 0.0, 2.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        acc += rule.weights[i] * std::pow(rule.nodes[i], 7);
    CHECK(acc == doctest::Approx(std::pow(2.0, 8) / 8.0).epsilon(1e-13));
}
