#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "wpt/numerics.hpp"

using namespace wpt;

namespace {

// Independent erfc reference: long double Maclaurin series for small |x|,
// Lentz-evaluated continued fraction for the tail. Shares no code with the
// rational-minimax implementation under test.
long double erfc_reference(long double x) {
    const long double ax = std::fabs(x);
    long double val;
    if (ax < 2.0L) {
        // wpt::erf(x) = 2/sqrt(pi) * sum (-1)^n x^{2n+1} / (n! (2n+1))
        long double term = ax;
        long double sum = ax;
        for (int n = 1; n < 200; ++n) {
            term *= -ax * ax / n;
            sum += term / (2 * n + 1);
            if (std::fabs(term) < 1e-25L * std::fabs(sum))
                break;
        }
        const long double erf_ax = sum * 2.0L / std::sqrt(3.14159265358979323846264338328L);
        val = 1.0L - erf_ax;
    } else {
        // wpt::erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + 2/(x + ...)))))
        long double cf = 0.0L;
        for (int n = 100; n >= 1; --n)
            cf = (0.5L * n) / (ax + cf);
        val = std::exp(-ax * ax) / std::sqrt(3.14159265358979323846264338328L) / (ax + cf);
    }
    return (x < 0.0L) ? 2.0L - val : val;
}

} // namespace

TEST_CASE("erfc reference values and reflection points", "[numerics][erfc]") {
    CHECK(wpt::erfc(0.0) == 1.0);
    CHECK(wpt::erfc(1.0) == Catch::Approx(0.15729920705028513).epsilon(1e-13));
    CHECK(std::fabs(wpt::erfc(5.0) + wpt::erfc(-5.0) - 2.0) < 1e-15);
}

TEST_CASE("erfc agrees with an independent reference", "[numerics][erfc]") {
    for (double x = -25.0; x <= 25.0; x += 0.0625) {
        const double ref = static_cast<double>(erfc_reference(static_cast<long double>(x)));
        if (ref > 1e-300) {
            CHECK(std::fabs(wpt::erfc(x) - ref) <= 1e-13 * std::fabs(ref));
        }
    }
}

TEST_CASE("erfc reflection identity over the sampled range", "[numerics][erfc]") {
    double worst = 0.0;
    for (int i = 0; i <= 10000; ++i) {
        const double x = -6.0 + 12.0 * i / 10000.0;
        worst = std::max(worst, std::fabs(wpt::erfc(x) + wpt::erfc(-x) - 2.0));
    }
    CHECK(worst <= 1e-14);
}

TEST_CASE("erfc rejects non-finite input", "[numerics][erfc]") {
    CHECK_THROWS_AS(wpt::erfc(std::nan("")), wpt::domain_error);
    CHECK_THROWS_AS(wpt::erf(std::numeric_limits<double>::infinity()), wpt::domain_error);
}

TEST_CASE("erfc_inv inverts erfc", "[numerics][erfc]") {
    for (const double y : {1e-12, 1e-6, 0.02, 0.3, 1.0, 1.5, 1.999}) {
        const double z = erfc_inv(y);
        CHECK(wpt::erfc(z) == Catch::Approx(y).epsilon(1e-12));
    }
    CHECK(erfc_inv(1.0) == 0.0);
    CHECK_THROWS_AS(erfc_inv(0.0), wpt::domain_error);
    CHECK_THROWS_AS(erfc_inv(2.0), wpt::domain_error);
}

TEST_CASE("gauss_hermite two-point rule is analytic", "[numerics][quadrature]") {
    const QuadratureRule r = gauss_hermite(2);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const double half_sqrt_pi = 0.5 * std::sqrt(3.141592653589793);
    REQUIRE(r.nodes.size() == 2);
    CHECK(r.nodes[0] == Catch::Approx(-inv_sqrt2).margin(1e-15));
    CHECK(r.nodes[1] == Catch::Approx(inv_sqrt2).margin(1e-15));
    CHECK(r.weights[0] == Catch::Approx(half_sqrt_pi).epsilon(1e-14));
    CHECK(r.weights[1] == Catch::Approx(half_sqrt_pi).epsilon(1e-14));
}

TEST_CASE("gauss_hermite weights sum to sqrt(pi)", "[numerics][quadrature]") {
    for (const int n : {2, 8, 33, 64, 256}) {
        const QuadratureRule r = gauss_hermite(n);
        double sum = 0.0;
        for (const double w : r.weights)
            sum += w;
        CHECK(sum == Catch::Approx(std::sqrt(3.141592653589793)).epsilon(1e-13));
        for (std::size_t i = 1; i < r.nodes.size(); ++i)
            REQUIRE(r.nodes[i] > r.nodes[i - 1]);
        for (const double w : r.weights)
            REQUIRE(w > 0.0);
    }
}

TEST_CASE("gauss_hermite reproduces Gaussian moments", "[numerics][quadrature]") {
    const QuadratureRule r = gauss_hermite(64);
    double m2 = 0.0, m4 = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        m2 += r.weights[i] * r.nodes[i] * r.nodes[i];
        m4 += r.weights[i] * std::pow(r.nodes[i], 4);
    }
    CHECK(m2 == Catch::Approx(0.5 * std::sqrt(3.141592653589793)).epsilon(1e-12));
    CHECK(m4 == Catch::Approx(0.75 * std::sqrt(3.141592653589793)).epsilon(1e-12));
}

TEST_CASE("gauss_hermite integrates monomials up to degree 2n-1 exactly",
          "[numerics][quadrature][property]") {
    // moments of exp(-x^2): odd vanish, even are (k-1)!! sqrt(pi) / 2^(k/2)
    for (const int n : {2, 5, 8, 16}) {
        const QuadratureRule r = gauss_hermite(n);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double approx = 0.0, scale = 0.0;
            for (std::size_t i = 0; i < r.nodes.size(); ++i) {
                approx += r.weights[i] * std::pow(r.nodes[i], k);
                scale += r.weights[i] * std::pow(std::fabs(r.nodes[i]), k);
            }
            if (k % 2 == 1) {
                CHECK(std::fabs(approx) <= 1e-12 * std::max(scale, 1.0));
            } else {
                double exact = std::sqrt(3.141592653589793);
                for (int j = k - 1; j >= 1; j -= 2)
                    exact *= 0.5 * j;
                CHECK(approx == Catch::Approx(exact).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("gauss_hermite rejects out-of-range orders", "[numerics][quadrature]") {
    CHECK_THROWS_AS(gauss_hermite(1), wpt::config_error);
    CHECK_THROWS_AS(gauss_hermite(257), wpt::config_error);
}

TEST_CASE("integrate_time_tail on analytic integrals", "[numerics][tail]") {
    CHECK(integrate_time_tail([](double t) { return std::exp(-t); }, 0.0) ==
          Catch::Approx(1.0).epsilon(1e-9));
    CHECK(integrate_time_tail([](double t) { return t * std::exp(-t * t); }, 0.0) ==
          Catch::Approx(0.5).epsilon(1e-9));
    // unit-area Gaussian bump far from the origin
    auto bump = [](double t) {
        const double z = (t - 30.0) / 2.0;
        return std::exp(-0.5 * z * z) / (2.0 * std::sqrt(2.0 * 3.141592653589793));
    };
    CHECK(integrate_time_tail(bump, 0.0) == Catch::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("integrate_time_tail is window-shift invariant", "[numerics][tail][property]") {
    auto f = [](double t) { return t * t * std::exp(-0.3 * t); };
    const double exact = 2.0 / (0.3 * 0.3 * 0.3);
    for (const double w0 : {5.0, 10.0, 20.0}) {
        TailOptions opt;
        opt.initial_window = w0;
        const double val = integrate_time_tail(f, 0.0, Tolerances{}, opt);
        CHECK(val == Catch::Approx(exact).epsilon(1e-9));
    }
}

TEST_CASE("integrate_time_tail reports non-decaying integrands", "[numerics][tail]") {
    TailOptions opt;
    opt.max_windows = 200;
    try {
        integrate_time_tail([](double t) { return 1.0 / (1.0 + t); }, 0.0, Tolerances{}, opt);
        FAIL("expected convergence_error");
    } catch (const convergence_error& e) {
        CHECK(e.partial_value > 0.0); // carries the partial integral
    }
}

TEST_CASE("solve_ivp integrates exponential decay", "[numerics][ode]") {
    auto rhs = [](double, const std::vector<double>& y, std::vector<double>& dy) { dy[0] = -y[0]; };
    const OdeSolution sol = solve_ivp(rhs, {1.0}, 0.0, 1.0);
    CHECK(sol.final_state()[0] == Catch::Approx(std::exp(-1.0)).epsilon(1e-9));
}

TEST_CASE("solve_ivp conserves harmonic-oscillator energy", "[numerics][ode]") {
    auto rhs = [](double, const std::vector<double>& y, std::vector<double>& dy) {
        dy[0] = y[1];
        dy[1] = -y[0];
    };
    const OdeSolution sol = solve_ivp(rhs, {1.0, 0.0}, 0.0, 100.0);
    double worst = 0.0;
    for (const auto& s : sol.states()) {
        const double energy = 0.5 * (s[0] * s[0] + s[1] * s[1]);
        worst = std::max(worst, std::fabs(energy - 0.5) / 0.5);
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("solve_ivp dense output matches stored states", "[numerics][ode]") {
    auto rhs = [](double t, const std::vector<double>& y, std::vector<double>& dy) {
        dy[0] = std::cos(t) * y[0];
    };
    const OdeSolution sol = solve_ivp(rhs, {1.0}, 0.0, 10.0);
    for (std::size_t i = 0; i < sol.t_grid().size(); ++i) {
        const double interp = sol.eval(sol.t_grid()[i], 0);
        const double stored = sol.states()[i][0];
        CHECK(std::fabs(interp - stored) <= 1e-12 * std::max(1.0, std::fabs(stored)));
    }
    CHECK_THROWS_AS(sol.eval(10.5, 0), wpt::domain_error);
    CHECK_THROWS_AS(sol.eval(-0.5, 0), wpt::domain_error);
}

TEST_CASE("solve_ivp tolerance halving tightens the oscillator error",
          "[numerics][ode][property]") {
    auto rhs = [](double, const std::vector<double>& y, std::vector<double>& dy) {
        dy[0] = y[1];
        dy[1] = -y[0];
    };
    auto error_at = [&](double rel) {
        Tolerances tol;
        tol.rel = rel;
        tol.abs = 1e-14;
        const OdeSolution sol = solve_ivp(rhs, {1.0, 0.0}, 0.0, 20.0, tol);
        return std::fabs(sol.final_state()[0] - std::cos(20.0));
    };
    const double coarse = error_at(1e-6);
    const double fine = error_at(5e-7);
    CHECK(fine <= 0.5 * coarse);
}

TEST_CASE("solve_ivp reports step underflow near singularities", "[numerics][ode]") {
    // y' = y^2 with y(0)=1 blows up at t=1
    auto rhs = [](double, const std::vector<double>& y, std::vector<double>& dy) {
        dy[0] = y[0] * y[0];
    };
    try {
        solve_ivp(rhs, {1.0}, 0.0, 2.0);
        FAIL("expected integration_error");
    } catch (const integration_error& e) {
        CHECK(e.failure_time == Catch::Approx(1.0).margin(0.05));
    }
}

TEST_CASE("solve_ivp rejects empty spans", "[numerics][ode]") {
    auto rhs = [](double, const std::vector<double>& y, std::vector<double>& dy) { dy[0] = -y[0]; };
    CHECK_THROWS_AS(solve_ivp(rhs, {1.0}, 1.0, 1.0), wpt::domain_error);
}

TEST_CASE("sinhc limit, series window and direct evaluation", "[numerics][sinhc]") {
    CHECK(sinhc(0.0) == 1.0);
    CHECK(std::fabs(sinhc(1e-6) - (1.0 + 1e-12 / 6.0)) <= 1e-18);
    CHECK(sinhc(2.0) == Catch::Approx(std::sinh(2.0) / 2.0).epsilon(1e-15));
    CHECK(sinhc(-2.0) == sinhc(2.0));
}

TEST_CASE("exp-scaled hyperbolics avoid overflow", "[numerics][sinhc]") {
    // e^{-a} cosh(b) with a,b ~ 800 separately overflow, the pair does not
    const double v = exp_scaled_cosh(-800.0, 801.0);
    CHECK(std::isfinite(v));
    CHECK(v == Catch::Approx(0.5 * std::exp(1.0)).epsilon(1e-12));
    CHECK(exp_scaled_sinh(-800.0, 801.0) == Catch::Approx(0.5 * std::exp(1.0)).epsilon(1e-12));
    CHECK(exp_scaled_sinh(0.0, 1e-9) == Catch::Approx(1e-9).epsilon(1e-12));
}

TEST_CASE("find_root solves bracketed reference roots", "[numerics][roots]") {
    Tolerances tight;
    tight.rel = 1e-14;
    tight.abs = 1e-300;
    CHECK(find_root([](double x) { return x * x - 2.0; }, 1.0, 2.0, tight) ==
          Catch::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(find_root([](double x) { return std::cos(x); }, 1.0, 2.0, tight) ==
          Catch::Approx(0.5 * 3.141592653589793).epsilon(1e-12));

    // independent bisection oracle for the erfc threshold root
    double lo = 1.0, hi = 3.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        ((wpt::erfc(mid) - 0.02 > 0.0) ? lo : hi) = mid;
    }
    const double brent = find_root([](double x) { return wpt::erfc(x) - 0.02; }, 1.0, 3.0, tight);
    CHECK(brent == Catch::Approx(0.5 * (lo + hi)).epsilon(1e-9));
    CHECK(brent == Catch::Approx(1.64498).epsilon(1e-4));
}

TEST_CASE("find_root rejects unbracketed roots", "[numerics][roots]") {
    CHECK_THROWS_AS(find_root([](double x) { return x * x + 1.0; }, -1.0, 1.0, Tolerances{}),
                    wpt::bracketing_error);
}

TEST_CASE("Tolerances validation", "[numerics]") {
    Tolerances t;
    t.rel = 0.0;
    CHECK_THROWS_AS(t.validate(), wpt::config_error);
    t.rel = 2.0;
    CHECK_THROWS_AS(t.validate(), wpt::config_error);
    t = Tolerances{};
    CHECK_NOTHROW(t.validate());
}

TEST_CASE("SplitMix64 streams are reproducible", "[numerics]") {
    SplitMix64 a(42), b(42), c(43);
    bool same = true, differ = false;
    for (int i = 0; i < 100; ++i) {
        const double va = a.uniform();
        same = same && (va == b.uniform());
        differ = differ || (va != c.uniform());
    }
    CHECK(same);
    CHECK(differ);
}
