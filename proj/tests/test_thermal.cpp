#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "wpt/thermal.hpp"
#include "wpt/transmission.hpp"

using namespace wpt;

namespace {

DimensionlessConfig base_cfg(Model m, double omega, double gamma, double temp, double v0 = 0.0) {
    DimensionlessConfig cfg;
    cfg.model = m;
    cfg.x0 = -20.0;
    cfg.omega = omega;
    cfg.gamma = gamma;
    cfg.temperature = temp;
    cfg.v0 = v0;
    return cfg;
}

// brute-force quadrature of the reduced Maxwell-Boltzmann distribution,
// pinning the reduced-unit second moment
double mb_moment(double temp, int k) {
    const int n = 400000;
    const double lim = 12.0 * std::sqrt(temp);
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double v = -lim + 2.0 * lim * i / n;
        const double f = std::exp(-0.5 * v * v / temp) / std::sqrt(two_pi * temp);
        const double w = (i == 0 || i == n) ? 0.5 : 1.0;
        sum += w * f * std::pow(v, k);
    }
    return sum * 2.0 * lim / n;
}

} // namespace

TEST_CASE("zero-temperature ensemble is the single resting node", "[thermal][ensemble]") {
    const ThermalEnsemble e = make_ensemble(0.0, 64);
    REQUIRE(e.size() == 1);
    CHECK(e.nodes[0] == 0.0);
    CHECK(e.weights[0] == 1.0);
}

TEST_CASE("ensemble moments match the Maxwell-Boltzmann distribution", "[thermal][ensemble]") {
    const double temp = 1.0;
    const ThermalEnsemble e = make_ensemble(temp, 64);
    double w_sum = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        w_sum += e.weights[i];
        m1 += e.weights[i] * e.nodes[i];
        m2 += e.weights[i] * e.nodes[i] * e.nodes[i];
    }
    CHECK(w_sum == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(std::fabs(m1) <= 1e-12);
    // reduced-unit factor verified against brute-force integration: <v^2> = T
    const double brute = mb_moment(temp, 2);
    CHECK(brute == Catch::Approx(temp).epsilon(1e-6));
    CHECK(m2 == Catch::Approx(temp).epsilon(1e-12));
    // symmetric about zero when untruncated
    for (std::size_t i = 0; i < e.size(); ++i)
        CHECK(e.nodes[i] == Catch::Approx(-e.nodes[e.size() - 1 - i]).margin(1e-14));
}

TEST_CASE("truncated ensembles renormalize to unit weight", "[thermal][ensemble]") {
    const ThermalEnsemble e = make_ensemble(1.0, 64, -1.304);
    double w_sum = 0.0;
    for (const double w : e.weights)
        w_sum += w;
    CHECK(w_sum == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(e.discarded_mass > 0.0);
    for (const double v : e.nodes)
        CHECK(v >= -1.304);

    const ThermalEnsemble raw = make_ensemble(1.0, 64, -1.304, false);
    double raw_sum = 0.0;
    for (const double w : raw.weights)
        raw_sum += w;
    CHECK(raw_sum == Catch::Approx(1.0 - raw.discarded_mass).epsilon(1e-12));
}

TEST_CASE("degenerate ensembles are rejected", "[thermal][ensemble]") {
    CHECK_THROWS_AS(make_ensemble(1.0, 64, 1e9), wpt::empty_ensemble_error);
    CHECK_THROWS_AS(make_ensemble(1.0, 1), wpt::config_error);
    CHECK_THROWS_AS(make_ensemble(-1.0, 64), wpt::config_error);
}

TEST_CASE("thermal center is the resting-component center", "[thermal][center]") {
    const auto cfg = base_cfg(Model::CK, 0.05, 0.1, 1.0, 3.0); // v0 must not matter
    CHECK(thermal_center(cfg, 0.0).first == cfg.x0);
    const auto cons = base_cfg(Model::ConservativeParabolic, 0.05, 0.0, 1.0);
    for (const double t : {1.0, 10.0, 30.0})
        CHECK(thermal_center(cons, t).first ==
              Catch::Approx(cons.x0 * std::cosh(cons.omega * t)).epsilon(1e-12));

    // linearity in v0: ensemble average of component centers over a symmetric
    // ensemble collapses to the resting center
    const ThermalEnsemble e = make_ensemble(1.0, 64);
    double avg = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        DimensionlessConfig c = cfg;
        c.v0 = e.nodes[i];
        avg += e.weights[i] * center(c, 7.0).first;
    }
    CHECK(avg == Catch::Approx(thermal_center(cfg, 7.0).first).margin(1e-12));
}

TEST_CASE("thermal width closed forms", "[thermal][width]") {
    const auto cold = base_cfg(Model::CK, 0.05, 0.1, 0.0);
    const WidthSolution wc = width(cold);
    for (const double t : {0.5, 5.0, 20.0})
        CHECK(thermal_width(cold, wc, t) == wc.sigma(t));

    // free frictionless case: sigma_T = sqrt(1 + (1+T) t^2)
    const auto free_hot = base_cfg(Model::ConservativeFree, 0.0, 0.0, 3.0);
    const WidthSolution wf = width(free_hot);
    CHECK(thermal_width(free_hot, wf, 2.0) == Catch::Approx(std::sqrt(17.0)).epsilon(1e-12));

    // free CK variance evaluated directly
    const auto damp = base_cfg(Model::CK, 0.0, 0.1, 2.0);
    const WidthSolution wd = width(damp);
    for (const double t : {1.0, 5.0, 25.0}) {
        const double spread = (1.0 - std::exp(-0.1 * t)) / 0.1;
        const double th = std::exp(-0.1 * t) * 2.0 * 4.0 / 0.01 *
                          std::sinh(0.05 * t) * std::sinh(0.05 * t);
        const double closed = std::sqrt(1.0 + spread * spread + th);
        CHECK(thermal_width(damp, wd, t) == Catch::Approx(closed).epsilon(1e-12));
    }
}

TEST_CASE("thermal density integrates to one and matches the mixture", "[thermal][density]") {
    const auto cfg = base_cfg(Model::CK, 0.05, 0.08, 1.5);
    const WidthSolution w = width(cfg);
    const Tolerances tol{1e-12, 1e-14, 1e-10};
    const double t = 9.0;
    const double X = thermal_center(cfg, t).first;
    const double S = thermal_width(cfg, w, t);
    const double mass =
        integrate_adaptive([&](double x) { return thermal_density(cfg, w, x, t); }, X - 45.0 * S,
                           X + 45.0 * S, tol);
    CHECK(mass == Catch::Approx(1.0).epsilon(1e-10));

    const ThermalEnsemble e = make_ensemble(cfg.temperature, 64);
    SplitMix64 rng(5);
    const auto [sig, sigdot] = w.eval(t);
    for (int i = 0; i < 20; ++i) {
        const double x = rng.uniform(X - 4.0 * S, X + 4.0 * S);
        double mix = 0.0;
        for (std::size_t k = 0; k < e.size(); ++k) {
            DimensionlessConfig c = cfg;
            c.v0 = e.nodes[k];
            const auto [xc, xdot] = center(c, t);
            mix += e.weights[k] * density(PacketState{t, xc, xdot, sig, sigdot}, x);
        }
        CHECK(mix == Catch::Approx(thermal_density(cfg, w, x, t)).margin(1e-9));
    }

    // zero-temperature reduction is exact
    const auto cold = base_cfg(Model::CK, 0.05, 0.08, 0.0);
    const WidthSolution w0 = width(cold);
    CHECK(thermal_density(cold, w0, -18.0, 4.0) ==
          density(state_at(cold, w0, 4.0), -18.0));
}

TEST_CASE("thermal current vanishes initially and matches the parabolic closed form",
          "[thermal][current][oracle]") {
    const auto cfg = base_cfg(Model::ConservativeParabolic, 0.05, 0.0, 1.0);
    const WidthSolution w = width(cfg);
    const ThermalEnsemble e = make_ensemble(cfg.temperature, 64);
    for (const double x : {-22.0, -20.0, -15.0, 0.0})
        CHECK(std::fabs(thermal_current(cfg, w, e, x, 0.0)) <= 1e-16);

    // reduced closed form of the conservative parabolic thermal current
    const double om = cfg.omega, temp = cfg.temperature;
    SplitMix64 rng(7);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double t = rng.uniform(0.05, 40.0);
        const double x = rng.uniform(-30.0, 10.0);
        const double C = std::cosh(om * t), S = std::sinh(om * t);
        const double var = C * C + (1.0 + temp) * S * S / (om * om);
        const double rho =
            std::exp(-0.5 * (x - cfg.x0 * C) * (x - cfg.x0 * C) / var) / std::sqrt(two_pi * var);
        const double closed =
            S * (x * (1.0 + temp + om * om) * C - cfg.x0 * (1.0 + temp)) / (om * var) * rho;
        worst = std::max(worst, std::fabs(thermal_current(cfg, w, e, x, t) - closed));
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("thermal continuity equation holds", "[thermal][current][oracle]") {
    const auto cfg = base_cfg(Model::CK, 0.05, 0.1, 1.0);
    const WidthSolution w = width(cfg);
    const ThermalEnsemble e = make_ensemble(cfg.temperature, 64);
    SplitMix64 rng(11);
    const double h = 1e-4;
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double t = rng.uniform(0.5, 25.0);
        const double x = rng.uniform(-26.0, 2.0);
        const double drho =
            (thermal_density(cfg, w, x, t + h) - thermal_density(cfg, w, x, t - h)) / (2 * h);
        const double dj =
            (thermal_current(cfg, w, e, x + h, t) - thermal_current(cfg, w, e, x - h, t)) / (2 * h);
        worst = std::max(worst, std::fabs(drho + dj));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("thermal Q median, mixture route and long-time limit", "[thermal][q]") {
    const auto cfg = base_cfg(Model::CK, 0.05, 0.06, 1.0);
    const WidthSolution w = width(cfg);
    for (const double t : {0.0, 3.0, 15.0})
        CHECK(thermal_q(cfg, w, thermal_center(cfg, t).first, t) ==
              Catch::Approx(0.5).epsilon(1e-14));

    const ThermalEnsemble e = make_ensemble(cfg.temperature, 64);
    const auto [sig, sigdot] = w.eval(8.0);
    for (const double x : {-22.0, -15.0, 0.0}) {
        double mix = 0.0;
        for (std::size_t k = 0; k < e.size(); ++k) {
            DimensionlessConfig c = cfg;
            c.v0 = e.nodes[k];
            const auto [xc, xdot] = center(c, 8.0);
            mix += e.weights[k] * q_beyond(PacketState{8.0, xc, xdot, sig, sigdot}, x);
        }
        CHECK(mix == Catch::Approx(thermal_q(cfg, w, x, 8.0)).margin(1e-9));
    }

    // long-time limit at the barrier top is the stationary thermal transmission
    const double stationary = p_tr_stationary(cfg, w);
    CHECK(thermal_q(cfg, w, 0.0, 2500.0) == Catch::Approx(stationary).margin(1e-8));
}

TEST_CASE("thermal width broadens monotonically with temperature", "[thermal][property]") {
    for (const double ga : {0.0, 0.1})
        for (const double om : {0.0, 0.05}) {
            const auto cfg0 = base_cfg(ga == 0.0 ? Model::ConservativeParabolic : Model::CK,
                                       om, ga, 0.0);
            // conservative model requires omega flexibility
            DimensionlessConfig cfg = cfg0;
            if (om == 0.0)
                cfg.model = ga == 0.0 ? Model::ConservativeFree : Model::CK;
            const WidthSolution w = width(cfg);
            for (const double t : {1.0, 8.0, 20.0}) {
                double prev = -1.0;
                for (const double temp : {0.0, 0.5, 1.0, 2.0, 5.0}) {
                    DimensionlessConfig c = cfg;
                    c.temperature = temp;
                    const double sig = thermal_width(c, w, t);
                    CHECK(sig > prev);
                    prev = sig;
                }
            }
        }
}

TEST_CASE("closed thermal fields equal their mixtures across a parameter grid",
          "[thermal][property][oracle]") {
    const QuadratureRule gh = gauss_hermite(64);
    double worst = 0.0;
    int points = 0;
    for (const double ga : {0.0, 0.04, 0.1})
        for (const double om : {0.05, 0.1})
            for (const double temp : {0.3, 1.0, 4.0})
                for (const double t : {0.7, 4.0, 12.0, 32.0}) {
                    DimensionlessConfig cfg;
                    cfg.model = ga == 0.0 ? Model::ConservativeParabolic : Model::CK;
                    cfg.x0 = -20.0;
                    cfg.omega = om;
                    cfg.gamma = ga;
                    cfg.temperature = temp;
                    const WidthSolution w = width(cfg);
                    const auto [sig, sigdot] = w.eval(t);
                    const double scale = std::sqrt(2.0 * temp);
                    for (const double x : {-24.0, -16.0, 0.0}) {
                        double rho = 0.0, q = 0.0;
                        for (std::size_t k = 0; k < gh.nodes.size(); ++k) {
                            DimensionlessConfig c = cfg;
                            c.v0 = scale * gh.nodes[k];
                            const auto [xc, xdot] = center(c, t);
                            const PacketState s{t, xc, xdot, sig, sigdot};
                            const double wt = gh.weights[k] / std::sqrt(3.141592653589793);
                            rho += wt * density(s, x);
                            q += wt * q_beyond(s, x);
                        }
                        worst = std::max(worst, std::fabs(rho - thermal_density(cfg, w, x, t)));
                        worst = std::max(worst, std::fabs(q - thermal_q(cfg, w, x, t)));
                        ++points;
                    }
                }
    CHECK(points >= 200);
    CHECK(worst <= 1e-8);
}
