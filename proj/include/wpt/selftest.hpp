#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "wpt/model.hpp"
#include "wpt/numerics.hpp"
#include "wpt/packet.hpp"
#include "wpt/thermal.hpp"
#include "wpt/times.hpp"
#include "wpt/trajectories.hpp"
#include "wpt/transmission.hpp"

namespace wpt {

/// One oracle-family result of the self-test suite.
struct OracleReport {
    std::string name;
    double max_deviation = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Cross-checks every closed form against an independent route. An override
/// tolerance replaces each family's own (used to exercise the failure path).
inline std::vector<OracleReport> run_selftest(std::optional<double> tolerance_override = {}) {
    std::vector<OracleReport> reports;
    auto add = [&](const std::string& name, double dev, double tol) {
        OracleReport r;
        r.name = name;
        r.max_deviation = dev;
        r.tolerance = tolerance_override.value_or(tol);
        r.pass = dev <= r.tolerance;
        reports.push_back(r);
    };

    // 1. thermal closed forms vs Gauss-Hermite mixtures
    {
        double dev = 0.0;
        const QuadratureRule gh = gauss_hermite(64);
        for (const double ga : {0.0, 0.05, 0.1})
            for (const double om : {0.05, 0.1})
                for (const double temp : {0.5, 1.0, 5.0}) {
                    DimensionlessConfig cfg;
                    cfg.model = ga == 0.0 ? Model::ConservativeParabolic : Model::CK;
                    cfg.x0 = -20.0;
                    cfg.omega = om;
                    cfg.gamma = ga;
                    cfg.temperature = temp;
                    const WidthSolution w = width(cfg);
                    const double scale = std::sqrt(2.0 * temp);
                    for (const double t : {1.0, 5.0, 20.0}) {
                        const auto [sig, sigdot] = w.eval(t);
                        for (const double x : {-22.0, -18.0, 0.0}) {
                            double rho_mix = 0.0, q_mix = 0.0;
                            for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
                                DimensionlessConfig c = cfg;
                                c.v0 = scale * gh.nodes[i];
                                const auto [xc, xdot] = center(c, t);
                                const PacketState s{t, xc, xdot, sig, sigdot};
                                const double wt = gh.weights[i] / std::sqrt(3.141592653589793);
                                rho_mix += wt * density(s, x);
                                q_mix += wt * q_beyond(s, x);
                            }
                            dev = std::max(dev, std::fabs(rho_mix - thermal_density(cfg, w, x, t)));
                            dev = std::max(dev, std::fabs(q_mix - thermal_q(cfg, w, x, t)));
                        }
                    }
                }
        add("thermal-mixture-equivalence", dev, 1e-8);
    }

    // 2. transmission-route equivalence (mixture, closed form, density integral)
    {
        double dev = 0.0;
        const ThermalEnsemble ens = make_ensemble(1.0, 64);
        for (const double ga : {0.0, 0.05})
            for (const double om : {0.05, 0.1}) {
                DimensionlessConfig cfg;
                cfg.model = ga == 0.0 ? Model::ConservativeParabolic : Model::CK;
                cfg.x0 = -20.0;
                cfg.omega = om;
                cfg.gamma = ga;
                cfg.temperature = 1.0;
                const WidthSolution w = width(cfg);
                for (const double t : {5.0, 20.0, 60.0}) {
                    const double closed = p_tr_thermal(cfg, w, t);
                    double mixture = 0.0;
                    for (std::size_t i = 0; i < ens.size(); ++i) {
                        DimensionlessConfig c = cfg;
                        c.v0 = ens.nodes[i];
                        mixture += ens.weights[i] * p_tr_component(c, w, t);
                    }
                    const double X = thermal_center(cfg, t).first;
                    const double S = thermal_width(cfg, w, t);
                    const double integral = integrate_adaptive(
                        [&](double x) { return thermal_density(cfg, w, x, t); }, 0.0, X + 42.0 * S,
                        Tolerances{1e-12, 1e-14, 1e-10});
                    dev = std::max(dev, std::fabs(mixture - closed));
                    dev = std::max(dev, std::fabs(integral - closed));
                }
            }
        add("transmission-route-equivalence", dev, 1e-8);
    }

    // 3. dwell-time dual routes
    {
        double dev = 0.0;
        for (const double ga : {0.0, 0.1}) {
            DimensionlessConfig cfg;
            cfg.model = ga == 0.0 ? Model::ConservativeParabolic : Model::CK;
            cfg.x0 = -20.0;
            cfg.omega = 0.05;
            cfg.gamma = ga;
            const WidthSolution w = width(cfg);
            const double a = dwell_time(cfg, w, -1.0, 1.0);
            const double b = dwell_time_density_route(cfg, w, -1.0, 1.0);
            dev = std::max(dev, std::fabs(a - b) / std::fabs(a));
        }
        add("dwell-dual-route", dev, 1e-6);
    }

    // 4. dwell-split decomposition identity
    {
        double dev = 0.0;
        for (const double ga : {0.0, 0.025, 0.1})
            for (const double om : {0.05, 0.1}) {
                DimensionlessConfig cfg;
                cfg.model = ga == 0.0 ? Model::ConservativeParabolic : Model::CK;
                cfg.x0 = -20.0;
                cfg.omega = om;
                cfg.gamma = ga;
                const WidthSolution w = width(cfg);
                dev = std::max(dev, split_times(cfg, w, -1.0, 1.0).residual);
            }
        add("dwell-split-identity", dev, 1e-6);
    }

    // 5. trajectory counting vs the erfc closed form
    {
        DimensionlessConfig cfg;
        cfg.model = Model::ConservativeParabolic;
        cfg.x0 = -20.0;
        cfg.omega = 0.05;
        const WidthSolution w = width(cfg);
        const CountResult res = count_transmission(cfg, w, 10000);
        const double p = p_tr_component_stationary(cfg, w);
        add("counting-vs-erfc", std::fabs(res.fraction - p), 3.0 * res.std_error);
    }

    // 6. Pinney solution vs the frictionless closed form
    {
        double dev = 0.0;
        for (const double om : {0.05, 0.1}) {
            DimensionlessConfig kostin;
            kostin.model = Model::Kostin;
            kostin.x0 = -20.0;
            kostin.omega = om;
            DimensionlessConfig con = kostin;
            con.model = Model::ConservativeParabolic;
            const WidthSolution wk = width(kostin, Tolerances{}, 40.0);
            const WidthSolution wc = width(con);
            for (int i = 0; i <= 400; ++i) {
                const double t = 40.0 * i / 400;
                const double a = wk.sigma(t);
                const double b = wc.sigma(t);
                dev = std::max(dev, std::fabs(a - b) / b);
            }
        }
        add("pinney-vs-analytic", dev, 1e-8);
    }

    // 7. continuity equation residuals (pure and thermal), central differences
    {
        double dev = 0.0;
        const double h = 1e-4;
        DimensionlessConfig cfg;
        cfg.model = Model::CK;
        cfg.x0 = -20.0;
        cfg.omega = 0.05;
        cfg.gamma = 0.1;
        cfg.v0 = 1.0;
        cfg.temperature = 1.0;
        const WidthSolution w = width(cfg);
        const ThermalEnsemble ens = make_ensemble(cfg.temperature, 64);
        SplitMix64 rng(20240811u);
        for (int i = 0; i < 100; ++i) {
            const double t = rng.uniform(0.5, 30.0);
            const double x = rng.uniform(-25.0, 5.0);
            const double drho = (density(state_at(cfg, w, t + h), x) -
                                 density(state_at(cfg, w, t - h), x)) / (2.0 * h);
            const double dj = (current(state_at(cfg, w, t), x + h) -
                               current(state_at(cfg, w, t), x - h)) / (2.0 * h);
            dev = std::max(dev, std::fabs(drho + dj));
            const double drho_T = (thermal_density(cfg, w, x, t + h) -
                                   thermal_density(cfg, w, x, t - h)) / (2.0 * h);
            const double dj_T = (thermal_current(cfg, w, ens, x + h, t) -
                                 thermal_current(cfg, w, ens, x - h, t)) / (2.0 * h);
            dev = std::max(dev, std::fabs(drho_T + dj_T));
        }
        add("continuity-residual", dev, 1e-6);
    }

    return reports;
}

} // namespace wpt
