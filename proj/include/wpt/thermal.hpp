#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "wpt/errors.hpp"
#include "wpt/model.hpp"
#include "wpt/numerics.hpp"
#include "wpt/packet.hpp"

namespace wpt {

/// Truncated Maxwell-Boltzmann velocity quadrature {(v0_i, w_i)}.
struct ThermalEnsemble {
    double temperature = 0.0;
    std::vector<double> nodes;   ///< central velocities v0_i
    std::vector<double> weights; ///< positive weights
    std::optional<double> v0_min;///< lower truncation bound, when applied
    bool renormalized = true;
    double discarded_mass = 0.0; ///< Maxwell-Boltzmann mass removed by truncation

    std::size_t size() const { return nodes.size(); }
};

/// Gauss-Hermite discretization of the Maxwell-Boltzmann velocity distribution.
/// v0 = sqrt(2 T) xi maps the Gaussian f_T onto the exp(-xi^2) weight; at T = 0
/// the ensemble degenerates to the single node v0 = 0.
inline ThermalEnsemble make_ensemble(double temperature, int n,
                                     std::optional<double> v0_min = std::nullopt,
                                     bool renormalize = true) {
    if (temperature < 0.0)
        throw config_error("make_ensemble: temperature must be nonnegative");
    ThermalEnsemble e;
    e.temperature = temperature;
    e.renormalized = renormalize;
    if (temperature == 0.0) {
        if (v0_min && *v0_min > 0.0)
            throw empty_ensemble_error("make_ensemble: T = 0 node removed by truncation");
        e.nodes = {0.0};
        e.weights = {1.0};
        return e;
    }
    if (n < 2)
        throw config_error("make_ensemble: need at least 2 nodes for T > 0");
    const QuadratureRule rule = gauss_hermite(n);
    const double scale = std::sqrt(2.0 * temperature);
    const double norm = 1.0 / std::sqrt(3.141592653589793);
    double kept = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double v = scale * rule.nodes[i];
        const double w = norm * rule.weights[i];
        if (v0_min && v < *v0_min) {
            e.discarded_mass += w;
            continue;
        }
        e.nodes.push_back(v);
        e.weights.push_back(w);
        kept += w;
    }
    if (e.nodes.empty())
        throw empty_ensemble_error("make_ensemble: truncation removed every node");
    e.v0_min = v0_min;
    if (renormalize && v0_min) {
        for (double& w : e.weights)
            w /= kept;
    }
    return e;
}

/// Thermal packet center X(t) and its velocity: the v0-independent part of the
/// component center.
inline std::pair<double, double> thermal_center(const DimensionlessConfig& cfg, double t) {
    DimensionlessConfig c = cfg;
    c.v0 = 0.0;
    return center(c, t);
}

/// Thermal width sigma_{gamma,T}(t) = sqrt(sigma^2 + T e^{-gamma t} (sinh(Omega t)/Omega)^2).
inline double thermal_width(const DimensionlessConfig& cfg, const WidthSolution& widths, double t) {
    const double sig = widths.sigma(t);
    if (cfg.temperature == 0.0)
        return sig;
    const auto m = detail::damped_modes(t, cfg.omega, cfg.gamma);
    return std::hypot(sig, std::sqrt(cfg.temperature) * m.s);
}

/// Thermal probability density: Gaussian with thermal center and thermal width.
inline double thermal_density(const DimensionlessConfig& cfg, const WidthSolution& widths,
                              double x, double t) {
    const double X = thermal_center(cfg, t).first;
    const double S = thermal_width(cfg, widths, t);
    const double z = (x - X) / S;
    return std::exp(-0.5 * z * z) / (std::sqrt(two_pi) * S);
}

/// Thermal probability current: weighted sum of the component currents.
inline double thermal_current(const DimensionlessConfig& cfg, const WidthSolution& widths,
                              const ThermalEnsemble& ens, double x, double t) {
    const auto [sig, sigdot] = widths.eval(t);
    double j = 0.0;
    for (std::size_t i = 0; i < ens.size(); ++i) {
        DimensionlessConfig c = cfg;
        c.v0 = ens.nodes[i];
        const auto [xc, xdot] = center(c, t);
        PacketState s{t, xc, xdot, sig, sigdot};
        j += ens.weights[i] * current(s, x);
    }
    return j;
}

/// Thermal cumulative probability beyond x.
inline double thermal_q(const DimensionlessConfig& cfg, const WidthSolution& widths,
                        double x, double t) {
    const double X = thermal_center(cfg, t).first;
    const double S = thermal_width(cfg, widths, t);
    return 0.5 * erfc((x - X) / (sqrt2 * S));
}

} // namespace wpt
