#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "wpt/errors.hpp"
#include "wpt/model.hpp"
#include "wpt/numerics.hpp"
#include "wpt/packet.hpp"
#include "wpt/thermal.hpp"
#include "wpt/transmission.hpp"

namespace wpt {

/// Normalized arrival-time distribution at a detector position.
struct ArrivalDistribution {
    double x_detector = 0.0;
    std::vector<double> t;      ///< grid, uniform with refinement around the peak
    std::vector<double> density;///< Pi_A(t), integrates to 1
    double mean = 0.0;          ///< mean arrival time
    double peak_time = 0.0;
    double total_flux = 0.0;    ///< integral of |j| before normalization
    double t_end = 0.0;         ///< extent of the time integration
};

/// Dwell time and its transmission/reflection split over one interval.
struct CharacteristicTimes {
    double x1 = 0.0, x2 = 0.0;
    double dwell = 0.0;
    std::optional<double> transmission; ///< absent when P_tr is degenerate
    std::optional<double> reflection;   ///< absent when P_ref is degenerate
    double p_tr = 0.0;
    double residual = 0.0; ///< |dwell - (P_tr tau_tr + P_ref tau_ref)|
};

namespace detail {

struct TailResult {
    double value = 0.0;
    double t_end = 0.0;
};

// integrate_time_tail, also reporting how far the windows reached
template <class F>
inline TailResult tail_with_extent(F&& f, double t_start, const Tolerances& tol,
                                   const TailOptions& opt = {}) {
    TailResult res;
    double acc = 0.0;
    double t = t_start;
    double w = opt.initial_window;
    int quiet = 0;
    std::size_t zero_prefix = 0;
    for (std::size_t k = 0; k < opt.max_windows; ++k) {
        const double val = integrate_adaptive(f, t, t + w, tol);
        acc += val;
        t += w;
        if (acc == 0.0) {
            if (val == 0.0 && ++zero_prefix >= opt.max_zero_prefix) {
                res.t_end = t;
                return res;
            }
        } else if (std::fabs(val) < tol.t_tail_cutoff * std::fabs(acc)) {
            if (++quiet >= 3) {
                res.value = acc;
                res.t_end = t;
                return res;
            }
        } else {
            quiet = 0;
        }
        if (opt.t_max > 0.0 && t >= opt.t_max)
            throw convergence_error("tail integration: tail not settled before t_max", acc);
        w = std::min(w * opt.window_growth, opt.max_window);
    }
    throw convergence_error("tail integration: no decay before the window cap", acc);
}

// deterministic output grid: uniform plus a refined band around the peak
template <class F>
inline void build_peaked_grid(F&& f, double t_end, std::vector<double>& grid, double& peak_time) {
    constexpr int n_coarse = 512;
    constexpr int n_fine = 64;
    grid.clear();
    grid.reserve(n_coarse + n_fine + 2);
    const double dt = t_end / n_coarse;
    int best = 1;
    double fbest = -1.0;
    for (int i = 0; i <= n_coarse; ++i) {
        const double t = i * dt;
        grid.push_back(t);
        const double v = f(t);
        if (v > fbest) {
            fbest = v;
            best = i;
        }
    }
    // golden-section refinement inside the bracketing neighbors
    double a = std::max(0.0, (best - 1) * dt);
    double b = std::min(t_end, (best + 1) * dt);
    const double gr = 0.6180339887498949;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 90 && (b - a) > 1e-10 * std::max(1.0, t_end); ++it) {
        if (f1 < f2) {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + gr * (b - a); f2 = f(x2);
        } else {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - gr * (b - a); f1 = f(x1);
        }
    }
    peak_time = 0.5 * (a + b);
    const double band = 2.0 * dt;
    const double lo = std::max(0.0, peak_time - band);
    const double hi = std::min(t_end, peak_time + band);
    for (int i = 0; i <= n_fine; ++i)
        grid.push_back(lo + (hi - lo) * i / n_fine);
    grid.push_back(peak_time);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
}

} // namespace detail

/// Arrival-time distribution of one component at detector x_d:
/// Pi_A(t) = |j(x_d, t)| / int_0^inf |j(x_d, t')| dt'.
inline ArrivalDistribution arrival_distribution(const DimensionlessConfig& cfg,
                                                const WidthSolution& widths, double x_d,
                                                const Tolerances& tol = {},
                                                const TailOptions& topt = {}) {
    if (std::fabs(x_d - cfg.x0) <= 5.0)
        throw config_error("arrival_distribution: detector must lie beyond the initial packet "
                           "support (|x_d - x0| > 5)");
    auto flux = [&](double t) { return std::fabs(current(state_at(cfg, widths, t), x_d)); };
    const auto norm = detail::tail_with_extent(flux, 0.0, tol, topt);
    if (!(norm.value > 0.0))
        throw degenerate_error("arrival_distribution: vanishing total flux at the detector");
    ArrivalDistribution d;
    d.x_detector = x_d;
    d.total_flux = norm.value;
    d.t_end = norm.t_end;
    const auto mean =
        detail::tail_with_extent([&](double t) { return t * flux(t); }, 0.0, tol, topt);
    d.mean = mean.value / norm.value;
    detail::build_peaked_grid(flux, norm.t_end, d.t, d.peak_time);
    d.density.reserve(d.t.size());
    for (const double t : d.t)
        d.density.push_back(flux(t) / norm.value);
    return d;
}

/// Thermal arrival-time distribution: normalized mixture of the per-component
/// normalized distributions; the thermal mean is the weight-averaged mean.
inline ArrivalDistribution thermal_arrival(const DimensionlessConfig& cfg,
                                           const ThermalEnsemble& ens, const WidthSolution& widths,
                                           double x_d, const Tolerances& tol = {},
                                           const TailOptions& topt = {}) {
    if (std::fabs(x_d - cfg.x0) <= 5.0)
        throw config_error("thermal_arrival: detector must lie beyond the initial packet support");
    struct Component {
        DimensionlessConfig cfg;
        double weight = 0.0;
        double norm = 0.0;
    };
    std::vector<Component> comps;
    comps.reserve(ens.size());
    double t_end = 0.0;
    double mean = 0.0;
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < ens.size(); ++i) {
        Component c;
        c.cfg = cfg;
        c.cfg.v0 = ens.nodes[i];
        c.weight = ens.weights[i];
        auto flux = [&](double t) { return std::fabs(current(state_at(c.cfg, widths, t), x_d)); };
        const auto norm = detail::tail_with_extent(flux, 0.0, tol, topt);
        if (!(norm.value > 0.0)) {
            // numerically fluxless component: tolerable only at negligible weight
            if (c.weight > 1e-14)
                throw degenerate_error("thermal_arrival: vanishing flux for a component of "
                                       "non-negligible weight");
            continue;
        }
        c.norm = norm.value;
        t_end = std::max(t_end, norm.t_end);
        const auto m =
            detail::tail_with_extent([&](double t) { return t * flux(t); }, 0.0, tol, topt);
        mean += c.weight * (m.value / norm.value);
        weight_sum += c.weight;
        comps.push_back(c);
    }
    if (comps.empty())
        throw degenerate_error("thermal_arrival: no component reaches the detector");

    auto mixture = [&](double t) {
        double v = 0.0;
        for (const auto& c : comps)
            v += c.weight * std::fabs(current(state_at(c.cfg, widths, t), x_d)) / c.norm;
        return v / weight_sum;
    };
    ArrivalDistribution d;
    d.x_detector = x_d;
    d.t_end = t_end;
    d.total_flux = weight_sum;
    d.mean = mean / weight_sum;
    detail::build_peaked_grid(mixture, t_end, d.t, d.peak_time);
    d.density.reserve(d.t.size());
    for (const double t : d.t)
        d.density.push_back(mixture(t));
    return d;
}

/// Probability of being inside [x1, x2] at time t: Q(x1,t) - Q(x2,t).
inline double interval_probability(const DimensionlessConfig& cfg, const WidthSolution& widths,
                                   double x1, double x2, double t) {
    const PacketState s = state_at(cfg, widths, t);
    return q_beyond(s, x1) - q_beyond(s, x2);
}

/// Thermal interval probability from the closed-form thermal Q.
inline double thermal_interval_probability(const DimensionlessConfig& cfg,
                                           const WidthSolution& widths, double x1, double x2,
                                           double t) {
    return thermal_q(cfg, widths, x1, t) - thermal_q(cfg, widths, x2, t);
}

/// Mean dwell time in [x1, x2] via the Q-difference route
/// tau_D = int_0^inf [Q(x1,t) - Q(x2,t)] dt.
inline double dwell_time(const DimensionlessConfig& cfg, const WidthSolution& widths, double x1,
                         double x2, const Tolerances& tol = {}) {
    if (x1 == x2)
        return 0.0;
    if (!(x1 < x2))
        throw domain_error("dwell_time: requires x1 < x2");
    auto integrand = [&](double t) {
        const PacketState s = state_at(cfg, widths, t);
        return q_beyond(s, x1) - q_beyond(s, x2);
    };
    return integrate_time_tail(integrand, 0.0, tol);
}

/// Independent dwell route: time integral of the numerically integrated
/// interval probability (the theta-function double integral).
inline double dwell_time_density_route(const DimensionlessConfig& cfg, const WidthSolution& widths,
                                       double x1, double x2, const Tolerances& tol = {}) {
    if (x1 == x2)
        return 0.0;
    if (!(x1 < x2))
        throw domain_error("dwell_time_density_route: requires x1 < x2");
    auto integrand = [&](double t) {
        const PacketState s = state_at(cfg, widths, t);
        return integrate_adaptive([&](double x) { return density(s, x); }, x1, x2, tol);
    };
    return integrate_time_tail(integrand, 0.0, tol);
}

/// Dwell time split into transmission and reflection times through the
/// clipped-Q integrals; no critical trajectory is computed.
inline CharacteristicTimes split_times(const DimensionlessConfig& cfg, const WidthSolution& widths,
                                       double x1, double x2, const Tolerances& tol = {}) {
    if (!(x1 < x2))
        throw domain_error("split_times: requires x1 < x2");
    CharacteristicTimes ct;
    ct.x1 = x1;
    ct.x2 = x2;
    ct.dwell = dwell_time(cfg, widths, x1, x2, tol);

    const double z_inf = stationary_component_argument(cfg, widths);
    const double ez = erfc(z_inf);
    const double p = 0.5 * ez;
    ct.p_tr = p;

    auto zq = [&](double x, double t) {
        const PacketState s = state_at(cfg, widths, t);
        return (x - s.center) / (sqrt2 * s.width);
    };
    constexpr double p_floor = 1e-12;
    if (p > p_floor) {
        // tau_tr = (1/P) int [(P-Q(x2))+ - (P-Q(x1))+], as erfc differences
        auto integrand = [&](double t) {
            const double q1 = erfc(zq(x1, t));
            const double q2 = erfc(zq(x2, t));
            return 0.5 * (std::max(ez - q2, 0.0) - std::max(ez - q1, 0.0));
        };
        ct.transmission = integrate_time_tail(integrand, 0.0, tol) / p;
    }
    if (1.0 - p > p_floor) {
        auto integrand = [&](double t) {
            const double q1 = erfc(zq(x1, t));
            const double q2 = erfc(zq(x2, t));
            return 0.5 * (std::max(q1 - ez, 0.0) - std::max(q2 - ez, 0.0));
        };
        ct.reflection = integrate_time_tail(integrand, 0.0, tol) / (1.0 - p);
    }
    if (ct.transmission && ct.reflection)
        ct.residual = std::fabs(ct.dwell - (p * *ct.transmission + (1.0 - p) * *ct.reflection));
    return ct;
}

/// Thermal dwell time via the closed-form thermal Q difference (full
/// Maxwell-Boltzmann semantics, no truncation).
inline double thermal_dwell_closed(const DimensionlessConfig& cfg, const WidthSolution& widths,
                                   double x1, double x2, const Tolerances& tol = {}) {
    if (x1 == x2)
        return 0.0;
    if (!(x1 < x2))
        throw domain_error("thermal_dwell_closed: requires x1 < x2");
    auto integrand = [&](double t) {
        return thermal_q(cfg, widths, x1, t) - thermal_q(cfg, widths, x2, t);
    };
    return integrate_time_tail(integrand, 0.0, tol);
}

/// Independent thermal dwell route: time integral of the numerically
/// integrated thermal interval probability.
inline double thermal_dwell_density_route(const DimensionlessConfig& cfg,
                                          const WidthSolution& widths, double x1, double x2,
                                          const Tolerances& tol = {}) {
    if (x1 == x2)
        return 0.0;
    if (!(x1 < x2))
        throw domain_error("thermal_dwell_density_route: requires x1 < x2");
    auto integrand = [&](double t) {
        return integrate_adaptive([&](double x) { return thermal_density(cfg, widths, x, t); },
                                  x1, x2, tol);
    };
    return integrate_time_tail(integrand, 0.0, tol);
}

/// Thermal characteristic times: ensemble-averaged dwell time and the
/// weight-averaged per-component transmission/reflection times.
inline CharacteristicTimes thermal_times(const DimensionlessConfig& cfg,
                                         const ThermalEnsemble& ens, const WidthSolution& widths,
                                         double x1, double x2, const Tolerances& tol = {}) {
    if (!(x1 < x2))
        throw domain_error("thermal_times: requires x1 < x2");
    if (ens.nodes.empty())
        throw empty_ensemble_error("thermal_times: empty ensemble");
    CharacteristicTimes ct;
    ct.x1 = x1;
    ct.x2 = x2;
    double dwell = 0.0, p_tr = 0.0, split_dwell = 0.0;
    double w_tr = 0.0, tau_tr = 0.0, w_ref = 0.0, tau_ref = 0.0;
    for (std::size_t i = 0; i < ens.size(); ++i) {
        DimensionlessConfig c = cfg;
        c.v0 = ens.nodes[i];
        const double w = ens.weights[i];
        const CharacteristicTimes part = split_times(c, widths, x1, x2, tol);
        dwell += w * part.dwell;
        p_tr += w * part.p_tr;
        double recomposed = 0.0;
        if (part.transmission) {
            tau_tr += w * *part.transmission;
            w_tr += w;
            recomposed += part.p_tr * *part.transmission;
        }
        if (part.reflection) {
            tau_ref += w * *part.reflection;
            w_ref += w;
            recomposed += (1.0 - part.p_tr) * *part.reflection;
        }
        split_dwell += w * recomposed;
    }
    ct.dwell = dwell;
    ct.p_tr = p_tr;
    if (w_tr > 0.0)
        ct.transmission = tau_tr / w_tr;
    if (w_ref > 0.0)
        ct.reflection = tau_ref / w_ref;
    ct.residual = std::fabs(dwell - split_dwell);
    return ct;
}

} // namespace wpt
