#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "wpt/errors.hpp"
#include "wpt/model.hpp"
#include "wpt/numerics.hpp"
#include "wpt/packet.hpp"
#include "wpt/thermal.hpp"

namespace wpt {

namespace detail {

inline void require_parabolic(const DimensionlessConfig& cfg, const char* who) {
    if (!(cfg.omega > 0.0))
        throw unsupported_error(std::string(who) + ": requires a parabolic repeller (omega > 0)");
    if (cfg.slope != 0.0)
        throw unsupported_error(std::string(who) + ": requires slope = 0");
}

// Converged limit of f evaluated on a doubling time sequence, capped before
// the exponentially growing packet scales overflow.
template <class F>
inline double doubling_limit(F&& f, double t_start, double t_cap, double rel_tol,
                             const char* who) {
    double t = t_start;
    double prev = f(t);
    int settled = 0;
    while (t <= t_cap) {
        t *= 2.0;
        const double cur = f(t);
        if (!std::isfinite(cur))
            throw convergence_error(std::string(who) + ": non-finite doubling-limit value", prev);
        if (std::fabs(cur - prev) <= rel_tol * std::max(1.0, std::fabs(cur))) {
            if (++settled >= 2)
                return cur;
        } else {
            settled = 0;
        }
        prev = cur;
    }
    throw convergence_error(std::string(who) + ": doubling-time limit did not settle", prev);
}

} // namespace detail

/// Time-dependent transmission probability of one component (exact form):
/// [erf(x_c/sqrt2 sigma) - erf(x0/sqrt2)] / erfc(x0/sqrt2). The numerator is
/// arranged as a difference of small complementary values so deep tails keep
/// full relative precision.
inline double p_tr_component(const DimensionlessConfig& cfg, const WidthSolution& widths, double t) {
    detail::require_parabolic(cfg, "p_tr_component");
    const auto [xc, xdot] = center(cfg, t);
    (void)xdot;
    const double a = xc / (sqrt2 * widths.sigma(t));
    const double b = cfg.x0 / sqrt2;
    double numerator; // erf(a) - erf(b) without O(1) cancellation
    if (a <= 0.0 && b <= 0.0)
        numerator = erfc(-a) - erfc(-b);
    else if (a >= 0.0 && b >= 0.0)
        numerator = erfc(b) - erfc(a);
    else
        numerator = erf(a) - erf(b);
    return numerator / erfc(b);
}

/// Well-localized approximation erfc(-x_c/sqrt2 sigma)/2; agrees with the exact
/// form to ~erfc(|x0|/sqrt2) absolute.
inline double p_tr_component_approx(const DimensionlessConfig& cfg, const WidthSolution& widths,
                                    double t) {
    detail::require_parabolic(cfg, "p_tr_component");
    const auto [xc, xdot] = center(cfg, t);
    (void)xdot;
    const double sig = widths.sigma(t);
    return 0.5 * erfc(-xc / (sqrt2 * sig));
}

/// erfc argument whose half-erfc is the stationary component transmission
/// probability: z_inf = lim -x_c(t) / (sqrt2 sigma(t)).
inline double stationary_component_argument(const DimensionlessConfig& cfg,
                                            const WidthSolution& widths) {
    detail::require_parabolic(cfg, "stationary_component_argument");
    const double big = cfg.big_omega();
    const double r = 0.5 * cfg.gamma / big;
    const double num = -(cfg.x0 * (1.0 + r) + cfg.v0 / big);
    if (cfg.model != Model::Kostin)
        return num / (sqrt2 * std::hypot(1.0 + r, 1.0 / big));
    // Kostin width has no closed asymptotic prefactor; take the numeric limit
    const double lam = big - 0.5 * cfg.gamma;
    const double t0 = std::max(20.0, 2.0 / lam);
    return detail::doubling_limit(
        [&](double t) {
            const auto [xc, xdot] = center(cfg, t);
            (void)xdot;
            return -xc / (sqrt2 * widths.sigma(t));
        },
        t0, 600.0 / lam, 1e-8, "stationary_component_argument");
}

/// Stationary transmission probability of one component.
inline double p_tr_component_stationary(const DimensionlessConfig& cfg,
                                        const WidthSolution& widths) {
    return 0.5 * erfc(stationary_component_argument(cfg, widths));
}

/// Thermal transmission probability erfc(-X(t)/(sqrt2 sigma_T(t)))/2.
inline double p_tr_thermal(const DimensionlessConfig& cfg, const WidthSolution& widths, double t) {
    detail::require_parabolic(cfg, "p_tr_thermal");
    const double X = thermal_center(cfg, t).first;
    const double S = thermal_width(cfg, widths, t);
    return 0.5 * erfc(-X / (sqrt2 * S));
}

/// Stationary thermal transmission probability. Closed form for the CK family;
/// doubling-time limit with a settle check for Kostin.
inline double p_tr_stationary(const DimensionlessConfig& cfg, const WidthSolution& widths) {
    detail::require_parabolic(cfg, "p_tr_stationary");
    const double big = cfg.big_omega();
    const double r = 0.5 * cfg.gamma / big;
    if (cfg.model != Model::Kostin) {
        const double den =
            sqrt2 * std::sqrt((1.0 + r) * (1.0 + r) + (1.0 + cfg.temperature) / (big * big));
        return 0.5 * erfc(-cfg.x0 * (1.0 + r) / den);
    }
    const double lam = big - 0.5 * cfg.gamma;
    const double t0 = std::max(20.0, 2.0 / lam);
    return detail::doubling_limit([&](double t) { return p_tr_thermal(cfg, widths, t); }, t0,
                                  600.0 / lam, 1e-8, "p_tr_stationary");
}

/// Sampled transmission-probability history with its stationary value.
struct TransmissionCurve {
    std::vector<double> t;
    std::vector<double> p;
    double stationary = 0.0;
    double t_converged = 0.0; ///< first grid time with |p - stationary| < 1e-8
};

/// Thermal transmission curve on a uniform grid, extended until it reaches the
/// stationary value.
inline TransmissionCurve transmission_curve(const DimensionlessConfig& cfg,
                                            const WidthSolution& widths, double dt,
                                            double t_max_hint = 0.0) {
    detail::require_parabolic(cfg, "transmission_curve");
    if (!(dt > 0.0))
        throw config_error("transmission_curve: dt must be positive");
    TransmissionCurve curve;
    curve.stationary = p_tr_stationary(cfg, widths);
    double t_end = (t_max_hint > 0.0) ? t_max_hint : 40.0 / std::max(cfg.big_omega() - 0.5 * cfg.gamma, 1e-3);
    for (int attempt = 0; attempt < 20; ++attempt) {
        if (std::fabs(p_tr_thermal(cfg, widths, t_end) - curve.stationary) < 1e-8)
            break;
        t_end *= 1.5;
    }
    curve.t_converged = 0.0;
    const std::size_t n = static_cast<std::size_t>(std::ceil(t_end / dt)) + 1;
    curve.t.reserve(n);
    curve.p.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = std::min(static_cast<double>(i) * dt, t_end);
        const double p = p_tr_thermal(cfg, widths, t);
        curve.t.push_back(t);
        curve.p.push_back(p);
        if (curve.t_converged == 0.0 && std::fabs(p - curve.stationary) < 1e-8)
            curve.t_converged = t;
    }
    return curve;
}

/// Which reading of "transmission probability" the threshold solver uses.
enum class ThresholdReading { Stationary, MaxOverTime };

/// Largest in magnitude (most negative) initial velocity whose transmission
/// probability still reaches `threshold`; root of P(v0) = threshold on [-50, 0].
inline double v0_min(const DimensionlessConfig& cfg, double threshold = 0.01,
                     ThresholdReading reading = ThresholdReading::Stationary,
                     const Tolerances& tol = {}) {
    detail::require_parabolic(cfg, "v0_min");
    if (!(threshold > 0.0 && threshold <= 0.5))
        throw config_error("v0_min: threshold must lie in (0, 0.5]");

    const WidthSolution shared_width = width(cfg, tol); // width is v0-independent

    auto p_of_v0 = [&](double v0) {
        DimensionlessConfig c = cfg;
        c.v0 = v0;
        const WidthSolution& w = shared_width;
        if (reading == ThresholdReading::Stationary)
            return p_tr_component_stationary(c, w);
        // max over time: coarse scan out to the stationary regime, then refine
        const double lam = c.big_omega() - 0.5 * c.gamma;
        const double t_end = 40.0 / std::max(lam, 1e-3);
        const int n = 600;
        double best = p_tr_component_stationary(c, w);
        int best_i = -1;
        for (int i = 1; i <= n; ++i) {
            const double p = p_tr_component_approx(c, w, t_end * i / n);
            if (p > best) {
                best = p;
                best_i = i;
            }
        }
        if (best_i > 0) {
            // golden-section refinement of the interior maximum
            const double gr = 0.6180339887498949;
            double a = t_end * (best_i - 1) / n, b = t_end * (best_i + 1) / n;
            double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
            double f1 = p_tr_component_approx(c, w, x1), f2 = p_tr_component_approx(c, w, x2);
            for (int it = 0; it < 80 && (b - a) > 1e-10 * t_end; ++it) {
                if (f1 < f2) {
                    a = x1; x1 = x2; f1 = f2;
                    x2 = a + gr * (b - a); f2 = p_tr_component_approx(c, w, x2);
                } else {
                    b = x2; x2 = x1; f2 = f1;
                    x1 = b - gr * (b - a); f1 = p_tr_component_approx(c, w, x1);
                }
            }
            best = std::max(best, std::max(f1, f2));
        }
        return best;
    };

    // primary bracket [-50, 0]; thresholds above P(v0=0) put the root at
    // positive velocities, so extend rightwards before giving up
    auto f = [&](double v0) { return p_of_v0(v0) - threshold; };
    if (f(-50.0) * f(0.0) < 0.0)
        return find_root(f, -50.0, 0.0, tol);
    return find_root(f, 0.0, 50.0, tol);
}

} // namespace wpt
