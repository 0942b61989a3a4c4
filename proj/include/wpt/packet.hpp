#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "wpt/errors.hpp"
#include "wpt/model.hpp"
#include "wpt/numerics.hpp"

namespace wpt {

inline constexpr double sqrt2 = 1.4142135623730951;
inline constexpr double two_pi = 6.283185307179586;

/// Snapshot of one Gaussian component at one time.
struct PacketState {
    double t = 0.0;
    double center = 0.0;
    double center_rate = 0.0;
    double width = 1.0;
    double width_rate = 0.0;
};

namespace detail {

// Damped hyperbolic building blocks shared by center and width.
//   ch(t)  = e^{-gamma t/2} cosh(Omega t)
//   s(t)   = e^{-gamma t/2} sinh(Omega t)/Omega   (finite limit t as Omega -> 0)
//   cs(t)  = ch + (gamma/2) s                      (cosh-like mode)
//   hh(t)  = ch - (gamma/2) s                      (d/dt of s)
struct DampedModes {
    double ch, s, cs, hh;
};

inline DampedModes damped_modes(double t, double omega, double gamma) {
    const double big = std::hypot(omega, 0.5 * gamma);
    const double u = 0.5 * gamma * t;
    const double v = big * t;
    DampedModes m;
    if (v < 20.0) {
        const double damp = std::exp(-u);
        m.ch = damp * std::cosh(v);
        m.s = damp * t * sinhc(v);
    } else {
        m.ch = exp_scaled_cosh(-u, v);
        m.s = exp_scaled_sinh(-u, v) / big;
    }
    m.cs = m.ch + 0.5 * gamma * m.s;
    m.hh = m.ch - 0.5 * gamma * m.s;
    return m;
}

} // namespace detail

/// Center and center velocity of the packet component at time t.
inline std::pair<double, double> center(const DimensionlessConfig& cfg, double t) {
    if (t < 0.0)
        throw domain_error("center: t must be nonnegative");
    switch (cfg.model) {
    case Model::ConservativeFree:
        return {cfg.x0 + cfg.v0 * t, cfg.v0};
    case Model::ConservativeLinear:
        return {cfg.x0 + cfg.v0 * t - 0.5 * cfg.slope * t * t, cfg.v0 - cfg.slope * t};
    default:
        break;
    }
    if (cfg.slope != 0.0 && cfg.omega == 0.0)
        throw unsupported_error("center: slope != 0 with omega = 0 in the quadratic form; "
                                "use the conservative-linear model");
    const auto m = detail::damped_modes(t, cfg.omega, cfg.gamma);
    // fixed point of the damped inverted-oscillator EOM: xddot + gamma xdot = omega^2 x - slope
    const double xp = (cfg.slope != 0.0) ? cfg.slope / (cfg.omega * cfg.omega) : 0.0;
    const double x = xp + (cfg.x0 - xp) * m.cs + cfg.v0 * m.s;
    const double xdot = (cfg.x0 - xp) * cfg.omega * cfg.omega * m.s + cfg.v0 * m.hh;
    return {x, xdot};
}

/// Width evaluator sigma(t), sigma'(t): closed form for conservative/CK,
/// cached Pinney solution for Kostin (lazily extended past its horizon).
class WidthSolution {
public:
    WidthSolution() = default;

    /// sigma(0) = 1 by construction.
    std::pair<double, double> eval(double t) const {
        if (t < 0.0)
            throw domain_error("WidthSolution: t must be nonnegative");
        if (!pinney_)
            return closed_form(t);
        return pinney_eval(t);
    }

    double sigma(double t) const { return eval(t).first; }
    double horizon() const {
        if (!pinney_)
            return std::numeric_limits<double>::infinity();
        std::lock_guard<std::mutex> lock(pinney_->mutex);
        return pinney_->sol->t_end();
    }
    Model model() const { return cfg_.model; }

private:
    friend WidthSolution width(const DimensionlessConfig&, const Tolerances&, double);

    std::pair<double, double> closed_form(double t) const {
        const auto m = detail::damped_modes(t, cfg_.omega, cfg_.gamma);
        const double sig = std::hypot(m.cs, m.s);
        const double sigdot = (cfg_.omega * cfg_.omega * m.cs * m.s + m.s * m.hh) / sig;
        return {sig, sigdot};
    }

    struct PinneyCache {
        // the solution is replaced wholesale on extension so readers always
        // evaluate an immutable snapshot (single-writer contract)
        std::shared_ptr<const OdeSolution> sol;
        Tolerances tol;
        double omega = 0.0, gamma = 0.0;
        mutable std::mutex mutex;
    };

    std::pair<double, double> pinney_eval(double t) const {
        std::shared_ptr<const OdeSolution> snapshot;
        {
            std::lock_guard<std::mutex> lock(pinney_->mutex);
            while (t > pinney_->sol->t_end()) {
                const double t_cur = pinney_->sol->t_end();
                const double t_next = std::max(2.0 * t_cur, t + 0.25 * std::fabs(t));
                auto extended = std::make_shared<OdeSolution>(*pinney_->sol);
                extended->append(solve_pinney(pinney_->sol->final_state(), t_cur, t_next));
                pinney_->sol = std::move(extended);
            }
            snapshot = pinney_->sol;
        }
        thread_local std::vector<double> y;
        snapshot->eval(t, y);
        return {y[0], y[1]};
    }

    OdeSolution solve_pinney(std::vector<double> y0, double t0, double t1) const {
        const double om2 = pinney_->omega * pinney_->omega;
        const double ga = pinney_->gamma;
        auto rhs = [om2, ga](double, const std::vector<double>& y, std::vector<double>& dy) {
            dy[0] = y[1];
            dy[1] = 1.0 / (y[0] * y[0] * y[0]) + om2 * y[0] - ga * y[1];
        };
        return solve_ivp(rhs, y0, t0, t1, pinney_->tol);
    }

    DimensionlessConfig cfg_;
    std::shared_ptr<PinneyCache> pinney_; // null => closed form
};

/// Build the width evaluator for the configured model.
inline WidthSolution width(const DimensionlessConfig& cfg, const Tolerances& tol = {},
                           double horizon = 0.0) {
    WidthSolution w;
    w.cfg_ = cfg;
    if (cfg.model == Model::Kostin) {
        auto cache = std::make_shared<WidthSolution::PinneyCache>();
        cache->tol = tol;
        cache->omega = cfg.omega;
        cache->gamma = cfg.gamma;
        if (horizon <= 0.0)
            horizon = 60.0 / std::max({cfg.omega, cfg.gamma, 1.0});
        w.pinney_ = cache;
        cache->sol =
            std::make_shared<const OdeSolution>(w.solve_pinney({1.0, 0.0}, 0.0, horizon));
    }
    return w;
}

/// Probability density of the Gaussian component at position x.
inline double density(const PacketState& s, double x) {
    const double z = (x - s.center) / s.width;
    return std::exp(-0.5 * z * z) / (std::sqrt(two_pi) * s.width);
}

/// Probability current consistent with the Gaussian density and the
/// Bohmian velocity field v(x) = center_rate + (x - center) * width_rate / width.
inline double current(const PacketState& s, double x) {
    const double v = s.center_rate + (x - s.center) * s.width_rate / s.width;
    return v * density(s, x);
}

/// Probability of being beyond x: Q = erfc((x - center)/(sqrt2 width))/2.
inline double q_beyond(const PacketState& s, double x) {
    return 0.5 * erfc((x - s.center) / (sqrt2 * s.width));
}

/// Convenience: assemble the packet state at time t.
inline PacketState state_at(const DimensionlessConfig& cfg, const WidthSolution& w, double t) {
    PacketState s;
    s.t = t;
    const auto [x, xdot] = center(cfg, t);
    s.center = x;
    s.center_rate = xdot;
    const auto [sig, sigdot] = w.eval(t);
    s.width = sig;
    s.width_rate = sigdot;
    return s;
}

/// Thermal Wigner function of the free conservative mixture, normalized so
/// that its phase-space integral is 1.
inline double wigner_free(const DimensionlessConfig& cfg, double x, double p, double t) {
    if (cfg.model != Model::ConservativeFree)
        throw unsupported_error("wigner_free: only defined for the free conservative model");
    const double broad = 1.0 + cfg.temperature;
    const double dx = x - cfg.x0 - p * t;
    return std::exp(-0.5 * p * p / broad - 0.5 * dx * dx) / (two_pi * std::sqrt(broad));
}

} // namespace wpt
