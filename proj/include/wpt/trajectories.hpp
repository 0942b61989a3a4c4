#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

#include "wpt/errors.hpp"
#include "wpt/model.hpp"
#include "wpt/numerics.hpp"
#include "wpt/packet.hpp"
#include "wpt/transmission.hpp"

namespace wpt {

/// Bohmian trajectory of the Gaussian component:
/// x(t) = x_c(t) + (x_init - x0) * sigma(t)   (sigma(0) = 1).
class Trajectory {
public:
    enum class Classification { Transmitted, Reflected, Undecided };

    Trajectory(DimensionlessConfig cfg, WidthSolution widths, double x_init)
        : cfg_(cfg), widths_(std::move(widths)), x_init_(x_init) {}

    double initial_position() const { return x_init_; }

    double position(double t) const {
        const auto [xc, xdot] = center(cfg_, t);
        (void)xdot;
        return xc + (x_init_ - cfg_.x0) * widths_.sigma(t);
    }

    /// Sign of the position once the packet has resolved (|x_c| or sigma beyond
    /// `resolved_scale`); Undecided if that never happens before t_max.
    Classification classify(double t_max = 1e5, double resolved_scale = 1e3) const {
        double t = 1.0;
        while (t <= t_max) {
            const auto [xc, xdot] = center(cfg_, t);
            (void)xdot;
            if (std::fabs(xc) > resolved_scale || widths_.sigma(t) > resolved_scale) {
                const double x = position(t);
                if (x > 0.0)
                    return Classification::Transmitted;
                if (x < 0.0)
                    return Classification::Reflected;
                return Classification::Undecided;
            }
            t *= 2.0;
        }
        return Classification::Undecided;
    }

private:
    DimensionlessConfig cfg_;
    WidthSolution widths_;
    double x_init_;
};

inline Trajectory trajectory(const DimensionlessConfig& cfg, const WidthSolution& widths,
                             double x_init) {
    return Trajectory(cfg, widths, x_init);
}

/// How count_transmission draws initial positions.
enum class SampleMode {
    StratifiedMidpoint, ///< deterministic midpoint quantiles (no Monte Carlo noise)
    SeededRandom,       ///< iid draws from a seeded generator (for statistical tests)
};

struct CountResult {
    double fraction = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

/// Transmitted fraction over initial positions sampled from the initial
/// Gaussian by inverse-CDF; the counting oracle for the erfc closed forms.
inline CountResult count_transmission(const DimensionlessConfig& cfg, const WidthSolution& widths,
                                      std::size_t n_samples, std::uint64_t seed = 0,
                                      SampleMode mode = SampleMode::StratifiedMidpoint,
                                      double t_max = 1e5) {
    if (n_samples < 1000)
        throw config_error("count_transmission: need at least 1e3 samples");

    // the classification threshold time is shared by all samples: find it once
    double t = 1.0;
    bool resolved = false;
    while (t <= t_max) {
        const auto [xc, xdot] = center(cfg, t);
        (void)xdot;
        if (std::fabs(xc) > 1e3 || widths.sigma(t) > 1e3) {
            resolved = true;
            break;
        }
        t *= 2.0;
    }
    if (!resolved)
        throw horizon_error("count_transmission: packet not resolved within the horizon; "
                            "increase t_max");
    const auto [xc_t, xdot_t] = center(cfg, t);
    (void)xdot_t;
    const double sig_t = widths.sigma(t);

    SplitMix64 rng(seed ? seed : 0x9e3779b97f4a7c15ull);

    std::size_t transmitted = 0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        double u;
        if (mode == SampleMode::StratifiedMidpoint) {
            u = (static_cast<double>(i) + 0.5) / static_cast<double>(n_samples);
        } else {
            u = rng.uniform();
        }
        const double x_init = cfg.x0 - sqrt2 * erfc_inv(2.0 * u);
        const double x = xc_t + (x_init - cfg.x0) * sig_t;
        if (x > 0.0) {
            ++transmitted;
        } else if (x == 0.0) {
            throw horizon_error("count_transmission: undecided trajectory; increase t_max");
        }
    }
    CountResult r;
    r.n = n_samples;
    r.fraction = static_cast<double>(transmitted) / static_cast<double>(n_samples);
    r.std_error = std::sqrt(r.fraction * (1.0 - r.fraction) / static_cast<double>(n_samples));
    return r;
}

/// Initial position of the critical trajectory (asymptotic position zero),
/// solved from the trajectory asymptotics by root finding.
inline double critical_initial_position(const DimensionlessConfig& cfg,
                                        const WidthSolution& widths, const Tolerances& tol = {}) {
    const double p = p_tr_component_stationary(cfg, widths);
    if (!(p > 0.0) || !(p < 1.0))
        throw degenerate_error("critical_initial_position: stationary P_tr is degenerate");
    // asymptotic scaled position: x(t)/sigma(t) -> x_c/sigma + (x_init - x0)
    const double ratio = -sqrt2 * stationary_component_argument(cfg, widths);
    auto asym = [&](double x_init) { return ratio + (x_init - cfg.x0); };
    double lo = cfg.x0 - 16.0, hi = cfg.x0 + 16.0;
    return find_root(asym, lo, hi, tol);
}

} // namespace wpt
