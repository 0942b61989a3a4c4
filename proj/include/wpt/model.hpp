#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "wpt/errors.hpp"

namespace wpt {

/// Physical constants (SI).
namespace constants {
inline constexpr double hbar = 1.054571817e-34;     // J s
inline constexpr double k_boltzmann = 1.380649e-23; // J/K (exact)
inline constexpr double electron_mass = 9.1093837015e-31; // kg
} // namespace constants

/// The wave equation governing the packet's evolution.
enum class Model {
    ConservativeFree,
    ConservativeLinear,
    ConservativeParabolic,
    CK,     ///< Caldirola-Kanai (linear, closed-form width)
    Kostin, ///< Schroedinger-Langevin (nonlinear, Pinney width)
};

inline std::string to_string(Model m) {
    switch (m) {
    case Model::ConservativeFree: return "conservative-free";
    case Model::ConservativeLinear: return "conservative-linear";
    case Model::ConservativeParabolic: return "conservative-parabolic";
    case Model::CK: return "ck";
    case Model::Kostin: return "kostin";
    }
    return "?";
}

inline Model model_from_string(const std::string& s) {
    if (s == "conservative-free") return Model::ConservativeFree;
    if (s == "conservative-linear") return Model::ConservativeLinear;
    if (s == "conservative-parabolic") return Model::ConservativeParabolic;
    if (s == "ck") return Model::CK;
    if (s == "kostin") return Model::Kostin;
    throw config_error("unknown model '" + s + "'");
}

/// SI input parameters of one simulation setup.
struct PhysicalParams {
    double mass = constants::electron_mass; // kg
    double sigma0 = 0.4e-10;                // m
    double x0 = -20 * 0.4e-10;              // m
    double omega = 0.0;                     // rad/s
    double gamma = 0.0;                     // 1/s
    double temperature = 0.0;               // K
    double slope = 0.0;                     // N, linear-potential strength K
    double v0 = 0.0;                        // m/s

    void validate() const {
        if (!(mass > 0.0) || !(sigma0 > 0.0))
            throw config_error("PhysicalParams: mass and sigma0 must be positive");
        if (omega < 0.0 || gamma < 0.0 || temperature < 0.0)
            throw config_error("PhysicalParams: omega, gamma, temperature must be nonnegative");
    }
};

/// Reference scales of the dimensionless reduction.
struct Scales {
    double t_ref;      // s,   2 m sigma0^2 / hbar
    double omega_ref;  // 1/s, 1 / t_ref
    double temp_ref;   // K,   hbar^2 / (4 m sigma0^2 kB)
    double v_ref;      // m/s, sigma0 / t_ref
    double length_ref; // m,   sigma0
};

/// Quantity tags for restoring physical units.
enum class Unit { Time, Length, Velocity, Temperature, Frequency, ProbabilityDensity, Probability };

/// Reduced (dimensionless) parameters; the working representation of every module.
struct DimensionlessConfig {
    double x0 = -20.0;       ///< initial packet center (negative for scattering)
    double omega = 0.0;      ///< barrier strength
    double gamma = 0.0;      ///< friction
    double temperature = 0.0;///< ensemble temperature
    double v0 = 0.0;         ///< initial central velocity
    double slope = 0.0;      ///< reduced linear-potential strength
    Model model = Model::CK;

    /// sqrt(omega^2 + gamma^2/4)
    double big_omega() const { return std::hypot(omega, 0.5 * gamma); }

    /// Throws on invariant violations; returns human-readable warnings.
    std::vector<std::string> validate() const {
        if (omega < 0.0 || gamma < 0.0 || temperature < 0.0)
            throw config_error("DimensionlessConfig: omega, gamma, temperature must be nonnegative");
        const bool conservative = model == Model::ConservativeFree ||
                                  model == Model::ConservativeLinear ||
                                  model == Model::ConservativeParabolic;
        if (conservative && gamma != 0.0)
            throw config_error("DimensionlessConfig: conservative models require gamma = 0");
        if ((model == Model::ConservativeFree || model == Model::ConservativeLinear) && omega != 0.0)
            throw config_error("DimensionlessConfig: free/linear models require omega = 0");
        if (model == Model::ConservativeFree && slope != 0.0)
            throw config_error("DimensionlessConfig: free model requires slope = 0");
        std::vector<std::string> warnings;
        if (x0 > -3.0)
            warnings.push_back("packet is not well-localized left of the barrier (x0 > -3)");
        return warnings;
    }
};

/// Reduce SI parameters to the dimensionless set; returns the scales used.
inline std::pair<Scales, DimensionlessConfig> reduce(const PhysicalParams& p, Model model) {
    p.validate();
    Scales s;
    s.length_ref = p.sigma0;
    s.t_ref = 2.0 * p.mass * p.sigma0 * p.sigma0 / constants::hbar;
    s.omega_ref = 1.0 / s.t_ref;
    s.temp_ref = constants::hbar * constants::hbar /
                 (4.0 * p.mass * p.sigma0 * p.sigma0 * constants::k_boltzmann);
    s.v_ref = p.sigma0 / s.t_ref;

    DimensionlessConfig c;
    c.x0 = p.x0 / p.sigma0;
    c.omega = p.omega * s.t_ref;
    c.gamma = p.gamma * s.t_ref;
    c.temperature = p.temperature / s.temp_ref;
    c.v0 = p.v0 / s.v_ref;
    // normalization such that the linear-potential center reads x0 - slope*t^2/2
    c.slope = p.slope * s.t_ref * s.t_ref / (p.mass * p.sigma0);
    c.model = model;
    c.validate();
    return {s, c};
}

/// Convert one dimensionless value back to physical units.
inline double restore(const Scales& s, double value, Unit kind) {
    switch (kind) {
    case Unit::Time: return value * s.t_ref;
    case Unit::Length: return value * s.length_ref;
    case Unit::Velocity: return value * s.v_ref;
    case Unit::Temperature: return value * s.temp_ref;
    case Unit::Frequency: return value * s.omega_ref;
    case Unit::ProbabilityDensity: return value / s.length_ref;
    case Unit::Probability: return value;
    }
    throw config_error("restore: unknown unit kind");
}

} // namespace wpt
