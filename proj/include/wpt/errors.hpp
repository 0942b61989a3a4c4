#pragma once

#include <stdexcept>
#include <string>

namespace wpt {

/// Base class for all library errors.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid parameter set or configuration (bad flag combination, out-of-range order, ...).
class config_error : public error {
public:
    using error::error;
};

/// Invalid argument to a numerical kernel (non-finite input, empty bracket, ...).
class domain_error : public error {
public:
    using error::error;
};

/// An iterative computation failed to converge; carries the best value reached.
class convergence_error : public error {
public:
    convergence_error(const std::string& msg, double partial)
        : error(msg), partial_value(partial) {}
    double partial_value;
};

/// ODE step-size underflow or similar integrator failure; carries the failure time.
class integration_error : public error {
public:
    integration_error(const std::string& msg, double t)
        : error(msg), failure_time(t) {}
    double failure_time;
};

/// Root bracket does not enclose a sign change.
class bracketing_error : public error {
public:
    using error::error;
};

/// Operation not defined for the requested model/parameter combination.
class unsupported_error : public error {
public:
    using error::error;
};

/// Velocity truncation removed every quadrature node.
class empty_ensemble_error : public error {
public:
    using error::error;
};

/// Distribution has no usable mass (vanishing flux, P_tr in {0,1}, ...).
class degenerate_error : public error {
public:
    using error::error;
};

/// Requested time horizon is not long enough to settle a classification.
class horizon_error : public error {
public:
    using error::error;
};

} // namespace wpt
