#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "wpt/errors.hpp"

namespace wpt {

/// Shared tolerance settings for the numerical kernels.
struct Tolerances {
    double rel = 1e-9;            ///< relative tolerance
    double abs = 1e-12;           ///< absolute tolerance
    double t_tail_cutoff = 1e-10; ///< tail-truncation threshold for [0,inf) integrals

    void validate() const {
        if (!(rel > 0.0) || !(abs > 0.0) || !(t_tail_cutoff > 0.0) || !(rel < 1.0))
            throw config_error("Tolerances: rel, abs, t_tail_cutoff must be positive and rel < 1");
    }
};

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

namespace detail {

// Rational minimax coefficients for erf/erfc (Cody, Math. Comp. 23 (1969) 631,
// as in netlib specfun/calerf). Relative error below ~1.2e-16 in double.
inline double calerf(double x, bool complementary) {
    static constexpr double a[5] = {3.1611237438705656, 113.864154151050156,
                                    377.485237685302021, 3209.37758913846947,
                                    0.185777706184603153};
    static constexpr double b[4] = {23.6012909523441209, 244.024637934444173,
                                    1282.61652607737228, 2844.23683343917062};
    static constexpr double c[9] = {0.564188496988670089, 8.88314979438837594,
                                    66.1191906371416295, 298.635138197400131,
                                    881.95222124176909, 1712.04761263407058,
                                    2051.07837782607147, 1230.33935479799725,
                                    2.15311535474403846e-8};
    static constexpr double d[8] = {15.7449261107098347, 117.693950891312499,
                                    537.181101862009858, 1621.38957456669019,
                                    3290.79923573345963, 4362.61909014324716,
                                    3439.36767414372164, 1230.33935480374942};
    static constexpr double p[6] = {0.305326634961232344, 0.360344899949804439,
                                    0.125781726111229246, 0.0160837851487422766,
                                    6.58749161529837803e-4, 0.0163153871373020978};
    static constexpr double q[5] = {2.56852019228982242, 1.87295284992346047,
                                    0.527905102951428412, 0.0605183413124413191,
                                    0.00233520497626869185};
    static constexpr double sqrpi = 0.56418958354775628695; // 1/sqrt(pi)
    static constexpr double thresh = 0.46875;
    static constexpr double xsmall = 1.11e-16;
    static constexpr double xbig = 26.543;

    const double y = std::fabs(x);
    double result;
    if (y <= thresh) {
        // erf for |x| <= 0.46875
        const double ysq = (y > xsmall) ? y * y : 0.0;
        double xnum = a[4] * ysq;
        double xden = ysq;
        for (int i = 0; i < 3; ++i) {
            xnum = (xnum + a[i]) * ysq;
            xden = (xden + b[i]) * ysq;
        }
        result = x * (xnum + a[3]) / (xden + b[3]);
        return complementary ? 1.0 - result : result;
    }
    if (y <= 4.0) {
        // erfc for 0.46875 < |x| <= 4
        double xnum = c[8] * y;
        double xden = y;
        for (int i = 0; i < 7; ++i) {
            xnum = (xnum + c[i]) * y;
            xden = (xden + d[i]) * y;
        }
        result = (xnum + c[7]) / (xden + d[7]);
        // split exp(-y^2) to recover the digits lost in y*y
        const double ysq = std::trunc(y * 16.0) / 16.0;
        const double del = (y - ysq) * (y + ysq);
        result *= std::exp(-ysq * ysq) * std::exp(-del);
    } else {
        // erfc for |x| > 4, asymptotic-range rational form
        if (y >= xbig) {
            result = 0.0;
        } else {
            const double ysq2 = 1.0 / (y * y);
            double xnum = p[5] * ysq2;
            double xden = ysq2;
            for (int i = 0; i < 4; ++i) {
                xnum = (xnum + p[i]) * ysq2;
                xden = (xden + q[i]) * ysq2;
            }
            result = ysq2 * (xnum + p[4]) / (xden + q[4]);
            result = (sqrpi - result) / y;
            const double ysq = std::trunc(y * 16.0) / 16.0;
            const double del = (y - ysq) * (y + ysq);
            result *= std::exp(-ysq * ysq) * std::exp(-del);
        }
    }
    if (complementary)
        return (x < 0.0) ? 2.0 - result : result;
    // erf from erfc for |x| > 0.46875
    result = 1.0 - result;
    return (x < 0.0) ? -result : result;
}

} // namespace detail

/// Complementary error function, in-repo rational minimax evaluation.
inline double erfc(double x) {
    if (!std::isfinite(x))
        throw domain_error("erfc: non-finite argument");
    return detail::calerf(x, true);
}

/// Error function, same approximation family as erfc().
inline double erf(double x) {
    if (!std::isfinite(x))
        throw domain_error("erf: non-finite argument");
    return detail::calerf(x, false);
}

/// sinh(x)/x with a series fallback near zero; sinhc(0) = 1.
inline double sinhc(double x) {
    if (!std::isfinite(x))
        throw domain_error("sinhc: non-finite argument");
    const double ax = std::fabs(x);
    if (ax < 1e-4) {
        const double x2 = x * x;
        return 1.0 + x2 / 6.0 * (1.0 + x2 / 20.0);
    }
    return std::sinh(x) / x;
}

/// exp(a)*cosh(b) without forming cosh(b) (safe for large |b| when a+|b| is moderate).
inline double exp_scaled_cosh(double a, double b) {
    const double ab = std::fabs(b);
    if (ab < 0.5)
        return std::exp(a) * std::cosh(b);
    return 0.5 * (std::exp(a + ab) + std::exp(a - ab));
}

/// exp(a)*sinh(b), organized like exp_scaled_cosh.
inline double exp_scaled_sinh(double a, double b) {
    const double ab = std::fabs(b);
    if (ab < 0.5)
        return std::exp(a) * std::sinh(b);
    const double m = 0.5 * (std::exp(a + ab) - std::exp(a - ab));
    return (b < 0.0) ? -m : m;
}

/// Inverse of erfc on (0, 2), by bracketed Newton refinement.
inline double erfc_inv(double y) {
    if (!(y > 0.0) || !(y < 2.0))
        throw domain_error("erfc_inv: argument must lie in (0, 2)");
    if (y == 1.0)
        return 0.0;
    const bool flip = y > 1.0; // erfc_inv(2-y) = -erfc_inv(y)
    const double yy = flip ? 2.0 - y : y;
    // initial guess from the asymptotic form erfc(z) ~ exp(-z^2)/(z sqrt(pi))
    double z = std::sqrt(std::max(-std::log(yy * std::sqrt(3.141592653589793)), 0.5));
    for (int it = 0; it < 60; ++it) {
        const double f = erfc(z) - yy;
        const double df = -2.0 / std::sqrt(3.141592653589793) * std::exp(-z * z);
        if (df == 0.0)
            break;
        const double dz = f / df;
        z -= dz;
        if (std::fabs(dz) < 1e-15 * std::max(1.0, std::fabs(z)))
            break;
    }
    return flip ? -z : z;
}

/// Minimal deterministic generator (splitmix64); bit-reproducible everywhere,
/// unlike the distributions of <random>.
struct SplitMix64 {
    std::uint64_t state = 0x9e3779b97f4a7c15ull;

    explicit SplitMix64(std::uint64_t seed = 0x9e3779b97f4a7c15ull) : state(seed) {}

    std::uint64_t next() {
        state += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// uniform on (0, 1)
    double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

    /// uniform on (a, b)
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
};

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

/// Nodes and weights of a fixed quadrature rule.
struct QuadratureRule {
    enum class Kind { GaussHermite, GaussKronrodPanel };
    std::vector<double> nodes;   ///< strictly increasing abscissae
    std::vector<double> weights; ///< positive weights
    Kind kind = Kind::GaussHermite;
};

namespace detail {

// orthonormal Hermite recurrence for weight exp(-x^2); returns p_n(x) and
// p_n'(x) = sqrt(2n) p_{n-1}(x)
inline std::pair<double, double> hermite_orthonormal(int n, double x) {
    constexpr double pim4 = 0.7511255444649425; // pi^{-1/4}
    double p1 = pim4;
    double p2 = 0.0;
    for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = x * std::sqrt(2.0 / (j + 1)) * p2 -
             std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
    }
    return {p1, std::sqrt(2.0 * n) * p2};
}

// Sturm count: number of eigenvalues of the Hermite Jacobi matrix below x,
// i.e. negative pivots of the LDL^T factorization of J - x I.
inline int hermite_sturm_count(int n, double x) {
    int count = 0;
    double d = -x;
    if (d < 0.0)
        ++count;
    for (int k = 1; k < n; ++k) {
        const double beta2 = 0.5 * k; // off-diagonal beta_k = sqrt(k/2)
        double denom = d;
        if (denom == 0.0)
            denom = 1e-300;
        d = -x - beta2 / denom;
        if (d < 0.0)
            ++count;
    }
    return count;
}

} // namespace detail

/// Gauss-Hermite rule of order n for the weight exp(-x^2) on (-inf, inf).
/// Nodes are bracketed by Sturm bisection on the Jacobi matrix, polished by
/// Newton on the orthonormal recurrence; weights from the derivative formula.
inline QuadratureRule gauss_hermite(int n) {
    if (n < 2 || n > 256)
        throw config_error("gauss_hermite: order must lie in [2, 256]");
    QuadratureRule rule;
    rule.kind = QuadratureRule::Kind::GaussHermite;
    rule.nodes.assign(static_cast<std::size_t>(n), 0.0);
    rule.weights.assign(static_cast<std::size_t>(n), 0.0);

    const double upper = std::sqrt(2.0 * n + 1.0);
    for (int i = n / 2; i < n; ++i) {
        // bisect for the (i+1)-th smallest eigenvalue (nonnegative half)
        double lo = 0.0, hi = upper;
        if (n % 2 == 1 && i == n / 2) {
            rule.nodes[static_cast<std::size_t>(i)] = 0.0;
        } else {
            for (int it = 0; it < 120; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (detail::hermite_sturm_count(n, mid) <= i)
                    lo = mid;
                else
                    hi = mid;
                if (hi - lo <= 1e-14 * std::max(1.0, hi))
                    break;
            }
            double z = 0.5 * (lo + hi);
            for (int it = 0; it < 60; ++it) {
                const auto [p, pp] = detail::hermite_orthonormal(n, z);
                const double dz = p / pp;
                z -= dz;
                if (std::fabs(dz) <= 1e-16 * std::max(1.0, std::fabs(z)))
                    break;
            }
            rule.nodes[static_cast<std::size_t>(i)] = z;
        }
        const double z = rule.nodes[static_cast<std::size_t>(i)];
        const auto [p, pp] = detail::hermite_orthonormal(n, z);
        const double w = 2.0 / (pp * pp);
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = -z;
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    return rule;
}

namespace detail {

// Gauss-Kronrod 7-15 pair on [-1, 1] (QUADPACK dqk15 constants).
inline constexpr std::array<double, 8> gk15_x = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
inline constexpr std::array<double, 8> gk15_wk = {
    0.0229353220105292, 0.0630920926299786, 0.1047900103222502,
    0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
    0.2044329400752989, 0.2094821410847278};
inline constexpr std::array<double, 4> gk15_wg = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
    0.4179591836734694};

template <class F>
inline void gk15_panel(F&& f, double a, double b, double& kronrod, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double resg = gk15_wg[3] * fc;
    double resk = gk15_wk[7] * fc;
    for (int j = 0; j < 7; ++j) {
        const double dx = h * gk15_x[static_cast<std::size_t>(j)];
        const double f1 = f(c - dx);
        const double f2 = f(c + dx);
        resk += gk15_wk[static_cast<std::size_t>(j)] * (f1 + f2);
        if (j % 2 == 1) // odd-index Kronrod nodes are the Gauss nodes
            resg += gk15_wg[static_cast<std::size_t>(j / 2)] * (f1 + f2);
    }
    kronrod = resk * h;
    err = std::fabs((resk - resg) * h);
}

template <class F>
inline double gk15_adaptive(F&& f, double a, double b, double epsabs, double epsrel, int depth) {
    double val, err;
    gk15_panel(f, a, b, val, err);
    if (err <= std::max(epsabs, epsrel * std::fabs(val)) || depth >= 48)
        return val;
    const double m = 0.5 * (a + b);
    return gk15_adaptive(f, a, m, 0.5 * epsabs, epsrel, depth + 1) +
           gk15_adaptive(f, m, b, 0.5 * epsabs, epsrel, depth + 1);
}

} // namespace detail

/// Adaptive Gauss-Kronrod integral of f over the finite interval [a, b].
template <class F>
inline double integrate_adaptive(F&& f, double a, double b, const Tolerances& tol = {}) {
    if (a == b)
        return 0.0;
    if (b < a)
        return -integrate_adaptive(f, b, a, tol);
    return detail::gk15_adaptive(f, a, b, tol.abs, tol.rel, 0);
}

/// Windowing policy for semi-infinite time integrals.
struct TailOptions {
    double initial_window = 10.0;
    double window_growth = 1.25;
    double max_window = 160.0;
    double t_max = 0.0; ///< hard horizon; 0 means unlimited
    std::size_t max_windows = 1'000'000;
    std::size_t max_zero_prefix = 64; ///< consecutive exactly-zero leading windows before giving up as 0
};

/// Integral of f over [t_start, inf) for integrands that eventually decay to zero.
/// Windows are appended until three consecutive contributions each fall below
/// t_tail_cutoff times the accumulated value.
template <class F>
inline double integrate_time_tail(F&& f, double t_start, const Tolerances& tol = {},
                                  const TailOptions& opt = {}) {
    tol.validate();
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
            if (val == 0.0 && ++zero_prefix >= opt.max_zero_prefix)
                return 0.0; // integrand identically zero as far as visible
        } else if (std::fabs(val) < tol.t_tail_cutoff * std::fabs(acc)) {
            if (++quiet >= 3)
                return acc;
        } else {
            quiet = 0;
        }
        if (opt.t_max > 0.0 && t >= opt.t_max)
            throw convergence_error("integrate_time_tail: tail not settled before t_max", acc);
        w = std::min(w * opt.window_growth, opt.max_window);
    }
    throw convergence_error("integrate_time_tail: no decay detected before the window cap", acc);
}

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

/// Brent root of f on the bracket [a, b]; requires f(a)*f(b) < 0.
template <class F>
inline double find_root(F&& f, double a, double b, const Tolerances& tol = {}) {
    tol.validate();
    double fa = f(a);
    double fb = f(b);
    if (fa == 0.0)
        return a;
    if (fb == 0.0)
        return b;
    if ((fa > 0.0) == (fb > 0.0))
        throw bracketing_error("find_root: no sign change on the bracket");

    double c = a, fc = fa;
    double d = b - a, e = d;
    for (int it = 0; it < 200; ++it) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a; fc = fa; d = b - a; e = d;
        }
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double eps = std::numeric_limits<double>::epsilon();
        const double tol1 = 2.0 * eps * std::fabs(b) + 0.5 * tol.rel * std::max(std::fabs(b), 1e-300);
        const double xm = 0.5 * (c - b);
        if (std::fabs(xm) <= tol1 || fb == 0.0 || std::fabs(fb) <= tol.abs)
            return b;
        if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
            // inverse quadratic / secant step
            const double s = fb / fa;
            double p, qq;
            if (a == c) {
                p = 2.0 * xm * s;
                qq = 1.0 - s;
            } else {
                const double q0 = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * xm * q0 * (q0 - r) - (b - a) * (r - 1.0));
                qq = (q0 - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0)
                qq = -qq;
            p = std::fabs(p);
            if (2.0 * p < std::min(3.0 * xm * qq - std::fabs(tol1 * qq), std::fabs(e * qq))) {
                e = d;
                d = p / qq;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::fabs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = f(b);
        if (fb == 0.0)
            return b;
    }
    return b;
}

// ---------------------------------------------------------------------------
// ODE integration (Dormand-Prince 5(4) with dense output)
// ---------------------------------------------------------------------------

class OdeSolution;

template <class Rhs>
OdeSolution solve_ivp(Rhs&& rhs, const std::vector<double>& y0, double t0, double t1,
                      const Tolerances& tol = {});

/// Dense-output solution of an initial value problem on [t_begin, t_end].
class OdeSolution {
public:
    struct Segment {
        double t0, h;
        // continuous-extension coefficients, one block of 5 per component
        std::vector<double> rcont;
    };

    double t_begin() const { return t_begin_; }
    double t_end() const { return t_end_; }
    std::size_t dimension() const { return dim_; }
    const std::vector<double>& t_grid() const { return t_grid_; }
    const std::vector<std::vector<double>>& states() const { return states_; }
    const std::vector<double>& final_state() const { return states_.back(); }

    /// Evaluate the interpolant; throws outside [t_begin, t_end].
    void eval(double t, std::vector<double>& out) const {
        const double slack = 1e-12 * std::max(1.0, std::fabs(t_end_));
        if (t < t_begin_ - slack || t > t_end_ + slack)
            throw wpt::domain_error("OdeSolution: evaluation outside [t0, t_end]");
        t = std::clamp(t, t_begin_, t_end_);
        const auto it = std::upper_bound(t_grid_.begin(), t_grid_.end(), t);
        std::size_t idx = static_cast<std::size_t>(std::distance(t_grid_.begin(), it));
        idx = (idx == 0) ? 0 : idx - 1;
        idx = std::min(idx, segments_.size() - 1);
        const Segment& s = segments_[idx];
        const double theta = (t - s.t0) / s.h;
        const double th1 = 1.0 - theta;
        out.resize(dim_);
        for (std::size_t i = 0; i < dim_; ++i) {
            const double* r = s.rcont.data() + 5 * i;
            out[i] = r[0] + theta * (r[1] + th1 * (r[2] + theta * (r[3] + th1 * r[4])));
        }
    }

    double eval(double t, std::size_t component) const {
        std::vector<double> tmp;
        eval(t, tmp);
        return tmp[component];
    }

    /// Append a continuation solve whose t_begin matches this solution's t_end.
    void append(OdeSolution&& next) {
        segments_.insert(segments_.end(),
                         std::make_move_iterator(next.segments_.begin()),
                         std::make_move_iterator(next.segments_.end()));
        t_grid_.insert(t_grid_.end(), next.t_grid_.begin() + 1, next.t_grid_.end());
        states_.insert(states_.end(),
                       std::make_move_iterator(next.states_.begin() + 1),
                       std::make_move_iterator(next.states_.end()));
        t_end_ = next.t_end_;
    }

private:
    template <class Rhs>
    friend OdeSolution solve_ivp(Rhs&&, const std::vector<double>&, double, double,
                                 const Tolerances&);

    double t_begin_ = 0.0, t_end_ = 0.0;
    std::size_t dim_ = 0;
    std::vector<Segment> segments_;
    std::vector<double> t_grid_;
    std::vector<std::vector<double>> states_;
};

/// Adaptive embedded Runge-Kutta 5(4) (Dormand-Prince) with dense output.
template <class Rhs>
inline OdeSolution solve_ivp(Rhs&& rhs, const std::vector<double>& y0, double t0, double t1,
                             const Tolerances& tol) {
    tol.validate();
    if (!(t1 > t0))
        throw domain_error("solve_ivp: t1 must exceed t0");
    const std::size_t n = y0.size();

    // Dormand-Prince tableau
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    // dense-output quartic coefficients
    static constexpr double d1 = -12715105075.0 / 11282082432.0;
    static constexpr double d3 = 87487479700.0 / 32700410799.0;
    static constexpr double d4 = -10690763975.0 / 1880347072.0;
    static constexpr double d5 = 701980252875.0 / 199316789632.0;
    static constexpr double d6 = -1453857185.0 / 822651844.0;
    static constexpr double d7 = 69997945.0 / 29380423.0;

    OdeSolution sol;
    sol.t_begin_ = t0;
    sol.t_end_ = t0;
    sol.dim_ = n;
    sol.t_grid_.push_back(t0);
    sol.states_.push_back(y0);

    std::vector<double> y = y0, ynew(n), err(n);
    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n);
    rhs(t0, y, k1);

    double t = t0;
    double h = std::min(1e-2 * (t1 - t0), 0.1);
    const double hmin_factor = 16.0 * std::numeric_limits<double>::epsilon();

    auto stage = [&](double tt, const std::vector<double>& yy, std::vector<double>& kk) {
        rhs(tt, yy, kk);
    };

    while (t < t1) {
        if (h < hmin_factor * std::max(std::fabs(t), 1.0))
            throw integration_error("solve_ivp: step size underflow", t);
        const double h_unclamped = h;
        if (t + h > t1)
            h = t1 - t;

        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * a21 * k1[i];
        stage(t + c2 * h, ytmp, k2);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        stage(t + c3 * h, ytmp, k3);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        stage(t + c4 * h, ytmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        stage(t + c5 * h, ytmp, k5);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        stage(t + h, ytmp, k6);
        for (std::size_t i = 0; i < n; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        stage(t + h, ynew, k7);

        double errnorm = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < n; ++i) {
            err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc = tol.abs + tol.rel * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
            const double r = err[i] / sc;
            errnorm += r * r;
            if (!std::isfinite(ynew[i]))
                finite = false;
        }
        errnorm = std::sqrt(errnorm / static_cast<double>(n));
        if (!finite) {
            h *= 0.25;
            continue;
        }

        if (errnorm <= 1.0) {
            // accept; store continuous extension
            OdeSolution::Segment seg;
            seg.t0 = t;
            seg.h = h;
            seg.rcont.resize(5 * n);
            for (std::size_t i = 0; i < n; ++i) {
                const double ydiff = ynew[i] - y[i];
                const double bspl = h * k1[i] - ydiff;
                double* r = seg.rcont.data() + 5 * i;
                r[0] = y[i];
                r[1] = ydiff;
                r[2] = bspl;
                r[3] = ydiff - h * k7[i] - bspl;
                r[4] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
            }
            sol.segments_.push_back(std::move(seg));
            t += h;
            y = ynew;
            k1 = k7; // FSAL
            sol.t_grid_.push_back(t);
            sol.states_.push_back(y);
            sol.t_end_ = t;
            const double fac = std::clamp(0.9 * std::pow(std::max(errnorm, 1e-10), -0.2), 0.2, 5.0);
            h = h_unclamped * fac;
        } else {
            const double fac = std::clamp(0.9 * std::pow(errnorm, -0.2), 0.1, 1.0);
            h *= fac;
        }
    }
    return sol;
}

} // namespace wpt
