#pragma once

// Phase-space zones, the three symbol weights W1..W3 and the growth-rate
// fit that turns them into an order m0 and a lower bound on the Zygmund
// index s.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "hypolab/errors.hpp"
#include "hypolab/moduli.hpp"
#include "hypolab/numerics.hpp"

namespace hypolab {

struct ZoneParams {
    double N = 2.0;
    double M = 0.0;  // 0 means "choose with default_frequency_floor"
    double T = 1.0;
};

inline bool zone_invariant_holds(const AuxiliaryFunction& eta, double N, double M) {
    if (!(M > 0) || 1.0 / M > eta.r0) return false;
    return N * eval(eta, 1.0 / M) / 2.0 >= 2.0 / M;
}

/// Smallest power of two M >= 1/r0 with N eta(1/M) / 2 >= 2 / M.
inline double default_frequency_floor(const AuxiliaryFunction& eta, double N) {
    double M = 1.0;
    for (int k = 0; k < 1000; ++k, M *= 2.0)
        if (zone_invariant_holds(eta, N, M)) return M;
    throw DomainError("no frequency floor satisfies the zone invariant for " + eta.label());
}

/// Fills in M when left at 0 and checks the invariants.
inline ZoneParams resolve_zone(const AuxiliaryFunction& eta, ZoneParams zp) {
    if (!(zp.N >= 2)) throw DomainError("zone constant N must be >= 2");
    if (!(zp.T > 0)) throw DomainError("horizon T must be positive");
    if (zp.M <= 0) zp.M = default_frequency_floor(eta, zp.N);
    if (!zone_invariant_holds(eta, zp.N, zp.M))
        throw DomainError("M = " + std::to_string(zp.M) + " violates N eta(1/M)/2 >= 2/M");
    return zp;
}

enum class Zone { Pseudodifferential, Hyperbolic };

inline std::string to_string(Zone z) { return z == Zone::Hyperbolic ? "Hyperbolic" : "Pseudodifferential"; }

/// t_xi = N eta(1/|xi|).
inline double zone_boundary(const AuxiliaryFunction& eta, const ZoneParams& zp, double xi_abs) {
    if (!(xi_abs >= zp.M)) throw DomainError("|xi| = " + std::to_string(xi_abs) + " below frequency floor M");
    return zp.N * eval(eta, 1.0 / xi_abs);
}

/// The boundary t = t_xi belongs to the hyperbolic zone.
inline Zone zone_of(double t, double xi_abs, const AuxiliaryFunction& eta, const ZoneParams& zp) {
    if (t < 0 || t > zp.T) throw DomainError("t = " + std::to_string(t) + " outside [0, T]");
    return t < zone_boundary(eta, zp, xi_abs) ? Zone::Pseudodifferential : Zone::Hyperbolic;
}

enum class WeightKind { W1, W2, W3 };

inline std::string to_string(WeightKind k) {
    switch (k) {
        case WeightKind::W1: return "W1";
        case WeightKind::W2: return "W2";
        case WeightKind::W3: return "W3";
    }
    return "?";
}

/// W1 = 1 / eta(<xi>^-1).
inline double weight_w1(const AuxiliaryFunction& eta, double xi_abs) {
    return 1.0 / eval(eta, 1.0 / japanese_bracket(xi_abs));
}

namespace detail {
inline double shifted_time(const AuxiliaryFunction& eta, double xi_abs, double t) {
    const double eps = 1.0 / japanese_bracket(xi_abs);
    if (!(t >= eval(eta, eps)))
        throw DomainError("weight evaluated at t = " + std::to_string(t) + " < eta(<xi>^-1)");
    return t - eps;
}
}  // namespace detail

/// W2 = -<xi>^-1 d/dt (1 / eta^-1(t - <xi>^-1)).
inline double weight_w2(const AuxiliaryFunction& eta, double xi_abs, double t) {
    const double u = detail::shifted_time(eta, xi_abs, t);
    return neg_dt_reciprocal_inverse(eta, u) / japanese_bracket(xi_abs);
}

/// W3 = -rho(<xi>^-1) d/dt (1 / rho(eta^-1(t - <xi>^-1))).
inline double weight_w3(const AuxiliaryFunction& eta, const AuxiliaryFunction& rho, double xi_abs, double t) {
    const double u = detail::shifted_time(eta, xi_abs, t);
    return eval(rho, 1.0 / japanese_bracket(xi_abs)) * neg_dt_reciprocal_rho_of_inverse(rho, eta, u);
}

/// Finite-difference versions of W2 / W3: the derivative in t is taken of
/// log(inner) with the bisection inverse, so no closed-form derivative of
/// eta enters. -d/dt (1 / inner) = (1 / inner) d/dt log(inner).
inline double weight_w2_fd(const AuxiliaryFunction& eta, double xi_abs, double t) {
    const double u = detail::shifted_time(eta, xi_abs, t);
    auto log_inner = [&](double v) { return std::log(inverse_bisect(eta, v)); };
    const double h = 1e-3 * std::min(u, range_end(eta) - u > 0 ? range_end(eta) - u : u);
    return std::exp(-log_inner(u)) * central_derivative(log_inner, u, h) / japanese_bracket(xi_abs);
}

inline double weight_w3_fd(const AuxiliaryFunction& eta, const AuxiliaryFunction& rho, double xi_abs, double t) {
    const double u = detail::shifted_time(eta, xi_abs, t);
    auto log_inner = [&](double v) { return std::log(eval(rho, inverse_bisect(eta, v))); };
    const double h = 1e-3 * std::min(u, range_end(eta) - u > 0 ? range_end(eta) - u : u);
    return eval(rho, 1.0 / japanese_bracket(xi_abs)) * std::exp(-log_inner(u)) *
           central_derivative(log_inner, u, h);
}

struct SymbolWeight {
    WeightKind kind = WeightKind::W1;
    AuxiliaryFunction eta;
    AuxiliaryFunction rho = AuxiliaryFunction::power_law(1.0, AuxRole::Rho);
    ZoneParams zone;

    double operator()(double xi_abs, double t) const {
        switch (kind) {
            case WeightKind::W1: return weight_w1(eta, xi_abs);
            case WeightKind::W2: return weight_w2(eta, xi_abs, t);
            case WeightKind::W3: return weight_w3(eta, rho, xi_abs, t);
        }
        return 0;
    }
};

/// First time at which the W2/W3 sweep starts: max(t_xi, eta(<xi>^-1) + 2 <xi>^-1).
inline double weight_sweep_start(const AuxiliaryFunction& eta, const ZoneParams& zp, double xi_abs) {
    const double eps = 1.0 / japanese_bracket(xi_abs);
    return std::max(zone_boundary(eta, zp, xi_abs), eval(eta, eps) + 2 * eps);
}

struct OrderEstimate {
    double m0_hat = 0;
    double raw_slope = 0;
    double stderr_ = 0;
    std::size_t points = 0;
    std::vector<double> brackets;  // <xi> of the points used
    std::vector<double> sups;      // sup over t of the weight at each <xi>
};

inline constexpr int kWeightTimeSamples = 64;

/// Growth-rate fit of a weight over a xi-grid: sup over a log-spaced t-grid
/// of [start, T] per xi (none for W1), then the log-log slope over the top
/// two decades, clamped below at 0.
inline OrderEstimate estimate_order(const SymbolWeight& w, const std::vector<double>& xi_grid, double T,
                                    int jobs = 1) {
    if (xi_grid.size() < 2) throw FitError("estimate_order: xi grid too small");
    const double lo = *std::min_element(xi_grid.begin(), xi_grid.end());
    const double hi = *std::max_element(xi_grid.begin(), xi_grid.end());
    if (lo < w.zone.M) throw DomainError("estimate_order: xi grid extends below M");
    if (hi < 1e3 * w.zone.M * (1 - 1e-9) && hi < 1e3 * lo * (1 - 1e-9))
        throw DomainError("estimate_order: xi grid must span at least three decades");
    struct Sample {
        bool ok;
        double value;
    };
    const auto samples = parallel_map(
        xi_grid,
        [&](double xi) -> Sample {
            if (w.kind == WeightKind::W1) return {true, w(xi, 0.0)};
            const double t0 = weight_sweep_start(w.eta, w.zone, xi);
            if (t0 > T) return {false, 0.0};
            double best = 0;
            for (double t : log_grid_n(t0, std::max(t0, T), kWeightTimeSamples)) best = std::max(best, w(xi, t));
            return {true, best};
        },
        jobs);
    OrderEstimate est;
    for (std::size_t i = 0; i < xi_grid.size(); ++i) {
        if (!samples[i].ok) continue;
        est.brackets.push_back(japanese_bracket(xi_grid[i]));
        est.sups.push_back(samples[i].value);
    }
    const LinearFit fit = loglog_fit_top(est.brackets, est.sups, 2.0, 8);
    est.raw_slope = fit.slope;
    est.m0_hat = std::max(0.0, fit.slope);
    est.stderr_ = fit.slope_stderr;
    est.points = fit.points;
    return est;
}

/// s >= max(1 + eps, 2 m0 / (2 - m0)).
inline double zygmund_index_bound(double m0, double eps) {
    if (!(m0 > 0 && m0 <= 1)) throw DomainError("m0 must lie in (0, 1]");
    if (!(eps > 0)) throw DomainError("eps must be positive");
    return std::max(1.0 + eps, 2.0 * m0 / (2.0 - m0));
}

struct ClassificationReport {
    double m0_w1 = 0, m0_w2 = 0, m0_w3 = 0;
    double m0 = 0;
    double s_min = 0;
    double eps = 0;

    std::string to_json() const {
        std::ostringstream os;
        os.precision(17);
        os << "{\"m0_w1\":" << m0_w1 << ",\"m0_w2\":" << m0_w2 << ",\"m0_w3\":" << m0_w3 << ",\"m0\":" << m0
           << ",\"s_min\":" << s_min << ",\"eps\":" << eps << "}";
        return os.str();
    }
};

/// Report built from an externally fixed order (e.g. a forced m0 = 1).
inline ClassificationReport classification_from_order(double m0, double eps) {
    ClassificationReport r;
    r.m0_w1 = r.m0_w2 = r.m0_w3 = r.m0 = m0;
    r.eps = eps;
    r.s_min = zygmund_index_bound(m0, eps);
    return r;
}

/// Overall m0 is the largest of the three fitted orders. A fitted order of
/// exactly 0 (flat weights) is lifted to the smallest positive double so the
/// index bound stays defined; it then returns 1 + eps.
inline ClassificationReport classify(const AuxiliaryFunction& eta, const AuxiliaryFunction& rho, const ZoneParams& zp,
                                     const std::vector<double>& xi_grid, double eps, int jobs = 1) {
    ClassificationReport r;
    r.eps = eps;
    r.m0_w1 = estimate_order({WeightKind::W1, eta, rho, zp}, xi_grid, zp.T, jobs).m0_hat;
    r.m0_w2 = estimate_order({WeightKind::W2, eta, rho, zp}, xi_grid, zp.T, jobs).m0_hat;
    r.m0_w3 = estimate_order({WeightKind::W3, eta, rho, zp}, xi_grid, zp.T, jobs).m0_hat;
    r.m0 = std::max({r.m0_w1, r.m0_w2, r.m0_w3});
    r.s_min = zygmund_index_bound(std::clamp(r.m0, std::numeric_limits<double>::min(), 1.0), eps);
    return r;
}

}  // namespace hypolab
