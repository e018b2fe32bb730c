#pragma once

// Auxiliary functions eta / rho on (0, r0] and the modulus of continuity
// mu(r) = r / eta(r) they induce.
//
// Catalog:
//   LogReciprocal(a)        f(r) = (log 1/r)^(-a),  a > 0
//   PowerLaw(b)             f(r) = r^b,             0 < b <= 1
//   IteratedLogReciprocal(k) f(r) = 1 / log^[k](1/r), k >= 1 (k-fold log)
//
// Every member has closed-form values, derivatives up to order three and a
// closed-form inverse; a bisection inverse is kept alongside as a check.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "hypolab/errors.hpp"

namespace hypolab {

enum class AuxFamily { LogReciprocal, PowerLaw, IteratedLogReciprocal };
enum class AuxRole { Eta, Rho };

inline std::string to_string(AuxFamily f) {
    switch (f) {
        case AuxFamily::LogReciprocal: return "LogReciprocal";
        case AuxFamily::PowerLaw: return "PowerLaw";
        case AuxFamily::IteratedLogReciprocal: return "IteratedLogReciprocal";
    }
    return "?";
}

inline std::string to_string(AuxRole r) { return r == AuxRole::Eta ? "Eta" : "Rho"; }

namespace detail {
// exp applied k times to 1, i.e. e, e^e, ...
inline double iterated_exp_of_one(int k) {
    double v = 1.0;
    for (int i = 0; i < k; ++i) v = std::exp(v);
    return v;
}
}  // namespace detail

struct AuxiliaryFunction {
    AuxFamily family = AuxFamily::PowerLaw;
    double param = 1.0;  // alpha, beta, or the iteration depth
    double r0 = 1.0;
    AuxRole role = AuxRole::Eta;

    static AuxiliaryFunction log_reciprocal(double alpha, AuxRole role = AuxRole::Eta, double r0 = 0.5) {
        if (!(alpha > 0)) throw DomainError("LogReciprocal needs alpha > 0");
        return {AuxFamily::LogReciprocal, alpha, r0, role};
    }
    static AuxiliaryFunction power_law(double beta, AuxRole role = AuxRole::Eta, double r0 = 1.0) {
        if (!(beta > 0 && beta <= 1)) throw DomainError("PowerLaw needs beta in (0, 1]");
        return {AuxFamily::PowerLaw, beta, r0, role};
    }
    /// Default r0 makes the innermost iterated log equal 1 at r0, so eta(r0) = 1.
    static AuxiliaryFunction iterated_log(int depth, AuxRole role = AuxRole::Eta, double r0 = 0.0) {
        if (depth < 1) throw DomainError("IteratedLogReciprocal needs depth >= 1");
        if (r0 <= 0) r0 = 1.0 / detail::iterated_exp_of_one(depth);
        return {AuxFamily::IteratedLogReciprocal, static_cast<double>(depth), r0, role};
    }

    int depth() const { return static_cast<int>(std::lround(param)); }
    std::string label() const { return to_string(family) + "(" + std::to_string(param) + ")"; }
};

inline bool operator==(const AuxiliaryFunction& a, const AuxiliaryFunction& b) {
    return a.family == b.family && a.param == b.param && a.r0 == b.r0 && a.role == b.role;
}

namespace detail {

inline void check_domain(const AuxiliaryFunction& f, double r) {
    if (!(r > 0) || r > f.r0 * (1 + 1e-14))
        throw DomainError(f.label() + ": r = " + std::to_string(r) + " outside (0, r0 = " + std::to_string(f.r0) +
                          "]");
}

// Value and first three derivatives of log(u) given those of u.
inline std::array<double, 4> log_chain(const std::array<double, 4>& u) {
    const double v = u[0], d1 = u[1], d2 = u[2], d3 = u[3];
    return {std::log(v), d1 / v, d2 / v - d1 * d1 / (v * v),
            d3 / v - 3 * d1 * d2 / (v * v) + 2 * d1 * d1 * d1 / (v * v * v)};
}

// Value and first three derivatives of 1/u.
inline std::array<double, 4> reciprocal_chain(const std::array<double, 4>& u) {
    const double v = u[0], d1 = u[1], d2 = u[2], d3 = u[3];
    const double v2 = v * v, v3 = v2 * v, v4 = v3 * v;
    return {1 / v, -d1 / v2, -d2 / v2 + 2 * d1 * d1 / v3, -d3 / v2 + 6 * d1 * d2 / v3 - 6 * d1 * d1 * d1 / v4};
}

// Closed-form jet (f, f', f'', f''') of a catalog member; no domain check.
inline std::array<double, 4> jet(const AuxiliaryFunction& f, double r) {
    switch (f.family) {
        case AuxFamily::PowerLaw: {
            const double b = f.param;
            const double v = std::pow(r, b);
            return {v, b * v / r, b * (b - 1) * v / (r * r), b * (b - 1) * (b - 2) * v / (r * r * r)};
        }
        case AuxFamily::LogReciprocal: {
            const double a = f.param, L = -std::log(r);
            const double La = std::pow(L, -a);
            const double d1 = a * La / (L * r);
            const double d2 = a * La / (L * L * r * r) * ((a + 1) - L);
            const double d3 = a * La / (r * r * r) * (2 / L - 3 * (a + 1) / (L * L) + (a + 1) * (a + 2) / (L * L * L));
            return {La, d1, d2, d3};
        }
        case AuxFamily::IteratedLogReciprocal: {
            // g_1 = log(1/r); g_{k+1} = log(g_k); f = 1 / g_depth.
            std::array<double, 4> g = {-std::log(r), -1 / r, 1 / (r * r), -2 / (r * r * r)};
            for (int k = 1; k < f.depth(); ++k) g = log_chain(g);
            return reciprocal_chain(g);
        }
    }
    return {};
}

}  // namespace detail

/// f(r) for 0 < r <= r0.
inline double eval(const AuxiliaryFunction& f, double r) {
    detail::check_domain(f, r);
    const double v = detail::jet(f, r)[0];
    if (!(v > 0) || !std::isfinite(v))
        throw DomainError(f.label() + ": value not positive at r = " + std::to_string(r));
    return v;
}

/// k-th derivative (k = 1, 2, 3) in closed form.
inline double deriv(const AuxiliaryFunction& f, double r, int k) {
    detail::check_domain(f, r);
    if (k < 1 || k > 3) throw DomainError("deriv: order must be 1, 2 or 3");
    return detail::jet(f, r)[k];
}

/// Centered finite-difference derivative of `eval`, used to cross-check `deriv`.
inline double deriv_fd(const AuxiliaryFunction& f, double r, int k) {
    detail::check_domain(f, r);
    if (k < 1 || k > 3) throw DomainError("deriv_fd: order must be 1, 2 or 3");
    // Lower orders are differenced from the closed form one order down.
    const double h = r * (k == 1 ? 1e-4 : 1e-3);
    auto lower = [&](double x) { return k == 1 ? detail::jet(f, x)[0] : detail::jet(f, x)[k - 1]; };
    const double d1 = (lower(r + h) - lower(r - h)) / (2 * h);
    const double d2 = (lower(r + 0.5 * h) - lower(r - 0.5 * h)) / h;
    return (4 * d2 - d1) / 3;
}

/// Range (0, f(r0)] of the function.
inline double range_end(const AuxiliaryFunction& f) { return detail::jet(f, f.r0)[0]; }

namespace detail {
inline void check_range(const AuxiliaryFunction& f, double t) {
    const double top = range_end(f);
    if (!(t > 0) || t > top * (1 + 1e-14))
        throw RangeError(f.label() + ": t = " + std::to_string(t) + " outside range (0, " + std::to_string(top) + "]");
}
}  // namespace detail

/// Monotone bisection on log r; runs until the bracket cannot shrink further,
/// which leaves |f(r) - t| far below 1e-12 * t for every catalog member.
inline double inverse_bisect(const AuxiliaryFunction& f, double t) {
    detail::check_range(f, t);
    double lo = std::log(std::numeric_limits<double>::min()), hi = std::log(f.r0);
    if (detail::jet(f, std::exp(lo))[0] > t)
        throw RangeError(f.label() + ": inverse of " + std::to_string(t) + " underflows");
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (detail::jet(f, std::exp(mid))[0] < t)
            lo = mid;
        else
            hi = mid;
    }
    const double rl = std::exp(lo), rh = std::exp(hi);
    return std::abs(detail::jet(f, rl)[0] - t) <= std::abs(detail::jet(f, rh)[0] - t) ? rl : rh;
}

/// f^{-1}(t) for t in (0, f(r0)], closed form per family.
inline double inverse(const AuxiliaryFunction& f, double t) {
    detail::check_range(f, t);
    double r = 0;
    switch (f.family) {
        case AuxFamily::PowerLaw: r = std::pow(t, 1.0 / f.param); break;
        case AuxFamily::LogReciprocal: r = std::exp(-std::pow(t, -1.0 / f.param)); break;
        case AuxFamily::IteratedLogReciprocal: {
            // log^[k](1/r) = 1/t  =>  log(1/r) = exp^[k-1](1/t)
            double v = 1.0 / t;
            for (int k = 1; k < f.depth(); ++k) v = std::exp(v);
            r = std::exp(-v);
            break;
        }
    }
    if (!(r > 0)) throw RangeError(f.label() + ": inverse of " + std::to_string(t) + " underflows");
    return std::min(r, f.r0);
}

/// mu(r) = r / eta(r).
inline double modulus(const AuxiliaryFunction& eta, double r) { return r / eval(eta, r); }

/// Largest r at which the concavity and (for Eta) the increasing-modulus
/// clauses hold for the family in closed form, capped at r0.
inline double admissible_domain_end(const AuxiliaryFunction& f) {
    switch (f.family) {
        case AuxFamily::PowerLaw: return f.r0;
        case AuxFamily::LogReciprocal:
            // f'' < 0 iff log(1/r) > a + 1; r/f increasing iff log(1/r) > a.
            return std::min(f.r0, std::exp(-(f.param + 1)) * 0.999);
        case AuxFamily::IteratedLogReciprocal: {
            // Numerically locate the last grid point where both clauses hold.
            double r = f.r0;
            for (int i = 0; i < 2000 && r > 1e-300; ++i) {
                const auto j = detail::jet(f, r);
                const double dmu = (j[0] - r * j[1]) / (j[0] * j[0]);
                if (j[2] < 0 && dmu > 0) return r;
                r *= 0.98;
            }
            return r;
        }
    }
    return f.r0;
}

/// -d/dt (1 / f^{-1}(u)) = 1 / (r^2 f'(r)) with r = f^{-1}(u).
inline double neg_dt_reciprocal_inverse(const AuxiliaryFunction& eta, double u) {
    const double r = inverse(eta, u);
    return 1.0 / (r * r * detail::jet(eta, r)[1]);
}

/// -d/dt (1 / rho(eta^{-1}(u))) = rho'(r) / (rho(r)^2 eta'(r)) with r = eta^{-1}(u).
inline double neg_dt_reciprocal_rho_of_inverse(const AuxiliaryFunction& rho, const AuxiliaryFunction& eta,
                                               double u) {
    const double r = inverse(eta, u);
    detail::check_domain(rho, r);
    const auto jr = detail::jet(rho, r);
    return jr[1] / (jr[0] * jr[0] * detail::jet(eta, r)[1]);
}

struct AdmissibilityViolation {
    std::string clause;
    double r = 0;
};

struct AdmissibilityReport {
    bool positive = true;
    bool increasing = true;
    bool vanishes_at_zero = true;
    bool concave = true;  // f'' < 0 for Eta, f'' <= 0 for Rho
    bool modulus_increasing = true;  // Eta only: r / eta(r) increasing
    bool modulus_vanishes = true;    // Eta only: r / eta(r) -> 0
    bool grid_ok = true;
    std::array<double, 3> fitted_constants{};  // C_1, C_2, C_3
    std::vector<AdmissibilityViolation> violations;

    bool pass() const {
        return grid_ok && positive && increasing && vanishes_at_zero && concave && modulus_increasing &&
               modulus_vanishes;
    }
};

/// Evaluates the structural clauses on a log-spaced grid inside (0, r0].
/// C_k is the grid maximum of |f^(k)(r)| r^(k-1) / f'(r); it is reported,
/// not thresholded.
inline AdmissibilityReport admissibility_check(const AuxiliaryFunction& f, std::vector<double> grid) {
    AdmissibilityReport rep;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.size() < 64 || grid.front() <= 0 || grid.back() > f.r0 * (1 + 1e-14)) {
        rep.grid_ok = false;
        rep.violations.push_back({"grid: need >= 64 distinct points in (0, r0]", grid.empty() ? 0.0 : grid.front()});
        return rep;
    }
    const bool eta = f.role == AuxRole::Eta;
    auto flag = [&](bool& clause, const char* name, double r) {
        if (clause) rep.violations.push_back({name, r});
        clause = false;
    };
    double prev_v = 0, prev_mu = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = grid[i];
        const auto j = detail::jet(f, r);
        if (!(j[0] > 0) || !std::isfinite(j[0])) flag(rep.positive, "positive", r);
        if (!(j[1] > 0)) flag(rep.increasing, "derivative positive", r);
        if (i > 0 && !(j[0] > prev_v)) flag(rep.increasing, "strictly increasing", r);
        if (eta ? !(j[2] < 0) : !(j[2] <= 0)) flag(rep.concave, eta ? "second derivative negative" : "second derivative non-positive", r);
        for (int k = 1; k <= 3; ++k) {
            const double c = std::abs(j[k]) * std::pow(r, k - 1) / j[1];
            if (std::isfinite(c)) rep.fitted_constants[k - 1] = std::max(rep.fitted_constants[k - 1], c);
        }
        if (eta) {
            const double mu = r / j[0];
            if (i > 0 && !(mu > prev_mu)) flag(rep.modulus_increasing, "r/eta(r) increasing", r);
            prev_mu = mu;
        }
        prev_v = j[0];
    }
    // Limits at 0+: values shrink toward 0 along the decreasing grid.
    const auto j0 = detail::jet(f, grid[0]), j1 = detail::jet(f, grid[1]), jn = detail::jet(f, grid.back());
    if (!(j0[0] < j1[0] && j0[0] < jn[0])) flag(rep.vanishes_at_zero, "f(r) -> 0 as r -> 0+", grid[0]);
    if (eta) {
        const double mu0 = grid[0] / j0[0], mu1 = grid[1] / j1[0], mun = grid.back() / jn[0];
        if (!(mu0 < mu1 && mu0 < mun)) flag(rep.modulus_vanishes, "r/eta(r) -> 0 as r -> 0+", grid[0]);
    }
    return rep;
}

/// Default certification grid: 96 log-spaced points across ten decades below
/// the admissible end of the domain.
inline std::vector<double> default_admissibility_grid(const AuxiliaryFunction& f) {
    const double hi = admissible_domain_end(f);
    std::vector<double> g(96);
    for (int i = 0; i < 96; ++i) g[i] = hi * std::pow(10.0, -10.0 * (95 - i) / 95.0);
    return g;
}

}  // namespace hypolab
