#pragma once

// Test coefficients a(t) (optionally times 1 + b(x)), their time
// mollification and the measured regularization bounds.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "hypolab/errors.hpp"
#include "hypolab/moduli.hpp"
#include "hypolab/numerics.hpp"
#include "hypolab/symbol_classes.hpp"
#include "hypolab/zygmund.hpp"

namespace hypolab {

enum class TimeProfile { Constant, LogPowerOscillation, HolderRough };

inline std::string to_string(TimeProfile p) {
    switch (p) {
        case TimeProfile::Constant: return "constant";
        case TimeProfile::LogPowerOscillation: return "log_power";
        case TimeProfile::HolderRough: return "holder";
    }
    return "?";
}

struct CoefficientSpec {
    TimeProfile profile = TimeProfile::Constant;
    double base = 2.0;
    double delta = 0.0;      // oscillation amplitude
    double gamma_osc = 0.0;  // LogPowerOscillation exponent
    double alpha = 0.5;      // HolderRough exponent
    int lacunary_depth = 18;
    double t_floor = 1e-6;   // a is held constant on (0, t_floor]
    std::optional<SpatialProfile> spatial;

    static CoefficientSpec constant(double base) {
        CoefficientSpec c;
        c.base = base;
        return c;
    }
    static CoefficientSpec log_power(double base, double delta, double gamma) {
        CoefficientSpec c;
        c.profile = TimeProfile::LogPowerOscillation;
        c.base = base;
        c.delta = delta;
        c.gamma_osc = gamma;
        return c;
    }
    static CoefficientSpec holder(double base, double delta, double alpha) {
        CoefficientSpec c;
        c.profile = TimeProfile::HolderRough;
        c.base = base;
        c.delta = delta;
        c.alpha = alpha;
        return c;
    }

    bool time_constant() const { return profile == TimeProfile::Constant || delta == 0.0; }

    /// Constant coefficients may take any real value (zero and negative ones
    /// appear in operator tests); oscillating ones must stay uniformly elliptic.
    void validate() const {
        if (!std::isfinite(base)) throw DomainError("coefficient base must be finite");
        if (profile != TimeProfile::Constant) {
            if (!(base > 0)) throw DomainError("oscillating coefficient needs base > 0");
            if (!(delta >= 0 && delta < base / 2)) throw DomainError("amplitude must lie in [0, base/2)");
        }
        if (profile == TimeProfile::LogPowerOscillation && !(gamma_osc >= 0))
            throw DomainError("oscillation exponent must be >= 0");
        if (profile == TimeProfile::HolderRough && !(alpha > 0 && alpha <= 1))
            throw DomainError("Holder exponent must lie in (0, 1]");
        if (lacunary_depth < 0) throw DomainError("lacunary depth must be >= 0");
        if (!(t_floor > 0)) throw DomainError("t_floor must be positive");
        if (spatial) spatial->validate();
    }
};

enum class OscillationClass { VerySlow, Slow, Fast, VeryFast };

inline std::string to_string(OscillationClass c) {
    switch (c) {
        case OscillationClass::VerySlow: return "VerySlow";
        case OscillationClass::Slow: return "Slow";
        case OscillationClass::Fast: return "Fast";
        case OscillationClass::VeryFast: return "VeryFast";
    }
    return "?";
}

inline OscillationClass oscillation_class(double gamma) {
    if (!(gamma >= 0)) throw DomainError("oscillation exponent must be >= 0");
    if (gamma == 0) return OscillationClass::VerySlow;
    if (gamma < 1) return OscillationClass::Slow;
    if (gamma == 1) return OscillationClass::Fast;
    return OscillationClass::VeryFast;
}

namespace detail {

inline double holder_normalizer(const CoefficientSpec& c) {
    double s = 0;
    for (int j = 0; j <= c.lacunary_depth; ++j) s += std::pow(2.0, -j * c.alpha);
    return s;
}

// Value and first two time derivatives of the time profile at t >= t_floor.
inline std::array<double, 3> time_jet(const CoefficientSpec& c, double t) {
    switch (c.profile) {
        case TimeProfile::Constant: return {c.base, 0, 0};
        case TimeProfile::LogPowerOscillation: {
            const double L = -std::log(t), aL = std::abs(L), g = c.gamma_osc;
            const double sgn = L < 0 ? -1.0 : 1.0;
            const double phase = sgn * std::pow(aL, 1 + g);
            const double d1 = -(1 + g) * std::pow(aL, g) / t;
            const double lower = g == 0 ? 0.0 : g * sgn * std::pow(aL, g - 1);
            const double d2 = (1 + g) * (std::pow(aL, g) + lower) / (t * t);
            const double s = std::sin(phase), co = std::cos(phase);
            return {c.base + c.delta * s, c.delta * co * d1, c.delta * (co * d2 - s * d1 * d1)};
        }
        case TimeProfile::HolderRough: {
            const double scale = c.delta / holder_normalizer(c);
            double v = 0, d1 = 0, d2 = 0;
            for (int j = 0; j <= c.lacunary_depth; ++j) {
                const double w = std::ldexp(1.0, j), amp = std::pow(w, -c.alpha);
                const double co = std::cos(w * t), s = std::sin(w * t);
                v += amp * co;
                d1 -= amp * w * s;
                d2 -= amp * w * w * co;
            }
            return {c.base + scale * v, scale * d1, scale * d2};
        }
    }
    return {};
}

}  // namespace detail

/// Time profile a(t) for t > 0, held constant below t_floor.
inline double time_value(const CoefficientSpec& c, double t) {
    if (!(t > 0)) throw DomainError("coefficient evaluated at t = " + std::to_string(t) + " <= 0");
    return detail::time_jet(c, std::max(t, c.t_floor))[0];
}

/// a'(t) in closed form (0 below t_floor).
inline double time_derivative(const CoefficientSpec& c, double t, int order = 1) {
    if (!(t > 0)) throw DomainError("coefficient evaluated at t = " + std::to_string(t) + " <= 0");
    if (order < 1 || order > 2) throw DomainError("time derivative order must be 1 or 2");
    if (t < c.t_floor) return 0.0;
    return detail::time_jet(c, t)[order];
}

inline double spatial_value(const CoefficientSpec& c, double x) {
    if (!c.spatial || c.spatial->family == SpatialFamily::Zero) return 0.0;
    const SpatialProfile& p = *c.spatial;
    if (p.family == SpatialFamily::Smooth) return p.amplitude * std::cos(x);
    const double total = 1.0 / (std::pow(2.0, p.s) - 1.0);
    double v = 0;
    for (int j = 1; j <= 30; ++j) v += std::pow(2.0, -j * p.s) * std::cos(std::ldexp(x, j));
    return p.amplitude * v / total;
}

/// a(t) * (1 + b(x)); x is ignored when no spatial profile is set.
inline double coefficient_value(const CoefficientSpec& c, double t, std::optional<double> x = std::nullopt) {
    const double a = time_value(c, t);
    return x ? a * (1.0 + spatial_value(c, *x)) : a;
}

/// sup_t |a^(q)(t)| (t / (log 1/t)^gamma)^q over a grid; finite values
/// realize the oscillation condition for q = 1, 2.
inline double oscillation_constant(const CoefficientSpec& c, const std::vector<double>& t_grid, int q) {
    double best = 0;
    for (double t : t_grid) {
        if (!(t < 1)) continue;
        const double w = t / std::pow(-std::log(t), c.gamma_osc);
        best = std::max(best, std::abs(time_derivative(c, t, q)) * std::pow(w, q));
    }
    return best;
}

// ---------------------------------------------------------------------------
// Mollification in t.

struct MollifierSpec {
    int nodes = 256;       // midpoint nodes across [-1, 1]
    double horizon = 1.0;  // a(t > horizon) := a(horizon)

    void validate() const {
        if (nodes < 64) throw DomainError("mollifier needs at least 64 quadrature nodes");
        if (!(horizon > 0)) throw DomainError("mollifier horizon must be positive");
    }
};

/// Unnormalized bump exp(-1 / (1 - x^2)) on (-1, 1).
inline double bump_shape(double x) { return std::abs(x) < 1 ? std::exp(-1.0 / (1 - x * x)) : 0.0; }

/// Midpoint nodes, psi, psi' and psi'' for the normalized bump.
struct MollifierTable {
    std::vector<double> x, psi, dpsi, d2psi;
    double weight = 0;  // 2 / nodes
    double scale = 0;   // 1 / unnormalized mass

    explicit MollifierTable(int n) {
        if (n < 64) throw DomainError("mollifier needs at least 64 quadrature nodes");
        weight = 2.0 / n;
        double mass = 0;
        for (int i = 0; i < n; ++i) {
            const double xi = -1 + (2 * i + 1) / static_cast<double>(n);
            const double p = bump_shape(xi), q = 1 - xi * xi;
            x.push_back(xi);
            psi.push_back(p);
            dpsi.push_back(p * (-2 * xi / (q * q)));
            d2psi.push_back(p * (6 * std::pow(xi, 4) - 2) / std::pow(q, 4));
            mass += p * weight;
        }
        scale = 1.0 / mass;
        for (int i = 0; i < n; ++i) {
            psi[i] /= mass;
            dpsi[i] /= mass;
            d2psi[i] /= mass;
        }
    }

    static const MollifierTable& get(int n) {
        static thread_local std::map<int, MollifierTable> cache;
        auto it = cache.find(n);
        if (it == cache.end()) it = cache.emplace(n, MollifierTable(n)).first;
        return it->second;
    }
};

/// Normalized bump psi(x).
inline double mollifier_kernel(double x, int nodes = 256) {
    return bump_shape(x) * MollifierTable::get(nodes).scale;
}

/// (d/dt)^order of (f * psi_eps)(t) for any callable f, by midpoint
/// quadrature with the derivative placed on the kernel.
template <class F>
double mollify_fn(F&& f, double eps, double t, const MollifierSpec& m = {}, int order = 0) {
    if (!(eps > 0)) throw DomainError("mollification width must be positive");
    const auto& tab = MollifierTable::get(m.nodes);
    const std::vector<double>& k = order == 0 ? tab.psi : order == 1 ? tab.dpsi : tab.d2psi;
    // psi' and psi'' have zero mass, so f(t) is subtracted to keep the
    // 1/eps^order scaling from amplifying rounding in the constant part.
    const double f0 = order == 0 ? 0.0 : f(t);
    double s = 0;
    for (std::size_t i = 0; i < tab.x.size(); ++i) s += k[i] * (f(t - eps * tab.x[i]) - f0);
    return s * tab.weight / std::pow(eps, order);
}

/// Coefficient extended by constants outside (t_floor, horizon].
inline double extended_time_value(const CoefficientSpec& c, double t, double horizon) {
    return time_value(c, std::clamp(t, c.t_floor, std::max(horizon, c.t_floor)));
}

/// a_eps(t) = (a * psi_eps)(t); order 1, 2 give the t-derivatives of a_eps.
inline double mollify(const CoefficientSpec& c, const MollifierSpec& m, double eps, double t,
                      std::optional<double> x = std::nullopt, int order = 0) {
    m.validate();
    if (order < 0 || order > 2) throw DomainError("mollified derivative order must be 0, 1 or 2");
    if (c.time_constant()) {
        const double v = order == 0 ? c.base : 0.0;
        return x ? v * (1 + spatial_value(c, *x)) : v;
    }
    const double v = mollify_fn([&](double s) { return extended_time_value(c, s, m.horizon); }, eps, t, m, order);
    return x ? v * (1 + spatial_value(c, *x)) : v;
}

// ---------------------------------------------------------------------------
// Regularization bounds.

enum class RegClause { I, II, III, IV, V, VI };

inline constexpr std::array<RegClause, 6> kRegClauses = {RegClause::I,  RegClause::II, RegClause::III,
                                                          RegClause::IV, RegClause::V,  RegClause::VI};

inline std::string to_string(RegClause c) {
    static const char* names[] = {"i", "ii", "iii", "iv", "v", "vi"};
    return names[static_cast<int>(c)];
}

/// Clauses (iii), (v), (vi) are local: they hold on the hyperbolic zone only.
inline bool clause_is_local(RegClause c) {
    return c == RegClause::III || c == RegClause::V || c == RegClause::VI;
}

struct ClauseResult {
    RegClause clause = RegClause::I;
    double max_ratio = 0;
    double argmax_t = 0, argmax_xi = 0;
    std::vector<double> per_xi;  // max ratio at each xi (0 when no admissible t)
    double top_decade_growth = 0;  // max over top decade / max below it
    bool verified = false;
};

struct RegBoundsReport {
    std::string modulus_note;  // which eta/rho were assumed for the spec
    std::vector<double> xi_grid;
    std::vector<ClauseResult> clauses;
    bool pass() const {
        return std::all_of(clauses.begin(), clauses.end(), [](const ClauseResult& c) { return c.verified; });
    }
    const ClauseResult& clause(RegClause c) const { return clauses.at(static_cast<int>(c)); }
};

namespace detail {

// Bound expression of each clause at (t, xi) with eps = <xi>^-1.
inline double reg_bound(RegClause c, const AuxiliaryFunction& eta, const AuxiliaryFunction& rho, double xi, double t) {
    const double br = japanese_bracket(xi), inv_xi = 1.0 / xi;
    switch (c) {
        case RegClause::I: return 1.0;
        case RegClause::II: return 1.0 / (br * eval(eta, inv_xi));
        case RegClause::IV: return 1.0 / eval(eta, inv_xi);
        case RegClause::III:
            return eval(rho, inv_xi) * neg_dt_reciprocal_rho_of_inverse(rho, eta, t - inv_xi) / br;
        case RegClause::V: return std::sqrt(neg_dt_reciprocal_inverse(eta, t - inv_xi));
        case RegClause::VI: return br * eval(rho, inv_xi) * neg_dt_reciprocal_rho_of_inverse(rho, eta, t - inv_xi);
    }
    return 1.0;
}

}  // namespace detail

/// Ratios of measured regularization quantities to the bound expressions,
/// with eps = <xi>^-1. Global clauses use every t in t_grid; local clauses
/// use the part of t_grid inside [t_xi, T - eps], away from the kink that
/// the constant continuation puts at T. A clause is verified when its
/// ratio is finite and the max ratio over the top decade of xi is at most
/// twice the max below it (bounded, not growing).
inline RegBoundsReport verify_reg_bounds(const CoefficientSpec& spec, const AuxiliaryFunction& eta,
                                         const AuxiliaryFunction& rho, const ZoneParams& zp,
                                         const std::vector<double>& xi_grid, const std::vector<double>& t_grid,
                                         const MollifierSpec& mspec = {}, int jobs = 1) {
    spec.validate();
    RegBoundsReport rep;
    rep.modulus_note = "eta = " + eta.label() + ", rho = " + rho.label() + ", coefficient = " +
                       to_string(spec.profile);
    rep.xi_grid = xi_grid;
    const double spatial = spec.spatial ? spatial_factor_norm(*spec.spatial, spec.spatial->s) : 1.0;

    struct Row {
        std::array<double, 6> ratio{};
        std::array<double, 6> at_t{};
    };
    const auto rows = parallel_map(
        xi_grid,
        [&](double xi) {
            Row row;
            const double eps = 1.0 / japanese_bracket(xi);
            const double t_xi = zone_boundary(eta, zp, xi);
            for (double t : t_grid) {
                if (t <= 0 || t > zp.T) continue;
                const double a = time_value(spec, t);
                const double ae = mollify(spec, mspec, eps, t);
                const double d1 = std::abs(mollify(spec, mspec, eps, t, std::nullopt, 1));
                const double d2 = std::abs(mollify(spec, mspec, eps, t, std::nullopt, 2));
                const std::array<double, 6> measured = {std::abs(ae), std::abs(ae - a), std::abs(ae - a),
                                                        d1,           d1,               d2};
                for (RegClause c : kRegClauses) {
                    const int k = static_cast<int>(c);
                    if (clause_is_local(c) && (t < t_xi || t > zp.T - eps)) continue;
                    const double r = spatial * measured[k] / detail::reg_bound(c, eta, rho, xi, t);
                    if (r > row.ratio[k]) {
                        row.ratio[k] = r;
                        row.at_t[k] = t;
                    }
                }
            }
            return row;
        },
        jobs);

    const double top = *std::max_element(xi_grid.begin(), xi_grid.end());
    for (RegClause c : kRegClauses) {
        const int k = static_cast<int>(c);
        ClauseResult cr;
        cr.clause = c;
        double top_max = 0, low_max = 0;
        for (std::size_t i = 0; i < xi_grid.size(); ++i) {
            const double r = rows[i].ratio[k];
            cr.per_xi.push_back(r);
            if (r > cr.max_ratio) {
                cr.max_ratio = r;
                cr.argmax_t = rows[i].at_t[k];
                cr.argmax_xi = xi_grid[i];
            }
            double& bucket = xi_grid[i] >= top / 10 ? top_max : low_max;
            bucket = std::max(bucket, r);
        }
        cr.top_decade_growth = low_max > 0 ? top_max / low_max : (top_max > 0 ? INFINITY : 1.0);
        cr.verified = std::isfinite(cr.max_ratio) && cr.top_decade_growth <= 2.0;
        rep.clauses.push_back(std::move(cr));
    }
    return rep;
}

struct MollificationRates {
    double error_exponent = 0;       // slope of log sup_t |a_eps - a| vs log eps
    double derivative_exponent = 0;  // slope of log sup_t |d/dt a_eps| vs log eps
    std::vector<double> eps, sup_error, sup_derivative;
};

/// Fits the decay of the mollification error and the growth of the
/// mollified derivative in eps over a t-grid.
inline MollificationRates fit_mollification_rates(const CoefficientSpec& spec, const std::vector<double>& eps_grid,
                                                  const std::vector<double>& t_grid, const MollifierSpec& m = {},
                                                  int jobs = 1) {
    MollificationRates r;
    r.eps = eps_grid;
    const auto sups = parallel_map(
        eps_grid,
        [&](double eps) {
            std::pair<double, double> s{0, 0};
            for (double t : t_grid) {
                s.first = std::max(s.first, std::abs(mollify(spec, m, eps, t) - time_value(spec, t)));
                s.second = std::max(s.second, std::abs(mollify(spec, m, eps, t, std::nullopt, 1)));
            }
            return s;
        },
        jobs);
    std::vector<double> le, ld, lv;
    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
        r.sup_error.push_back(sups[i].first);
        r.sup_derivative.push_back(sups[i].second);
        le.push_back(std::log(eps_grid[i]));
        ld.push_back(std::log(sups[i].first));
        lv.push_back(std::log(sups[i].second));
    }
    r.error_exponent = linear_fit(le, ld).slope;
    r.derivative_exponent = linear_fit(le, lv).slope;
    return r;
}

}  // namespace hypolab
