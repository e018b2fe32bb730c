#pragma once

// Characteristic roots, the companion symbol and the diagonalizer chain
// M1 -> C1 -> M2 -> M3 at a single phase-space point (n = 1).
//
// Coefficient j (j = 0..m-1) multiplies xi^(m-j) lambda^j, so the
// characteristic polynomial reads lambda^m - sum_j a_{m-j} xi^(m-j) lambda^j.
// D_t is -i d/dt throughout.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hypolab/coefficients.hpp"
#include "hypolab/errors.hpp"
#include "hypolab/numerics.hpp"
#include "hypolab/symbol_classes.hpp"

namespace hypolab {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct HyperbolicOperatorSpec {
    int m = 2;
    std::vector<CoefficientSpec> coeffs;  // coeffs[j] is a_{m-j}
    double delta_sep = 1e-6;
    MollifierSpec mollifier;

    void validate() const {
        if (m < 1) throw DomainError("operator order must be >= 1");
        if (static_cast<int>(coeffs.size()) != m)
            throw DomainError("operator of order " + std::to_string(m) + " needs " + std::to_string(m) +
                              " coefficients");
        if (!(delta_sep > 0)) throw DomainError("delta_sep must be positive");
        for (const auto& c : coeffs) c.validate();
        mollifier.validate();
    }

    bool time_constant() const {
        return std::all_of(coeffs.begin(), coeffs.end(), [](const CoefficientSpec& c) { return c.time_constant(); });
    }

    /// Wave operator u_tt = speed2 u_xx.
    static HyperbolicOperatorSpec wave(const CoefficientSpec& speed2) {
        HyperbolicOperatorSpec op;
        op.m = 2;
        op.coeffs = {speed2, CoefficientSpec::constant(0.0)};
        return op;
    }

    /// Constant-coefficient operator whose normalized roots are `roots`
    /// (lambda = xi * root), built from elementary symmetric sums.
    static HyperbolicOperatorSpec from_normalized_roots(const std::vector<double>& roots);
};

/// e_k of the values; e_0 = 1.
inline std::vector<double> elementary_symmetric(const std::vector<double>& v) {
    std::vector<double> e(v.size() + 1, 0.0);
    e[0] = 1;
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t k = i + 1; k >= 1; --k) e[k] += e[k - 1] * v[i];
    return e;
}

inline std::vector<cplx> elementary_symmetric(const std::vector<cplx>& v) {
    std::vector<cplx> e(v.size() + 1, 0.0);
    e[0] = 1;
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t k = i + 1; k >= 1; --k) e[k] += e[k - 1] * v[i];
    return e;
}

inline HyperbolicOperatorSpec HyperbolicOperatorSpec::from_normalized_roots(const std::vector<double>& roots) {
    const int m = static_cast<int>(roots.size());
    const auto e = elementary_symmetric(roots);
    HyperbolicOperatorSpec spec;
    spec.m = m;
    // prod (mu - rho_k) = mu^m - sum_j a_{m-j} mu^j  =>  a_{m-j} = (-1)^(m-j+1) e_{m-j}
    for (int j = 0; j < m; ++j) {
        const double sign = ((m - j + 1) % 2 == 0) ? 1.0 : -1.0;
        spec.coeffs.push_back(CoefficientSpec::constant(sign * e[m - j]));
    }
    return spec;
}

enum class CoefficientMode { Exact, Mollified };

/// a_{m-j}(t, x) for j = 0..m-1; Mollified uses eps = <xi>^-1.
inline std::vector<double> coefficient_values(const HyperbolicOperatorSpec& spec, double t, std::optional<double> x,
                                              double xi, CoefficientMode mode = CoefficientMode::Mollified) {
    std::vector<double> a;
    a.reserve(spec.m);
    const double eps = 1.0 / japanese_bracket(xi);
    for (const auto& c : spec.coeffs) {
        if (mode == CoefficientMode::Mollified)
            a.push_back(mollify(c, spec.mollifier, eps, t, x));
        else
            a.push_back(c.time_constant() ? (x ? c.base * (1 + spatial_value(c, *x)) : c.base)
                                          : coefficient_value(c, t, x));
    }
    return a;
}

struct RootSet {
    std::vector<double> lambda;  // ascending
    double xi = 0;
};

/// Real roots of lambda^m - sum_j a[j] xi^(m-j) lambda^j, ascending. The
/// polynomial is scaled to mu = lambda / xi and solved as a companion
/// eigenvalue problem.
inline RootSet roots_from_coefficients(const std::vector<double>& a, double xi, double delta_sep = 1e-6) {
    const int m = static_cast<int>(a.size());
    if (m < 1) throw DomainError("empty coefficient list");
    if (xi == 0) throw DomainError("roots requested at xi = 0");
    const double br = japanese_bracket(xi);
    RootSet rs;
    rs.xi = xi;
    if (m == 1) {
        rs.lambda = {a[0] * xi};
        return rs;
    }
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i + 1 < m; ++i) C(i, i + 1) = 1.0;
    for (int j = 0; j < m; ++j) C(m - 1, j) = a[j];
    Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
    if (es.info() != Eigen::Success) throw HyperbolicityViolation("companion eigenvalue solver failed");
    for (int k = 0; k < m; ++k) {
        const cplx lam = es.eigenvalues()[k] * xi;
        if (std::abs(lam.imag()) > 1e-8 * br)
            throw HyperbolicityViolation("root " + std::to_string(lam.real()) + " + " + std::to_string(lam.imag()) +
                                         "i at xi = " + std::to_string(xi));
        rs.lambda.push_back(lam.real());
    }
    std::sort(rs.lambda.begin(), rs.lambda.end());
    for (int k = 0; k + 1 < m; ++k)
        if (rs.lambda[k + 1] - rs.lambda[k] < delta_sep * br)
            throw NearMultipleRoot("root gap " + std::to_string(rs.lambda[k + 1] - rs.lambda[k]) + " at xi = " +
                                   std::to_string(xi));
    return rs;
}

/// Regularized roots at (t, x, xi).
inline RootSet characteristic_roots(const HyperbolicOperatorSpec& spec, double t, std::optional<double> x, double xi,
                                    CoefficientMode mode = CoefficientMode::Mollified) {
    spec.validate();
    return roots_from_coefficients(coefficient_values(spec, t, x, xi, mode), xi, spec.delta_sep);
}

enum class SymbolKind { A, M1, M1Inverse, C1, M2, M3 };

inline std::string to_string(SymbolKind k) {
    static const char* names[] = {"A", "M1", "M1^-1", "C1", "M2", "M3"};
    return names[static_cast<int>(k)];
}

struct SymbolMatrix {
    SymbolKind kind = SymbolKind::A;
    CMatrix entries;

    int size() const { return static_cast<int>(entries.rows()); }
    cplx operator()(int p, int q) const { return entries(p, q); }
};

/// Row-major plain-text dump.
inline std::ostream& operator<<(std::ostream& os, const SymbolMatrix& s) {
    os << to_string(s.kind) << " " << s.size() << "x" << s.size() << "\n";
    for (int p = 0; p < s.size(); ++p) {
        for (int q = 0; q < s.size(); ++q) {
            if (q) os << ' ';
            os << s.entries(p, q).real() << (s.entries(p, q).imag() < 0 ? "-" : "+")
               << std::abs(s.entries(p, q).imag()) << "i";
        }
        os << "\n";
    }
    return os;
}

/// Companion symbol from coefficient values: superdiagonal <xi>, last row
/// a_{m-j} xi^(m-j) <xi>^-(m-1-j).
inline SymbolMatrix companion_from_coefficients(const std::vector<double>& a, double xi) {
    const int m = static_cast<int>(a.size());
    const double br = japanese_bracket(xi);
    SymbolMatrix s{SymbolKind::A, CMatrix::Zero(m, m)};
    for (int i = 0; i + 1 < m; ++i) s.entries(i, i + 1) = br;
    for (int j = 0; j < m; ++j) s.entries(m - 1, j) = a[j] * std::pow(xi, m - j) * std::pow(br, -(m - 1 - j));
    return s;
}

inline SymbolMatrix companion_symbol(const HyperbolicOperatorSpec& spec, double t, std::optional<double> x, double xi,
                                     CoefficientMode mode = CoefficientMode::Mollified) {
    spec.validate();
    return companion_from_coefficients(coefficient_values(spec, t, x, xi, mode), xi);
}

namespace detail {
inline void check_gaps(const std::vector<double>& lam, double xi, double delta_sep) {
    const double br = japanese_bracket(xi);
    for (std::size_t k = 0; k + 1 < lam.size(); ++k)
        if (!(std::abs(lam[k + 1] - lam[k]) >= delta_sep * br))
            throw NearMultipleRoot("root gap below " + std::to_string(delta_sep) + " <xi>");
}
}  // namespace detail

/// M1(i, k) = (lambda_k / <xi>)^i.
inline SymbolMatrix m1_symbol(const RootSet& roots) {
    const int m = static_cast<int>(roots.lambda.size());
    const double br = japanese_bracket(roots.xi);
    SymbolMatrix s{SymbolKind::M1, CMatrix::Zero(m, m)};
    for (int k = 0; k < m; ++k) {
        double v = 1;
        for (int i = 0; i < m; ++i, v *= roots.lambda[k] / br) s.entries(i, k) = v;
    }
    return s;
}

/// Explicit inverse: c_{p,q} = (-1)^(q-1) <xi>^(q-1) e_{m-q}(lambda without p)
/// / prod_{i != p} (lambda_i - lambda_p), with p, q counted from 1.
inline SymbolMatrix m1_inverse_symbol(const RootSet& roots, double delta_sep = 1e-300) {
    const int m = static_cast<int>(roots.lambda.size());
    detail::check_gaps(roots.lambda, roots.xi, delta_sep);
    const double br = japanese_bracket(roots.xi);
    SymbolMatrix s{SymbolKind::M1Inverse, CMatrix::Zero(m, m)};
    for (int p = 0; p < m; ++p) {
        std::vector<double> others;
        double denom = 1;
        for (int i = 0; i < m; ++i) {
            if (i == p) continue;
            others.push_back(roots.lambda[i]);
            denom *= roots.lambda[i] - roots.lambda[p];
        }
        const auto e = elementary_symmetric(others);
        for (int q = 1; q <= m; ++q) {
            const double sign = (q - 1) % 2 == 0 ? 1.0 : -1.0;
            s.entries(p, q - 1) = sign * std::pow(br, q - 1) * e[m - q] / denom;
        }
    }
    return s;
}

/// C1 entries from the roots and D_t lambda:
///   e_{p,p} = -D_t lambda_p sum_{i != p} 1 / (lambda_i - lambda_p)
///   e_{p,q} = -D_t lambda_q prod_{i != p,q} (lambda_i - lambda_q) / prod_{i != p} (lambda_i - lambda_p)
inline SymbolMatrix c1_entries(const RootSet& roots, const std::vector<cplx>& dt_lambda, double delta_sep = 1e-300) {
    const auto& l = roots.lambda;
    const int m = static_cast<int>(l.size());
    if (static_cast<int>(dt_lambda.size()) != m) throw DomainError("D_t lambda has the wrong length");
    detail::check_gaps(l, roots.xi, delta_sep);
    SymbolMatrix s{SymbolKind::C1, CMatrix::Zero(m, m)};
    for (int p = 0; p < m; ++p) {
        double denom = 1, harmonic = 0;
        for (int i = 0; i < m; ++i)
            if (i != p) {
                denom *= l[i] - l[p];
                harmonic += 1.0 / (l[i] - l[p]);
            }
        for (int q = 0; q < m; ++q) {
            if (p == q) {
                s.entries(p, p) = -dt_lambda[p] * harmonic;
                continue;
            }
            double num = 1;
            for (int i = 0; i < m; ++i)
                if (i != p && i != q) num *= l[i] - l[q];
            s.entries(p, q) = -dt_lambda[q] * num / denom;
        }
    }
    return s;
}

/// M2 = I off the hyperbolic zone; inside it d_{p,q} = e_{p,q} / (lambda_p - lambda_q)
/// off the diagonal with unit diagonal.
inline SymbolMatrix m2_symbol(const RootSet& roots, const std::vector<cplx>& dt_lambda, Zone zone,
                              double delta_sep = 1e-300) {
    const int m = static_cast<int>(roots.lambda.size());
    SymbolMatrix s{SymbolKind::M2, CMatrix::Identity(m, m)};
    if (zone != Zone::Hyperbolic) return s;
    const SymbolMatrix c1 = c1_entries(roots, dt_lambda, delta_sep);
    for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q) {
            if (p == q) continue;
            const cplx d = c1.entries(p, q) / (roots.lambda[p] - roots.lambda[q]);
            if (std::abs(d) >= 1.0 / (2 * m))
                throw DiagonalizerIllConditioned("|d_{" + std::to_string(p + 1) + "," + std::to_string(q + 1) +
                                                 "}| = " + std::to_string(std::abs(d)) + " >= 1/(2m) at xi = " +
                                                 std::to_string(roots.xi));
            s.entries(p, q) = d;
        }
    return s;
}

/// D_t lambda_k = -i d/dt lambda_k by a centered difference of the
/// regularized roots with step eps / 8, eps = <xi>^-1.
inline std::vector<cplx> roots_time_derivative(const HyperbolicOperatorSpec& spec, double t, std::optional<double> x,
                                               double xi) {
    const int m = spec.m;
    if (spec.time_constant()) return std::vector<cplx>(m, 0.0);
    const double h = 1.0 / (8.0 * japanese_bracket(xi));
    const auto lp = characteristic_roots(spec, t + h, x, xi).lambda;
    const auto lm = characteristic_roots(spec, t - h, x, xi).lambda;
    std::vector<cplx> d(m);
    for (int k = 0; k < m; ++k) d[k] = cplx(0, -1) * ((lp[k] - lm[k]) / (2 * h));
    return d;
}

/// Integrand of the M3 exponent: D_s lambda_p / sum_{i != p} (lambda_i - lambda_p).
inline std::vector<cplx> m3_integrand(const HyperbolicOperatorSpec& spec, double s, std::optional<double> x,
                                      double xi) {
    const auto roots = characteristic_roots(spec, s, x, xi);
    const auto d = roots_time_derivative(spec, s, x, xi);
    const int m = spec.m;
    std::vector<cplx> out(m);
    for (int p = 0; p < m; ++p) {
        double sum = 0;
        for (int i = 0; i < m; ++i)
            if (i != p) sum += roots.lambda[i] - roots.lambda[p];
        out[p] = d[p] / sum;
    }
    return out;
}

struct M3Quadrature {
    double first_panel = 0.25;  // in units of eps
    double growth = 1.1;
    double max_panel = 0;       // in units of eps; 0 picks 2 for rough coefficients, unbounded otherwise
};

struct M3Weights {
    std::vector<cplx> integral;  // int_0^t D_s lambda_p / sum (...) ds
    std::vector<double> modulus; // |w_p| = |exp(integral_p)|
};

/// w_p = exp(int_0^t D_s lambda_p / sum_{i != p} (lambda_i - lambda_p) ds).
inline M3Weights m3_weights(const HyperbolicOperatorSpec& spec, std::optional<double> x, double xi, double t,
                            const M3Quadrature& quad = {}) {
    spec.validate();
    const int m = spec.m;
    M3Weights w;
    w.integral.assign(m, 0.0);
    if (!spec.time_constant() && t > 0) {
        const double eps = 1.0 / japanese_bracket(xi);
        const bool rough = std::any_of(spec.coeffs.begin(), spec.coeffs.end(), [](const CoefficientSpec& c) {
            return c.profile == TimeProfile::HolderRough && c.delta != 0;
        });
        const double h_max = quad.max_panel > 0 ? quad.max_panel * eps
                                          : (rough ? 2 * eps : std::numeric_limits<double>::infinity());
        // D_s carries a factor -i, so every integrand is purely imaginary.
        std::vector<double> acc(m, 0.0);
        double a = 0, h = std::min(quad.first_panel * eps, t);
        while (a < t) {
            const double b = std::min(t, a + h), c = 0.5 * (a + b), half = 0.5 * (b - a);
            for (std::size_t g = 0; g < kGaussNodes8.size(); ++g) {
                const auto f = m3_integrand(spec, c + half * kGaussNodes8[g], x, xi);
                for (int p = 0; p < m; ++p) acc[p] += kGaussWeights8[g] * half * f[p].imag();
            }
            a = b;
            h = std::min(h * quad.growth, h_max);
        }
        for (int p = 0; p < m; ++p) w.integral[p] = cplx(0, acc[p]);
    }
    for (const auto& v : w.integral) w.modulus.push_back(std::abs(std::exp(v)));
    return w;
}

}  // namespace hypolab
