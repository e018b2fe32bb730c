#pragma once

// Frequency-wise energy experiments for x-independent coefficients:
// U' = i A(t, xi) U integrated with classical RK4, amplification and loss
// fits, and the conjugation weight theta0.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

#include "hypolab/coefficients.hpp"
#include "hypolab/errors.hpp"
#include "hypolab/hyperbolic_symbol.hpp"
#include "hypolab/moduli.hpp"
#include "hypolab/numerics.hpp"
#include "hypolab/symbol_classes.hpp"

namespace hypolab {

inline constexpr int kMaxOrder = 8;
inline constexpr int kBaseSamples = 256;  // every trace refines this many intervals

// WorstCase evolves every basis vector and records the spectral norm of the
// propagator, i.e. the sup over unit initial data.
enum class InitialData { FirstBasis, Random, Zero, WorstCase };

struct IntegratorSpec {
    double c_h = 0.01;
    double samples_per_period = 16;
    double min_step = 1e-12;
};

struct FrequencyExperiment {
    HyperbolicOperatorSpec op;
    std::vector<double> xi_grid;
    double T = 1.0;
    IntegratorSpec integrator;
    ZoneParams zone;
    AuxiliaryFunction eta = AuxiliaryFunction::log_reciprocal(1.0);
    AuxiliaryFunction rho = AuxiliaryFunction::power_law(1.0, AuxRole::Rho);
    InitialData initial = InitialData::FirstBasis;
    std::uint64_t seed = 1;
    bool record_states = false;  // keep U(t) at every sample (single-column data only)

    void validate() const {
        op.validate();
        if (op.m > kMaxOrder) throw DomainError("energy experiments support m <= " + std::to_string(kMaxOrder));
        for (const auto& c : op.coeffs)
            if (c.spatial && c.spatial->family != SpatialFamily::Zero)
                throw DomainError("energy experiments need x-independent coefficients");
        if (!(T > 0)) throw DomainError("horizon must be positive");
        if (!(integrator.c_h > 0)) throw DomainError("c_h must be positive");
        if (!(integrator.samples_per_period > 0)) throw DomainError("samples per period must be positive");
        if (record_states && initial == InitialData::WorstCase)
            throw DomainError("state recording needs a single initial vector");
        if (!std::is_sorted(xi_grid.begin(), xi_grid.end()) ||
            std::adjacent_find(xi_grid.begin(), xi_grid.end()) != xi_grid.end())
            throw DomainError("xi grid must be strictly increasing");
    }
};

struct EnergyTrace {
    double xi = 0;
    std::vector<double> times;
    std::vector<double> norms;
    double amplification = 0;
    std::vector<std::vector<cplx>> states;  // filled when record_states is set
};

/// sup over recorded times of norms(t) / norms(0); 1 for an all-zero trace.
inline double amplification(const EnergyTrace& tr) {
    if (tr.norms.empty()) throw DomainError("empty trace");
    const double n0 = tr.norms.front();
    if (n0 == 0) return 1.0;
    double best = 0;
    for (double v : tr.norms) best = std::max(best, v / n0);
    return best;
}

namespace detail {

using StateVec = std::array<cplx, kMaxOrder>;

// Bound on |a_j| used by the step controller.
inline double coefficient_sup(const CoefficientSpec& c) { return std::abs(c.base) + c.delta; }

inline double exact_coefficient(const CoefficientSpec& c, double t) {
    return c.time_constant() ? c.base : time_value(c, std::max(t, c.t_floor));
}

struct CompanionRow {
    std::array<double, kMaxOrder> b{};  // last row of A
};

inline CompanionRow companion_row(const HyperbolicOperatorSpec& op, double xi, double t) {
    CompanionRow r;
    const int m = op.m;
    const double br = japanese_bracket(xi);
    for (int j = 0; j < m; ++j)
        r.b[j] = exact_coefficient(op.coeffs[j], t) * std::pow(xi, m - j) * std::pow(br, -(m - 1 - j));
    return r;
}

// out = i A u
inline void apply_iA(const CompanionRow& row, double br, int m, const StateVec& u, StateVec& out) {
    const cplx I(0, 1);
    for (int i = 0; i + 1 < m; ++i) out[i] = I * br * u[i + 1];
    cplx s = 0;
    for (int j = 0; j < m; ++j) s += row.b[j] * u[j];
    out[m - 1] = I * s;
}

inline double state_norm(const StateVec& u, int m) {
    double s = 0;
    for (int i = 0; i < m; ++i) s += std::norm(u[i]);
    return std::sqrt(s);
}

}  // namespace detail

/// Number of sample intervals for a frequency: a multiple of kBaseSamples
/// giving about `samples_per_period` samples per period of the fastest mode.
inline int sample_intervals(const FrequencyExperiment& ex, double xi) {
    double S = 1;
    for (const auto& c : ex.op.coeffs) S = std::max(S, detail::coefficient_sup(c));
    const double omega = japanese_bracket(xi) * S;
    const double wanted = ex.integrator.samples_per_period * omega * ex.T / (2 * std::numbers::pi);
    const int k = std::max(1, static_cast<int>(std::ceil(wanted / kBaseSamples)));
    return k * kBaseSamples;
}

/// Initial vector for the experiment's InitialData choice (unit norm).
inline std::vector<cplx> initial_vector(const FrequencyExperiment& ex, double xi) {
    const int m = ex.op.m;
    std::vector<cplx> u(m, 0.0);
    switch (ex.initial) {
        case InitialData::Zero: break;
        case InitialData::FirstBasis:
        case InitialData::WorstCase: u[0] = 1.0; break;
        case InitialData::Random: {
            std::mt19937_64 gen(ex.seed ^ std::hash<double>{}(xi));
            std::normal_distribution<double> nd;
            double s = 0;
            for (auto& v : u) {
                v = cplx(nd(gen), nd(gen));
                s += std::norm(v);
            }
            for (auto& v : u) v /= std::sqrt(s);
            break;
        }
    }
    return u;
}

/// RK4 for U' = i A(t, xi) U with the unmollified coefficients. The step is
/// c_h / (<xi> S + r(t) / S + 1), S = max(1, max_j sup |a_j|), shortened
/// to land on every sample time. The rate r = max_j |a_j'| is read at t and at
/// the trial endpoint, so a step cannot jump from the constant region below
/// t_floor into the oscillating one.
inline EnergyTrace evolve_frequency(const FrequencyExperiment& ex, double xi) {
    ex.validate();
    const int m = ex.op.m;
    const double br = japanese_bracket(xi);
    double S = 1;
    for (const auto& c : ex.op.coeffs) S = std::max(S, detail::coefficient_sup(c));
    const bool constant = ex.op.time_constant();

    const int n = sample_intervals(ex, xi);
    EnergyTrace tr;
    tr.xi = xi;
    tr.times.resize(n + 1);
    tr.norms.resize(n + 1);
    for (int i = 0; i <= n; ++i) tr.times[i] = ex.T * static_cast<double>(i) / n;

    // One column per evolved initial vector.
    const int cols = ex.initial == InitialData::WorstCase ? m : 1;
    std::vector<detail::StateVec> u(cols);
    if (ex.initial == InitialData::WorstCase) {
        for (int c = 0; c < cols; ++c) u[c][c] = 1.0;
    } else {
        const auto u0 = initial_vector(ex, xi);
        for (int i = 0; i < m; ++i) u[0][i] = u0[i];
    }
    auto record = [&](int s) {
        if (cols == 1) {
            tr.norms[s] = detail::state_norm(u[0], m);
            if (ex.record_states) tr.states.emplace_back(u[0].begin(), u[0].begin() + m);
            return;
        }
        Eigen::MatrixXcd F(m, cols);
        for (int c = 0; c < cols; ++c)
            for (int i = 0; i < m; ++i) F(i, c) = u[c][i];
        tr.norms[s] = Eigen::JacobiSVD<Eigen::MatrixXcd>(F).singularValues()(0);
    };
    record(0);

    detail::StateVec k1{}, k2{}, k3{}, k4{}, tmp{};
    const auto row0 = detail::companion_row(ex.op, xi, 0.0);
    double t = 0;
    for (int s = 1; s <= n; ++s) {
        const double target = tr.times[s];
        while (t < target) {
            auto step_at = [&](double tau) {
                double rate = 0;
                if (!constant)
                    for (const auto& c : ex.op.coeffs)
                        if (!c.time_constant()) rate = std::max(rate, std::abs(time_derivative(c, std::max(tau, 1e-300))));
                return ex.integrator.c_h / (br * S + rate / S + 1.0);
            };
            double h = step_at(t);
            if (!constant) h = std::min(h, step_at(std::min(t + h, target)));
            if (h < ex.integrator.min_step)
                throw StiffnessError("step " + std::to_string(h) + " below floor at t = " + std::to_string(t) +
                                     ", xi = " + std::to_string(xi));
            if (t + h > target || target - (t + h) < 1e-3 * h) h = target - t;
            const auto ra = constant ? row0 : detail::companion_row(ex.op, xi, t);
            const auto rb = constant ? row0 : detail::companion_row(ex.op, xi, t + 0.5 * h);
            const auto rc = constant ? row0 : detail::companion_row(ex.op, xi, t + h);
            for (auto& v : u) {
                detail::apply_iA(ra, br, m, v, k1);
                for (int i = 0; i < m; ++i) tmp[i] = v[i] + 0.5 * h * k1[i];
                detail::apply_iA(rb, br, m, tmp, k2);
                for (int i = 0; i < m; ++i) tmp[i] = v[i] + 0.5 * h * k2[i];
                detail::apply_iA(rb, br, m, tmp, k3);
                for (int i = 0; i < m; ++i) tmp[i] = v[i] + h * k3[i];
                detail::apply_iA(rc, br, m, tmp, k4);
                for (int i = 0; i < m; ++i) v[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            t = (h == target - t) ? target : t + h;
        }
        t = target;
        record(s);
    }
    tr.amplification = amplification(tr);
    return tr;
}

/// Closed-form solution for time-constant coefficients:
/// U(t) = M1 diag(exp(i lambda t)) M1^-1 U(0).
inline std::vector<cplx> plane_wave_solution(const HyperbolicOperatorSpec& op, double xi, double t,
                                             const std::vector<cplx>& u0) {
    if (!op.time_constant()) throw DomainError("plane-wave solution needs time-constant coefficients");
    const auto roots = characteristic_roots(op, 0.0, std::nullopt, xi, CoefficientMode::Exact);
    const auto M1 = m1_symbol(roots).entries;
    const auto Mi = m1_inverse_symbol(roots).entries;
    const int m = op.m;
    CVector v(m);
    for (int i = 0; i < m; ++i) v[i] = u0[i];
    CVector w = Mi * v;
    for (int k = 0; k < m; ++k) w[k] *= std::exp(cplx(0, roots.lambda[k] * t));
    const CVector out = M1 * w;
    return std::vector<cplx>(out.data(), out.data() + m);
}

inline std::vector<EnergyTrace> run_experiment(const FrequencyExperiment& ex, int jobs = 1) {
    ex.validate();
    return parallel_map(ex.xi_grid, [&](double xi) { return evolve_frequency(ex, xi); }, jobs);
}

struct LossEstimate {
    double nu0_hat = 0;
    double stderr_ = 0;
    double xi_min = 0, xi_max = 0;
    std::size_t points = 0;
};

/// Slope of log(amplification) against log <xi> over the top two decades.
inline LossEstimate estimate_loss(const std::vector<EnergyTrace>& traces) {
    if (traces.size() < 8) throw FitError("estimate_loss: need at least 8 frequencies");
    std::vector<double> br, amp;
    double lo = INFINITY, hi = 0;
    for (const auto& tr : traces) {
        lo = std::min(lo, tr.xi);
        hi = std::max(hi, tr.xi);
    }
    if (hi < 100 * lo * (1 - 1e-9)) throw FitError("estimate_loss: frequencies must span two decades");
    for (const auto& tr : traces) {
        br.push_back(japanese_bracket(tr.xi));
        amp.push_back(tr.amplification);
    }
    const LinearFit f = loglog_fit_top(br, amp, 2.0, 8);
    LossEstimate e;
    e.nu0_hat = f.slope;
    e.stderr_ = f.slope_stderr;
    e.points = f.points;
    const double floor = *std::max_element(br.begin(), br.end()) / 100 * (1 - 1e-12);
    e.xi_max = hi;
    e.xi_min = hi;
    for (std::size_t i = 0; i < traces.size(); ++i)
        if (br[i] >= floor) e.xi_min = std::min(e.xi_min, traces[i].xi);
    return e;
}

struct SampledEnergy {
    std::vector<double> times;
    std::vector<double> values;
};

/// E_nu(t)^2 = sum_xi spectrum(xi) <xi>^(2 nu) |U_xi(t)|^2 on the common
/// base grid of kBaseSamples + 1 times. spectrum[i] weighs traces[i].
inline SampledEnergy sobolev_energy(const std::vector<EnergyTrace>& traces, double nu,
                                    const std::vector<double>& spectrum) {
    if (traces.size() != spectrum.size()) throw DomainError("spectrum and traces differ in length");
    SampledEnergy e;
    if (traces.empty()) return e;
    e.times.resize(kBaseSamples + 1);
    e.values.assign(kBaseSamples + 1, 0.0);
    for (std::size_t k = 0; k < traces.size(); ++k) {
        if (spectrum[k] < 0) throw DomainError("spectrum must be nonnegative");
        const auto& tr = traces[k];
        const std::size_t n = tr.times.size() - 1;
        if (n % kBaseSamples != 0) throw DomainError("trace is not a refinement of the base grid");
        const std::size_t stride = n / kBaseSamples;
        const double w = spectrum[k] * std::pow(japanese_bracket(tr.xi), 2 * nu);
        for (int i = 0; i <= kBaseSamples; ++i) {
            e.times[i] = tr.times[i * stride];
            e.values[i] += w * tr.norms[i * stride] * tr.norms[i * stride];
        }
    }
    for (auto& v : e.values) v = std::sqrt(v);
    return e;
}

// ---------------------------------------------------------------------------
// Conjugation weight.

/// 0 below 1/2, 1 above 1, quintic smoothstep in between.
inline double theta_cutoff(double tau) {
    if (tau <= 0.5) return 0.0;
    if (tau >= 1.0) return 1.0;
    const double s = 2 * (tau - 0.5);
    return s * s * s * (10 - 15 * s + 6 * s * s);
}

struct ThetaSpec {
    double K = 1.0;
    AuxiliaryFunction eta = AuxiliaryFunction::log_reciprocal(1.0);
    AuxiliaryFunction rho = AuxiliaryFunction::power_law(1.0, AuxRole::Rho);
    ZoneParams zone;
};

/// theta0 = (1 - chi(t / (2 N eta(e)))) / eta(e) + chi(t / (N eta(e))) (W3 + W2), e = <xi>^-1.
inline double theta0(const ThetaSpec& ts, double t, double xi) {
    if (!(xi >= ts.zone.M)) throw DomainError("theta0 below frequency floor");
    const double e = 1.0 / japanese_bracket(xi);
    const double L = ts.zone.N * eval(ts.eta, e);
    double v = (1 - theta_cutoff(t / (2 * L))) / eval(ts.eta, e);
    const double c = theta_cutoff(t / L);
    if (c > 0) v += c * (weight_w3(ts.eta, ts.rho, xi, t) + weight_w2(ts.eta, xi, t));
    return v;
}

/// theta = K (2 + theta0).
inline double theta(const ThetaSpec& ts, double t, double xi) { return ts.K * (2 + theta0(ts, t, xi)); }

/// int_0^T f(t) dt with Gauss panels graded from the left end of each of
/// the cutoff pieces [0, L/2], [L/2, L], [L, 2L], [2L, T], L = N eta(<xi>^-1).
template <class F>
double theta_time_integral(F&& f, const ThetaSpec& ts, double xi, double T) {
    const double L = ts.zone.N * eval(ts.eta, 1.0 / japanese_bracket(xi));
    const std::array<double, 5> cuts = {0.0, 0.5 * L, L, 2 * L, T};
    double s = 0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double a = std::min(cuts[k], T), b = std::min(cuts[k + 1], T);
        if (b > a) s += graded_integral(f, a, b, 1e-3 * (b - a), 1.1);
    }
    return s;
}

struct ThetaIntegralReport {
    std::vector<double> xi;
    std::vector<double> integral;
    double sup = 0;
    double top_decade_variation = 0;  // max / min over the top decade
    double slope = 0;                 // log-log slope over the top two decades
    double slope_stderr = 0;
    bool bounded(double tol = 0.05) const { return slope <= tol; }
};

inline ThetaIntegralReport theta_integral_bound(const ThetaSpec& ts, const std::vector<double>& xi_grid, double T,
                                                int jobs = 1) {
    ThetaIntegralReport r;
    r.xi = xi_grid;
    r.integral = parallel_map(
        xi_grid,
        [&](double xi) { return theta_time_integral([&](double t) { return theta0(ts, t, xi); }, ts, xi, T); }, jobs);
    const double top = *std::max_element(xi_grid.begin(), xi_grid.end());
    double tmax = 0, tmin = INFINITY;
    std::vector<double> br;
    for (std::size_t i = 0; i < xi_grid.size(); ++i) {
        r.sup = std::max(r.sup, r.integral[i]);
        br.push_back(japanese_bracket(xi_grid[i]));
        if (xi_grid[i] >= top / 10) {
            tmax = std::max(tmax, r.integral[i]);
            tmin = std::min(tmin, r.integral[i]);
        }
    }
    r.top_decade_variation = tmin > 0 ? tmax / tmin : INFINITY;
    const LinearFit f = loglog_fit_top(br, r.integral, 2.0, 8);
    r.slope = f.slope;
    r.slope_stderr = f.slope_stderr;
    return r;
}

}  // namespace hypolab
