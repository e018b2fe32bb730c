#include <gtest/gtest.h>

#include <Eigen/SVD>
#include <cmath>

#include "hypolab/energy_lab.hpp"

using namespace hypolab;

namespace {

FrequencyExperiment constant_experiment(double a, std::vector<double> grid) {
    FrequencyExperiment ex;
    ex.op = HyperbolicOperatorSpec::wave(CoefficientSpec::constant(a));
    ex.xi_grid = std::move(grid);
    return ex;
}

double vector_norm(const std::vector<cplx>& v) {
    double s = 0;
    for (const auto& c : v) s += std::norm(c);
    return std::sqrt(s);
}

EnergyTrace trace_with_norms(std::vector<double> norms) {
    EnergyTrace tr;
    tr.norms = std::move(norms);
    for (std::size_t i = 0; i < tr.norms.size(); ++i) tr.times.push_back(static_cast<double>(i));
    return tr;
}

ThetaSpec power_theta(double alpha) {
    ThetaSpec ts;
    ts.eta = AuxiliaryFunction::power_law(1 - alpha);
    ts.zone = resolve_zone(ts.eta, {});
    return ts;
}

}  // namespace

TEST(Amplification, Definition) {
    EXPECT_EQ(amplification(trace_with_norms({1, 1, 1})), 1.0);
    EXPECT_EQ(amplification(trace_with_norms({1, 3.5, 2})), 3.5);
    EXPECT_EQ(amplification(trace_with_norms({2, 1, 3})), 1.5);
    EXPECT_EQ(amplification(trace_with_norms({0, 0})), 1.0);
    EXPECT_THROW(amplification(EnergyTrace{}), DomainError);
}

TEST(Evolve, ZeroDataStaysZero) {
    auto ex = constant_experiment(1, {64});
    ex.initial = InitialData::Zero;
    const auto tr = evolve_frequency(ex, 64);
    for (double v : tr.norms) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(tr.amplification, 1.0);
}

TEST(Evolve, SampleGridRefinesBaseGrid) {
    const auto ex = constant_experiment(4, {16, 4096});
    for (double xi : ex.xi_grid) {
        const auto tr = evolve_frequency(ex, xi);
        EXPECT_EQ((tr.times.size() - 1) % kBaseSamples, 0u);
        EXPECT_EQ(tr.times.front(), 0.0);
        EXPECT_EQ(tr.times.back(), ex.T);
        EXPECT_NEAR(tr.norms.front(), 1.0, 1e-15);
    }
}

TEST(Evolve, UnitSpeedAmplificationIsFrequencyIndependent) {
    const auto ex = constant_experiment(1, log_grid(16, 4096, 2));
    const auto traces = run_experiment(ex);
    for (const auto& tr : traces) EXPECT_NEAR(tr.amplification, traces.front().amplification, 1e-6);
}

TEST(Evolve, MatchesPlaneWaveAtEverySample) {
    auto ex = constant_experiment(4, {16, 300, 4096});
    ex.record_states = true;
    const auto u0 = initial_vector(ex, 16);
    for (double xi : ex.xi_grid) {
        const auto tr = evolve_frequency(ex, xi);
        ASSERT_EQ(tr.states.size(), tr.times.size());
        double closed_max = 0;
        for (std::size_t i = 0; i < tr.times.size(); ++i) {
            const auto exact = plane_wave_solution(ex.op, xi, tr.times[i], u0);
            double diff = 0;
            for (int k = 0; k < 2; ++k) diff += std::norm(tr.states[i][k] - exact[k]);
            EXPECT_LE(std::sqrt(diff), 1e-6 * vector_norm(exact));
            closed_max = std::max(closed_max, vector_norm(exact));
        }
        EXPECT_NEAR(tr.amplification, closed_max, 1e-6 * closed_max);
    }
}

TEST(Evolve, AmplificationBoundedByConditioning) {
    const auto ex = constant_experiment(4, {16, 4096});
    for (double xi : ex.xi_grid) {
        const auto roots = characteristic_roots(ex.op, 0, std::nullopt, xi);
        const auto sv = Eigen::JacobiSVD<CMatrix>(m1_symbol(roots).entries).singularValues();
        EXPECT_LE(evolve_frequency(ex, xi).amplification, sv(0) / sv(sv.size() - 1) * (1 + 1e-9));
    }
}

TEST(Evolve, HalvingTheStepConverges) {
    auto ex = constant_experiment(4, {4096});
    ex.op = HyperbolicOperatorSpec::wave(CoefficientSpec::log_power(2, 0.5, 0.5));
    const double coarse = evolve_frequency(ex, 4096).amplification;
    ex.integrator.c_h /= 2;
    const double fine = evolve_frequency(ex, 4096).amplification;
    EXPECT_LT(std::abs(fine - coarse), 1e-6 * fine);
}

TEST(Evolve, RandomDataIsReproducibleAndNormalized) {
    auto ex = constant_experiment(1, {100});
    ex.initial = InitialData::Random;
    const auto a = initial_vector(ex, 100), b = initial_vector(ex, 100);
    EXPECT_EQ(a, b);
    EXPECT_NEAR(vector_norm(a), 1.0, 1e-14);
    ex.seed = 2;
    EXPECT_NE(initial_vector(ex, 100), a);
}

TEST(Evolve, WorstCaseDominatesSingleVector) {
    auto ex = constant_experiment(4, {50});
    ex.op = HyperbolicOperatorSpec::wave(CoefficientSpec::log_power(2, 0.5, 0));
    const double single = evolve_frequency(ex, 50).amplification;
    ex.initial = InitialData::WorstCase;
    EXPECT_GE(evolve_frequency(ex, 50).amplification, single * (1 - 1e-12));
}

TEST(Evolve, StepFloorRaisesStiffness) {
    auto ex = constant_experiment(1, {100});
    ex.integrator.min_step = 1.0;
    EXPECT_THROW(evolve_frequency(ex, 100), StiffnessError);
}

TEST(Experiment, Validation) {
    auto ex = constant_experiment(1, {100, 10});
    EXPECT_THROW(ex.validate(), DomainError);
    ex = constant_experiment(1, {10, 100});
    ex.record_states = true;
    ex.initial = InitialData::WorstCase;
    EXPECT_THROW(ex.validate(), DomainError);
    ex = constant_experiment(1, {10, 100});
    ex.op.coeffs[0].spatial = SpatialProfile{SpatialFamily::Smooth, 1.0, 0.25};
    EXPECT_THROW(ex.validate(), DomainError);
}

TEST(PlaneWave, RejectsTimeDependentCoefficients) {
    const auto op = HyperbolicOperatorSpec::wave(CoefficientSpec::log_power(2, 0.5, 0));
    EXPECT_THROW(plane_wave_solution(op, 10, 0.5, {1.0, 0.0}), DomainError);
}

TEST(Loss, ConstantCoefficientsLoseNothing) {
    const auto traces = run_experiment(constant_experiment(4, log_grid(16, 4096, 4)));
    const auto e = estimate_loss(traces);
    EXPECT_NEAR(e.nu0_hat, 0.0, 0.02);
    EXPECT_GE(e.stderr_, 0.0);
    EXPECT_EQ(e.xi_max, 4096);
    EXPECT_GE(e.points, 8u);
}

TEST(Loss, RecoversSyntheticExponent) {
    std::vector<EnergyTrace> traces;
    for (double xi : log_grid(10, 1e4, 4)) {
        EnergyTrace tr;
        tr.xi = xi;
        tr.amplification = 3 * std::pow(japanese_bracket(xi), 0.3);
        traces.push_back(tr);
    }
    EXPECT_NEAR(estimate_loss(traces).nu0_hat, 0.3, 1e-12);
    traces.resize(5);
    EXPECT_THROW(estimate_loss(traces), FitError);
}

TEST(SobolevEnergy, SingleFrequency) {
    const auto ex = constant_experiment(4, {16, 300});
    const auto traces = run_experiment(ex);
    const double nu = 1.5, weight = 2.0;
    const auto e = sobolev_energy(traces, nu, {0.0, weight});
    ASSERT_EQ(e.values.size(), static_cast<std::size_t>(kBaseSamples + 1));
    const auto& tr = traces[1];
    const std::size_t stride = (tr.times.size() - 1) / kBaseSamples;
    for (int i = 0; i <= kBaseSamples; i += 17)
        EXPECT_NEAR(e.values[i], std::sqrt(weight) * std::pow(japanese_bracket(300), nu) * tr.norms[i * stride],
                    1e-12 * e.values[i]);
}

TEST(SobolevEnergy, ConstantCoefficientsBoundedByConditioning) {
    const auto ex = constant_experiment(4, log_grid(16, 4096, 2));
    const auto traces = run_experiment(ex);
    double cond = 0;
    for (double xi : ex.xi_grid) {
        const auto sv = Eigen::JacobiSVD<CMatrix>(m1_symbol(characteristic_roots(ex.op, 0, std::nullopt, xi)).entries)
                            .singularValues();
        cond = std::max(cond, sv(0) / sv(sv.size() - 1));
    }
    const auto e = sobolev_energy(traces, 0, std::vector<double>(traces.size(), 1.0));
    for (double v : e.values) EXPECT_LE(v / e.values.front(), cond);
}

TEST(SobolevEnergy, RejectsBadSpectra) {
    const auto traces = run_experiment(constant_experiment(1, {16}));
    EXPECT_THROW(sobolev_energy(traces, 0, {}), DomainError);
    EXPECT_THROW(sobolev_energy(traces, 0, {-1.0}), DomainError);
}

TEST(Theta, CutoffShape) {
    EXPECT_EQ(theta_cutoff(0), 0);
    EXPECT_EQ(theta_cutoff(0.5), 0);
    EXPECT_EQ(theta_cutoff(1), 1);
    EXPECT_EQ(theta_cutoff(7), 1);
    EXPECT_DOUBLE_EQ(theta_cutoff(0.75), 0.5);
    double prev = 0;
    for (double tau = 0.5; tau <= 1.0; tau += 0.01) {
        EXPECT_GE(theta_cutoff(tau), prev);
        prev = theta_cutoff(tau);
    }
}

TEST(Theta, StartsAtReciprocalModulus) {
    ThetaSpec loglip;
    loglip.zone = resolve_zone(loglip.eta, {});
    for (const auto& ts : {power_theta(0.5), loglip}) {
        for (double xi : {100.0, 1e5}) EXPECT_EQ(theta0(ts, 0, xi), 1 / eval(ts.eta, 1 / japanese_bracket(xi)));
    }
}

TEST(Theta, HyperbolicBranchClosedForm) {
    const double alpha = 0.5;
    const auto ts = power_theta(alpha);
    for (double xi : {1e3, 1e5}) {
        const double br = japanese_bracket(xi), L = ts.zone.N * eval(ts.eta, 1 / br);
        for (double t : {2 * L, 0.5, 0.9}) {
            const double u = t - 1 / br, p = -(2 - alpha) / (1 - alpha);
            const double w2 = std::pow(u, p) / ((1 - alpha) * br);
            const double w3 = std::pow(u, p) / ((1 - alpha) * br);
            EXPECT_NEAR(theta0(ts, t, xi) / (w2 + w3), 1, 1e-6);
        }
    }
}

TEST(Theta, CrossoverCarriesBothBranches) {
    const auto ts = power_theta(0.5);
    const double xi = 1e4, e = 1 / japanese_bracket(xi), L = ts.zone.N * eval(ts.eta, e);
    const double v = theta0(ts, L, xi);
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_NEAR(v, 1 / eval(ts.eta, e) + weight_w3(ts.eta, ts.rho, xi, L) + weight_w2(ts.eta, xi, L), 1e-12 * v);
}

TEST(Theta, FloorOfTwoK) {
    auto ts = power_theta(0.5);
    ts.K = 3;
    for (double xi : {16.0, 1e4})
        for (double t : log_grid_n(1e-6, 1, 50)) {
            EXPECT_GE(theta0(ts, t, xi), 0);
            EXPECT_GE(theta(ts, t, xi), 2 * ts.K);
            EXPECT_DOUBLE_EQ(theta(ts, t, xi), 3 * (2 + theta0(ts, t, xi)));
        }
    EXPECT_THROW(theta0(ts, 0.5, 1), DomainError);
}

TEST(Theta, IntegralIsLinear) {
    const auto ts = power_theta(0.5);
    const double xi = 1e4;
    const double one = theta_time_integral([&](double t) { return theta0(ts, t, xi); }, ts, xi, 1.0);
    const double two = theta_time_integral([&](double t) { return 2 * theta0(ts, t, xi); }, ts, xi, 1.0);
    EXPECT_NEAR(two, 2 * one, 1e-13 * one);
}

TEST(Theta, IntegralBoundedForPowerLaw) {
    const auto ts = power_theta(0.5);
    const auto r = theta_integral_bound(ts, log_grid(16, 1.6e6, 4), 1.0);
    EXPECT_TRUE(r.bounded());
    EXPECT_LE(r.slope, 0.05);
    EXPECT_LT(r.top_decade_variation, 2);
    EXPECT_GT(r.sup, 0);
}
