#include <gtest/gtest.h>

#include <cmath>

#include "hypolab/coefficients.hpp"

using namespace hypolab;

TEST(CoefficientValue, Examples) {
    const auto c = CoefficientSpec::log_power(2, 0.5, 0);
    EXPECT_NEAR(coefficient_value(c, std::exp(-1.0)), 2 + 0.5 * std::sin(1.0), 1e-14);
    EXPECT_NEAR(coefficient_value(c, std::exp(-1.0)), 2.42074, 1e-5);
    for (double t : {1e-9, 0.3, 1.0}) EXPECT_EQ(coefficient_value(CoefficientSpec::constant(2), t), 2);
    EXPECT_THROW(coefficient_value(c, 0.0), DomainError);
    EXPECT_THROW(coefficient_value(c, -1.0), DomainError);
}

TEST(CoefficientValue, SpatialFactorMultiplies) {
    auto c = CoefficientSpec::constant(2);
    c.spatial = SpatialProfile{SpatialFamily::Smooth, 1.0, 0.25};
    EXPECT_NEAR(coefficient_value(c, 0.5, 0.0), 2 * 1.25, 1e-15);
    EXPECT_NEAR(coefficient_value(c, 0.5), 2, 1e-15);
}

TEST(CoefficientValue, HeldConstantBelowFloor) {
    auto c = CoefficientSpec::log_power(2, 0.5, 0.5);
    c.t_floor = 1e-4;
    EXPECT_EQ(time_value(c, 1e-7), time_value(c, 1e-4));
    EXPECT_EQ(time_derivative(c, 1e-7), 0.0);
}

TEST(CoefficientValue, ClosedFormDerivativesMatchFiniteDifferences) {
    for (const auto& c : {CoefficientSpec::log_power(2, 0.5, 0.0), CoefficientSpec::log_power(2, 0.5, 1.5),
                          CoefficientSpec::holder(2, 0.5, 0.5)}) {
        for (double t : {0.01, 0.2, 0.7}) {
            // The Hoelder profile carries frequencies up to 2^18, so the step must resolve them.
            const double h = 1e-9;
            auto f = [&](double s) { return time_value(c, s); };
            auto g = [&](double s) { return time_derivative(c, s); };
            const double d1 = time_derivative(c, t), d2 = time_derivative(c, t, 2);
            EXPECT_NEAR(central_derivative(f, t, h), d1, 1e-6 * (1 + std::abs(d1)));
            EXPECT_NEAR(central_derivative(g, t, h), d2, 1e-5 * (1 + std::abs(d2)));
        }
    }
    EXPECT_THROW(time_derivative(CoefficientSpec::constant(1), 0.5, 3), DomainError);
}

TEST(CoefficientSpec, Validation) {
    EXPECT_NO_THROW(CoefficientSpec::constant(-1).validate());
    EXPECT_THROW(CoefficientSpec::log_power(2, 1.0, 0).validate(), DomainError);
    EXPECT_THROW(CoefficientSpec::log_power(0, 0, 0).validate(), DomainError);
    EXPECT_THROW(CoefficientSpec::log_power(2, 0.5, -1).validate(), DomainError);
    EXPECT_THROW(CoefficientSpec::holder(2, 0.5, 1.5).validate(), DomainError);
}

TEST(Oscillation, Classes) {
    EXPECT_EQ(oscillation_class(0), OscillationClass::VerySlow);
    EXPECT_EQ(oscillation_class(0.5), OscillationClass::Slow);
    EXPECT_EQ(oscillation_class(1), OscillationClass::Fast);
    EXPECT_EQ(oscillation_class(1.5), OscillationClass::VeryFast);
    EXPECT_THROW(oscillation_class(-0.1), DomainError);
}

TEST(Oscillation, DerivativeConstantsFinite) {
    // The weight t / (log 1/t)^gamma is only meaningful where log(1/t) >= 1.
    const auto grid = log_grid_n(1e-6, std::exp(-1.0), 4000);
    for (double g : {0.0, 0.5, 1.0, 1.5}) {
        const auto c = CoefficientSpec::log_power(2, 0.5, g);
        const double c1 = oscillation_constant(c, grid, 1), c2 = oscillation_constant(c, grid, 2);
        EXPECT_LE(c1, 0.5 * (1 + g) * (1 + 1e-12));
        EXPECT_GT(c1, 0.5 * (1 + g) * 0.99);
        EXPECT_TRUE(std::isfinite(c2));
        EXPECT_LE(c2, 0.5 * 2 * (1 + g) * (1 + g));
    }
}

TEST(Mollifier, UnitMassAndEven) {
    const auto& tab = MollifierTable::get(256);
    double mass = 0, first = 0;
    for (std::size_t i = 0; i < tab.x.size(); ++i) {
        mass += tab.psi[i] * tab.weight;
        first += tab.x[i] * tab.psi[i] * tab.weight;
    }
    EXPECT_NEAR(mass, 1.0, 1e-12);
    EXPECT_NEAR(first, 0.0, 1e-15);
    EXPECT_NEAR(mollifier_kernel(0.3), mollifier_kernel(-0.3), 1e-15);
    EXPECT_EQ(mollifier_kernel(1.0), 0.0);
    EXPECT_THROW(MollifierTable::get(32), DomainError);
}

TEST(Mollifier, ConstantsArePreserved) {
    const auto c = CoefficientSpec::constant(2);
    for (double eps : {1e-1, 1e-3}) EXPECT_EQ(mollify(c, {}, eps, 0.4), 2.0);
    const auto flat = [](double) { return 2.0; };
    EXPECT_NEAR(mollify_fn(flat, 0.01, 0.4), 2.0, 1e-10);
    EXPECT_NEAR(mollify_fn(flat, 0.01, 0.4, {}, 1), 0.0, 1e-10);
}

TEST(Mollifier, LinearMomentVanishes) {
    const auto line = [](double s) { return s; };
    for (double t : {0.2, 0.5}) {
        EXPECT_NEAR(mollify_fn(line, 0.01, t), t, 1e-8);
        EXPECT_NEAR(mollify_fn(line, 0.01, t, {}, 1), 1.0, 1e-8);
        EXPECT_NEAR(mollify_fn(line, 0.01, t, {}, 2), 0.0, 1e-6);
    }
}

TEST(Mollifier, DerivativesOfSmoothFunction) {
    // (sin * psi_eps)' = sin' * psi_eps, and for small eps both are close to cos.
    const auto f = [](double s) { return std::sin(s); };
    EXPECT_NEAR(mollify_fn(f, 1e-3, 0.7, {}, 1), std::cos(0.7), 1e-6);
    EXPECT_NEAR(mollify_fn(f, 1e-3, 0.7, {}, 2), -std::sin(0.7), 1e-5);
}

TEST(Mollifier, ConvergesPointwise) {
    const auto c = CoefficientSpec::log_power(2, 0.5, 0.5);
    double prev = INFINITY;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        const double err = std::abs(mollify(c, {}, eps, 0.3) - time_value(c, 0.3));
        EXPECT_LT(err, prev);
        prev = err;
    }
}

TEST(Mollifier, SupNormDoesNotGrow) {
    const auto c = CoefficientSpec::holder(2, 0.5, 0.5);
    const auto grid = log_grid_n(1e-3, 1.0, 300);
    double sup_a = 0, sup_ae = 0;
    for (double t : log_grid_n(1e-6, 1.0, 20000)) sup_a = std::max(sup_a, std::abs(time_value(c, t)));
    for (double t : grid) sup_ae = std::max(sup_ae, std::abs(mollify(c, {}, 0.01, t)));
    EXPECT_LE(sup_ae, sup_a * (1 + 1e-9));
}

TEST(Mollifier, LogLipschitzRateInHyperbolicZone) {
    // sin(log 1/t) has no limit at 0, so the rate holds from t = N eta(eps) on, not from 2 eps.
    const auto c = CoefficientSpec::log_power(2, 0.5, 0);
    const auto eta = AuxiliaryFunction::log_reciprocal(1);
    double prev = INFINITY;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        double sup = 0;
        for (double t : log_grid_n(2 * eval(eta, eps), 1.0, 400))
            sup = std::max(sup, std::abs(mollify(c, {}, eps, t) - time_value(c, t)));
        const double ratio = sup / (eps * std::log(1 / eps));
        EXPECT_TRUE(std::isfinite(ratio));
        EXPECT_LE(ratio, prev);
        prev = ratio;
    }
}

TEST(Mollifier, RejectsBadArguments) {
    const auto c = CoefficientSpec::log_power(2, 0.5, 0);
    EXPECT_THROW(mollify(c, {}, 0.0, 0.5), DomainError);
    EXPECT_THROW(mollify(c, {}, 0.1, 0.5, std::nullopt, 3), DomainError);
    EXPECT_THROW(mollify(c, {32, 1.0}, 0.1, 0.5), DomainError);
}

TEST(MollificationRates, HolderExponents) {
    const auto r = fit_mollification_rates(CoefficientSpec::holder(2, 0.5, 0.5), log_grid(1e-4, 1e-1, 4),
                                           log_grid_n(0.01, 0.99, 400));
    EXPECT_NEAR(r.error_exponent, 0.5, 0.1);
    EXPECT_NEAR(r.derivative_exponent, -0.5, 0.1);
}

namespace {

RegBoundsReport reg_report(const CoefficientSpec& c, const AuxiliaryFunction& eta) {
    const auto zp = resolve_zone(eta, {});
    return verify_reg_bounds(c, eta, AuxiliaryFunction::power_law(1.0, AuxRole::Rho), zp,
                             log_grid(std::max(zp.M, 16.0), 1e5, 4), log_grid_n(1e-3, 1.0, 64));
}

}  // namespace

TEST(RegBounds, ConstantHasZeroDifferences) {
    const auto rep = reg_report(CoefficientSpec::constant(2), AuxiliaryFunction::log_reciprocal(1));
    for (RegClause c : {RegClause::II, RegClause::III, RegClause::IV, RegClause::V, RegClause::VI})
        EXPECT_EQ(rep.clause(c).max_ratio, 0.0) << to_string(c);
    EXPECT_TRUE(rep.pass());
    EXPECT_NE(rep.modulus_note.find("LogReciprocal"), std::string::npos);
}

TEST(RegBounds, LogLipschitzOscillationIsBounded) {
    const auto rep = reg_report(CoefficientSpec::log_power(2, 0.5, 0), AuxiliaryFunction::log_reciprocal(1));
    for (const auto& c : rep.clauses) {
        EXPECT_TRUE(c.verified) << to_string(c.clause) << " growth " << c.top_decade_growth;
        EXPECT_TRUE(std::isfinite(c.max_ratio));
    }
}

TEST(RegBounds, HolderGlobalClauseIsStable) {
    const auto rep = reg_report(CoefficientSpec::holder(2, 0.5, 0.5), AuxiliaryFunction::power_law(0.5));
    EXPECT_TRUE(rep.clause(RegClause::II).verified) << rep.clause(RegClause::II).top_decade_growth;
    EXPECT_TRUE(rep.clause(RegClause::IV).verified) << rep.clause(RegClause::IV).top_decade_growth;
}
