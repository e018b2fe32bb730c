#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hypolab/moduli.hpp"
#include "hypolab/numerics.hpp"

using namespace hypolab;

namespace {

constexpr double e = std::numbers::e;

std::vector<AuxiliaryFunction> catalog() {
    return {AuxiliaryFunction::log_reciprocal(1.0),
            AuxiliaryFunction::log_reciprocal(0.5),
            AuxiliaryFunction::log_reciprocal(2.0),
            AuxiliaryFunction::power_law(0.5),
            AuxiliaryFunction::power_law(2.0 / 3.0),
            AuxiliaryFunction::power_law(1.0, AuxRole::Rho),
            AuxiliaryFunction::iterated_log(1),
            AuxiliaryFunction::iterated_log(2)};
}

}  // namespace

TEST(Eval, LogReciprocalAtExpMinusTwo) {
    EXPECT_NEAR(eval(AuxiliaryFunction::log_reciprocal(1.0), std::exp(-2.0)), 0.5, 1e-15);
}

TEST(Eval, PowerLawIdentity) { EXPECT_DOUBLE_EQ(eval(AuxiliaryFunction::power_law(1.0), 0.3), 0.3); }

TEST(Eval, PowerLawTwoThirds) { EXPECT_NEAR(eval(AuxiliaryFunction::power_law(2.0 / 3.0), 0.125), 0.25, 1e-15); }

TEST(Eval, IteratedLogDepthTwo) {
    // 1 / log(log(1/r)) at r = exp(-e^2) is 1/2.
    const auto f = AuxiliaryFunction::iterated_log(2);
    EXPECT_NEAR(eval(f, std::exp(-e * e)), 0.5, 1e-14);
    EXPECT_NEAR(eval(f, f.r0), 1.0, 1e-12);
}

TEST(Eval, OutsideDomainThrows) {
    const auto f = AuxiliaryFunction::log_reciprocal(1.0);
    EXPECT_THROW(eval(f, 0.0), DomainError);
    EXPECT_THROW(eval(f, -1.0), DomainError);
    EXPECT_THROW(eval(f, 0.6), DomainError);
    EXPECT_THROW(deriv(f, 0.6, 1), DomainError);
}

TEST(Factories, RejectBadParameters) {
    EXPECT_THROW(AuxiliaryFunction::log_reciprocal(0.0), DomainError);
    EXPECT_THROW(AuxiliaryFunction::power_law(1.5), DomainError);
    EXPECT_THROW(AuxiliaryFunction::power_law(0.0), DomainError);
    EXPECT_THROW(AuxiliaryFunction::iterated_log(0), DomainError);
}

TEST(Deriv, PowerLawHalf) { EXPECT_NEAR(deriv(AuxiliaryFunction::power_law(0.5), 0.25, 1), 1.0, 1e-14); }

TEST(Deriv, LinearHasZeroSecondDerivative) {
    const auto f = AuxiliaryFunction::power_law(1.0);
    for (double r : {0.01, 0.3, 0.9}) EXPECT_EQ(deriv(f, r, 2), 0.0);
}

TEST(Deriv, LogReciprocalAtExpMinusOne) {
    EXPECT_NEAR(deriv(AuxiliaryFunction::log_reciprocal(1.0), std::exp(-1.0), 1), e, 1e-13);
}

TEST(Deriv, RejectsBadOrder) {
    const auto f = AuxiliaryFunction::power_law(0.5);
    EXPECT_THROW(deriv(f, 0.1, 0), DomainError);
    EXPECT_THROW(deriv(f, 0.1, 4), DomainError);
}

TEST(Deriv, FiniteDifferencesAgreeWithClosedForms) {
    for (const auto& f : catalog()) {
        for (double r : log_grid_n(1e-6 * f.r0, 0.5 * f.r0, 12)) {
            for (int k = 1; k <= 3; ++k) {
                const double exact = deriv(f, r, k), fd = deriv_fd(f, r, k);
                if (exact == 0) {
                    EXPECT_NEAR(fd, 0.0, 1e-6 * std::abs(deriv(f, r, 1)) / std::pow(r, k - 1)) << f.label();
                    continue;
                }
                EXPECT_NEAR(fd / exact, 1.0, 1e-5) << f.label() << " r=" << r << " k=" << k;
            }
        }
    }
}

TEST(Inverse, Examples) {
    EXPECT_NEAR(inverse(AuxiliaryFunction::log_reciprocal(1.0), 0.5), std::exp(-2.0), 1e-16);
    EXPECT_NEAR(inverse(AuxiliaryFunction::power_law(1.0), 0.4), 0.4, 1e-16);
    EXPECT_NEAR(inverse(AuxiliaryFunction::power_law(2.0 / 3.0), 0.25), 0.125, 1e-16);
}

TEST(Inverse, BisectionMeetsResidualTolerance) {
    for (const auto& f : catalog())
        for (double t : log_grid_n(0.3 * range_end(f), range_end(f), 9)) {
            const double r = inverse_bisect(f, t);
            EXPECT_LE(std::abs(eval(f, r) - t), 1e-12 * t) << f.label();
            EXPECT_NEAR(r / inverse(f, t), 1.0, 1e-9) << f.label();
        }
}

TEST(Inverse, RoundTripOnLogGrid) {
    for (const auto& f : catalog())
        for (double r : log_grid_n(1e-8 * f.r0, f.r0, 40))
            EXPECT_NEAR(inverse(f, eval(f, r)) / r, 1.0, 1e-9) << f.label() << " r=" << r;
}

TEST(Inverse, OutsideRangeThrows) {
    const auto f = AuxiliaryFunction::power_law(0.5);
    EXPECT_THROW(inverse(f, 1.5), RangeError);
    EXPECT_THROW(inverse(f, 0.0), RangeError);
    EXPECT_THROW(inverse_bisect(f, -0.1), RangeError);
}

TEST(Admissibility, PowerLawTwoThirdsPasses) {
    const auto f = AuxiliaryFunction::power_law(2.0 / 3.0);
    EXPECT_TRUE(admissibility_check(f, default_admissibility_grid(f)).pass());
}

TEST(Admissibility, IdentityAsRhoPasses) {
    const auto f = AuxiliaryFunction::power_law(1.0, AuxRole::Rho);
    EXPECT_TRUE(admissibility_check(f, default_admissibility_grid(f)).pass());
}

TEST(Admissibility, IdentityAsEtaFails) {
    const auto f = AuxiliaryFunction::power_law(1.0, AuxRole::Eta);
    const auto rep = admissibility_check(f, default_admissibility_grid(f));
    EXPECT_FALSE(rep.pass());
    EXPECT_FALSE(rep.concave);
    EXPECT_FALSE(rep.modulus_vanishes);
    ASSERT_FALSE(rep.violations.empty());
    EXPECT_GT(rep.violations.front().r, 0.0);
}

TEST(Admissibility, CatalogEtasPass) {
    for (const auto& f : {AuxiliaryFunction::log_reciprocal(1.0), AuxiliaryFunction::power_law(0.5),
                          AuxiliaryFunction::iterated_log(1), AuxiliaryFunction::iterated_log(2)}) {
        const auto rep = admissibility_check(f, default_admissibility_grid(f));
        EXPECT_TRUE(rep.pass()) << f.label();
        for (double c : rep.fitted_constants) EXPECT_TRUE(std::isfinite(c)) << f.label();
    }
}

TEST(Admissibility, FittedConstantsOfPowerLaw) {
    // |f^(k)| r^(k-1) / f' is constant for r^beta: C2 = 1 - beta, C3 = (1 - beta)(2 - beta).
    const auto f = AuxiliaryFunction::power_law(0.5);
    const auto rep = admissibility_check(f, default_admissibility_grid(f));
    EXPECT_NEAR(rep.fitted_constants[0], 1.0, 1e-12);
    EXPECT_NEAR(rep.fitted_constants[1], 0.5, 1e-12);
    EXPECT_NEAR(rep.fitted_constants[2], 0.75, 1e-12);
}

TEST(Admissibility, ShortGridIsFlagged) {
    const auto f = AuxiliaryFunction::power_law(0.5);
    const auto rep = admissibility_check(f, log_grid_n(1e-4, 0.5, 10));
    EXPECT_FALSE(rep.grid_ok);
    EXPECT_FALSE(rep.pass());
}

TEST(Modulus, IncreasingAndVanishingForAdmissibleEtas) {
    for (const auto& f : {AuxiliaryFunction::log_reciprocal(1.0), AuxiliaryFunction::power_law(0.5),
                          AuxiliaryFunction::iterated_log(2)}) {
        auto grid = default_admissibility_grid(f);
        std::sort(grid.begin(), grid.end());
        for (std::size_t i = 1; i < grid.size(); ++i) EXPECT_GT(modulus(f, grid[i]), modulus(f, grid[i - 1]));
        EXPECT_LT(modulus(f, grid[0]), modulus(f, grid[1]));
    }
}

TEST(LocalRates, ClosedFormsOfTheLocalCondition) {
    // -d/dt 1/eta^-1(t) from a centered difference of the explicit inverse.
    const auto loglip = AuxiliaryFunction::log_reciprocal(1.0);
    const auto half = AuxiliaryFunction::power_law(0.5);
    for (double t : {0.05, 0.2, 0.5}) {
        EXPECT_NEAR(neg_dt_reciprocal_inverse(loglip, t) / (std::exp(1 / t) / (t * t)), 1.0, 1e-12);
        EXPECT_NEAR(neg_dt_reciprocal_inverse(half, t) / (2 * std::pow(t, -3.0)), 1.0, 1e-12);
        const double h = 1e-5 * t;
        const double fd = -(1 / std::pow(t + h, 2) - 1 / std::pow(t - h, 2)) / (2 * h);
        EXPECT_NEAR(neg_dt_reciprocal_inverse(half, t) / fd, 1.0, 1e-8);
    }
    // rho = r^beta, eta = r^(1 - alpha): beta / (1 - alpha) t^(-(1 - alpha + beta) / (1 - alpha)).
    const auto rho = AuxiliaryFunction::power_law(0.25, AuxRole::Rho);
    for (double t : {0.1, 0.3})
        EXPECT_NEAR(neg_dt_reciprocal_rho_of_inverse(rho, half, t) / (0.5 * std::pow(t, -1.5)), 1.0, 1e-12);
}

TEST(DomainEnd, LogReciprocalIsConcaveUpToTheEnd) {
    for (double a : {0.5, 1.0, 2.0}) {
        const auto f = AuxiliaryFunction::log_reciprocal(a);
        const double end = admissible_domain_end(f);
        EXPECT_LE(end, f.r0);
        EXPECT_LT(deriv(f, end, 2), 0.0) << a;
    }
}
