#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "midspec/quasipolynomial.hpp"
#include "midspec/retarded_system.hpp"

using namespace midspec;

namespace {

// K-th derivative of Delta by the Leibniz rule on P(s) + exp(-tau s) A(s),
// written out independently of Quasipolynomial::derivative.
complex leibniz_derivative(const RetardedSystem& sys, complex s, std::size_t k) {
    auto poly_derivative_at = [](std::vector<double> c, std::size_t order, complex x) {
        for (std::size_t r = 0; r < order; ++r) {
            if (c.empty()) break;
            for (std::size_t j = 0; j + 1 < c.size(); ++j) c[j] = c[j + 1] * static_cast<double>(j + 1);
            c.pop_back();
        }
        complex acc = 0.0;
        for (std::size_t j = c.size(); j-- > 0;) acc = acc * x + c[j];
        return acc;
    };
    std::vector<double> monic = sys.a;
    monic.push_back(1.0);
    complex out = poly_derivative_at(monic, k, s);
    double binom = 1.0;
    for (std::size_t i = 0; i <= k; ++i) {
        out += binom * std::pow(-sys.tau, static_cast<double>(k - i)) * std::exp(-sys.tau * s) *
               poly_derivative_at(sys.alpha, i, s);
        binom = binom * static_cast<double>(k - i) / static_cast<double>(i + 1);
    }
    return out;
}

double rel(double x, double ref) { return std::abs(x - ref) / std::max(1.0, std::abs(ref)); }

const Quasipolynomial kDeltaHat({{0.0, Polynomial{6.0, -4.0, 1.0}}, {1.0, Polynomial{-6.0, -2.0}}});

}  // namespace

TEST(Polynomial, TrimsTrailingZerosAndKeepsDegree) {
    Polynomial p{1.0, 2.0, 0.0, 0.0};
    EXPECT_EQ(p.degree(), 1u);
    EXPECT_EQ(p.coefficients().size(), 2u);
    EXPECT_TRUE(Polynomial({0.0, 0.0}).is_zero());
    EXPECT_DOUBLE_EQ(p.evaluate(3.0), 7.0);
}

TEST(Quasipolynomial, RejectsRepeatedDelays) {
    EXPECT_THROW(Quasipolynomial({{1.0, Polynomial{1.0}}, {1.0, Polynomial{2.0}}}), std::invalid_argument);
}

TEST(Quasipolynomial, DegreeFollowsTermCountAndPolynomialDegrees) {
    EXPECT_EQ(kDeltaHat.degree(), 4u);
    const Quasipolynomial three({{0.0, Polynomial{1.0, 1.0}}, {0.5, Polynomial{1.0}}, {2.0, Polynomial{0.0, 0.0, 3.0}}});
    EXPECT_EQ(three.degree(), 2u + 1u + 0u + 2u);
}

TEST(ToQuasipolynomial, StandardSecondOrderSystem) {
    const RetardedSystem sys{2, {6.0, -4.0}, {-6.0, -2.0}, 1.0};
    const auto q = to_quasipolynomial(sys);
    EXPECT_EQ(q, kDeltaHat);
    EXPECT_EQ(q.degree(), 4u);
}

TEST(ToQuasipolynomial, ZeroDelayedPartIsDropped) {
    const auto q = to_quasipolynomial(RetardedSystem{1, {0.0}, {0.0}, 1.0});
    ASSERT_EQ(q.terms().size(), 1u);
    EXPECT_EQ(q.terms()[0].poly, (Polynomial{0.0, 1.0}));
    EXPECT_EQ(q.degree(), 1u);
}

TEST(ToQuasipolynomial, DegreeUsesActualDelayedDegree) {
    const auto q = to_quasipolynomial(RetardedSystem{3, {1.0, 2.0, 3.0}, {1.0, 0.0, 0.0}, 1.0});
    EXPECT_EQ(q.degree(), 3u + 1u);
    EXPECT_EQ(to_quasipolynomial(mid_coefficients(3, -0.5, 2.5)).degree(), 6u);
}

TEST(ToQuasipolynomial, InvalidSystemsRejected) {
    EXPECT_THROW(to_quasipolynomial(RetardedSystem{2, {1.0}, {1.0, 2.0}, 1.0}), std::invalid_argument);
    EXPECT_THROW(to_quasipolynomial(RetardedSystem{1, {1.0}, {1.0}, 0.0}), std::invalid_argument);
}

TEST(Evaluate, DeltaHatValues) {
    EXPECT_EQ(kDeltaHat.evaluate(0.0), complex(0.0, 0.0));
    EXPECT_NEAR(kDeltaHat.evaluate(1.0).real(), 3.0 - 8.0 * std::exp(-1.0), 1e-15);
    EXPECT_NEAR(kDeltaHat.evaluate(1.0).real(), 0.056964, 1e-6);
    const auto poly = Quasipolynomial::polynomial(Polynomial{1.0, -2.0, 1.0});
    EXPECT_EQ(poly.evaluate({3.0, 1.0}), complex(3.0, 1.0) * complex(3.0, 1.0) - 2.0 * complex(3.0, 1.0) + 1.0);
}

TEST(Evaluate, ConjugateSymmetryForRealCoefficients) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        const RetardedSystem sys{3, {u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)}, 0.5 + std::abs(u(rng))};
        const auto q = to_quasipolynomial(sys);
        const complex s{u(rng), 4.0 * u(rng)};
        const complex lhs = q.evaluate(std::conj(s));
        const complex rhs = std::conj(q.evaluate(s));
        EXPECT_LE(std::abs(lhs - rhs), 1e-13 * q.magnitude_scale(s));
    }
}

TEST(Derivative, DeltaHatDerivativesAtZero) {
    const double b1 = -4.0, b0 = 6.0, beta1 = -2.0, beta0 = -6.0;
    EXPECT_DOUBLE_EQ(b0 + beta0, 0.0);
    EXPECT_EQ(kDeltaHat.derivative(1).evaluate(0.0), complex(b1 - beta0 + beta1, 0.0));
    EXPECT_EQ(kDeltaHat.derivative(2).evaluate(0.0), complex(0.0, 0.0));
    EXPECT_EQ(kDeltaHat.derivative(3).evaluate(0.0), complex(-beta0 + 3.0 * beta1, 0.0));
    EXPECT_EQ(kDeltaHat.derivative(4).evaluate(0.0), complex(2.0, 0.0));
    EXPECT_EQ(kDeltaHat.derivative(3).terms().size(), 1u);  // polynomial part vanished
    EXPECT_EQ(kDeltaHat.derivative(1).terms().size(), 2u);
}

TEST(Derivative, MatchesLeibnizRuleOnRandomSystems) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        const RetardedSystem sys{3, {u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)}, 1.0 + std::abs(u(rng))};
        const auto q = to_quasipolynomial(sys);
        const complex s{u(rng), u(rng)};
        for (std::size_t k = 0; k <= 7; ++k) {
            const complex ref = leibniz_derivative(sys, s, k);
            EXPECT_LE(std::abs(q.derivative(k).evaluate(s) - ref), 1e-11 * std::max(1.0, std::abs(ref)));
        }
    }
}

TEST(MidCoefficients, SecondOrderStandard) {
    const auto sys = mid_coefficients(2, 0.0, 1.0);
    EXPECT_EQ(sys.a, (std::vector<double>{6.0, -4.0}));
    EXPECT_EQ(sys.alpha, (std::vector<double>{-6.0, -2.0}));
}

TEST(MidCoefficients, ThirdOrderWorkedExample) {
    const auto sys = mid_coefficients(3, -0.5, 2.5);
    EXPECT_LE(rel(sys.a[0], -1.735), 1e-12);
    EXPECT_LE(rel(sys.a[1], 2.91), 1e-12);
    EXPECT_LE(rel(sys.a[2], -2.1), 1e-12);
    EXPECT_NEAR(sys.alpha[0], 1.736219, 5e-7);
    EXPECT_NEAR(sys.alpha[1], 1.443984, 5e-7);
    EXPECT_NEAR(sys.alpha[2], 0.3438058, 5e-7);
}

TEST(MidCoefficients, FirstOrder) {
    const auto sys = mid_coefficients(1, 0.0, 1.0);
    EXPECT_DOUBLE_EQ(sys.a[0], -1.0);
    EXPECT_DOUBLE_EQ(sys.alpha[0], 1.0);
    const auto q = to_quasipolynomial(sys);
    EXPECT_EQ(q.evaluate(0.0), complex(0.0));
    EXPECT_EQ(q.derivative(1).evaluate(0.0), complex(0.0));
    EXPECT_EQ(q.derivative(2).evaluate(0.0), complex(1.0));
}

TEST(MidCoefficients, RejectsNonpositiveDelay) {
    EXPECT_THROW(mid_coefficients(2, 0.0, 0.0), std::invalid_argument);
    EXPECT_THROW(mid_coefficients(2, 0.0, -1.0), std::invalid_argument);
    EXPECT_THROW(mid_coefficients_order2(0.0, 0.0), std::invalid_argument);
    EXPECT_THROW(dominant_root_from_trace(2, -4.0, 0.0), std::invalid_argument);
}

TEST(MidCoefficients, OrderTwoClosedForm) {
    const auto a = mid_coefficients_order2(0.0, 2.0);
    EXPECT_DOUBLE_EQ(a.a[1], -2.0);
    EXPECT_DOUBLE_EQ(a.a[0], 1.5);
    EXPECT_DOUBLE_EQ(a.alpha[1], -1.0);
    EXPECT_DOUBLE_EQ(a.alpha[0], -1.5);
    const auto b = mid_coefficients_order2(-1.0, 1.0);
    EXPECT_DOUBLE_EQ(b.a[1], -2.0);
    EXPECT_DOUBLE_EQ(b.a[0], 3.0);
    EXPECT_NEAR(b.alpha[1], -2.0 * std::exp(-1.0), 1e-15);
    EXPECT_NEAR(b.alpha[0], -8.0 * std::exp(-1.0), 1e-15);
}

TEST(MidCoefficients, GeneralFormulaAgreesWithOrderTwoClosedForm) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> s(-2.0, 1.0), t(0.2, 4.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double s0 = s(rng), tau = t(rng);
        const auto g = mid_coefficients(2, s0, tau);
        const auto c = mid_coefficients_order2(s0, tau);
        for (std::size_t k = 0; k < 2; ++k) {
            // relative to the largest contribution, since a_0 can cancel to near zero
            const double scale_a = std::max({std::abs(c.a[k]), 6.0 / (tau * tau), s0 * s0});
            EXPECT_LE(std::abs(g.a[k] - c.a[k]), 1e-14 * 4 * scale_a) << s0 << " " << tau;
            EXPECT_LE(std::abs(g.alpha[k] - c.alpha[k]), 1e-14 * 4 * std::abs(c.alpha[k]) + 1e-300);
        }
    }
}

TEST(MidCoefficients, DerivativesVanishByLeibnizOracle) {
    for (std::size_t n = 1; n <= 6; ++n) {
        for (double s0 : {-1.0, 0.0, 0.5}) {
            for (double tau : {0.5, 1.0, 2.5}) {
                const auto sys = mid_coefficients(n, s0, tau);
                const auto q = to_quasipolynomial(sys);
                const auto res = derivative_residuals(q, s0, 2 * n);
                for (std::size_t k = 0; k < 2 * n; ++k) {
                    EXPECT_LE(std::abs(leibniz_derivative(sys, s0, k)), 1e-10 * res[k].scale)
                        << "n=" << n << " s0=" << s0 << " tau=" << tau << " k=" << k;
                }
                EXPECT_GT(std::abs(leibniz_derivative(sys, s0, 2 * n)), 1e-6 * res[2 * n].scale);
            }
        }
    }
}

TEST(MultiplicityAt, Examples) {
    EXPECT_EQ(multiplicity_at(kDeltaHat, 0.0, 1e-12), 4u);
    EXPECT_EQ(multiplicity_at(Quasipolynomial::polynomial(Polynomial{-1.0, 3.0, -3.0, 1.0}), 1.0, 1e-12), 3u);
    const Quasipolynomial q({{0.0, Polynomial{-1.0, 1.0}}, {1.0, Polynomial{1.0}}});  // z - 1 + e^{-z}
    EXPECT_EQ(multiplicity_at(q, 0.0, 1e-12), 2u);
    EXPECT_EQ(multiplicity_at(q, 1.0, 1e-12), 0u);
    EXPECT_THROW(multiplicity_at(q, 0.0, 0.0), std::invalid_argument);
}

TEST(MultiplicityAt, MaximalForDesignedSystems) {
    for (std::size_t n = 1; n <= 6; ++n) {
        for (double s0 : {-1.0, 0.0, 0.5}) {
            for (double tau : {0.5, 1.0, 2.5}) {
                const auto q = to_quasipolynomial(mid_coefficients(n, s0, tau));
                EXPECT_EQ(multiplicity_at(q, s0, 1e-9), 2 * n) << n << " " << s0 << " " << tau;
            }
        }
    }
}

TEST(MultiplicityAt, NeverExceedsDegree) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        // mostly-generic systems plus designed ones probed with a loose tolerance
        const std::size_t n = 1 + trial % 4;
        auto sys = mid_coefficients(n, u(rng), 0.5 + std::abs(u(rng)));
        if (trial % 2 == 0) sys.alpha[0] += 1e-3 * u(rng);
        const auto q = to_quasipolynomial(sys);
        EXPECT_LE(multiplicity_at(q, complex(u(rng) * 1e-3, 0.0), 1e-2), q.degree());
        EXPECT_LE(multiplicity_at(q, complex(0.0, 0.0), 1.0), q.degree());
    }
}

TEST(Normalize, SecondOrderDesignIsUniversal) {
    for (double s0 : {-1.3, 0.0, 0.7}) {
        for (double tau : {0.3, 1.0, 3.0}) {
            const auto nz = normalize(mid_coefficients(2, s0, tau), s0);
            EXPECT_NEAR(nz.b[1], -4.0, 1e-12);
            EXPECT_NEAR(nz.b[0], 6.0, 1e-12);
            EXPECT_NEAR(nz.beta[1], -2.0, 1e-12);
            EXPECT_NEAR(nz.beta[0], -6.0, 1e-12);
        }
    }
}

TEST(Normalize, UnitScalingIsIdentity) {
    const RetardedSystem sys{3, {1.5, -2.0, 0.25}, {0.5, 3.0, -1.0}, 1.0};
    const auto nz = normalize(sys, 0.0);
    EXPECT_EQ(nz.b, sys.a);
    EXPECT_EQ(nz.beta, sys.alpha);
}

TEST(Normalize, WorkedExampleMatchesUnitDesign) {
    const auto nz = normalize(mid_coefficients(3, -0.5, 2.5), -0.5);
    const auto unit = mid_coefficients(3, 0.0, 1.0);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_LE(rel(nz.b[k], unit.a[k]), 1e-12);
        EXPECT_LE(rel(nz.beta[k], unit.alpha[k]), 1e-12);
    }
}

TEST(Normalize, UniversalityAcrossGrid) {
    for (std::size_t n = 1; n <= 6; ++n) {
        const auto unit = mid_coefficients(n, 0.0, 1.0);
        for (double s0 : {-1.0, 0.0, 0.5}) {
            for (double tau : {0.5, 1.0, 2.5}) {
                const auto nz = normalize(mid_coefficients(n, s0, tau), s0);
                for (std::size_t k = 0; k < n; ++k) {
                    EXPECT_LE(std::abs(nz.b[k] - unit.a[k]), 1e-10 * std::abs(unit.a[k])) << n << " " << k;
                    EXPECT_LE(std::abs(nz.beta[k] - unit.alpha[k]), 1e-10 * std::abs(unit.alpha[k]));
                }
            }
        }
    }
}

TEST(Normalize, EvaluationIdentity) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + trial % 4;
        RetardedSystem sys{n, std::vector<double>(n), std::vector<double>(n), 0.5 + 2.0 * std::abs(u(rng))};
        for (std::size_t k = 0; k < n; ++k) {
            sys.a[k] = 3.0 * u(rng);
            sys.alpha[k] = 3.0 * u(rng);
        }
        const double s0 = u(rng);
        const auto original = to_quasipolynomial(sys);
        const auto normalized = to_quasipolynomial(normalize(sys, s0));
        const complex z{2.0 * u(rng), 5.0 * u(rng)};
        const complex lhs = normalized.evaluate(z);
        const complex s = s0 + z / sys.tau;
        const complex rhs = std::pow(sys.tau, static_cast<double>(n)) * original.evaluate(s);
        const double scale = std::pow(sys.tau, static_cast<double>(n)) * original.magnitude_scale(s);
        EXPECT_LE(std::abs(lhs - rhs), 1e-12 * std::max(scale, normalized.magnitude_scale(z)));
    }
}

TEST(Normalize, RoundTripOnRandomSystems) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + trial % 5;
        RetardedSystem sys{n, std::vector<double>(n), std::vector<double>(n), 0.5 + 2.0 * std::abs(u(rng))};
        for (std::size_t k = 0; k < n; ++k) {
            sys.a[k] = 2.0 * u(rng);
            sys.alpha[k] = 2.0 * u(rng);
        }
        const double s0 = u(rng);
        const auto back = denormalize(normalize(sys, s0), s0, sys.tau);
        ASSERT_EQ(back.n, n);
        double ref = 0.0;
        for (std::size_t k = 0; k < n; ++k) ref = std::max({ref, std::abs(sys.a[k]), std::abs(sys.alpha[k])});
        for (std::size_t k = 0; k < n; ++k) {
            EXPECT_LE(std::abs(back.a[k] - sys.a[k]), 1e-12 * std::max(1.0, ref));
            EXPECT_LE(std::abs(back.alpha[k] - sys.alpha[k]), 1e-12 * std::max(1.0, ref));
        }
    }
}

TEST(DominantRootFromTrace, Examples) {
    EXPECT_NEAR(dominant_root_from_trace(3, -2.1, 2.5), -0.5, 1e-15);
    EXPECT_DOUBLE_EQ(dominant_root_from_trace(2, -4.0, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(dominant_root_from_trace(1, -1.0, 1.0), 0.0);
}

TEST(DominantRootFromTrace, RecoversDesignedRoot) {
    for (std::size_t n = 1; n <= 6; ++n) {
        for (double s0 : {-1.0, 0.0, 0.5}) {
            for (double tau : {0.5, 1.0, 2.5}) {
                const auto sys = mid_coefficients(n, s0, tau);
                const double recovered = dominant_root_from_trace(n, sys.a[n - 1], tau);
                EXPECT_LE(std::abs(recovered - s0), 1e-12 * std::max(1.0, std::abs(sys.a[n - 1]) / n));
            }
        }
    }
}
