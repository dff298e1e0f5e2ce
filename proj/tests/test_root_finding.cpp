#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "midspec/companion.hpp"
#include "midspec/factorization.hpp"
#include "midspec/root_finding.hpp"
#include "support/modulus_scan.hpp"

using namespace midspec;

namespace {

const Quasipolynomial kDeltaHat = standard_second_order();
const Quasipolynomial kUnitCircle = Quasipolynomial::polynomial(Polynomial{1.0, 0.0, 1.0});  // z^2 + 1

Quasipolynomial worked_example() { return to_quasipolynomial(mid_coefficients(3, -0.5, 2.5)); }

}  // namespace

TEST(CompanionPair, StandardPair) {
    const auto pair = companion_pair(normalize(mid_coefficients(2, 0.0, 1.0), 0.0));
    RealMatrix A0(2, 2), A1(2, 2);
    A0 << 0, 1, -6, 4;
    A1 << 0, 0, 6, 2;
    EXPECT_EQ(pair.A0, A0);
    EXPECT_EQ(pair.A1, A1);
}

TEST(CompanionPair, FirstOrderDesign) {
    const auto pair = companion_pair(normalize(mid_coefficients(1, 0.0, 1.0), 0.0));
    ASSERT_EQ(pair.order(), 1);
    EXPECT_DOUBLE_EQ(pair.A0(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(pair.A1(0, 0), -1.0);
    // det(z - 1 + e^{-z})
    const complex z{0.3, 0.7};
    EXPECT_LE(std::abs(pair.characteristic(z) - (z - 1.0 + std::exp(-z))), 1e-15);
}

TEST(CompanionPair, DelayFreeReducesToCompanionMatrix) {
    const auto pair = companion_pair(NormalizedSystem{3, {2.0, -1.0, 0.5}, {0.0, 0.0, 0.0}});
    EXPECT_TRUE(pair.A1.isZero());
    EXPECT_DOUBLE_EQ(pair.A0(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(pair.A0(1, 2), 1.0);
    EXPECT_DOUBLE_EQ(pair.A0(2, 0), -2.0);
}

TEST(CompanionPair, DeterminantIdentityAtRandomPoints) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (std::size_t n = 1; n <= 5; ++n) {
        const auto nz = normalize(mid_coefficients(n, 0.3, 1.7), 0.3);
        const auto pair = companion_pair(nz);
        const auto q = to_quasipolynomial(nz);
        for (int i = 0; i < 20; ++i) {
            const complex z{u(rng), 3.0 * u(rng)};
            EXPECT_LE(std::abs(pair.characteristic(z) - q.evaluate(z)), 1e-10 * q.magnitude_scale(z));
        }
    }
}

TEST(CountRoots, Examples) {
    EXPECT_EQ(count_roots(kDeltaHat, {-1, 1, -1, 1}), 4);
    EXPECT_EQ(count_roots(kUnitCircle, {-0.5, 0.5, 0.5, 1.5}), 1);
    EXPECT_EQ(count_roots(kDeltaHat, {0.1, 1, 0, 1}), 0);
}

TEST(CountRoots, NoZerosRightOfOriginByDenseScan) {
    // oracle for the zero count above: |Delta_hat| stays well away from 0 on a fine grid
    double smallest = 1e300;
    for (double x = 0.1; x <= 1.0 + 1e-12; x += 0.005)
        for (double y = 0.0; y <= 1.0 + 1e-12; y += 0.005) smallest = std::min(smallest, std::abs(kDeltaHat({x, y})));
    EXPECT_GT(smallest, 1e-6);
}

TEST(CountRoots, BoundaryRootTriggersInflation) {
    const auto r = count_roots_detailed(kUnitCircle, {-0.5, 0.5, 0.0, 1.0});
    EXPECT_EQ(r.count, 1);
    EXPECT_GE(r.inflations, 1u);
    EXPECT_GT(r.rect.im_max, 1.0);
}

TEST(CountRoots, MultipleRootOnContourIsReported) {
    // a quadruple root on the edge stays below the floor after every inflation
    EXPECT_THROW(count_roots(kDeltaHat, {0.0, 1.0, -1.0, 1.0}), BoundaryRootError);
}

TEST(CountRoots, InvalidRectangleRejected) {
    EXPECT_THROW(count_roots(kDeltaHat, {1, -1, -1, 1}), std::invalid_argument);
}

TEST(CountRoots, MomentGivesSumOfRoots) {
    const auto poly = Quasipolynomial::polynomial(Polynomial{6.0, -5.0, 1.0});  // roots 2, 3
    const auto r = count_roots_detailed(poly, {0, 4, -1, 1});
    EXPECT_EQ(r.count, 2);
    EXPECT_NEAR(r.moment.real(), 5.0, 1e-9);
    EXPECT_NEAR(r.moment.imag(), 0.0, 1e-9);
}

TEST(CountRoots, AdditiveUnderQuadrisection) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0;
    while (checked < 20) {
        const std::size_t n = 1 + checked % 3;
        const double s0 = -1.0 + 1.5 * u(rng);
        const double tau = 0.5 + 2.5 * u(rng);
        const auto q = to_quasipolynomial(mid_coefficients(n, s0, tau));
        const double x0 = s0 - 3.0 + 3.0 * u(rng), y0 = -6.0 + 6.0 * u(rng);
        const Rectangle r{x0, x0 + 1.0 + 3.0 * u(rng), y0, y0 + 1.0 + 6.0 * u(rng)};
        const double xs = r.re_min + (0.3 + 0.4 * u(rng)) * r.width();
        const double ys = r.im_min + (0.3 + 0.4 * u(rng)) * r.height();
        try {
            const long whole = count_roots_detailed(q, r, {.max_inflations = 0}).count;
            long parts = 0;
            for (const Rectangle& c : {Rectangle{r.re_min, xs, r.im_min, ys}, Rectangle{xs, r.re_max, r.im_min, ys},
                                       Rectangle{r.re_min, xs, ys, r.im_max}, Rectangle{xs, r.re_max, ys, r.im_max}})
                parts += count_roots_detailed(q, c, {.max_inflations = 0}).count;
            EXPECT_EQ(whole, parts);
            ++checked;
        } catch (const BoundaryRootError&) {
            // a contour through a root; draw again
        }
    }
}

TEST(CountRoots, MatchesModulusScanOracle) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0, nonzero = 0;
    while (checked < 20) {
        const std::size_t n = 1 + checked % 3;
        const double s0 = -1.0 + 1.5 * u(rng);
        const double tau = 0.5 + 2.5 * u(rng);
        auto sys = mid_coefficients(n, s0, tau);
        if (checked % 4 == 3) sys.a[0] += 0.05;  // a generic, non-designed system
        const auto q = to_quasipolynomial(sys);
        const double x0 = s0 - 0.1 - 2.0 * u(rng), y0 = -1.0 - 3.0 * u(rng);
        const Rectangle r{x0, x0 + 0.5 + 3.0 * u(rng), y0, y0 + 1.0 + 8.0 * u(rng)};
        if (!testsupport::boundary_clear(q, r, 2e-2)) continue;
        const long oracle = testsupport::modulus_scan_count(q, r, 0.01);
        EXPECT_EQ(count_roots(q, r), oracle) << "n=" << n << " s0=" << s0 << " tau=" << tau;
        nonzero += oracle > 0 ? 1 : 0;
        ++checked;
    }
    EXPECT_GE(nonzero, 10);  // the draw must actually exercise rectangles holding roots
}

TEST(FindRoots, QuadrupleRootOfStandardDesign) {
    const auto roots = find_roots(kDeltaHat, {-1, 1, -1, 1});
    ASSERT_EQ(roots.size(), 1u);
    EXPECT_EQ(roots[0].multiplicity, 4u);
    EXPECT_LE(std::abs(roots[0].location), 1e-6);
}

TEST(FindRoots, SimpleConjugatePair) {
    const auto roots = find_roots(kUnitCircle, {-2, 2, -2, 2});
    ASSERT_EQ(roots.size(), 2u);
    EXPECT_LE(std::abs(roots[0].location - complex(0, -1)), 1e-12);
    EXPECT_LE(std::abs(roots[1].location - complex(0, 1)), 1e-12);
    EXPECT_EQ(roots[0].multiplicity, 1u);
    EXPECT_EQ(roots[1].multiplicity, 1u);
    EXPECT_TRUE(roots[0].converged);
}

TEST(FindRoots, WorkedExampleSpectrum) {
    const auto q = worked_example();
    const Rectangle region{-5, 1, -30, 30};
    const auto roots = find_roots(q, region);
    ASSERT_FALSE(roots.empty());
    EXPECT_LE(std::abs(roots.front().location - complex(-0.5, 0.0)), 1e-4);
    EXPECT_EQ(roots.front().multiplicity, 6u);
    for (std::size_t i = 1; i < roots.size(); ++i) {
        EXPECT_LT(roots[i].location.real(), -0.5);
        EXPECT_EQ(roots[i].multiplicity, 1u);
        EXPECT_TRUE(roots[i].converged);
    }
    EXPECT_TRUE(conjugate_symmetric(roots, region, 1e-8));
    EXPECT_EQ(multiplicity_at(q, roots.front().location.real(), 1e-6), 6u);
}

TEST(FindRoots, ThreadedSearchGivesSameRoots) {
    const auto q = worked_example();
    const Rectangle region{-5, 1, -30, 30};
    RootFinderOptions opt;
    opt.threads = 4;
    const auto a = find_roots(q, region);
    const auto b = find_roots(q, region, 1e-10, opt);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].multiplicity, b[i].multiplicity);
        EXPECT_LE(std::abs(a[i].location - b[i].location), 1e-9);
    }
}

TEST(FindRoots, MultiplicitiesMatchDesignAcrossOrders) {
    for (std::size_t n = 1; n <= 4; ++n) {
        const double s0 = -0.3, tau = 1.2;
        const auto q = to_quasipolynomial(mid_coefficients(n, s0, tau));
        const auto roots = find_roots(q, {s0 - 1.0, s0 + 1.0, -1.0, 1.0});
        ASSERT_EQ(roots.size(), 1u) << n;
        EXPECT_EQ(roots[0].multiplicity, 2 * n);
        EXPECT_LE(std::abs(roots[0].location - s0), 1e-3);
    }
}

TEST(SpectralAbscissa, Examples) {
    EXPECT_NEAR(spectral_abscissa(kDeltaHat, {-1, 1, -8, 8}), 0.0, 1e-6);
    EXPECT_NEAR(spectral_abscissa(worked_example(), {-5, 1, -30, 30}), -0.5, 1e-4);
    const auto poly = Quasipolynomial::polynomial(Polynomial{-6.0, 1.0, 1.0});  // (z-2)(z+3)
    EXPECT_NEAR(spectral_abscissa(poly, {-4, 3, -1, 1}), 2.0, 1e-12);
    EXPECT_THROW(spectral_abscissa(poly, {3.5, 4, -1, 1}), NumericalError);
}

TEST(VerticalStrip, CountStabilizesPastAprioriBound) {
    // normalized second-order design: no roots with Re >= 0 and |Im| >= 2 pi
    const Quasipolynomial& q = kDeltaHat;
    long previous = -1;
    for (double k : {7.0, 10.0, 20.0, 40.0}) {
        const long c = count_roots(q, {0.05, 1.05, -k, k});
        if (previous >= 0) {
            EXPECT_EQ(c, previous);
        }
        previous = c;
    }
    EXPECT_EQ(previous, 0);
    // a strip further left does contain roots, finitely many, and stabilizes too
    const long c1 = count_roots(q, {-2.0, -1.0, -40.0, 40.0});
    const long c2 = count_roots(q, {-2.0, -1.0, -80.0, 80.0});
    EXPECT_GT(c1, 0);
    EXPECT_EQ(c2, c1);
}
