#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>

#include "bessel_integral.hpp"
#include "llr_series.hpp"
#include "mmeqd/distributions.hpp"

using namespace mmeqd;

namespace {

double gk_integral(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-11);
}

} // namespace

TEST(PdfH0, ClosedFormAtSmallN) {
    // N = 2: f0 = 1 * Gamma(4) / Gamma(2)^2 * (t-1)^2 / (t+1)^4 = 6 (t-1)^2 / (t+1)^4
    for (double t : {1.0, 1.3, 2.0, 7.5}) {
        EXPECT_NEAR(pdf_h0(t, 2), 6.0 * (t - 1) * (t - 1) / std::pow(t + 1, 4), 1e-14);
    }
    // N = 3: 2 * 120 / 4 * (t-1)^2 t / (t+1)^6
    EXPECT_NEAR(pdf_h0(2.0, 3), 60.0 * 2.0 / 729.0, 1e-14);
}

TEST(PdfH0, VanishesAtBoundaryAndRejectsBadInput) {
    EXPECT_EQ(pdf_h0(1.0, 500), 0.0);
    EXPECT_EQ(log_pdf_h0(1.0, 500), neg_inf);
    EXPECT_EQ(pdf_h0(std::numeric_limits<double>::infinity(), 10), 0.0);
    EXPECT_THROW(pdf_h0(0.99, 10), domain_error);
    EXPECT_THROW(pdf_h0(std::numeric_limits<double>::quiet_NaN(), 10), domain_error);
    EXPECT_THROW(pdf_h0(1.5, 1), domain_error);
}

TEST(PdfH0, FiniteAtLargeN) {
    for (long n : {10000L, 100000L}) {
        for (double t = 1.0005; t < 1.05; t += 0.001) {
            const double v = pdf_h0(t, n);
            EXPECT_TRUE(std::isfinite(v)) << n << " " << t;
            EXPECT_GE(v, 0.0);
        }
    }
}

TEST(H1Density, MatchesBesselIntegralOracle) {
    for (long n : {2L, 5L, 10L}) {
        for (double a : {0.25, 1.0, 4.0}) {
            const H1Density d({n, a}, {2000, 0.0});
            for (double t : {1.1, 1.5, 2.0, 5.0}) {
                const double ref = oracle::bessel_integral_pdf_h1(t, n, a);
                EXPECT_NEAR(d.pdf(t), ref, 1e-6 * ref) << "N=" << n << " snr=" << a << " tau=" << t;
            }
        }
    }
}

TEST(H1Density, ReducesToCentralDensityAsSnrVanishes) {
    for (long n : {50L, 500L}) {
        const DistParams p{n, 1e-12};
        const H1Density d(p, choose_truncation(p));
        double worst = 0.0;
        for (double t = 1.0 + 1e-3; t <= 3.0; t += 1e-3) {
            const double f0 = pdf_h0(t, n);
            if (f0 < 1e-300) continue;
            worst = std::max(worst, std::fabs(d.pdf(t) - f0) / f0);
        }
        EXPECT_LT(worst, 1e-5) << "N=" << n;
    }
}

TEST(H1Density, LlrMatchesPochhammerSeries) {
    for (long n : {10L, 500L, 10000L}) {
        for (double db : {-20.0, -10.0, -5.0}) {
            const double a = db_to_linear(db);
            const H1Density d({n, a}, {20000, 0.0});
            for (double t : {1.01, 1.1, 1.5, 3.0}) {
                const double ref = oracle::llr_pochhammer(t, n, a);
                EXPECT_NEAR(d.llr(t), ref, 1e-9 * std::max(1.0, std::fabs(ref))) << n << " " << db << " " << t;
            }
        }
    }
}

TEST(H1Density, LlrIsLogRatioOfDensities) {
    const H1Density d({500, db_to_linear(-15.0)}, {200, 0.0});
    for (double t : {1.02, 1.2, 1.4}) {
        EXPECT_NEAR(d.llr(t), d.log_pdf(t) - log_pdf_h0(t, 500), 1e-9);
    }
}

TEST(H1Density, LlrAtBoundaryUsesOffset) {
    const H1Density d({500, db_to_linear(-15.0)}, {60, 0.0});
    EXPECT_TRUE(std::isfinite(d.llr(1.0)));
    EXPECT_DOUBLE_EQ(d.llr(1.0), d.llr(1.0 + llr_boundary_offset));
    EXPECT_EQ(d.pdf(1.0), 0.0);
}

TEST(H1Density, InvalidParameters) {
    EXPECT_THROW(H1Density({500, 0.0}, {10, 0.0}), degenerate_parameter_error);
    EXPECT_THROW(H1Density({1, 0.1}, {10, 0.0}), domain_error);
    EXPECT_THROW(H1Density({500, -0.1}, {10, 0.0}), domain_error);
    EXPECT_THROW(H1Density({500, 0.1}, {0, 0.0}), truncation_error);
    EXPECT_THROW(choose_truncation({500, 0.0}), degenerate_parameter_error);
    const H1Density d({500, 0.1}, {10, 0.0});
    EXPECT_THROW(d.pdf(0.5), domain_error);
}

TEST(H1Density, ShiftsMassRightWithSnr) {
    // Mean of tau grows with SNR.
    double prev = 0.0;
    for (double db : {-20.0, -15.0, -10.0, -5.0}) {
        const DistParams p{500, db_to_linear(db)};
        const H1Density d(p, choose_truncation(p));
        const double mean = integrate([&](double t) { return t * d.pdf(t); });
        EXPECT_GT(mean, prev);
        prev = mean;
    }
}

TEST(Truncation, TableSeeds) {
    EXPECT_EQ(TruncationTable::seed_terms(500, db_to_linear(-15.0)), 60);
    EXPECT_EQ(TruncationTable::seed_terms(100000, db_to_linear(0.0)), 200000);
    EXPECT_EQ(TruncationTable::seed_terms(700, db_to_linear(-12.0)), 300);
    EXPECT_EQ(TruncationTable::seed_terms(10, db_to_linear(-40.0)), 10);
}

TEST(Truncation, ChosenTermsNormalize) {
    for (const auto& [n, db] : {std::pair{50L, -20.0}, {500L, -15.0}, {1000L, -5.0}, {10000L, -20.0}, {5000L, 0.0}}) {
        const DistParams p{n, db_to_linear(db)};
        const SeriesTruncation t = choose_truncation(p);
        EXPECT_LT(t.achieved_integral_deviation, normalization_tolerance) << n << " " << db;
        EXPECT_NEAR(normalization_deviation(p, t.terms), t.achieved_integral_deviation, 1e-15);
        EXPECT_GE(t.terms, TruncationTable::seed_terms(n, p.snr));
    }
}

TEST(Truncation, TooFewTermsLeaveMassMissing) {
    const DistParams p{500, db_to_linear(0.0)};
    EXPECT_GT(normalization_deviation(p, 20), 1e-2);
}

TEST(H0Cdf, NormalizationRatioIsOne) {
    for (long n : {2L, 10L, 500L, 10000L}) {
        EXPECT_NEAR(H0Cdf(n).normalization_ratio(), 1.0, 1e-5) << n;
    }
}

TEST(H0Cdf, MatchesDirectQuadratureOfDensity) {
    for (long n : {5L, 50L, 500L}) {
        const H0Cdf cdf(n);
        for (double x : {1.05, 1.2, 1.5, 2.0, 3.0}) {
            if (x > cdf.upper()) continue;
            const double ref = gk_integral([n](double t) { return pdf_h0(t, n); }, 1.0, x);
            EXPECT_NEAR(cdf(x), ref, 1e-8) << n << " " << x;
            EXPECT_NEAR(cdf.survival(x), 1.0 - ref, 1e-8) << n << " " << x;
        }
    }
}

TEST(H0Cdf, MonotoneAndBounded) {
    const H0Cdf cdf(500);
    EXPECT_EQ(cdf(1.0), 0.0);
    EXPECT_EQ(cdf.survival(1.0), 1.0);
    EXPECT_EQ(cdf(std::numeric_limits<double>::infinity()), 1.0);
    double prev = 0.0;
    for (double x = 1.0; x < cdf.upper() + 0.1; x += 0.001) {
        const double v = cdf(x);
        EXPECT_GE(v, prev);
        EXPECT_LE(v, 1.0);
        prev = v;
    }
    EXPECT_NEAR(prev, 1.0, 1e-12);
}

TEST(H0Cdf, SurvivalKeepsSmallTailProbabilities) {
    const H0Cdf cdf(500);
    const double x = 1.45;
    const double ref = gk_integral([](double t) { return pdf_h0(t, 500); }, x, cdf.upper());
    ASSERT_LT(ref, 1e-6);
    EXPECT_NEAR(cdf.survival(x), ref, 1e-6 * ref + 1e-15);
}

TEST(H1Cdf, MonotoneReachesOne) {
    const DistParams p{500, db_to_linear(-10.0)};
    const H1Cdf cdf(H1Density(p, choose_truncation(p)));
    double prev = 0.0;
    for (double x = 1.0; x < cdf.upper() + 0.5; x += 0.003) {
        const double v = cdf(x);
        EXPECT_GE(v, prev - 1e-15);
        prev = v;
    }
    EXPECT_NEAR(prev, 1.0, 1e-5);
}

TEST(H1Cdf, DominatedByCentralCdf) {
    // Signal pushes tau upward, so F1 <= F0 pointwise.
    const DistParams p{500, db_to_linear(-15.0)};
    const H1Cdf f1(H1Density(p, choose_truncation(p)));
    const H0Cdf f0(500);
    for (double x = 1.01; x < 2.0; x += 0.01) EXPECT_LE(f1(x), f0(x) + 1e-6) << x;
}

TEST(ClampProbability, ReportsExcess) {
    double e = 0.0;
    EXPECT_EQ(clamp_probability(1.0000003, &e), 1.0);
    EXPECT_NEAR(e, 3e-7, 1e-15);
    EXPECT_EQ(clamp_probability(-2e-9, &e), 0.0);
    EXPECT_NEAR(e, 2e-9, 1e-20);
    EXPECT_EQ(clamp_probability(0.4, &e), 0.4);
    EXPECT_EQ(e, 0.0);
}
