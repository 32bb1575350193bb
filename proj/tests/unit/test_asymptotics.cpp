#include "dcp/asymptotics.hpp"
#include "dcp/critical_values.hpp"
#include "dcp/rng.hpp"
#include "dcp/stationary.hpp"
#include "support.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace dcp;

namespace {

double uniform(RandomStream& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

double fraction_at_most_zero(const std::vector<double>& v) {
    return static_cast<double>(std::count_if(v.begin(), v.end(), [](double x) { return x <= 0.0; })) /
           static_cast<double>(v.size());
}

std::vector<double> scaled(std::vector<double> v, double factor) {
    for (auto& x : v) x *= factor;
    return v;
}

// O(n m) two-sample KS distance evaluated at every pooled point.
double naive_ks(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    std::vector<double> pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());
    for (double t : pooled) {
        const double fa = std::count_if(a.begin(), a.end(), [t](double x) { return x <= t; }) / double(a.size());
        const double fb = std::count_if(b.begin(), b.end(), [t](double x) { return x <= t; }) / double(b.size());
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

LimitSamplerOptions limit_options(std::int64_t samples, std::uint64_t seed) {
    LimitSamplerOptions o;
    o.samples = samples;
    o.seed = seed;
    return o;
}

}  // namespace

TEST(XiAlpha, ScalarDiffusion) {
    for (double a : {0.1, 0.5, 2.0})
        EXPECT_NEAR(xi_alpha(make_ou_model(), make_vector({0.3}), make_vector({a}))(0, 0), 4.0 / (a * a),
                    1e-6 * 4.0 / (a * a));
}

TEST(XiAlpha, ScaledDiagonalIsDiagonal) {
    const auto m = testkit::scaled_diagonal_model();
    const Vector a = make_vector({0.6, 1.7});
    const Matrix xi = xi_alpha(m, make_vector({0.4, -1.1}), a);
    EXPECT_NEAR(xi(0, 0), 4.0 / 0.36, 1e-6);
    EXPECT_NEAR(xi(1, 1), 4.0 / (1.7 * 1.7), 1e-6);
    EXPECT_NEAR(xi(0, 1), 0.0, 1e-6);
    EXPECT_NEAR(xi(1, 0), 0.0, 1e-6);
}

TEST(XiAlpha, FiniteDifferencesMatchAnalyticDerivatives) {
    const auto m = testkit::triangular_model();
    RandomStream rng(2);
    for (int t = 0; t < 200; ++t) {
        const Vector a = make_vector({uniform(rng, 0.2, 3.0), uniform(rng, -2.0, 2.0), uniform(rng, 0.2, 3.0)});
        const Vector x = make_vector({uniform(rng, -1, 1), uniform(rng, -1, 1)});
        const auto fd = m.covariance_derivatives(x, a, 1e-5);
        const auto exact = testkit::triangular_covariance_derivatives(a);
        for (int l = 0; l < 3; ++l) ASSERT_LE((fd[l] - exact[l]).cwiseAbs().maxCoeff(), 1e-6);
        const Matrix Ainv = m.covariance(x, a).inverse();
        const Matrix xi = xi_alpha(m, x, a);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double ref = (Ainv * exact[i] * Ainv * exact[j]).trace();
                ASSERT_LE(std::abs(xi(i, j) - ref), 1e-6 * std::max(1.0, std::abs(ref)));
            }
        ASSERT_LE((xi - xi.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(GammaAlpha, KnownValues) {
    const auto m = make_ou_model();
    EXPECT_DOUBLE_EQ(gamma_alpha(m, make_vector({0.0}), make_vector({0.8}), make_vector({0.8})), 0.0);
    EXPECT_NEAR(gamma_alpha(m, make_vector({0.0}), make_vector({1.0}), make_vector({2.0})), 3.0 - std::log(4.0), 1e-12);
    EXPECT_NEAR(gamma_alpha(m, make_vector({0.0}), make_vector({1.0}), make_vector({2.0})), 1.61371, 1e-5);
}

TEST(GammaAlpha, PositiveForDistinctRegimes) {
    const auto m = testkit::triangular_model();
    RandomStream rng(3);
    for (int t = 0; t < 10'000; ++t) {
        const Vector a1 = make_vector({uniform(rng, 0.2, 3), uniform(rng, -2, 2), uniform(rng, 0.2, 3)});
        const Vector a2 = make_vector({uniform(rng, 0.2, 3), uniform(rng, -2, 2), uniform(rng, 0.2, 3)});
        const Vector x = make_vector({uniform(rng, -1, 1), uniform(rng, -1, 1)});
        const double g = gamma_alpha(m, x, a1, a2);
        // r - 1 - log r summed over the eigenvalues of A1^{-1} A2
        const Matrix r = m.covariance(x, a1).inverse() * m.covariance(x, a2);
        double ref = 0.0;
        for (auto ev : r.eigenvalues()) ref += ev.real() - 1.0 - std::log(ev.real());
        ASSERT_GT(g, 0.0);
        ASSERT_NEAR(g, ref, 1e-8 * std::max(1.0, ref));
    }
}

TEST(XiBeta, OuMatrix) {
    const auto m = make_ou_model();
    const double a = 0.5, b = 2.5, g = 5.0, x = 4.2;
    const Matrix xi = xi_beta(m, make_vector({x}), make_vector({a}), make_vector({b, g}));
    EXPECT_NEAR(xi(0, 0), (x - g) * (x - g) / (a * a), 1e-12);
    EXPECT_NEAR(xi(0, 1), -b * (x - g) / (a * a), 1e-12);
    EXPECT_NEAR(xi(1, 0), -b * (x - g) / (a * a), 1e-12);
    EXPECT_NEAR(xi(1, 1), b * b / (a * a), 1e-12);
    const Matrix at_mean = xi_beta(m, make_vector({g}), make_vector({a}), make_vector({b, g}));
    EXPECT_NEAR(at_mean(0, 0), 0.0, 1e-14);
    EXPECT_NEAR(at_mean(0, 1), 0.0, 1e-14);
    EXPECT_NEAR(at_mean(1, 1), 25.0, 1e-12);
}

TEST(XiBeta, SymmetricPositiveSemidefinite) {
    RandomStream rng(4);
    const auto ou = make_ou_model();
    const auto hyp = make_hyperbolic_model();
    for (int t = 0; t < 10'000; ++t) {
        const Vector x = make_vector({uniform(rng, -10, 10)});
        const Vector a = make_vector({uniform(rng, 0.05, 3)});
        const double g = uniform(rng, 0.1, 3);
        for (const auto& [m, b] : {std::pair{&ou, make_vector({uniform(rng, 0.1, 3), uniform(rng, -5, 5)})},
                                   std::pair{&hyp, make_vector({uniform(rng, -0.99, 0.99) * g, g})}}) {
            const Matrix xi = xi_beta(*m, x, a, b);
            ASSERT_LE((xi - xi.transpose()).cwiseAbs().maxCoeff(), 1e-12);
            Eigen::SelfAdjointEigenSolver<Matrix> es(xi);
            ASSERT_GE(es.eigenvalues().minCoeff(), -1e-10 * std::max(1.0, es.eigenvalues().maxCoeff()));
        }
    }
}

TEST(GammaBeta, HyperbolicClosedForm) {
    const auto m = make_hyperbolic_model();
    RandomStream rng(5);
    for (int t = 0; t < 1000; ++t) {
        const double x = uniform(rng, -5, 5), a = uniform(rng, 0.1, 2);
        const Vector b1 = make_vector({uniform(rng, -0.5, 0.5), uniform(rng, 0.6, 2)});
        const Vector b2 = make_vector({uniform(rng, -0.5, 0.5), uniform(rng, 0.6, 2)});
        const double d = (b1[0] - b2[0]) - (b1[1] - b2[1]) * x / std::sqrt(1 + x * x);
        const double g = gamma_beta(m, make_vector({x}), make_vector({a}), b1, b2);
        ASSERT_NEAR(g, d * d / (a * a), 1e-10 * std::max(1.0, g));
        ASSERT_GE(g, 0.0);
    }
    EXPECT_DOUBLE_EQ(gamma_beta(m, make_vector({0.3}), make_vector({1.0}), make_vector({0.2, 1.0}), make_vector({0.2, 1.0})),
                     0.0);
}

TEST(JAlpha, ScalarDiffusionExact) {
    const auto m = make_ou_model();
    const SampleMeasure empty;
    EXPECT_NEAR(j_alpha(m, make_vector({0.1}), make_vector({1.0}), empty), 200.0, 1e-6 * 200.0);
    EXPECT_NEAR(j_alpha(m, make_vector({0.1}), make_vector({-1.0}), empty), 200.0, 1e-6 * 200.0);
    EXPECT_NEAR(j_alpha(make_hyperbolic_model(), make_vector({1.0}), make_vector({1.0}), empty), 2.0, 1e-6);
    EXPECT_THROW(j_alpha(m, make_vector({0.1}), make_vector({0.5}), empty), std::invalid_argument);
}

TEST(JAlpha, StateFreeIntegrandAveragesExactly) {
    // the triangular diffusion does not depend on x, so any measure gives the pointwise value
    const auto m = testkit::triangular_model();
    const Vector a = make_vector({0.8, -0.5, 1.2});
    SampleMeasure sample;
    RandomStream rng(6);
    for (int i = 0; i < 1000; ++i) sample.points.push_back(make_vector({rng.normal(), rng.normal()}));
    const Vector e = unit_direction(make_vector({1.0, 0.2, 0.5}), make_vector({0.0, 0.0, 0.0}));
    const double pointwise = 0.5 * e.dot(xi_alpha(m, make_vector({0.0, 0.0}), a) * e);
    EXPECT_NEAR(j_alpha(m, a, e, sample), pointwise, 1e-10);
}

TEST(JBeta, OuKnownValues) {
    const auto m = make_ou_model();
    const ModelParams p{make_vector({0.5}), make_vector({2.5, 5.0})};
    const auto density = stationary_density(m, p);
    EXPECT_NEAR(j_beta(m, p.alpha, p.beta, make_vector({0.0, 1.0}), density), 25.0, 1e-8);
    EXPECT_NEAR(j_beta(m, p.alpha, p.beta, make_vector({0.0, -1.0}), density), 25.0, 1e-8);
    EXPECT_NEAR(j_beta(m, p.alpha, p.beta, make_vector({1.0, 0.0}), density), 1.0 / (2 * 2.5), 1e-8);
}

TEST(JBeta, MonteCarloAgreesWithQuadrature) {
    const Vector e = unit_direction(make_vector({1.0, 2.0}), make_vector({0.0, 0.0}));
    {
        const auto m = make_ou_model();
        const ModelParams p{make_vector({0.5}), make_vector({2.5, 5.0})};
        const double quad = j_beta(m, p.alpha, p.beta, e, stationary_density(m, p));
        const double mc = j_beta(m, p.alpha, p.beta, e, stationary_draws(m, p, 1'000'000, 8));
        EXPECT_NEAR(mc / quad, 1.0, 0.005);
    }
    {
        const auto m = make_hyperbolic_model();
        const ModelParams p{make_vector({0.2}), make_vector({0.25, 1.2})};
        const Vector e1 = make_vector({1.0, 0.0});
        const double quad = j_beta(m, p.alpha, p.beta, e, stationary_density(m, p));
        const double mc = j_beta(m, p.alpha, p.beta, e, stationary_draws(m, p, 1'000'000, 9));
        EXPECT_NEAR(mc / quad, 1.0, 0.005);
        // b is affine in the first parameter with unit slope
        EXPECT_NEAR(j_beta(m, p.alpha, p.beta, e1, stationary_density(m, p)), 1.0 / 0.04, 1e-6);
    }
}

TEST(StationaryDensity, Normalized) {
    for (const auto& [m, p] : {std::pair{make_ou_model(), ModelParams{make_vector({0.5}), make_vector({2.5, 5.0})}},
                               std::pair{make_hyperbolic_model(), ModelParams{make_vector({0.2}), make_vector({0.25, 1.2})}},
                               std::pair{make_hyperbolic_model(), ModelParams{make_vector({1.0}), make_vector({0.0, 1.0})}}}) {
        const auto d = stationary_density(m, p);
        const Matrix one = integrate([](const Vector&) { return Matrix::Constant(1, 1, 1.0); }, d);
        EXPECT_NEAR(one(0, 0), 1.0, 1e-8);
    }
}

TEST(UnitDirection, NormalizedDifference) {
    const Vector e = unit_direction(make_vector({3.0, 4.0}), make_vector({0.0, 0.0}));
    EXPECT_NEAR(e[0], 0.6, 1e-15);
    EXPECT_NEAR(e[1], 0.8, 1e-15);
    EXPECT_THROW(unit_direction(make_vector({1.0}), make_vector({1.0})), std::invalid_argument);
}

TEST(LimitLaw, SymmetricAboutZero) {
    const auto law = sample_limit_argmin(1.0, limit_options(100'000, 11));
    ASSERT_EQ(law.samples.size(), 100'000u);
    const double below = fraction_at_most_zero(law.samples);
    EXPECT_NEAR(below, 0.5, 0.01);
    // sign-flip test: the negated sample has the same law
    const double d = ks_two_sample(law.samples, scaled(law.samples, -1.0));
    EXPECT_GT(ks_p_value(d, law.samples.size(), law.samples.size()), 0.01);
    std::vector<double> abs_values;
    for (double v : law.samples) abs_values.push_back(std::abs(v));
    std::nth_element(abs_values.begin(), abs_values.begin() + 50'000, abs_values.end());
    EXPECT_TRUE(std::isfinite(abs_values[50'000]));
    EXPECT_EQ(law.boundary_flags, 0);
}

TEST(LimitLaw, ScalingIdentityAcrossJ) {
    const auto reference = sample_limit_argmin(1.0, limit_options(10'000, 21)).samples;
    for (double j : {0.5, 4.0}) {
        const auto law = sample_limit_argmin(j, limit_options(10'000, 22 + static_cast<std::uint64_t>(j * 10)));
        const auto rescaled = scaled(law.samples, j);
        const double d = ks_two_sample(rescaled, reference);
        EXPECT_GT(ks_p_value(d, rescaled.size(), reference.size()), 0.01) << "j=" << j;
    }
}

TEST(LimitLaw, ShortHorizonTriggersResampling) {
    LimitSamplerOptions o = limit_options(2000, 31);
    o.horizon = 0.05;
    o.grid_step = 0.05 / 256;
    o.max_doublings = 0;
    const auto clipped = sample_limit_argmin(1.0, o);
    EXPECT_EQ(clipped.resampled, 0);
    EXPECT_GT(clipped.boundary_flags, 0);
    for (double v : clipped.samples) EXPECT_LE(std::abs(v), 0.05 + 1e-12);

    o.max_doublings = 3;
    const auto law = sample_limit_argmin(1.0, o);
    EXPECT_GT(law.resampled, 0);
    EXPECT_LT(law.boundary_flags, clipped.boundary_flags);
    for (double v : law.samples) EXPECT_LE(std::abs(v), 0.4 + 1e-12);
}

TEST(LimitLaw, DeterministicForSeed) {
    auto o = limit_options(500, 41);
    o.threads = 1;
    auto p = o;
    p.threads = 4;
    EXPECT_EQ(sample_limit_argmin(2.0, o).samples, sample_limit_argmin(2.0, p).samples);
}

TEST(KolmogorovSmirnov, IdenticalSamplesGiveZero) {
    const auto law = sample_limit_argmin(1.0, limit_options(1000, 51));
    const auto cmp = compare_to_limit(law.samples, law, 0.15);
    EXPECT_DOUBLE_EQ(cmp.statistic, 0.0);
    EXPECT_TRUE(cmp.accept);
    EXPECT_DOUBLE_EQ(ks_two_sample({1, 2, 3}, {4, 5, 6}), 1.0);
}

TEST(KolmogorovSmirnov, MatchesNaiveDistance) {
    RandomStream rng(52);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> a(30 + t), b(45);
        for (auto& x : a) x = std::round(rng.normal() * 4) / 4;
        for (auto& x : b) x = std::round((rng.normal() + 0.3) * 4) / 4;
        ASSERT_NEAR(ks_two_sample(a, b), naive_ks(a, b), 1e-12);
    }
}

TEST(KolmogorovSmirnov, NullCalibration) {
    RandomStream rng(53);
    int below = 0;
    const int meta = 100;
    for (int r = 0; r < meta; ++r) {
        std::vector<double> a(10'000), b(10'000);
        for (auto& x : a) x = rng.normal();
        for (auto& x : b) x = rng.normal();
        below += ks_p_value(ks_two_sample(a, b), a.size(), b.size()) > 0.01;
    }
    EXPECT_GE(below, 95);
}

TEST(KolmogorovSmirnov, ThresholdDecision) {
    const auto law = sample_limit_argmin(1.0, limit_options(2000, 54));
    const auto shifted = scaled(law.samples, 3.0);
    const auto cmp = compare_to_limit(shifted, law, 0.05);
    EXPECT_GT(cmp.statistic, 0.05);
    EXPECT_FALSE(cmp.accept);
    EXPECT_LT(cmp.p_value, 1e-6);
}
