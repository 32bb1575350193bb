#include "dcp/errors.hpp"
#include "dcp/model.hpp"
#include "dcp/path_io.hpp"
#include "dcp/rng.hpp"
#include "dcp/stationary.hpp"
#include "support.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace dcp;

namespace {

double sample_mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_var(const std::vector<double>& v) {
    const double m = sample_mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

std::vector<double> increments(const PathSample& p, std::int64_t lo, std::int64_t hi) {
    std::vector<double> out;
    for (std::int64_t i = lo; i <= hi; ++i) out.push_back(p.increment(i)[0]);
    return out;
}

}  // namespace

TEST(OuModel, DriftVanishesAtMean) {
    const auto m = make_ou_model();
    EXPECT_DOUBLE_EQ(m.drift(make_vector({2.0}), make_vector({1.0, 2.0}))[0], 0.0);
}

TEST(OuModel, DiffusionIsAlpha) {
    const auto m = make_ou_model();
    for (double x : {-3.0, 0.0, 7.5}) EXPECT_DOUBLE_EQ(m.diffusion(make_vector({x}), make_vector({0.75}))(0, 0), 0.75);
}

TEST(OuModel, DriftArithmetic) {
    const auto m = make_ou_model();
    EXPECT_NEAR(m.drift(make_vector({5.0}), make_vector({2.5, 5.1778}))[0], 0.4445, 1e-12);
}

TEST(OuModel, AnalyticJacobianMatchesCentralDifferences) {
    auto m = make_ou_model();
    auto fd = m;
    fd.drift_jacobian = nullptr;
    for (double x : {-1.0, 0.3, 4.0}) {
        const Vector beta = make_vector({1.7, -0.4});
        EXPECT_LE((m.drift_gradient(make_vector({x}), beta) - fd.drift_gradient(make_vector({x}), beta)).cwiseAbs().maxCoeff(),
                  1e-6);
    }
}

TEST(HyperbolicModel, DriftAtOrigin) {
    const auto m = make_hyperbolic_model();
    EXPECT_DOUBLE_EQ(m.drift(make_vector({0.0}), make_vector({0.25, 1.2}))[0], 0.25);
}

TEST(HyperbolicModel, DriftTendsToMinusGammaAtInfinity) {
    const auto m = make_hyperbolic_model();
    EXPECT_NEAR(m.drift(make_vector({1e9}), make_vector({0.0, 1.0}))[0], -1.0, 1e-12);
}

TEST(HyperbolicModel, DriftArithmetic) {
    const auto m = make_hyperbolic_model();
    EXPECT_NEAR(m.drift(make_vector({1.0}), make_vector({1.0, 3.0}))[0], 1.0 - 3.0 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(m.drift(make_vector({1.0}), make_vector({1.0, 3.0}))[0], -1.12132, 1e-5);
}

TEST(HyperbolicModel, FeasibilityRequiresGammaAboveAbsBeta) {
    const auto m = make_hyperbolic_model();
    EXPECT_TRUE(m.beta_admissible(make_vector({0.25, 1.2})));
    EXPECT_FALSE(m.beta_admissible(make_vector({1.5, 1.2})));
    EXPECT_FALSE(m.beta_admissible(make_vector({-1.2, 1.2})));
}

TEST(HyperbolicModel, AnalyticJacobianMatchesCentralDifferences) {
    auto m = make_hyperbolic_model();
    auto fd = m;
    fd.drift_jacobian = nullptr;
    for (double x : {-2.0, 0.1, 3.0}) {
        const Vector beta = make_vector({0.3, 1.4});
        EXPECT_LE((m.drift_gradient(make_vector({x}), beta) - fd.drift_gradient(make_vector({x}), beta)).cwiseAbs().maxCoeff(),
                  1e-6);
    }
}

TEST(DiffusionModel, CovariancePositiveDefiniteOnGrid) {
    std::vector<Vector> states;
    for (double x = -10.0; x <= 10.0; x += 0.5) states.push_back(make_vector({x}));
    std::vector<Vector> alphas;
    for (double a : {1e-3, 0.1, 1.0, 50.0}) alphas.push_back(make_vector({a}));
    EXPECT_TRUE(covariance_positive_definite(make_ou_model(), states, alphas));
    EXPECT_TRUE(covariance_positive_definite(make_hyperbolic_model(), states, alphas));

    const auto tri = testkit::triangular_model();
    std::vector<Vector> states2;
    for (double x = -3.0; x <= 3.0; x += 1.0) states2.push_back(make_vector({x, -x}));
    EXPECT_TRUE(covariance_positive_definite(tri, states2, {make_vector({0.05, -5.0, 0.05}), make_vector({5.0, 5.0, 5.0})}));
    EXPECT_FALSE(covariance_positive_definite(make_ou_model(), states, {make_vector({0.0})}));
}

TEST(DiffusionModel, EvaluationIsRepeatable) {
    const auto m = make_hyperbolic_model();
    const Vector x = make_vector({0.37});
    const Vector beta = make_vector({0.2, 1.1});
    const Vector before = beta;
    const double first = m.drift(x, beta)[0];
    for (int i = 0; i < 10; ++i) EXPECT_EQ(m.drift(x, beta)[0], first);
    EXPECT_EQ(beta, before);
}

TEST(ChangeSpec, RejectsDegenerateInputs) {
    const auto m = make_ou_model();
    const Vector shared = make_vector({1.0, 2.0});
    EXPECT_THROW(ChangeSpec::create(m, 0.0, ParameterBlock::Alpha, make_vector({0.2}), make_vector({0.1}), shared),
                 std::invalid_argument);
    EXPECT_THROW(ChangeSpec::create(m, 1.0, ParameterBlock::Alpha, make_vector({0.2}), make_vector({0.1}), shared),
                 std::invalid_argument);
    EXPECT_THROW(ChangeSpec::create(m, 0.5, ParameterBlock::Alpha, make_vector({0.1}), make_vector({0.1}), shared),
                 std::invalid_argument);
    // on the bound is not strictly inside
    EXPECT_THROW(ChangeSpec::create(m, 0.5, ParameterBlock::Alpha, make_vector({50.0}), make_vector({0.1}), shared),
                 std::invalid_argument);
    const auto hyp = make_hyperbolic_model();
    EXPECT_THROW(ChangeSpec::create(hyp, 0.5, ParameterBlock::Beta, make_vector({2.0, 1.0}), make_vector({0.0, 1.0}),
                                    make_vector({0.2})),
                 std::invalid_argument);
}

TEST(ChangeSpec, MagnitudeIsEuclidean) {
    const auto m = make_ou_model();
    const auto spec = ChangeSpec::create(m, 0.5, ParameterBlock::Beta, make_vector({2.0, 5.0}), make_vector({5.0, 1.0}),
                                         make_vector({0.5}));
    EXPECT_DOUBLE_EQ(spec.magnitude(), 5.0);
    EXPECT_EQ(spec.params_before().beta, make_vector({2.0, 5.0}));
    EXPECT_EQ(spec.params_after().alpha, make_vector({0.5}));
}

TEST(PathSample, RejectsNonFiniteOrMisSizedStates) {
    EXPECT_THROW(PathSample(2, 0.1, 1, {0.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(PathSample(2, 0.1, 1, {0.0, NAN, 1.0}), std::invalid_argument);
    EXPECT_THROW(PathSample(2, 0.0, 1, {0.0, 1.0, 2.0}), std::invalid_argument);
    const PathSample p(2, 0.1, 1, {0.0, 1.0, 3.0});
    EXPECT_DOUBLE_EQ(p.horizon(), 0.2);
    EXPECT_DOUBLE_EQ(p.increment(2)[0], 2.0);
}

TEST(Simulation, ZeroDiffusionFollowsEulerRecursion) {
    const auto m = make_ou_model();
    const SimulationGrid grid{200, 0.01, 10};
    const PathSample p =
        simulate_path(m, ModelParams{make_vector({0.0}), make_vector({1.0, 0.0})}, make_vector({1.0}), grid, 3, {false});
    double x = 1.0;
    const double factor = std::pow(1.0 - grid.h / grid.substeps, grid.substeps);
    for (std::int64_t i = 0; i <= grid.n; ++i) {
        EXPECT_NEAR(p.scalar(i), x, 1e-12);
        x *= factor;
    }
}

TEST(Simulation, TableOneScalePathIsValid) {
    const auto m = make_ou_model();
    const auto spec = ChangeSpec::create(m, 0.5, ParameterBlock::Alpha, make_vector({0.1079}), make_vector({0.1}),
                                         make_vector({1.0, 2.0}));
    const PathSample p = simulate_path(m, spec, make_vector({2.0}), {1'000'000, 1e-4, 1}, 11);
    EXPECT_EQ(p.n(), 1'000'000);
    EXPECT_EQ(p.raw().size(), 1'000'001u);
    EXPECT_EQ(p.meta().model_id, "ou");
    EXPECT_EQ(p.meta().rng, std::string(kRngName));
}

TEST(Simulation, IncrementVarianceMatchesQuadraticVariationForAnySubstepCount) {
    const auto m = make_ou_model();
    const double a1 = 0.1079, h = 1e-4;
    const auto spec =
        ChangeSpec::create(m, 0.5, ParameterBlock::Alpha, make_vector({a1}), make_vector({0.1}), make_vector({1.0, 2.0}));
    for (int substeps : {1, 10}) {
        const PathSample p = simulate_path(m, spec, make_vector({2.0}), {100'000, h, substeps}, 17);
        const double v = sample_var(increments(p, 1, p.n() / 2));
        EXPECT_NEAR(v / (a1 * a1 * h), 1.0, 0.05) << "substeps " << substeps;
    }
}

TEST(Simulation, SwitchIndexIsFirstFineStepAtOrAfterChange) {
    EXPECT_EQ(change_fine_index(0.5, 100, 10), 500);
    EXPECT_EQ(change_fine_index(0.29, 100, 1), 29);
    EXPECT_EQ(change_fine_index(0.333, 10, 1), 4);
}

TEST(Simulation, PathIsContinuousAcrossTheChange) {
    const auto m = make_ou_model();
    const auto spec =
        ChangeSpec::create(m, 0.5, ParameterBlock::Alpha, make_vector({0.5}), make_vector({2.0}), make_vector({1.0, 0.0}));
    const PathSample with_change = simulate_path(m, spec, make_vector({0.0}), {1000, 0.01, 1}, 5);
    const PathSample before = simulate_path(m, spec.params_before(), make_vector({0.0}), {1000, 0.01, 1}, 5);
    // identical up to and including the change index; afterwards the same noise drives a larger diffusion
    for (std::int64_t i = 0; i <= 500; ++i) EXPECT_EQ(with_change.scalar(i), before.scalar(i));
    const double post = std::abs(with_change.increment(501)[0]);
    EXPECT_GT(post, 0.0);
    EXPECT_NEAR(with_change.increment(501)[0],
                0.01 * (-(with_change.scalar(500))) + 2.0 * (before.increment(501)[0] + 0.01 * before.scalar(500)) / 0.5,
                1e-12);
}

TEST(Simulation, SeedDeterminism) {
    const auto m = make_hyperbolic_model();
    const ModelParams p{make_vector({1.0}), make_vector({0.0, 1.0})};
    const auto a = simulate_path(m, p, make_vector({2.0}), {5000, 0.01, 10}, 99);
    const auto b = simulate_path(m, p, make_vector({2.0}), {5000, 0.01, 10}, 99);
    const auto c = simulate_path(m, p, make_vector({2.0}), {5000, 0.01, 10}, 100);
    EXPECT_EQ(a.raw(), b.raw());
    EXPECT_NE(a.raw(), c.raw());
}

TEST(Simulation, DivergenceIsReported) {
    const auto m = make_ou_model();
    // a negative rate far outside the bounds makes Euler explode
    const ModelParams p{make_vector({1.0}), make_vector({-1e3, 0.0})};
    EXPECT_THROW(simulate_path(m, p, make_vector({1.0}), {10'000, 0.1, 1}, 1, SimulationOptions{false}), SimulationDiverged);
}

TEST(Simulation, RejectsBadGrids) {
    const auto m = make_ou_model();
    const ModelParams p{make_vector({1.0}), make_vector({1.0, 0.0})};
    EXPECT_THROW(simulate_path(m, p, make_vector({0.0}), {1, 0.1, 1}, 1), std::invalid_argument);
    EXPECT_THROW(simulate_path(m, p, make_vector({0.0}), {10, -0.1, 1}, 1), std::invalid_argument);
    EXPECT_THROW(simulate_path(m, p, make_vector({0.0}), {10, 0.1, 0}, 1), std::invalid_argument);
}

TEST(Simulation, LagOneAutocovarianceMatchesOuLaw) {
    const auto m = make_ou_model();
    const double alpha = 1.0, beta = 2.0, h = 0.05;
    const ModelParams p{make_vector({alpha}), make_vector({beta, 0.0})};
    const auto x0 = stationary_sample(m, p, 4);
    const auto path = simulate_path(m, p, x0, {100'000, h, 10}, 8);
    std::vector<double> xs(path.raw().begin(), path.raw().end());
    const double mean = sample_mean(xs);
    double cov = 0.0;
    for (std::size_t i = 1; i < xs.size(); ++i) cov += (xs[i] - mean) * (xs[i - 1] - mean);
    cov /= static_cast<double>(xs.size() - 1);
    const double var = alpha * alpha / (2 * beta);
    const double expected = var * std::exp(-beta * h);
    // effective sample size of an AR(1) with coefficient rho = e^{-beta h}
    const double rho = std::exp(-beta * h);
    const double sd = var * std::sqrt((1 + rho * rho) / (1 - rho * rho) / static_cast<double>(xs.size()) * 2.0);
    EXPECT_NEAR(cov, expected, 3.0 * sd);
}

TEST(RandomStream, DeriveSeedSeparatesStreams) {
    EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
    EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
    RandomStream a(derive_seed(5, 0)), b(derive_seed(5, 1));
    int equal = 0;
    for (int i = 0; i < 100; ++i) equal += a.normal() == b.normal();
    EXPECT_EQ(equal, 0);
}

TEST(RandomStream, StandardNormalMoments) {
    RandomStream rng(123);
    std::vector<double> v(200'000);
    for (auto& x : v) x = rng.normal();
    EXPECT_NEAR(sample_mean(v), 0.0, 0.01);
    EXPECT_NEAR(sample_var(v), 1.0, 0.01);
}

TEST(StationarySampler, OuMean) {
    const auto m = make_ou_model();
    const ModelParams p{make_vector({0.5}), make_vector({2.5, 5.0})};
    const StationarySampler s(m, p);
    RandomStream rng(77);
    std::vector<double> v(100'000);
    for (auto& x : v) x = s.draw(rng)[0];
    EXPECT_NEAR(sample_mean(v), 5.0, 0.01);
    EXPECT_NEAR(sample_var(v), 0.05, 0.005);
}

TEST(StationarySampler, HyperbolicSymmetricMean) {
    const auto m = make_hyperbolic_model();
    const StationarySampler s(m, {make_vector({1.0}), make_vector({0.0, 1.0})});
    RandomStream rng(78);
    std::vector<double> v(100'000);
    for (auto& x : v) x = s.draw(rng)[0];
    EXPECT_NEAR(sample_mean(v), 0.0, 0.02);
}

TEST(StationarySampler, HyperbolicMatchesDensityMoments) {
    const double alpha = 0.5, beta = 0.3, gamma = 1.0;
    const HyperbolicDensity pi(alpha, beta, gamma);
    const double mean = pi.expectation([](double x) { return x; });
    const StationarySampler s(make_hyperbolic_model(), {make_vector({alpha}), make_vector({beta, gamma})});
    RandomStream rng(79);
    std::vector<double> v(100'000);
    for (auto& x : v) x = s.draw(rng)[0];
    EXPECT_NEAR(sample_mean(v), mean, 4.0 * std::sqrt(sample_var(v) / v.size()));
}

TEST(StationarySampler, UnsupportedModelThrows) {
    const auto tri = testkit::triangular_model();
    EXPECT_THROW(StationarySampler(tri, {make_vector({1.0, 0.0, 1.0}), make_vector({1.0, 1.0})}), NotImplemented);
}

TEST(HyperbolicDensity, NormalizesToOne) {
    for (auto [a, b, g] : {std::tuple{1.0, 0.0, 1.0}, std::tuple{0.2, 0.25, 1.2}, std::tuple{2.0, -0.9, 1.0}}) {
        const HyperbolicDensity pi(a, b, g);
        using Q = boost::math::quadrature::gauss_kronrod<double, 61>;
        const double total = Q::integrate([&](double x) { return pi(x); }, pi.lower(), pi.upper(), 30, 1e-13);
        EXPECT_NEAR(total, 1.0, 1e-8);
    }
}

TEST(HyperbolicDensity, GammaDerivativeIdentity) {
    for (auto [a, b, g] : {std::tuple{1.0, 0.0, 1.0}, std::tuple{0.2, 0.25, 1.2}, std::tuple{1.0, 0.5, 2.0},
                           std::tuple{2.0, -0.9, 1.0}}) {
        const HyperbolicDensity pi(a, b, g);
        const double v = pi.expectation([](double x) { return -x / std::sqrt(1 + x * x); });
        EXPECT_NEAR(v, -b / g, 1e-4);
        EXPECT_NEAR(pi.expectation([](double) { return 1.0; }), 1.0, 1e-10);
    }
}

TEST(HyperbolicDensity, NonNegativeAndRejectsNonIntegrable) {
    const HyperbolicDensity pi(0.3, 0.2, 0.5);
    for (double x = -50.0; x <= 50.0; x += 0.25) EXPECT_GE(pi(x), 0.0);
    EXPECT_THROW(HyperbolicDensity(1.0, 1.0, 1.0), NonIntegrableDensity);
    EXPECT_THROW(hyperbolic_invariant_density(0.0, 1.0, -2.0, 1.0), NonIntegrableDensity);
    EXPECT_NEAR(hyperbolic_invariant_density(0.3, 0.3, 0.2, 0.5), pi(0.3), 1e-12);
}

TEST(PathIo, RoundTripIsExact) {
    const auto m = make_ou_model();
    const auto p = simulate_path(m, {make_vector({0.3}), make_vector({1.0, 2.0})}, make_vector({2.0}), {100, 0.01, 10}, 42);
    std::stringstream ss;
    write_path(ss, p);
    const PathSample q = read_path(ss);
    EXPECT_EQ(q.n(), p.n());
    EXPECT_EQ(q.h(), p.h());
    EXPECT_EQ(q.raw(), p.raw());
    EXPECT_EQ(q.meta().seed, 42u);
    EXPECT_EQ(q.meta().model_id, "ou");
}

TEST(PathIo, MalformedInputThrows) {
    std::stringstream ss("3 0.1 1 ou 1\n0 0.0\n1 0.1\n");
    EXPECT_THROW(read_path(ss), ConfigError);
    std::stringstream bad("x y z\n");
    EXPECT_THROW(read_path(bad), ConfigError);
}
