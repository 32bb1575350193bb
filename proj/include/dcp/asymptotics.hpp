#pragma once

#include "dcp/model.hpp"

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

namespace dcp {

/// [tr(A^{-1} dA_l1 A^{-1} dA_l2)], p x p, with dA by central differences.
Matrix xi_alpha(const DiffusionModel& model, const Vector& x, const Vector& alpha);

/// tr(A1^{-1} A2 - I) - log det(A1^{-1} A2); zero iff A1 = A2.
double gamma_alpha(const DiffusionModel& model, const Vector& x, const Vector& alpha1, const Vector& alpha2);

/// db^T A^{-1} db, q x q.
Matrix xi_beta(const DiffusionModel& model, const Vector& x, const Vector& alpha, const Vector& beta);

/// tr(A^{-1} (b(x, beta1) - b(x, beta2))^{(x)2}).
double gamma_beta(const DiffusionModel& model, const Vector& x, const Vector& alpha, const Vector& beta1,
                  const Vector& beta2);

/// Equal-weight empirical measure.
struct SampleMeasure {
    std::vector<Vector> points;
};

/// Density on [lo, hi] for one-dimensional states, integrated by adaptive quadrature.
struct DensityMeasure {
    std::function<double(double)> density;
    double lo = 0.0;
    double hi = 0.0;
};

using Measure = std::variant<SampleMeasure, DensityMeasure>;

/// Independent draws from the invariant law (built-in models).
SampleMeasure stationary_draws(const DiffusionModel& model, const ModelParams& params, std::int64_t count,
                               std::uint64_t seed);

/// Invariant density of a built-in model. Throws NotImplemented otherwise.
DensityMeasure stationary_density(const DiffusionModel& model, const ModelParams& params);

/// Entry-wise integral of f against the measure.
Matrix integrate(const std::function<Matrix(const Vector&)>& f, const Measure& measure);

/// (a - b) / |a - b| in the Euclidean norm.
Vector unit_direction(const Vector& a, const Vector& b);

/// (1/2) e^T (int Xi^alpha(x, alpha0) dmu) e. Exact (no integration) when the
/// diffusion is scaled-diagonal, since Xi^alpha is then free of x.
double j_alpha(const DiffusionModel& model, const Vector& alpha0, const Vector& e_alpha, const Measure& measure);

/// e^T (int Xi^beta(x, alpha, beta0) dmu) e.
double j_beta(const DiffusionModel& model, const Vector& alpha, const Vector& beta0, const Vector& e_beta,
              const Measure& measure);

struct LimitSamplerOptions {
    double horizon = 0.0;     // 0: 40 / j
    double grid_step = 0.0;   // 0: horizon / 2^14
    std::int64_t samples = 100'000;
    std::uint64_t seed = 1;
    int max_doublings = 3;
    int threads = 0;          // 0: hardware concurrency; does not affect the result
};

struct LimitLaw {
    double j_value = 1.0;
    double scale = 1.0;  // factor applied to tau_hat - tau* before comparison (n theta^2 or T theta^2)
    std::vector<double> samples;
    std::int64_t resampled = 0;       // draws that needed a longer horizon
    std::int64_t boundary_flags = 0;  // draws still on the boundary after the last doubling
};

/// Draws of argmin_v {-2 sqrt(j) W(v) + j |v|} for a two-sided Wiener process W,
/// approximated by random walks on a grid of the given step.
LimitLaw sample_limit_argmin(double j, const LimitSamplerOptions& options = {});

/// sup |F_a - F_b| of the two empirical distribution functions.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Asymptotic p-value of a two-sample KS distance.
double ks_p_value(double distance, std::size_t n1, std::size_t n2);

struct KsComparison {
    double statistic = 0.0;
    double p_value = 1.0;
    double threshold = 0.0;
    bool accept = false;  // statistic <= threshold
};

KsComparison compare_to_limit(const std::vector<double>& empirical, const LimitLaw& law, double threshold);

}  // namespace dcp
