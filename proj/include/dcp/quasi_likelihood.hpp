#pragma once

#include "dcp/model.hpp"
#include "dcp/nelder_mead.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dcp {

/// floor(n * tau), the bracket convention for interval endpoints. A relative
/// slack of 1e-12 absorbs representation error (0.29 * 100 -> 29).
std::int64_t floor_index(double tau, std::int64_t n);

/// Increments lo..hi (1-based, inclusive) of a path with n increments.
struct IntervalIndex {
    std::int64_t lo = 1;
    std::int64_t hi = 1;
    std::int64_t n = 1;

    static IntervalIndex full(std::int64_t n) { return {1, n, n}; }
    /// Increments floor(n tau1) + 1 .. floor(n tau2).
    static IntervalIndex from_fractions(double tau1, double tau2, std::int64_t n);

    std::int64_t length() const { return hi - lo + 1; }
    bool valid() const { return lo >= 1 && lo <= hi && hi <= n; }
    std::string describe() const;
};

/// A^{-1}(x, alpha) and log det A(x, alpha).
struct LocalPrecision {
    Matrix inverse;
    double log_det = 0.0;
};

/// Throws SingularDiffusion(index) when A is not positive definite.
LocalPrecision local_precision(const DiffusionModel& model, const Vector& x, const Vector& alpha,
                               std::int64_t index);

/// F_i(alpha) = tr(A^{-1}(X_{i-1}, alpha) (Delta X_i)^{(x)2} / h) + log det A(X_{i-1}, alpha).
double f_term(const PathSample& path, const DiffusionModel& model, std::int64_t i, const Vector& alpha);

/// G_i(beta | alpha) = tr(A^{-1}(X_{i-1}, alpha) (Delta X_i - h b(X_{i-1}, beta))^{(x)2} / h).
double g_term(const PathSample& path, const DiffusionModel& model, std::int64_t i, const Vector& beta,
              const Vector& alpha);

/// F_i for every i in the interval, in order.
std::vector<double> f_terms(const PathSample& path, const DiffusionModel& model, const Vector& alpha,
                            const IntervalIndex& interval);
std::vector<double> g_terms(const PathSample& path, const DiffusionModel& model, const Vector& beta,
                            const Vector& alpha, const IntervalIndex& interval);

/// Split-sample contrast sum_{i<=k} pre_i + sum_{i>k} post_i for k = 0..n,
/// answered in O(1) from a prefix sum of the term differences.
class SplitContrast {
public:
    /// Both term arrays hold the n full-sample terms (index 0 is increment 1).
    SplitContrast(const std::vector<double>& pre_terms, const std::vector<double>& post_terms);

    std::int64_t n() const { return static_cast<std::int64_t>(diff_prefix_.size()) - 1; }
    double operator()(std::int64_t k) const;
    /// Values at k = 0..n.
    std::vector<double> curve() const;

private:
    std::vector<double> diff_prefix_;
    double post_total_ = 0.0;
};

/// Phi_n(k : alpha1, alpha2) for all k.
SplitContrast phi_contrast(const PathSample& path, const DiffusionModel& model, const Vector& alpha1,
                           const Vector& alpha2);
/// Psi_n(k : beta1, beta2 | alpha) for all k.
SplitContrast psi_contrast(const PathSample& path, const DiffusionModel& model, const Vector& beta1,
                           const Vector& beta2, const Vector& alpha);

enum class FitMethod { ClosedForm, NormalEquations, Simplex };

std::string to_string(FitMethod method);

struct EstimationResult {
    Vector params;
    IntervalIndex interval;
    double objective_at_min = 0.0;  // sum of the contrast terms over the interval
    int iterations = 0;
    bool converged = false;
    FitMethod method = FitMethod::Simplex;
    bool fell_back = false;  // normal equations were singular or left the bounds
};

struct FitOptions {
    std::optional<Vector> init;  // default: midpoint of the bounds
    bool force_simplex = false;
    NelderMeadOptions simplex;
};

/// Minimizer of sum_{i in interval} F_i(alpha). Uses the closed form for
/// scaled-diagonal diffusions a(x, alpha) = sigma(x) diag(alpha), the simplex otherwise.
EstimationResult estimate_alpha(const PathSample& path, const IntervalIndex& interval,
                                const DiffusionModel& model, const FitOptions& options = {});

/// Minimizer of sum_{i in interval} G_i(beta | alpha_hat). Solves the weighted
/// least-squares normal equations for drifts linear in beta (after
/// reparametrization) and falls back to the simplex otherwise.
EstimationResult estimate_beta(const PathSample& path, const IntervalIndex& interval,
                               const DiffusionModel& model, const Vector& alpha_hat,
                               const FitOptions& options = {});

}  // namespace dcp
