#pragma once

#include "dcp/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dcp {

/// Parameter values for both blocks: alpha enters the diffusion, beta the drift.
struct ModelParams {
    Vector alpha;
    Vector beta;
};

/// Drift that is linear in a coefficient vector after reparametrization:
/// b(x, beta) = basis(x) * to_coefficients(beta).
struct LinearDrift {
    std::function<Matrix(const Vector& x)> basis;  // d x r
    std::function<Vector(const Vector& beta)> to_coefficients;
    /// Maps coefficients back to beta; empty when no beta produces them.
    std::function<std::optional<Vector>(const Vector& coefficients)> from_coefficients;
};

/// Parametric diffusion dX = b(X, beta) dt + a(X, alpha) dW on R^d.
///
/// `drift` and `diffusion` are required. The remaining callables are
/// optional structure that estimators and functionals exploit when present;
/// derivatives fall back to central finite differences.
struct DiffusionModel {
    std::string id;
    int dim_state = 1;
    int dim_alpha = 1;
    int dim_beta = 1;

    std::function<Vector(const Vector& x, const Vector& beta)> drift;
    std::function<Matrix(const Vector& x, const Vector& alpha)> diffusion;

    Box alpha_bounds;
    Box beta_bounds;

    /// d x q matrix of drift derivatives in beta.
    std::function<Matrix(const Vector& x, const Vector& beta)> drift_jacobian;
    /// sigma(x) when a(x, alpha) = sigma(x) diag(alpha) (requires p = d).
    std::function<Matrix(const Vector& x)> diffusion_scale;
    std::optional<LinearDrift> linear_drift;
    /// Constraint on beta beyond the box (e.g. gamma > |beta| for the hyperbolic model).
    std::function<bool(const Vector& beta)> beta_feasible;

    /// A(x, alpha) = a a^T.
    Matrix covariance(const Vector& x, const Vector& alpha) const;
    /// d x q derivative of b in beta, analytic when available.
    Matrix drift_gradient(const Vector& x, const Vector& beta) const;
    /// dA/dalpha_l for l = 1..p by central differences of `covariance`.
    std::vector<Matrix> covariance_derivatives(const Vector& x, const Vector& alpha, double step = 1e-5) const;

    bool alpha_in_bounds(const Vector& alpha) const { return box_contains(alpha_bounds, alpha); }
    bool beta_admissible(const Vector& beta) const {
        return box_contains(beta_bounds, beta) && (!beta_feasible || beta_feasible(beta));
    }
    /// True when a(x, alpha) = sigma(x) diag(alpha), making alpha-functionals x-free.
    bool scaled_diagonal_diffusion() const { return static_cast<bool>(diffusion_scale); }
};

/// dX = -beta (X - gamma) dt + alpha dW; alpha = (alpha), beta = (beta, gamma).
DiffusionModel make_ou_model();

/// dX = (beta - gamma X / sqrt(1 + X^2)) dt + alpha dW with gamma > |beta|;
/// alpha = (alpha), beta = (beta, gamma).
DiffusionModel make_hyperbolic_model();

/// Checks that A(x, alpha) is symmetric positive definite at every test point
/// and every alpha given. Returns false on the first violation.
bool covariance_positive_definite(const DiffusionModel& model, const std::vector<Vector>& states,
                                  const std::vector<Vector>& alphas);

enum class ParameterBlock { Alpha, Beta };

/// A single change of one parameter block at fraction tau_star of the horizon.
class ChangeSpec {
public:
    /// Validates tau_star in (0, 1), distinct pre/post vectors and that every
    /// vector lies strictly inside the model bounds.
    static ChangeSpec create(const DiffusionModel& model, double tau_star, ParameterBlock block,
                             const Vector& pre, const Vector& post, const Vector& shared);

    double tau_star() const { return tau_star_; }
    ParameterBlock changed_block() const { return block_; }
    const Vector& pre_params() const { return pre_; }
    const Vector& post_params() const { return post_; }
    const Vector& shared_params() const { return shared_; }

    ModelParams params_before() const;
    ModelParams params_after() const;
    /// Euclidean distance between the pre- and post-change vectors.
    double magnitude() const { return (pre_ - post_).norm(); }

private:
    ChangeSpec() = default;

    double tau_star_ = 0.5;
    ParameterBlock block_ = ParameterBlock::Alpha;
    Vector pre_, post_, shared_;
};

struct PathMeta {
    std::string model_id;
    std::uint64_t seed = 0;
    int substeps = 0;
    std::string rng;
};

/// Observations X_{t_0}, ..., X_{t_n} on the grid t_i = i h.
class PathSample {
public:
    PathSample() = default;
    /// `states` holds (n + 1) * dim values, observation-major.
    PathSample(std::int64_t n, double h, int dim, std::vector<double> states, PathMeta meta = {});

    std::int64_t n() const { return n_; }
    double h() const { return h_; }
    int dim() const { return dim_; }
    double horizon() const { return static_cast<double>(n_) * h_; }
    const PathMeta& meta() const { return meta_; }

    Vector state(std::int64_t i) const;
    /// Delta X_i = X_{t_i} - X_{t_{i-1}}, 1 <= i <= n.
    Vector increment(std::int64_t i) const;
    double scalar(std::int64_t i, int coordinate = 0) const {
        return states_[static_cast<std::size_t>(i * dim_ + coordinate)];
    }
    const std::vector<double>& raw() const { return states_; }

    /// Observations lo..hi (inclusive) as a new path with the same step.
    PathSample slice(std::int64_t lo, std::int64_t hi) const;

private:
    std::int64_t n_ = 0;
    double h_ = 0.0;
    int dim_ = 1;
    std::vector<double> states_;
    PathMeta meta_;
};

struct SimulationGrid {
    std::int64_t n = 0;
    double h = 0.0;
    int substeps = 10;
};

struct SimulationOptions {
    /// Reject parameters outside the model bounds. Disabled only for
    /// degenerate test hooks such as a zero diffusion.
    bool validate_params = true;
};

/// Euler-Maruyama on the fine grid of step h / substeps, retaining every
/// `substeps`-th state. Deterministic in (seed, grid).
PathSample simulate_path(const DiffusionModel& model, const ModelParams& params, const Vector& x0,
                         const SimulationGrid& grid, std::uint64_t seed, SimulationOptions options = {});

/// As above with a parameter switch at the first fine-grid time >= tau* n h.
/// One Wiener path drives both regimes and the state is continuous across the switch.
PathSample simulate_path(const DiffusionModel& model, const ChangeSpec& change, const Vector& x0,
                         const SimulationGrid& grid, std::uint64_t seed, SimulationOptions options = {});

/// Index of the first fine step that runs under the post-change parameters.
std::int64_t change_fine_index(double tau_star, std::int64_t n, int substeps);

}  // namespace dcp
