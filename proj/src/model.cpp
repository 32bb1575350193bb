#include "dcp/model.hpp"

#include "dcp/errors.hpp"
#include "dcp/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace dcp {

Matrix DiffusionModel::covariance(const Vector& x, const Vector& alpha) const {
    const Matrix a = diffusion(x, alpha);
    return a * a.transpose();
}

Matrix DiffusionModel::drift_gradient(const Vector& x, const Vector& beta) const {
    if (drift_jacobian) return drift_jacobian(x, beta);
    Matrix jac(dim_state, dim_beta);
    for (int l = 0; l < dim_beta; ++l) {
        const double step = 1e-6 * std::max(1.0, std::abs(beta[l]));
        Vector up = beta, down = beta;
        up[l] += step;
        down[l] -= step;
        jac.col(l) = (drift(x, up) - drift(x, down)) / (2.0 * step);
    }
    return jac;
}

std::vector<Matrix> DiffusionModel::covariance_derivatives(const Vector& x, const Vector& alpha,
                                                           double step) const {
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(dim_alpha));
    for (int l = 0; l < dim_alpha; ++l) {
        const double s = step * std::max(1.0, std::abs(alpha[l]));
        Vector up = alpha, down = alpha;
        up[l] += s;
        down[l] -= s;
        out.push_back((covariance(x, up) - covariance(x, down)) / (2.0 * s));
    }
    return out;
}

namespace {

Matrix scalar_matrix(double v) {
    Matrix m(1, 1);
    m(0, 0) = v;
    return m;
}

}  // namespace

DiffusionModel make_ou_model() {
    DiffusionModel m;
    m.id = "ou";
    m.dim_state = 1;
    m.dim_alpha = 1;
    m.dim_beta = 2;
    m.drift = [](const Vector& x, const Vector& beta) {
        Vector out(1);
        out[0] = -beta[0] * (x[0] - beta[1]);
        return out;
    };
    m.diffusion = [](const Vector&, const Vector& alpha) { return scalar_matrix(alpha[0]); };
    m.alpha_bounds = {{1e-3, 50.0}};
    m.beta_bounds = {{1e-3, 50.0}, {-100.0, 100.0}};
    m.drift_jacobian = [](const Vector& x, const Vector& beta) {
        Matrix jac(1, 2);
        jac(0, 0) = -(x[0] - beta[1]);
        jac(0, 1) = beta[0];
        return jac;
    };
    m.diffusion_scale = [](const Vector&) { return scalar_matrix(1.0); };
    // -beta (x - gamma) = (beta gamma) * 1 + (-beta) * x
    m.linear_drift = LinearDrift{
        [](const Vector& x) {
            Matrix basis(1, 2);
            basis(0, 0) = 1.0;
            basis(0, 1) = x[0];
            return basis;
        },
        [](const Vector& beta) { return make_vector({beta[0] * beta[1], -beta[0]}); },
        [](const Vector& c) -> std::optional<Vector> {
            const double rate = -c[1];
            if (!(rate > 0.0)) return std::nullopt;
            return make_vector({rate, c[0] / rate});
        }};
    return m;
}

DiffusionModel make_hyperbolic_model() {
    DiffusionModel m;
    m.id = "hyperbolic";
    m.dim_state = 1;
    m.dim_alpha = 1;
    m.dim_beta = 2;
    m.drift = [](const Vector& x, const Vector& beta) {
        Vector out(1);
        out[0] = beta[0] - beta[1] * x[0] / std::sqrt(1.0 + x[0] * x[0]);
        return out;
    };
    m.diffusion = [](const Vector&, const Vector& alpha) { return scalar_matrix(alpha[0]); };
    m.alpha_bounds = {{1e-3, 50.0}};
    m.beta_bounds = {{-50.0, 50.0}, {1e-3, 100.0}};
    m.drift_jacobian = [](const Vector& x, const Vector&) {
        Matrix jac(1, 2);
        jac(0, 0) = 1.0;
        jac(0, 1) = -x[0] / std::sqrt(1.0 + x[0] * x[0]);
        return jac;
    };
    m.diffusion_scale = [](const Vector&) { return scalar_matrix(1.0); };
    m.linear_drift = LinearDrift{
        [](const Vector& x) {
            Matrix basis(1, 2);
            basis(0, 0) = 1.0;
            basis(0, 1) = -x[0] / std::sqrt(1.0 + x[0] * x[0]);
            return basis;
        },
        [](const Vector& beta) { return beta; },
        [](const Vector& c) -> std::optional<Vector> { return c; }};
    m.beta_feasible = [](const Vector& beta) { return beta[1] > std::abs(beta[0]); };
    return m;
}

bool covariance_positive_definite(const DiffusionModel& model, const std::vector<Vector>& states,
                                  const std::vector<Vector>& alphas) {
    for (const auto& alpha : alphas) {
        for (const auto& x : states) {
            const Matrix a = model.covariance(x, alpha);
            if (!a.isApprox(a.transpose(), 1e-12)) return false;
            Eigen::LLT<Matrix> llt(a);
            if (llt.info() != Eigen::Success) return false;
            if (!(a.determinant() > 0.0)) return false;
        }
    }
    return true;
}

ChangeSpec ChangeSpec::create(const DiffusionModel& model, double tau_star, ParameterBlock block,
                              const Vector& pre, const Vector& post, const Vector& shared) {
    if (!(tau_star > 0.0 && tau_star < 1.0))
        throw std::invalid_argument("change fraction must lie strictly inside (0, 1)");
    const Box& changed = block == ParameterBlock::Alpha ? model.alpha_bounds : model.beta_bounds;
    const Box& fixed = block == ParameterBlock::Alpha ? model.beta_bounds : model.alpha_bounds;
    if (!box_strictly_contains(changed, pre) || !box_strictly_contains(changed, post))
        throw std::invalid_argument("pre/post-change parameters must lie strictly inside the bounds");
    if (!box_strictly_contains(fixed, shared))
        throw std::invalid_argument("shared parameters must lie strictly inside the bounds");
    if (pre == post) throw std::invalid_argument("pre- and post-change parameters coincide");
    if (block == ParameterBlock::Beta && model.beta_feasible &&
        (!model.beta_feasible(pre) || !model.beta_feasible(post)))
        throw std::invalid_argument("drift parameters violate the model constraint");
    if (block == ParameterBlock::Alpha && model.beta_feasible && !model.beta_feasible(shared))
        throw std::invalid_argument("drift parameters violate the model constraint");
    ChangeSpec spec;
    spec.tau_star_ = tau_star;
    spec.block_ = block;
    spec.pre_ = pre;
    spec.post_ = post;
    spec.shared_ = shared;
    return spec;
}

ModelParams ChangeSpec::params_before() const {
    return block_ == ParameterBlock::Alpha ? ModelParams{pre_, shared_} : ModelParams{shared_, pre_};
}

ModelParams ChangeSpec::params_after() const {
    return block_ == ParameterBlock::Alpha ? ModelParams{post_, shared_} : ModelParams{shared_, post_};
}

PathSample::PathSample(std::int64_t n, double h, int dim, std::vector<double> states, PathMeta meta)
    : n_(n), h_(h), dim_(dim), states_(std::move(states)), meta_(std::move(meta)) {
    if (n < 1) throw std::invalid_argument("path needs at least one increment");
    if (!(h > 0.0)) throw std::invalid_argument("step size must be positive");
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("unsupported state dimension");
    if (states_.size() != static_cast<std::size_t>((n + 1) * dim))
        throw std::invalid_argument("path must hold exactly n + 1 states");
    for (double v : states_)
        if (!std::isfinite(v)) throw std::invalid_argument("path contains non-finite states");
}

Vector PathSample::state(std::int64_t i) const {
    Vector x(dim_);
    const auto base = static_cast<std::size_t>(i * dim_);
    for (int c = 0; c < dim_; ++c) x[c] = states_[base + static_cast<std::size_t>(c)];
    return x;
}

Vector PathSample::increment(std::int64_t i) const { return state(i) - state(i - 1); }

PathSample PathSample::slice(std::int64_t lo, std::int64_t hi) const {
    if (lo < 0 || hi > n_ || hi - lo < 1) throw std::invalid_argument("invalid slice bounds");
    std::vector<double> sub(states_.begin() + lo * dim_, states_.begin() + (hi + 1) * dim_);
    return PathSample(hi - lo, h_, dim_, std::move(sub), meta_);
}

std::int64_t change_fine_index(double tau_star, std::int64_t n, int substeps) {
    const double target = tau_star * static_cast<double>(n) * static_cast<double>(substeps);
    const double nearest = std::round(target);
    if (std::abs(target - nearest) <= 1e-9 * std::max(1.0, target)) return static_cast<std::int64_t>(nearest);
    return static_cast<std::int64_t>(std::ceil(target));
}

namespace {

void check_params(const DiffusionModel& model, const ModelParams& p) {
    if (p.alpha.size() != model.dim_alpha || p.beta.size() != model.dim_beta)
        throw std::invalid_argument("parameter dimensions do not match the model");
    if (!model.alpha_in_bounds(p.alpha)) throw std::invalid_argument("diffusion parameters outside bounds");
    if (!model.beta_admissible(p.beta)) throw std::invalid_argument("drift parameters outside bounds");
}

PathSample run_euler(const DiffusionModel& model, const ModelParams& before, const ModelParams& after,
                     std::int64_t switch_index, const Vector& x0, const SimulationGrid& grid,
                     std::uint64_t seed, const SimulationOptions& options) {
    if (grid.n < 2) throw std::invalid_argument("simulation needs n >= 2");
    if (!(grid.h > 0.0)) throw std::invalid_argument("step size must be positive");
    if (grid.substeps < 1) throw std::invalid_argument("substeps must be >= 1");
    if (x0.size() != model.dim_state) throw std::invalid_argument("initial state has wrong dimension");
    if (options.validate_params) {
        check_params(model, before);
        check_params(model, after);
    }

    const int d = model.dim_state;
    const double dt = grid.h / grid.substeps;
    const double sqrt_dt = std::sqrt(dt);
    RandomStream rng(seed);

    std::vector<double> states(static_cast<std::size_t>((grid.n + 1) * d));
    Vector x = x0;
    for (int c = 0; c < d; ++c) states[static_cast<std::size_t>(c)] = x[c];

    Vector noise(d);
    std::int64_t fine = 0;
    for (std::int64_t i = 1; i <= grid.n; ++i) {
        for (int s = 0; s < grid.substeps; ++s, ++fine) {
            const ModelParams& p = fine >= switch_index ? after : before;
            for (int c = 0; c < d; ++c) noise[c] = rng.normal();
            x += model.drift(x, p.beta) * dt + model.diffusion(x, p.alpha) * noise * sqrt_dt;
            if (!x.allFinite()) throw SimulationDiverged(fine);
        }
        const auto base = static_cast<std::size_t>(i * d);
        for (int c = 0; c < d; ++c) states[base + static_cast<std::size_t>(c)] = x[c];
    }
    PathMeta meta{model.id, seed, grid.substeps, std::string(kRngName)};
    return PathSample(grid.n, grid.h, d, std::move(states), std::move(meta));
}

}  // namespace

PathSample simulate_path(const DiffusionModel& model, const ModelParams& params, const Vector& x0,
                         const SimulationGrid& grid, std::uint64_t seed, SimulationOptions options) {
    return run_euler(model, params, params, std::numeric_limits<std::int64_t>::max(), x0, grid, seed, options);
}

PathSample simulate_path(const DiffusionModel& model, const ChangeSpec& change, const Vector& x0,
                         const SimulationGrid& grid, std::uint64_t seed, SimulationOptions options) {
    const std::int64_t switch_index = change_fine_index(change.tau_star(), grid.n, grid.substeps);
    return run_euler(model, change.params_before(), change.params_after(), switch_index, x0, grid, seed,
                     options);
}

}  // namespace dcp
