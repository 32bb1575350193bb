#include "dcp/quasi_likelihood.hpp"

#include "dcp/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dcp {

std::int64_t floor_index(double tau, std::int64_t n) {
    const double v = tau * static_cast<double>(n);
    return static_cast<std::int64_t>(std::floor(v + 1e-12 * std::max(1.0, std::abs(v))));
}

IntervalIndex IntervalIndex::from_fractions(double tau1, double tau2, std::int64_t n) {
    if (!(tau1 >= 0.0 && tau1 < tau2 && tau2 <= 1.0)) throw std::invalid_argument("need 0 <= tau1 < tau2 <= 1");
    return {floor_index(tau1, n) + 1, floor_index(tau2, n), n};
}

std::string IntervalIndex::describe() const {
    return "[" + std::to_string(lo) + ", " + std::to_string(hi) + "] of " + std::to_string(n);
}

LocalPrecision local_precision(const DiffusionModel& model, const Vector& x, const Vector& alpha,
                               std::int64_t index) {
    const Matrix a = model.covariance(x, alpha);
    LocalPrecision out;
    if (a.rows() == 1) {
        const double v = a(0, 0);
        if (!(v > 0.0) || !std::isfinite(v)) throw SingularDiffusion(index);
        out.inverse = Matrix::Constant(1, 1, 1.0 / v);
        out.log_det = std::log(v);
        return out;
    }
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) throw SingularDiffusion(index);
    const Matrix l = llt.matrixL();
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) log_det += 2.0 * std::log(l(i, i));
    if (!std::isfinite(log_det)) throw SingularDiffusion(index);
    out.inverse = llt.solve(Matrix::Identity(a.rows(), a.cols()));
    out.log_det = log_det;
    return out;
}

namespace {

void check_index(const PathSample& path, std::int64_t i) {
    if (i < 1 || i > path.n()) throw std::invalid_argument("increment index out of range");
}

void check_interval(const PathSample& path, const IntervalIndex& interval) {
    if (!interval.valid() || interval.n != path.n()) throw std::invalid_argument("invalid interval " + interval.describe());
}

double f_value(const PathSample& path, const DiffusionModel& model, std::int64_t i, const Vector& alpha) {
    const Vector dx = path.increment(i);
    const LocalPrecision p = local_precision(model, path.state(i - 1), alpha, i);
    return dx.dot(p.inverse * dx) / path.h() + p.log_det;
}

double g_value(const PathSample& path, const DiffusionModel& model, std::int64_t i, const Vector& beta,
               const Vector& alpha) {
    const Vector x = path.state(i - 1);
    const Vector r = path.increment(i) - path.h() * model.drift(x, beta);
    const LocalPrecision p = local_precision(model, x, alpha, i);
    return r.dot(p.inverse * r) / path.h();
}

}  // namespace

double f_term(const PathSample& path, const DiffusionModel& model, std::int64_t i, const Vector& alpha) {
    check_index(path, i);
    return f_value(path, model, i, alpha);
}

double g_term(const PathSample& path, const DiffusionModel& model, std::int64_t i, const Vector& beta,
              const Vector& alpha) {
    check_index(path, i);
    return g_value(path, model, i, beta, alpha);
}

std::vector<double> f_terms(const PathSample& path, const DiffusionModel& model, const Vector& alpha,
                            const IntervalIndex& interval) {
    check_interval(path, interval);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(interval.length()));
    for (std::int64_t i = interval.lo; i <= interval.hi; ++i) out.push_back(f_value(path, model, i, alpha));
    return out;
}

std::vector<double> g_terms(const PathSample& path, const DiffusionModel& model, const Vector& beta,
                            const Vector& alpha, const IntervalIndex& interval) {
    check_interval(path, interval);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(interval.length()));
    for (std::int64_t i = interval.lo; i <= interval.hi; ++i) out.push_back(g_value(path, model, i, beta, alpha));
    return out;
}

SplitContrast::SplitContrast(const std::vector<double>& pre_terms, const std::vector<double>& post_terms) {
    if (pre_terms.size() != post_terms.size() || pre_terms.empty())
        throw std::invalid_argument("contrast term arrays must be non-empty and of equal length");
    // value(k) = sum(post) + sum_{i<=k} (pre_i - post_i), exactly flat when the regimes coincide
    diff_prefix_.assign(pre_terms.size() + 1, 0.0);
    post_total_ = 0.0;
    for (std::size_t i = 0; i < pre_terms.size(); ++i) {
        diff_prefix_[i + 1] = diff_prefix_[i] + (pre_terms[i] - post_terms[i]);
        post_total_ += post_terms[i];
    }
}

double SplitContrast::operator()(std::int64_t k) const {
    if (k < 0 || k > n()) throw std::invalid_argument("split index out of range");
    return post_total_ + diff_prefix_[static_cast<std::size_t>(k)];
}

std::vector<double> SplitContrast::curve() const {
    std::vector<double> out(diff_prefix_.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = post_total_ + diff_prefix_[k];
    return out;
}

SplitContrast phi_contrast(const PathSample& path, const DiffusionModel& model, const Vector& alpha1,
                           const Vector& alpha2) {
    const auto full = IntervalIndex::full(path.n());
    return SplitContrast(f_terms(path, model, alpha1, full), f_terms(path, model, alpha2, full));
}

SplitContrast psi_contrast(const PathSample& path, const DiffusionModel& model, const Vector& beta1,
                           const Vector& beta2, const Vector& alpha) {
    const auto full = IntervalIndex::full(path.n());
    return SplitContrast(g_terms(path, model, beta1, alpha, full), g_terms(path, model, beta2, alpha, full));
}

std::string to_string(FitMethod method) {
    switch (method) {
        case FitMethod::ClosedForm: return "closed-form";
        case FitMethod::NormalEquations: return "normal-equations";
        case FitMethod::Simplex: return "simplex";
    }
    return "unknown";
}

namespace {

double sum_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

EstimationResult alpha_by_simplex(const PathSample& path, const IntervalIndex& interval,
                                  const DiffusionModel& model, const FitOptions& options) {
    const double m = static_cast<double>(interval.length());
    // The mean (not the sum) keeps the absolute tolerances meaningful at any n.
    auto objective = [&](const Vector& alpha) {
        double s = 0.0;
        for (std::int64_t i = interval.lo; i <= interval.hi; ++i) s += f_value(path, model, i, alpha);
        return s / m;
    };
    const Vector init = options.init.value_or(box_midpoint(model.alpha_bounds));
    const NelderMeadResult nm = minimize_bounded(objective, init, model.alpha_bounds, options.simplex);
    EstimationResult out;
    out.params = nm.x;
    out.interval = interval;
    out.objective_at_min = nm.value * m;
    out.iterations = nm.iterations;
    out.converged = nm.converged;
    out.method = FitMethod::Simplex;
    return out;
}

EstimationResult beta_by_simplex(const PathSample& path, const IntervalIndex& interval,
                                 const DiffusionModel& model, const Vector& alpha_hat, const FitOptions& options) {
    const double m = static_cast<double>(interval.length());
    // A^{-1} does not depend on beta; cache it once.
    std::vector<LocalPrecision> precision;
    precision.reserve(static_cast<std::size_t>(interval.length()));
    for (std::int64_t i = interval.lo; i <= interval.hi; ++i)
        precision.push_back(local_precision(model, path.state(i - 1), alpha_hat, i));
    const double h = path.h();
    auto objective = [&](const Vector& beta) {
        if (model.beta_feasible && !model.beta_feasible(beta)) return std::numeric_limits<double>::max();
        double s = 0.0;
        for (std::int64_t i = interval.lo; i <= interval.hi; ++i) {
            const Vector x = path.state(i - 1);
            const Vector r = path.increment(i) - h * model.drift(x, beta);
            s += r.dot(precision[static_cast<std::size_t>(i - interval.lo)].inverse * r) / h;
        }
        return s / m;
    };
    Vector init = options.init.value_or(box_midpoint(model.beta_bounds));
    const NelderMeadResult nm = minimize_bounded(objective, init, model.beta_bounds, options.simplex);
    EstimationResult out;
    out.params = nm.x;
    out.interval = interval;
    out.objective_at_min = nm.value * m;
    out.iterations = nm.iterations;
    out.converged = nm.converged;
    out.method = FitMethod::Simplex;
    return out;
}

}  // namespace

EstimationResult estimate_alpha(const PathSample& path, const IntervalIndex& interval,
                                const DiffusionModel& model, const FitOptions& options) {
    check_interval(path, interval);
    const bool closed_form = model.scaled_diagonal_diffusion() && model.dim_alpha == model.dim_state;
    if (!closed_form || options.force_simplex) return alpha_by_simplex(path, interval, model, options);

    // alpha_j^2 = mean over the interval of (sigma^{-1}(X_{i-1}) Delta X_i)_j^2 / h
    const int d = model.dim_state;
    Vector sum_sq = Vector::Zero(d);
    for (std::int64_t i = interval.lo; i <= interval.hi; ++i) {
        const Matrix sigma = model.diffusion_scale(path.state(i - 1));
        const Vector y = sigma.partialPivLu().solve(path.increment(i));
        sum_sq += y.cwiseAbs2();
    }
    const double m = static_cast<double>(interval.length());
    Vector alpha(d);
    for (int j = 0; j < d; ++j) {
        const double raw = std::sqrt(sum_sq[j] / (m * path.h()));
        // each coordinate is unimodal, so clamping gives the box-constrained minimizer
        alpha[j] = std::clamp(raw, model.alpha_bounds[static_cast<std::size_t>(j)].lo,
                              model.alpha_bounds[static_cast<std::size_t>(j)].hi);
    }
    EstimationResult out;
    out.params = alpha;
    out.interval = interval;
    out.objective_at_min = sum_of(f_terms(path, model, alpha, interval));
    out.iterations = 0;
    out.converged = true;
    out.method = FitMethod::ClosedForm;
    return out;
}

EstimationResult estimate_beta(const PathSample& path, const IntervalIndex& interval,
                               const DiffusionModel& model, const Vector& alpha_hat, const FitOptions& options) {
    check_interval(path, interval);
    if (!model.alpha_in_bounds(alpha_hat)) throw std::invalid_argument("alpha_hat outside bounds");
    if (!model.linear_drift || options.force_simplex) return beta_by_simplex(path, interval, model, alpha_hat, options);

    const LinearDrift& lin = *model.linear_drift;
    const double h = path.h();
    Matrix normal;
    Vector rhs;
    for (std::int64_t i = interval.lo; i <= interval.hi; ++i) {
        const Vector x = path.state(i - 1);
        const Matrix basis = lin.basis(x);
        const LocalPrecision p = local_precision(model, x, alpha_hat, i);
        const Matrix weighted = basis.transpose() * p.inverse;
        if (normal.size() == 0) {
            normal = Matrix::Zero(basis.cols(), basis.cols());
            rhs = Vector::Zero(basis.cols());
        }
        normal += h * weighted * basis;
        rhs += weighted * path.increment(i);
    }

    Eigen::SelfAdjointEigenSolver<Matrix> eig(normal);
    const double max_eig = eig.eigenvalues().cwiseAbs().maxCoeff();
    const bool singular = !(eig.eigenvalues().minCoeff() > 1e-12 * max_eig);
    if (!singular) {
        const Vector coeffs = normal.ldlt().solve(rhs);
        const std::optional<Vector> beta = lin.from_coefficients(coeffs);
        if (beta && beta->allFinite() && model.beta_admissible(*beta)) {
            EstimationResult out;
            out.params = *beta;
            out.interval = interval;
            out.objective_at_min = sum_of(g_terms(path, model, *beta, alpha_hat, interval));
            out.iterations = 0;
            out.converged = true;
            out.method = FitMethod::NormalEquations;
            return out;
        }
    }
    EstimationResult out = beta_by_simplex(path, interval, model, alpha_hat, options);
    out.fell_back = true;
    return out;
}

}  // namespace dcp
