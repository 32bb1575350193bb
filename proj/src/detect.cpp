#include "dcp/detect.hpp"

#include "dcp/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace dcp {

std::string to_string(StatisticKind kind) {
    switch (kind) {
        case StatisticKind::AlphaCUSUM: return "alpha";
        case StatisticKind::Beta1CUSUM: return "beta1";
        case StatisticKind::Beta2CUSUM: return "beta2";
    }
    return "unknown";
}

StatisticKind statistic_kind_from_string(const std::string& name) {
    if (name == "alpha") return StatisticKind::AlphaCUSUM;
    if (name == "beta1") return StatisticKind::Beta1CUSUM;
    if (name == "beta2") return StatisticKind::Beta2CUSUM;
    throw ConfigError("unknown statistic '" + name + "' (expected alpha, beta1 or beta2)");
}

std::string to_string(Schedule schedule) {
    switch (schedule) {
        case Schedule::UpperLower: return "upper-lower";
        case Schedule::UpperLowerPrevious: return "upper-lower-previous";
        case Schedule::Symmetric: return "symmetric";
    }
    return "unknown";
}

Schedule schedule_from_string(const std::string& name) {
    if (name == "upper-lower") return Schedule::UpperLower;
    if (name == "upper-lower-previous") return Schedule::UpperLowerPrevious;
    if (name == "symmetric") return Schedule::Symmetric;
    throw ConfigError("unknown schedule '" + name + "' (expected upper-lower, upper-lower-previous or symmetric)");
}

CusumResult cusum_max(const std::vector<double>& seq) {
    if (seq.empty()) throw std::invalid_argument("empty sequence");
    double total = 0.0;
    for (double v : seq) total += v;
    const double m = static_cast<double>(seq.size());
    CusumResult out;
    double partial = 0.0;
    for (std::size_t k = 1; k <= seq.size(); ++k) {
        partial += seq[k - 1];
        const double dev = std::abs(partial - (static_cast<double>(k) / m) * total);
        if (dev > out.value) {
            out.value = dev;
            out.argmax = static_cast<std::int64_t>(k);
        }
    }
    if (out.argmax == 0) out.argmax = 1;
    return out;
}

CusumResult cusum_max(const std::vector<Vector>& seq, const Matrix& whitening) {
    if (seq.empty()) throw std::invalid_argument("empty sequence");
    Vector total = Vector::Zero(seq.front().size());
    for (const auto& v : seq) total += v;
    const double m = static_cast<double>(seq.size());
    CusumResult out;
    Vector partial = Vector::Zero(total.size());
    for (std::size_t k = 1; k <= seq.size(); ++k) {
        partial += seq[k - 1];
        const double dev = (whitening * (partial - (static_cast<double>(k) / m) * total)).norm();
        if (dev > out.value) {
            out.value = dev;
            out.argmax = static_cast<std::int64_t>(k);
        }
    }
    if (out.argmax == 0) out.argmax = 1;
    return out;
}

namespace {

void check_test_interval(const PathSample& path, const IntervalIndex& interval) {
    if (!interval.valid() || interval.n != path.n()) throw std::invalid_argument("invalid interval " + interval.describe());
    if (interval.length() < 2) throw std::invalid_argument("test interval needs at least 2 increments");
}

Vector residual(const PathSample& path, const DiffusionModel& model, std::int64_t i, const Vector& beta) {
    return path.increment(i) - path.h() * model.drift(path.state(i - 1), beta);
}

}  // namespace

std::vector<double> eta_hat(const PathSample& path, const DiffusionModel& model, const IntervalIndex& interval,
                            const Vector& alpha) {
    check_test_interval(path, interval);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(interval.length()));
    for (std::int64_t i = interval.lo; i <= interval.hi; ++i) {
        const Vector dx = path.increment(i);
        const LocalPrecision p = local_precision(model, path.state(i - 1), alpha, i);
        out.push_back(dx.dot(p.inverse * dx) / path.h());
    }
    return out;
}

std::vector<double> xi_hat(const PathSample& path, const DiffusionModel& model, const IntervalIndex& interval,
                           const Vector& alpha, const Vector& beta) {
    check_test_interval(path, interval);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(interval.length()));
    for (std::int64_t i = interval.lo; i <= interval.hi; ++i) {
        const Matrix a = model.diffusion(path.state(i - 1), alpha);
        const Vector r = residual(path, model, i, beta);
        Vector z;
        if (a.rows() == 1) {
            if (!(a(0, 0) != 0.0) || !std::isfinite(a(0, 0))) throw SingularDiffusion(i);
            z = r / a(0, 0);
        } else {
            Eigen::PartialPivLU<Matrix> lu(a);
            if (!(std::abs(lu.determinant()) > 0.0)) throw SingularDiffusion(i);
            z = lu.solve(r);
        }
        out.push_back(z.sum());
    }
    return out;
}

std::vector<Vector> zeta_hat(const PathSample& path, const DiffusionModel& model, const IntervalIndex& interval,
                             const Vector& alpha, const Vector& beta) {
    check_test_interval(path, interval);
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(interval.length()));
    for (std::int64_t i = interval.lo; i <= interval.hi; ++i) {
        const Vector x = path.state(i - 1);
        const LocalPrecision p = local_precision(model, x, alpha, i);
        out.push_back(model.drift_gradient(x, beta).transpose() * (p.inverse * residual(path, model, i, beta)));
    }
    return out;
}

Matrix information_matrix(const PathSample& path, const DiffusionModel& model, const IntervalIndex& interval,
                          const Vector& alpha, const Vector& beta) {
    check_test_interval(path, interval);
    Matrix info = Matrix::Zero(model.dim_beta, model.dim_beta);
    for (std::int64_t i = interval.lo; i <= interval.hi; ++i) {
        const Vector x = path.state(i - 1);
        const LocalPrecision p = local_precision(model, x, alpha, i);
        const Matrix db = model.drift_gradient(x, beta);
        info += db.transpose() * p.inverse * db;
    }
    return info / static_cast<double>(interval.length());
}

Matrix inverse_sqrt_information(const Matrix& info) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(info);
    if (eig.info() != Eigen::Success) throw DegenerateInformation("eigendecomposition of the information matrix failed");
    const Vector ev = eig.eigenvalues();
    const double max_ev = ev.maxCoeff();
    if (!(max_ev > 0.0) || !(ev.minCoeff() >= 1e-12 * max_ev))
        throw DegenerateInformation("information matrix is not positive definite");
    const Vector inv_sqrt = ev.cwiseSqrt().cwiseInverse();
    return eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
}

namespace {

TestOutcome make_outcome(StatisticKind kind, const IntervalIndex& interval, const CusumResult& cusum,
                         double normalizer, int dof, double epsilon) {
    TestOutcome out;
    out.kind = kind;
    out.interval = interval;
    out.epsilon = epsilon;
    out.statistic = cusum.value / normalizer;
    out.argmax_k = cusum.argmax;
    out.critical_value = critical_value(dof, epsilon);
    out.reject = rejects(out.statistic, out.critical_value);
    return out;
}

}  // namespace

TestOutcome stat_alpha(const PathSample& path, const DiffusionModel& model, const IntervalIndex& interval,
                       const Vector& alpha_hat, double epsilon) {
    const auto eta = eta_hat(path, model, interval, alpha_hat);
    const double m = static_cast<double>(interval.length());
    return make_outcome(StatisticKind::AlphaCUSUM, interval, cusum_max(eta), std::sqrt(2.0 * path.dim() * m), 1,
                        epsilon);
}

TestOutcome stat_beta1(const PathSample& path, const DiffusionModel& model, const IntervalIndex& interval,
                       const Vector& alpha_hat, const Vector& beta_hat, double epsilon) {
    const auto xi = xi_hat(path, model, interval, alpha_hat, beta_hat);
    const double span = path.h() * static_cast<double>(interval.length());
    return make_outcome(StatisticKind::Beta1CUSUM, interval, cusum_max(xi), std::sqrt(path.dim() * span), 1,
                        epsilon);
}

TestOutcome stat_beta2(const PathSample& path, const DiffusionModel& model, const IntervalIndex& interval,
                       const Vector& alpha_hat, const Vector& beta_hat, double epsilon) {
    const Matrix whitening = inverse_sqrt_information(information_matrix(path, model, interval, alpha_hat, beta_hat));
    const auto zeta = zeta_hat(path, model, interval, alpha_hat, beta_hat);
    const double span = path.h() * static_cast<double>(interval.length());
    return make_outcome(StatisticKind::Beta2CUSUM, interval, cusum_max(zeta, whitening), std::sqrt(span),
                        model.dim_beta, epsilon);
}

TestOutcome run_interval_test(const PathSample& path, const DiffusionModel& model, const IntervalIndex& interval,
                              const Detector& detector) {
    const Vector alpha = estimate_alpha(path, interval, model, detector.fit).params;
    if (detector.kind == StatisticKind::AlphaCUSUM) return stat_alpha(path, model, interval, alpha, detector.epsilon);
    const Vector beta = estimate_beta(path, interval, model, alpha, detector.fit).params;
    if (detector.kind == StatisticKind::Beta1CUSUM)
        return stat_beta1(path, model, interval, alpha, beta, detector.epsilon);
    return stat_beta2(path, model, interval, alpha, beta, detector.epsilon);
}

namespace {

class Localizer {
public:
    Localizer(const PathSample& path, const DiffusionModel& model, const Detector& detector,
              const LocalizeOptions& options, LocalizationResult& result)
        : path_(path), model_(model), detector_(detector), options_(options), result_(result) {}

    /// nullopt when the interval or an excluded segment falls below the floor.
    std::optional<bool> test(const std::string& phase, double tau1, double tau2) {
        const std::int64_t n = path_.n();
        if (!(tau1 < tau2)) return std::nullopt;
        const IntervalIndex iv = IntervalIndex::from_fractions(tau1, tau2, n);
        if (!iv.valid() || iv.length() < options_.min_increments) return std::nullopt;
        if (tau1 > 0.0 && iv.lo - 1 < options_.min_increments) return std::nullopt;
        if (tau2 < 1.0 && n - iv.hi < options_.min_increments) return std::nullopt;
        LocalizationStep step{phase, tau1, tau2, run_interval_test(path_, model_, iv, detector_)};
        result_.steps.push_back(step);
        return step.outcome.reject;
    }

private:
    const PathSample& path_;
    const DiffusionModel& model_;
    const Detector& detector_;
    const LocalizeOptions& options_;
    LocalizationResult& result_;
};

double upper_fraction(int k) { return 1.0 - std::ldexp(1.0, -(k + 1)); }
double lower_fraction(int m) { return std::ldexp(1.0, -(m + 1)); }

}  // namespace

LocalizationResult localize(const PathSample& path, const DiffusionModel& model, const Detector& detector,
                            Schedule schedule, const LocalizeOptions& options) {
    LocalizationResult result;
    if (!options.full_sample_rejected) result.notes.push_back("full-sample test did not reject before localization");
    Localizer loc(path, model, detector, options, result);

    if (schedule == Schedule::Symmetric) {
        for (int k = 1;; ++k) {
            const double tau = lower_fraction(k);
            const auto r = loc.test("S", tau, 1.0 - tau);
            if (!r) {
                result.notes.push_back("symmetric schedule exhausted without detection");
                return result;
            }
            if (*r) {
                result.tau_lower = tau;
                result.tau_upper = 1.0 - tau;
                result.found = true;
                return result;
            }
        }
    }

    int k_detect = 0;
    for (int k = 1;; ++k) {
        const double tau = upper_fraction(k);
        const auto r = loc.test("U", 0.0, tau);
        if (!r) {
            result.notes.push_back("upper sequence exhausted without detection");
            return result;
        }
        if (*r) {
            result.tau_upper = tau;
            k_detect = k;
            break;
        }
    }

    std::vector<double> previous;
    if (schedule == Schedule::UpperLowerPrevious)
        for (int k = k_detect - 1; k >= 1; --k) previous.push_back(upper_fraction(k));
    for (double tau : previous) {
        const auto r = loc.test("L", tau, 1.0);
        if (r && *r) {
            result.tau_lower = tau;
            result.found = true;
            return result;
        }
    }
    for (int m = 1;; ++m) {
        const double tau = lower_fraction(m);
        if (!(tau < result.tau_upper)) continue;
        const auto r = loc.test("L", tau, 1.0);
        if (!r) {
            result.notes.push_back("lower sequence exhausted without detection");
            return result;
        }
        if (*r) {
            result.tau_lower = tau;
            result.found = true;
            return result;
        }
    }
}

std::string format_localization(const LocalizationResult& result) {
    std::ostringstream out;
    out << std::setprecision(10);
    for (const auto& s : result.steps) {
        out << "step phase=" << s.phase << " tau1=" << s.tau1 << " tau2=" << s.tau2
            << " lo=" << s.outcome.interval.lo << " hi=" << s.outcome.interval.hi
            << " statistic=" << s.outcome.statistic << " critical=" << s.outcome.critical_value
            << " reject=" << (s.outcome.reject ? 1 : 0) << '\n';
    }
    out << "localized found=" << (result.found ? 1 : 0) << " tau_lower=" << result.tau_lower
        << " tau_upper=" << result.tau_upper << '\n';
    for (const auto& note : result.notes) out << "note " << note << '\n';
    return out.str();
}

}  // namespace dcp
