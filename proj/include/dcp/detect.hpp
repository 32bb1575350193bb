#pragma once

#include "dcp/critical_values.hpp"
#include "dcp/quasi_likelihood.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dcp {

enum class StatisticKind { AlphaCUSUM, Beta1CUSUM, Beta2CUSUM };

std::string to_string(StatisticKind kind);
StatisticKind statistic_kind_from_string(const std::string& name);

struct TestOutcome {
    double statistic = 0.0;
    double critical_value = 0.0;
    double epsilon = 0.05;
    IntervalIndex interval;
    StatisticKind kind = StatisticKind::AlphaCUSUM;
    bool reject = false;
    std::int64_t argmax_k = 0;  // maximizing k, counted from the interval start
};

/// reject iff statistic > critical value.
inline bool rejects(double statistic, double critical) { return statistic > critical; }

struct CusumResult {
    double value = 0.0;  // max_k |S_k - (k/m) S_m|
    std::int64_t argmax = 0;
};

/// Scalar CUSUM over k = 1..m (smallest maximizing k).
CusumResult cusum_max(const std::vector<double>& seq);

/// max_k ||W (S_k - (k/m) S_m)|| for vector sequences and a whitening matrix W.
CusumResult cusum_max(const std::vector<Vector>& seq, const Matrix& whitening);

/// eta_i = tr(A^{-1}(X_{i-1}, alpha) (Delta X_i)^{(x)2} / h) over the interval.
std::vector<double> eta_hat(const PathSample& path, const DiffusionModel& model, const IntervalIndex& interval,
                            const Vector& alpha);
/// xi_i = 1^T a^{-1}(X_{i-1}, alpha) (Delta X_i - h b(X_{i-1}, beta)).
std::vector<double> xi_hat(const PathSample& path, const DiffusionModel& model, const IntervalIndex& interval,
                           const Vector& alpha, const Vector& beta);
/// zeta_i = db(X_{i-1}, beta)^T A^{-1}(X_{i-1}, alpha) (Delta X_i - h b(X_{i-1}, beta)).
std::vector<Vector> zeta_hat(const PathSample& path, const DiffusionModel& model, const IntervalIndex& interval,
                             const Vector& alpha, const Vector& beta);
/// Mean of db^T A^{-1} db over the interval.
Matrix information_matrix(const PathSample& path, const DiffusionModel& model, const IntervalIndex& interval,
                          const Vector& alpha, const Vector& beta);
/// Symmetric inverse square root; throws DegenerateInformation when an
/// eigenvalue is below 1e-12 times the largest.
Matrix inverse_sqrt_information(const Matrix& info);

/// CUSUM of eta normalized by sqrt(2 d m); compared with w_1.
TestOutcome stat_alpha(const PathSample& path, const DiffusionModel& model, const IntervalIndex& interval,
                       const Vector& alpha_hat, double epsilon = 0.05);
/// CUSUM of xi normalized by sqrt(d h m); compared with w_1.
TestOutcome stat_beta1(const PathSample& path, const DiffusionModel& model, const IntervalIndex& interval,
                       const Vector& alpha_hat, const Vector& beta_hat, double epsilon = 0.05);
/// Whitened vector CUSUM of zeta normalized by sqrt(h m); compared with w_q.
TestOutcome stat_beta2(const PathSample& path, const DiffusionModel& model, const IntervalIndex& interval,
                       const Vector& alpha_hat, const Vector& beta_hat, double epsilon = 0.05);

/// A statistic together with how its nuisance estimates are obtained.
struct Detector {
    StatisticKind kind = StatisticKind::AlphaCUSUM;
    double epsilon = 0.05;
    FitOptions fit;
};

/// Refits alpha (and beta for the drift statistics) on the interval, then
/// evaluates the statistic there.
TestOutcome run_interval_test(const PathSample& path, const DiffusionModel& model, const IntervalIndex& interval,
                              const Detector& detector);

enum class Schedule {
    UpperLower,          // upper fractions 1 - 2^-(k+1), then lower fractions 2^-(m+1)
    UpperLowerPrevious,  // lower fractions start from the previous upper fraction
    Symmetric,           // [tau_k, 1 - tau_k] with tau_k = 2^-(k+1)
};

std::string to_string(Schedule schedule);
Schedule schedule_from_string(const std::string& name);

struct LocalizationStep {
    std::string phase;  // "U", "L" or "S"
    double tau1 = 0.0;
    double tau2 = 1.0;
    TestOutcome outcome;
};

struct LocalizationResult {
    double tau_lower = 0.0;
    double tau_upper = 1.0;
    std::vector<LocalizationStep> steps;
    bool found = false;
    std::vector<std::string> notes;
};

struct LocalizeOptions {
    /// Minimum number of increments in a tested interval and in the excluded segment.
    std::int64_t min_increments = 16;
    /// Whether a full-sample test rejected beforehand; only recorded.
    bool full_sample_rejected = true;
};

/// Runs the schedule until the first detection of each phase and returns
/// [tau_lower, tau_upper]. found = false when a phase exhausts.
LocalizationResult localize(const PathSample& path, const DiffusionModel& model, const Detector& detector,
                            Schedule schedule, const LocalizeOptions& options = {});

/// Writes the step log as text, one tested interval per line.
std::string format_localization(const LocalizationResult& result);

}  // namespace dcp
