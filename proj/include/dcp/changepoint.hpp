#pragma once

#include "dcp/detect.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dcp {

/// Smallest index attaining the minimum. Throws InvalidContrast on NaN.
std::int64_t argmin_over_grid(const std::vector<double>& curve);

struct PipelineConfig {
    double epsilon = 0.05;
    Schedule schedule = Schedule::UpperLower;
    /// Statistic used to detect and localize a drift change.
    StatisticKind beta_detector = StatisticKind::Beta2CUSUM;
    /// Skips detection and localization when set.
    std::optional<std::pair<double, double>> known_bounds;
    /// Continue with [1/4, 3/4] when nothing is detected instead of throwing.
    bool force = false;
    bool keep_curve = false;
    FitOptions fit;
    std::int64_t min_increments = 16;
    /// Known pre/post nuisance values; the corresponding fits are skipped.
    std::optional<std::pair<Vector, Vector>> known_nuisance;
};

struct ChangePointEstimate {
    std::int64_t k_hat = 0;
    double tau_hat = 0.0;
    Vector alpha_hat;   // drift pipeline: full-sample diffusion estimate
    Vector before_hat;  // alpha_1 or beta_1
    Vector after_hat;   // alpha_2 or beta_2
    EstimationResult before_fit;
    EstimationResult after_fit;
    std::vector<double> contrast_curve;  // k = 0..n, when requested
    std::optional<TestOutcome> full_sample_test;
    LocalizationResult localization;
    std::vector<std::string> warnings;
};

/// Diffusion-parameter change: alpha_1 on [1, floor(n tau_lower)], alpha_2 on
/// [floor(n tau_upper) + 1, n], then the argmin of Phi_n over k = 0..n.
ChangePointEstimate estimate_tau_alpha(const PathSample& path, const DiffusionModel& model,
                                       const PipelineConfig& config = {});

/// Drift-parameter change: alpha on the full sample, beta_1 and beta_2 on the
/// localized outer segments, then the argmin of Psi_n over k = 0..n.
ChangePointEstimate estimate_tau_beta(const PathSample& path, const DiffusionModel& model,
                                      const PipelineConfig& config = {});

/// Structured text summary of an estimate.
std::string format_estimate(const ChangePointEstimate& estimate);

}  // namespace dcp
