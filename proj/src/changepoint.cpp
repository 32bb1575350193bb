#include "dcp/changepoint.hpp"

#include "dcp/errors.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace dcp {

std::int64_t argmin_over_grid(const std::vector<double>& curve) {
    if (curve.empty()) throw std::invalid_argument("empty contrast curve");
    std::int64_t best = 0;
    for (std::size_t k = 0; k < curve.size(); ++k) {
        if (std::isnan(curve[k])) throw InvalidContrast("contrast is NaN at k = " + std::to_string(k));
        if (curve[k] < curve[static_cast<std::size_t>(best)]) best = static_cast<std::int64_t>(k);
    }
    return best;
}

namespace {

void resolve_bounds(const PathSample& path, const DiffusionModel& model, const PipelineConfig& config,
                    StatisticKind kind, ChangePointEstimate& out) {
    if (config.known_bounds) {
        const auto [lo, hi] = *config.known_bounds;
        if (!(0.0 < lo && lo < hi && hi < 1.0)) throw std::invalid_argument("known bounds must satisfy 0 < lower < upper < 1");
        out.localization.tau_lower = lo;
        out.localization.tau_upper = hi;
        out.localization.found = true;
        out.localization.notes.push_back("bounds supplied by the caller");
        return;
    }
    Detector detector{kind, config.epsilon, config.fit};
    const TestOutcome full = run_interval_test(path, model, IntervalIndex::full(path.n()), detector);
    out.full_sample_test = full;
    if (!full.reject && !config.force)
        throw NoChangeLocalized("full-sample " + to_string(kind) + " test did not reject");
    LocalizeOptions options;
    options.min_increments = config.min_increments;
    options.full_sample_rejected = full.reject;
    out.localization = localize(path, model, detector, config.schedule, options);
    if (!out.localization.found) {
        if (!config.force) throw NoChangeLocalized("localization found no interval containing the change");
        out.localization.tau_lower = 0.25;
        out.localization.tau_upper = 0.75;
        out.warnings.push_back("localization failed; using [1/4, 3/4]");
    }
}

std::pair<IntervalIndex, IntervalIndex> outer_segments(const PathSample& path, const LocalizationResult& loc) {
    const std::int64_t n = path.n();
    const IntervalIndex before{1, floor_index(loc.tau_lower, n), n};
    const IntervalIndex after{floor_index(loc.tau_upper, n) + 1, n, n};
    if (!before.valid() || !after.valid())
        throw NoChangeLocalized("localized bounds leave an empty segment for nuisance estimation");
    return {before, after};
}

void finish(ChangePointEstimate& out, const SplitContrast& contrast, const PathSample& path, bool keep_curve) {
    std::vector<double> curve = contrast.curve();
    out.k_hat = argmin_over_grid(curve);
    out.tau_hat = static_cast<double>(out.k_hat) / static_cast<double>(path.n());
    if (keep_curve) out.contrast_curve = std::move(curve);
}

}  // namespace

ChangePointEstimate estimate_tau_alpha(const PathSample& path, const DiffusionModel& model,
                                       const PipelineConfig& config) {
    ChangePointEstimate out;
    if (config.known_nuisance) {
        out.before_hat = config.known_nuisance->first;
        out.after_hat = config.known_nuisance->second;
        out.localization.notes.push_back("nuisance values supplied by the caller");
    } else {
        resolve_bounds(path, model, config, StatisticKind::AlphaCUSUM, out);
        const auto [before, after] = outer_segments(path, out.localization);
        out.before_fit = estimate_alpha(path, before, model, config.fit);
        out.after_fit = estimate_alpha(path, after, model, config.fit);
        out.before_hat = out.before_fit.params;
        out.after_hat = out.after_fit.params;
    }
    finish(out, phi_contrast(path, model, out.before_hat, out.after_hat), path, config.keep_curve);
    return out;
}

ChangePointEstimate estimate_tau_beta(const PathSample& path, const DiffusionModel& model,
                                      const PipelineConfig& config) {
    ChangePointEstimate out;
    out.alpha_hat = estimate_alpha(path, IntervalIndex::full(path.n()), model, config.fit).params;
    if (config.known_nuisance) {
        out.before_hat = config.known_nuisance->first;
        out.after_hat = config.known_nuisance->second;
        out.localization.notes.push_back("nuisance values supplied by the caller");
    } else {
        resolve_bounds(path, model, config, config.beta_detector, out);
        const auto [before, after] = outer_segments(path, out.localization);
        out.before_fit = estimate_beta(path, before, model, out.alpha_hat, config.fit);
        out.after_fit = estimate_beta(path, after, model, out.alpha_hat, config.fit);
        out.before_hat = out.before_fit.params;
        out.after_hat = out.after_fit.params;
    }
    finish(out, psi_contrast(path, model, out.before_hat, out.after_hat, out.alpha_hat), path, config.keep_curve);
    return out;
}

namespace {

std::string join(const Vector& v) {
    std::ostringstream s;
    s << std::setprecision(12);
    for (Eigen::Index i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
    return s.str();
}

}  // namespace

std::string format_estimate(const ChangePointEstimate& estimate) {
    std::ostringstream out;
    out << std::setprecision(12);
    if (estimate.full_sample_test) {
        const auto& t = *estimate.full_sample_test;
        out << "full_test statistic=" << t.statistic << " critical=" << t.critical_value
            << " kind=" << to_string(t.kind) << " reject=" << (t.reject ? 1 : 0) << '\n';
    }
    out << format_localization(estimate.localization);
    if (estimate.alpha_hat.size() > 0) out << "alpha_hat=" << join(estimate.alpha_hat) << '\n';
    out << "before_hat=" << join(estimate.before_hat) << '\n';
    out << "after_hat=" << join(estimate.after_hat) << '\n';
    out << "k_hat=" << estimate.k_hat << '\n';
    out << "tau_hat=" << estimate.tau_hat << '\n';
    for (const auto& w : estimate.warnings) out << "warning " << w << '\n';
    return out.str();
}

}  // namespace dcp
