#pragma once

#include "dcp/asymptotics.hpp"
#include "dcp/changepoint.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dcp {

/// Evaluates an arithmetic expression in the variable n: numbers, n, + - * /,
/// parentheses and ^. The exponent after ^ may be a signed fraction literal,
/// so `n^-2/3` means n^(-2/3).
double evaluate_expression(const std::string& text, double n);

/// Flat `key = value` experiment description. Unknown keys are rejected.
///
/// Parameter keys hold comma-separated expressions: `alpha` and `beta` for
/// unchanged blocks, `<block>_pre` and `<block>_post` for the changed one.
struct ExperimentConfig {
    std::string name = "experiment";
    std::string model = "ou";
    std::string pipeline = "alpha";  // alpha | beta | detect
    std::string change = "alpha";    // alpha | beta | none
    double tau_star = 0.5;
    std::vector<std::string> alpha, beta, alpha_pre, alpha_post, beta_pre, beta_post;
    std::int64_t n = 1000;
    std::string h_rule = "n^-2/3";
    int substeps = 10;
    std::string x0 = "stationary";  // comma-separated values or `stationary`
    double burn_in = 0.0;           // time units simulated before t = 0
    std::int64_t replicates = 1;
    std::uint64_t seed = 1;
    Schedule schedule = Schedule::UpperLower;
    StatisticKind beta_detector = StatisticKind::Beta2CUSUM;
    std::vector<StatisticKind> statistics{StatisticKind::AlphaCUSUM, StatisticKind::Beta1CUSUM,
                                          StatisticKind::Beta2CUSUM};  // detect pipeline
    double epsilon = 0.05;
    bool force = true;
    bool compare_limit = false;
    std::int64_t limit_samples = 100'000;
    std::uint64_t limit_seed = 7;
    double ks_threshold = 0.15;
    int threads = 0;  // 0: DCP_THREADS, then hardware concurrency
    std::string output;  // report file prefix; empty writes nothing
    double scale = 1.0;  // multiplies n

    /// Keys in input order with their verbatim values.
    std::vector<std::pair<std::string, std::string>> source;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& file);
/// Sets one key from its text value (used by the parser and for overrides).
void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Numbers derived from a config at its effective n.
struct ResolvedSetting {
    DiffusionModel model;
    std::int64_t n = 0;
    double h = 0.0;
    ModelParams before;
    ModelParams after;
    std::optional<ChangeSpec> change;
    std::optional<Vector> x0;  // empty: stationary draw
    double theta = 0.0;        // Euclidean change magnitude
};

DiffusionModel model_by_name(const std::string& name);
ResolvedSetting resolve(const ExperimentConfig& config);

struct ReplicateRecord {
    std::int64_t index = 0;
    std::uint64_t seed = 0;
    bool ok = true;
    std::string message;
    double x0 = 0.0;  // first coordinate
    // pipelines
    std::optional<TestOutcome> full_test;
    bool localized = false;
    double tau_lower = 0.0, tau_upper = 1.0;
    Vector alpha_hat, before_hat, after_hat;
    std::int64_t k_hat = 0;
    double tau_hat = 0.0;
    // detect pipeline
    std::vector<TestOutcome> tests;
};

struct QuantitySummary {
    std::string name;
    double mean = 0.0;
    double sd = 0.0;
    std::int64_t count = 0;
};

struct ExperimentSummary {
    std::int64_t succeeded = 0;
    std::int64_t failed = 0;
    std::vector<QuantitySummary> quantities;
    std::vector<std::pair<std::string, double>> rates;  // rejection / localization frequencies
    double rescale = 1.0;  // n theta^2 (alpha) or T theta^2 (beta)
    std::vector<double> rescaled_errors;
    double q95_n_error = 0.0;  // 95th percentile of n |tau_hat - tau*|
    double q95_t_error = 0.0;  // 95th percentile of T |tau_hat - tau*|
};

struct ExperimentReport {
    ExperimentConfig config;
    ResolvedSetting setting;
    std::vector<ReplicateRecord> records;
    ExperimentSummary summary;
    std::optional<LimitLaw> limit;
    std::optional<KsComparison> ks;
    double wall_seconds = 0.0;

    /// Mean of a summarized quantity; throws if absent.
    double mean(const std::string& name) const;
    double rate(const std::string& name) const;
};

/// Simulates and analyses one replicate. Errors propagate.
ReplicateRecord run_replicate(const ExperimentConfig& config, const ResolvedSetting& setting, std::int64_t index);

/// All replicates on a worker pool, merged in index order. Replicates failing
/// with a numerical or localization error are recorded and excluded; more
/// than 10% failures throws.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Writes <output>.summary.txt, <output>.replicates.tsv and, with a limit
/// comparison, <output>.limit.txt and <output>.hist.txt. Contents depend only
/// on the config.
void write_report(const ExperimentReport& report);
std::string format_summary(const ExperimentReport& report);

int default_thread_count();

}  // namespace dcp
