// Command-line front end: simulate, detect, estimate, limit, experiment, critvals.

#include "dcp/asymptotics.hpp"
#include "dcp/changepoint.hpp"
#include "dcp/critical_values.hpp"
#include "dcp/detect.hpp"
#include "dcp/errors.hpp"
#include "dcp/experiment.hpp"
#include "dcp/path_io.hpp"
#include "dcp/rng.hpp"
#include "dcp/stationary.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace dcp;

void apply_overrides(ExperimentConfig& config, const std::vector<std::string>& sets) {
    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        set_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
}

struct SimulateArgs {
    std::string config, out;
    std::vector<std::string> sets;
    std::int64_t replicate = 0;
};

int run_simulate(const SimulateArgs& a) {
    ExperimentConfig config = load_config(a.config);
    apply_overrides(config, a.sets);
    const ResolvedSetting s = resolve(config);
    const std::uint64_t seed = derive_seed(config.seed, static_cast<std::uint64_t>(a.replicate));
    const Vector x0 = s.x0 ? *s.x0 : stationary_sample(s.model, s.before, derive_seed(seed, 1));
    const SimulationGrid grid{s.n, s.h, config.substeps};
    const PathSample path = s.change ? simulate_path(s.model, *s.change, x0, grid, derive_seed(seed, 0))
                                     : simulate_path(s.model, s.before, x0, grid, derive_seed(seed, 0));
    if (a.out.empty()) write_path(std::cout, path);
    else save_path(a.out, path);
    return 0;
}

struct DetectArgs {
    std::string path, model = "ou", statistic = "alpha";
    double eps = 0.05, lo = 0.0, hi = 1.0;
};

int run_detect(const DetectArgs& a) {
    const PathSample path = load_path(a.path);
    const DiffusionModel model = model_by_name(a.model);
    const IntervalIndex iv = IntervalIndex::from_fractions(a.lo, a.hi, path.n());
    const TestOutcome t = run_interval_test(path, model, iv, {statistic_kind_from_string(a.statistic), a.eps, {}});
    std::cout << std::setprecision(10) << "statistic=" << t.statistic << "\ncritical=" << t.critical_value
              << "\nepsilon=" << t.epsilon << "\nkind=" << to_string(t.kind) << "\ninterval=" << t.interval.lo << ","
              << t.interval.hi << "\nargmax_k=" << t.argmax_k << "\nreject=" << (t.reject ? 1 : 0) << '\n';
    return 0;
}

struct EstimateArgs {
    std::string path, model = "ou", pipeline = "alpha", schedule = "upper-lower", detector = "beta2", curve;
    std::vector<double> bounds;
    double eps = 0.05;
    bool force = false;
};

int run_estimate(const EstimateArgs& a) {
    const PathSample path = load_path(a.path);
    const DiffusionModel model = model_by_name(a.model);
    PipelineConfig pc;
    pc.epsilon = a.eps;
    pc.schedule = schedule_from_string(a.schedule);
    pc.beta_detector = statistic_kind_from_string(a.detector);
    pc.force = a.force;
    pc.keep_curve = !a.curve.empty();
    if (!a.bounds.empty()) {
        if (a.bounds.size() != 2) throw ConfigError("--bounds expects two fractions");
        pc.known_bounds = std::make_pair(a.bounds[0], a.bounds[1]);
    }
    if (a.pipeline != "alpha" && a.pipeline != "beta") throw ConfigError("--pipeline expects alpha or beta");
    const ChangePointEstimate est =
        a.pipeline == "alpha" ? estimate_tau_alpha(path, model, pc) : estimate_tau_beta(path, model, pc);
    std::cout << format_estimate(est);
    if (!a.curve.empty()) {
        std::ofstream out(a.curve);
        if (!out) throw ConfigError("cannot write " + a.curve);
        write_curve(out, est.contrast_curve);
    }
    return 0;
}

struct LimitArgs {
    double j = 1.0, horizon = 0.0, grid_step = 0.0;
    std::int64_t samples = 100'000;
    std::uint64_t seed = 1;
    std::string out;
};

int run_limit(const LimitArgs& a) {
    LimitSamplerOptions opt;
    opt.samples = a.samples;
    opt.seed = a.seed;
    opt.horizon = a.horizon;
    opt.grid_step = a.grid_step;
    opt.threads = default_thread_count();
    const LimitLaw law = sample_limit_argmin(a.j, opt);
    std::ofstream file;
    if (!a.out.empty()) {
        file.open(a.out);
        if (!file) throw ConfigError("cannot write " + a.out);
    }
    std::ostream& out = a.out.empty() ? std::cout : file;
    out << std::setprecision(12);
    for (double v : law.samples) out << v << '\n';
    std::cerr << "samples=" << law.samples.size() << " resampled=" << law.resampled
              << " boundary_flags=" << law.boundary_flags << '\n';
    return 0;
}

struct ExperimentArgs {
    std::string config, output;
    std::vector<std::string> sets;
    double scale = 1.0;
    int threads = 0;
};

int run_experiment_cmd(const ExperimentArgs& a) {
    ExperimentConfig config = load_config(a.config);
    apply_overrides(config, a.sets);
    if (a.scale != 1.0) set_config_value(config, "scale", std::to_string(a.scale));
    if (!a.output.empty()) set_config_value(config, "output", a.output);
    if (a.threads > 0) config.threads = a.threads;
    const ExperimentReport report = run_experiment(config);
    write_report(report);
    std::cout << format_summary(report);
    std::cout << std::setprecision(4) << "wall_seconds = " << report.wall_seconds << '\n';
    return 0;
}

struct CritvalsArgs {
    std::vector<int> build;
    std::int64_t samples = BridgeOracle{}.samples;
    int grid = BridgeOracle{}.grid;
    std::uint64_t seed = BridgeOracle{}.seed;
    std::string file;
};

int run_critvals(const CritvalsArgs& a) {
    const std::string file = a.file.empty() ? default_critical_value_file() : a.file;
    BridgeOracle oracle;
    oracle.samples = a.samples;
    oracle.grid = a.grid;
    oracle.seed = a.seed;
    oracle.threads = default_thread_count();
    CriticalValueTable table;
    table.load(file);
    for (int k : a.build) {
        if (k < 2) throw ConfigError("--build takes dimensions >= 2 (k = 1 is exact)");
        table.curve(k, oracle);
        std::cerr << "built k=" << k << '\n';
    }
    if (!a.build.empty()) table.save(file);
    std::cout << std::setprecision(6) << "epsilon\tw_1";
    std::vector<int> ks;
    for (int k = 2; k <= kMaxDim; ++k)
        if (table.has(k, oracle)) ks.push_back(k);
    for (int k : ks) std::cout << "\tw_" << k;
    std::cout << '\n';
    for (double eps : {0.01, 0.025, 0.05, 0.1}) {
        std::cout << eps << '\t' << kolmogorov_quantile(eps);
        for (int k : ks) std::cout << '\t' << table.curve(k, oracle).at(eps);
        std::cout << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Change-point detection and estimation for discretely observed diffusions"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Simulate one path from an experiment config");
    c_sim->add_option("--config", sim.config, "Experiment config file")->required();
    c_sim->add_option("--set", sim.sets, "Override config entries (key=value)");
    c_sim->add_option("--replicate", sim.replicate, "Replicate index (selects the seed)");
    c_sim->add_option("--out", sim.out, "Output path file (default: stdout)");

    DetectArgs det;
    auto* c_det = app.add_subcommand("detect", "Run one test statistic on a path file");
    c_det->add_option("--path", det.path, "Path file")->required();
    c_det->add_option("--model", det.model, "ou or hyperbolic");
    c_det->add_option("--statistic", det.statistic, "alpha, beta1 or beta2");
    c_det->add_option("--eps", det.eps, "Significance level");
    c_det->add_option("--lo", det.lo, "Interval start as a fraction of T");
    c_det->add_option("--hi", det.hi, "Interval end as a fraction of T");

    EstimateArgs est;
    auto* c_est = app.add_subcommand("estimate", "Detect, localize and estimate the change point");
    c_est->add_option("--path", est.path, "Path file")->required();
    c_est->add_option("--model", est.model, "ou or hyperbolic");
    c_est->add_option("--pipeline", est.pipeline, "alpha or beta");
    c_est->add_option("--eps", est.eps, "Significance level");
    c_est->add_option("--schedule", est.schedule, "upper-lower, upper-lower-previous or symmetric");
    c_est->add_option("--detector", est.detector, "Drift statistic: beta1 or beta2");
    c_est->add_option("--bounds", est.bounds, "Known localization bounds, e.g. --bounds 0.25 0.75")->expected(2);
    c_est->add_flag("--force", est.force, "Estimate even when nothing is detected");
    c_est->add_option("--curve", est.curve, "Write the contrast curve (k value) to this file");

    LimitArgs lim;
    auto* c_lim = app.add_subcommand("limit", "Sample the limiting argmin law");
    c_lim->add_option("--j", lim.j, "Scale J > 0")->required();
    c_lim->add_option("--samples", lim.samples, "Number of draws");
    c_lim->add_option("--seed", lim.seed, "Seed");
    c_lim->add_option("--horizon", lim.horizon, "Half-width of the simulated window (default 40/J)");
    c_lim->add_option("--grid-step", lim.grid_step, "Walk step (default horizon/2^14)");
    c_lim->add_option("--out", lim.out, "Output file, one draw per line (default: stdout)");

    ExperimentArgs exp;
    auto* c_exp = app.add_subcommand("experiment", "Run a Monte Carlo experiment from a config file");
    c_exp->add_option("--config", exp.config, "Experiment config file")->required();
    c_exp->add_option("--scale", exp.scale, "Multiply n by this factor");
    c_exp->add_option("--set", exp.sets, "Override config entries (key=value)");
    c_exp->add_option("--output", exp.output, "Report file prefix");
    c_exp->add_option("--threads", exp.threads, "Worker threads (default: DCP_THREADS or all cores)");

    CritvalsArgs crit;
    auto* c_crit = app.add_subcommand("critvals", "Build or show the sup-norm bridge critical values");
    c_crit->add_option("--build", crit.build, "Dimensions k >= 2 to simulate and store");
    c_crit->add_option("--samples", crit.samples, "Bridge paths per dimension");
    c_crit->add_option("--grid", crit.grid, "Grid points per path");
    c_crit->add_option("--seed", crit.seed, "Seed");
    c_crit->add_option("--file", crit.file, "Cache file (default: shipped table or DCP_CRITVAL_FILE)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e, std::cerr, std::cerr);
        std::cerr << app.help();
        return 1;
    }

    try {
        if (*c_sim) return run_simulate(sim);
        if (*c_det) return run_detect(det);
        if (*c_est) return run_estimate(est);
        if (*c_lim) return run_limit(lim);
        if (*c_exp) return run_experiment_cmd(exp);
        if (*c_crit) return run_critvals(crit);
    } catch (const dcp::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const dcp::NoChangeLocalized& e) {
        std::cerr << "no change: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
