#include "dcp/experiment.hpp"

#include "dcp/errors.hpp"
#include "dcp/rng.hpp"
#include "dcp/stationary.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace dcp {

namespace {

class ExpressionParser {
public:
    ExpressionParser(const std::string& text, double n) : s_(text), n_(n) {}

    double parse() {
        const double v = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("bad expression '" + s_ + "': " + what);
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    double number() {
        skip();
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s_.substr(pos_), &used);
        } catch (const std::logic_error&) {
            fail("expected a number");
        }
        pos_ += used;
        return v;
    }
    double expr() {
        double v = term();
        for (;;) {
            if (eat('+')) v += term();
            else if (eat('-')) v -= term();
            else return v;
        }
    }
    double term() {
        double v = unary();
        for (;;) {
            if (eat('*')) v *= unary();
            else if (eat('/')) v /= unary();
            else return v;
        }
    }
    double unary() {
        if (eat('-')) return -unary();
        if (eat('+')) return unary();
        return power();
    }
    double power() {
        const double base = primary();
        if (!eat('^')) return base;
        return std::pow(base, exponent());
    }
    double exponent() {
        if (eat('(')) {
            const double v = expr();
            if (!eat(')')) fail("missing ')'");
            return v;
        }
        double sign = 1.0;
        if (eat('-')) sign = -1.0;
        else eat('+');
        double v = number();
        if (eat('/')) v /= number();
        return sign * v;
    }
    double primary() {
        skip();
        if (eat('(')) {
            const double v = expr();
            if (!eat(')')) fail("missing ')'");
            return v;
        }
        if (eat('n')) return n_;
        return number();
    }

    const std::string& s_;
    double n_;
    std::size_t pos_ = 0;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::istringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError("empty list item in '" + value + "'");
        out.push_back(item);
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
    std::istringstream ss(value);
    T v{};
    ss >> v;
    if (!ss || !(ss >> std::ws).eof()) throw ConfigError(key + ": expected a number, got '" + value + "'");
    return v;
}

std::string join(const Vector& v) {
    std::ostringstream s;
    s << std::setprecision(12);
    for (Eigen::Index i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
    return s.str();
}

}  // namespace

double evaluate_expression(const std::string& text, double n) { return ExpressionParser(text, n).parse(); }

void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& value) {
    if (key == "name") c.name = value;
    else if (key == "model") c.model = value;
    else if (key == "pipeline") {
        if (value != "alpha" && value != "beta" && value != "detect")
            throw ConfigError("pipeline: expected alpha, beta or detect");
        c.pipeline = value;
    } else if (key == "change") {
        if (value != "alpha" && value != "beta" && value != "none")
            throw ConfigError("change: expected alpha, beta or none");
        c.change = value;
    } else if (key == "tau_star") c.tau_star = parse_number<double>(key, value);
    else if (key == "alpha") c.alpha = split_list(value);
    else if (key == "beta") c.beta = split_list(value);
    else if (key == "alpha_pre") c.alpha_pre = split_list(value);
    else if (key == "alpha_post") c.alpha_post = split_list(value);
    else if (key == "beta_pre") c.beta_pre = split_list(value);
    else if (key == "beta_post") c.beta_post = split_list(value);
    else if (key == "n") c.n = static_cast<std::int64_t>(std::llround(evaluate_expression(value, 0.0)));
    else if (key == "h") c.h_rule = value;
    else if (key == "substeps") c.substeps = parse_number<int>(key, value);
    else if (key == "x0") c.x0 = value;
    else if (key == "burn_in") c.burn_in = parse_number<double>(key, value);
    else if (key == "replicates") c.replicates = parse_number<std::int64_t>(key, value);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "schedule") c.schedule = schedule_from_string(value);
    else if (key == "beta_detector") c.beta_detector = statistic_kind_from_string(value);
    else if (key == "statistics") {
        c.statistics.clear();
        for (const auto& s : split_list(value)) c.statistics.push_back(statistic_kind_from_string(s));
    } else if (key == "epsilon") c.epsilon = parse_number<double>(key, value);
    else if (key == "force") c.force = parse_bool(key, value);
    else if (key == "compare_limit") c.compare_limit = parse_bool(key, value);
    else if (key == "limit_samples") c.limit_samples = parse_number<std::int64_t>(key, value);
    else if (key == "limit_seed") c.limit_seed = parse_number<std::uint64_t>(key, value);
    else if (key == "ks_threshold") c.ks_threshold = parse_number<double>(key, value);
    else if (key == "threads") c.threads = parse_number<int>(key, value);
    else if (key == "output") c.output = value;
    else if (key == "scale") c.scale = parse_number<double>(key, value);
    else throw ConfigError("unknown key '" + key + "'");

    auto it = std::find_if(c.source.begin(), c.source.end(), [&](const auto& kv) { return kv.first == key; });
    if (it != c.source.end()) it->second = value;
    else c.source.emplace_back(key, value);
}

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig config;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        try {
            set_config_value(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return config;
}

ExperimentConfig load_config(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config " + file);
    return parse_config(in);
}

DiffusionModel model_by_name(const std::string& name) {
    if (name == "ou") return make_ou_model();
    if (name == "hyperbolic") return make_hyperbolic_model();
    throw ConfigError("unknown model '" + name + "' (expected ou or hyperbolic)");
}

ResolvedSetting resolve(const ExperimentConfig& c) {
    ResolvedSetting r;
    r.model = model_by_name(c.model);
    if (!(c.scale > 0.0)) throw ConfigError("scale must be positive");
    r.n = static_cast<std::int64_t>(std::llround(static_cast<double>(c.n) * c.scale));
    if (r.n < 32) throw ConfigError("effective n must be at least 32");
    if (c.replicates < 1) throw ConfigError("replicates must be >= 1");
    const double nn = static_cast<double>(r.n);
    r.h = evaluate_expression(c.h_rule, nn);
    if (!(r.h > 0.0) || !std::isfinite(r.h)) throw ConfigError("h rule '" + c.h_rule + "' does not give h > 0");

    auto eval = [&](const std::vector<std::string>& exprs, const char* key, int dim) {
        if (exprs.size() != static_cast<std::size_t>(dim))
            throw ConfigError(std::string(key) + ": expected " + std::to_string(dim) + " values");
        Vector v(dim);
        for (int i = 0; i < dim; ++i) v[i] = evaluate_expression(exprs[static_cast<std::size_t>(i)], nn);
        return v;
    };
    const int p = r.model.dim_alpha, q = r.model.dim_beta;
    if (c.change == "alpha") {
        const Vector pre = eval(c.alpha_pre, "alpha_pre", p), post = eval(c.alpha_post, "alpha_post", p);
        const Vector shared = eval(c.beta, "beta", q);
        r.change = ChangeSpec::create(r.model, c.tau_star, ParameterBlock::Alpha, pre, post, shared);
        r.theta = r.change->magnitude();
    } else if (c.change == "beta") {
        const Vector pre = eval(c.beta_pre, "beta_pre", q), post = eval(c.beta_post, "beta_post", q);
        const Vector shared = eval(c.alpha, "alpha", p);
        r.change = ChangeSpec::create(r.model, c.tau_star, ParameterBlock::Beta, pre, post, shared);
        r.theta = r.change->magnitude();
    } else {
        if (c.pipeline != "detect") throw ConfigError("estimation pipelines need change = alpha or beta");
        r.before = {eval(c.alpha, "alpha", p), eval(c.beta, "beta", q)};
        r.after = r.before;
    }
    if (r.change) {
        r.before = r.change->params_before();
        r.after = r.change->params_after();
    }
    if (c.x0 != "stationary") {
        const auto items = split_list(c.x0);
        if (items.size() != static_cast<std::size_t>(r.model.dim_state)) throw ConfigError("x0 has the wrong dimension");
        Vector x(r.model.dim_state);
        for (std::size_t i = 0; i < items.size(); ++i) x[static_cast<Eigen::Index>(i)] = evaluate_expression(items[i], nn);
        r.x0 = x;
    }
    if (c.burn_in < 0.0) throw ConfigError("burn_in must be >= 0");
    if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
    return r;
}

int default_thread_count() {
    if (const char* env = std::getenv("DCP_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

ReplicateRecord run_replicate(const ExperimentConfig& config, const ResolvedSetting& s, std::int64_t index) {
    ReplicateRecord rec;
    rec.index = index;
    rec.seed = derive_seed(config.seed, static_cast<std::uint64_t>(index));
    const DiffusionModel& model = s.model;

    Vector x0 = s.x0 ? *s.x0 : stationary_sample(model, s.before, derive_seed(rec.seed, 1));
    if (config.burn_in > 0.0) {
        const auto steps = std::max<std::int64_t>(2, static_cast<std::int64_t>(std::ceil(config.burn_in / s.h)));
        const PathSample warm = simulate_path(model, s.before, x0, {steps, s.h, config.substeps}, derive_seed(rec.seed, 2));
        x0 = warm.state(warm.n());
    }
    rec.x0 = x0[0];
    const SimulationGrid grid{s.n, s.h, config.substeps};
    const PathSample path = s.change ? simulate_path(model, *s.change, x0, grid, derive_seed(rec.seed, 0))
                                     : simulate_path(model, s.before, x0, grid, derive_seed(rec.seed, 0));

    if (config.pipeline == "detect") {
        const IntervalIndex full = IntervalIndex::full(path.n());
        rec.alpha_hat = estimate_alpha(path, full, model).params;
        std::optional<Vector> beta_hat;
        for (StatisticKind kind : config.statistics) {
            if (kind == StatisticKind::AlphaCUSUM) {
                rec.tests.push_back(stat_alpha(path, model, full, rec.alpha_hat, config.epsilon));
                continue;
            }
            if (!beta_hat) beta_hat = estimate_beta(path, full, model, rec.alpha_hat).params;
            rec.tests.push_back(kind == StatisticKind::Beta1CUSUM
                                    ? stat_beta1(path, model, full, rec.alpha_hat, *beta_hat, config.epsilon)
                                    : stat_beta2(path, model, full, rec.alpha_hat, *beta_hat, config.epsilon));
        }
        return rec;
    }

    PipelineConfig pc;
    pc.epsilon = config.epsilon;
    pc.schedule = config.schedule;
    pc.beta_detector = config.beta_detector;
    pc.force = config.force;
    const ChangePointEstimate est =
        config.pipeline == "alpha" ? estimate_tau_alpha(path, model, pc) : estimate_tau_beta(path, model, pc);
    rec.full_test = est.full_sample_test;
    rec.localized = est.localization.found;
    rec.tau_lower = est.localization.tau_lower;
    rec.tau_upper = est.localization.tau_upper;
    rec.alpha_hat = est.alpha_hat;
    rec.before_hat = est.before_hat;
    rec.after_hat = est.after_hat;
    rec.k_hat = est.k_hat;
    rec.tau_hat = est.tau_hat;
    return rec;
}

namespace {

QuantitySummary summarize(const std::string& name, const std::vector<double>& values) {
    QuantitySummary q;
    q.name = name;
    q.count = static_cast<std::int64_t>(values.size());
    if (values.empty()) return q;
    double sum = 0.0;
    for (double v : values) sum += v;
    q.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - q.mean) * (v - q.mean);
        q.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return q;
}

double quantile(std::vector<double> v, double p) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

void add_vector_quantities(ExperimentSummary& summary, const std::string& name, const std::vector<ReplicateRecord>& recs,
                           Vector ReplicateRecord::*field) {
    const ReplicateRecord* first = nullptr;
    for (const auto& r : recs)
        if (r.ok && (r.*field).size() > 0) {
            first = &r;
            break;
        }
    if (!first) return;
    for (Eigen::Index j = 0; j < (first->*field).size(); ++j) {
        std::vector<double> vals;
        for (const auto& r : recs)
            if (r.ok && (r.*field).size() > j) vals.push_back((r.*field)[j]);
        summary.quantities.push_back(summarize(name + "_" + std::to_string(j), vals));
    }
}

ExperimentSummary aggregate(const ExperimentConfig& config, const ResolvedSetting& s,
                            const std::vector<ReplicateRecord>& recs) {
    ExperimentSummary out;
    for (const auto& r : recs) (r.ok ? out.succeeded : out.failed)++;
    const double ok = static_cast<double>(std::max<std::int64_t>(1, out.succeeded));
    if (config.pipeline == "detect") {
        add_vector_quantities(out, "alpha_hat", recs, &ReplicateRecord::alpha_hat);
        for (std::size_t t = 0; t < config.statistics.size(); ++t) {
            std::vector<double> stats;
            double rejected = 0.0;
            for (const auto& r : recs)
                if (r.ok) {
                    stats.push_back(r.tests[t].statistic);
                    rejected += r.tests[t].reject ? 1.0 : 0.0;
                }
            const std::string name = to_string(config.statistics[t]);
            out.quantities.push_back(summarize("statistic_" + name, stats));
            out.rates.emplace_back("reject_" + name, rejected / ok);
        }
        return out;
    }
    std::vector<double> tau, n_err, t_err;
    double full_reject = 0.0, localized = 0.0;
    const double nn = static_cast<double>(s.n), horizon = nn * s.h;
    out.rescale = config.pipeline == "alpha" ? nn * s.theta * s.theta : horizon * s.theta * s.theta;
    for (const auto& r : recs) {
        if (!r.ok) continue;
        tau.push_back(r.tau_hat);
        const double err = r.tau_hat - config.tau_star;
        n_err.push_back(nn * std::abs(err));
        t_err.push_back(horizon * std::abs(err));
        out.rescaled_errors.push_back(out.rescale * err);
        if (r.full_test && r.full_test->reject) full_reject += 1.0;
        if (r.localized) localized += 1.0;
    }
    out.quantities.push_back(summarize("tau_hat", tau));
    if (config.pipeline == "beta") add_vector_quantities(out, "alpha_hat", recs, &ReplicateRecord::alpha_hat);
    add_vector_quantities(out, "before", recs, &ReplicateRecord::before_hat);
    add_vector_quantities(out, "after", recs, &ReplicateRecord::after_hat);
    out.quantities.push_back(summarize("rescaled_error", out.rescaled_errors));
    out.rates.emplace_back("full_reject", full_reject / ok);
    out.rates.emplace_back("localized", localized / ok);
    out.q95_n_error = quantile(n_err, 0.95);
    out.q95_t_error = quantile(t_err, 0.95);
    return out;
}

double limit_j(const ExperimentConfig& config, const ResolvedSetting& s) {
    const DiffusionModel& m = s.model;
    if (config.pipeline == "alpha") {
        const Vector e = unit_direction(s.change->pre_params(), s.change->post_params());
        if (m.scaled_diagonal_diffusion()) return j_alpha(m, s.after.alpha, e, SampleMeasure{});
        return j_alpha(m, s.after.alpha, e, stationary_draws(m, s.after, 100'000, config.limit_seed));
    }
    const Vector e = unit_direction(s.change->pre_params(), s.change->post_params());
    if (m.dim_state == 1) return j_beta(m, s.after.alpha, s.after.beta, e, stationary_density(m, s.after));
    return j_beta(m, s.after.alpha, s.after.beta, e, stationary_draws(m, s.after, 100'000, config.limit_seed));
}

}  // namespace

double ExperimentReport::mean(const std::string& name) const {
    for (const auto& q : summary.quantities)
        if (q.name == name) return q.mean;
    throw std::out_of_range("no summarized quantity '" + name + "'");
}

double ExperimentReport::rate(const std::string& name) const {
    for (const auto& [key, value] : summary.rates)
        if (key == name) return value;
    throw std::out_of_range("no rate '" + name + "'");
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentReport report;
    report.config = config;
    report.setting = resolve(config);
    const ResolvedSetting& s = report.setting;
    if (config.pipeline != "detect" && config.pipeline != config.change)
        throw ConfigError("pipeline '" + config.pipeline + "' does not match change '" + config.change + "'");

    report.records.resize(static_cast<std::size_t>(config.replicates));
    std::atomic<std::int64_t> next{0};
    std::exception_ptr fatal;
    std::mutex fatal_mutex;
    auto worker = [&]() {
        for (std::int64_t i = next++; i < config.replicates; i = next++) {
            auto& slot = report.records[static_cast<std::size_t>(i)];
            try {
                slot = run_replicate(config, s, i);
            } catch (const NumericalError& e) {
                slot.index = i;
                slot.seed = derive_seed(config.seed, static_cast<std::uint64_t>(i));
                slot.ok = false;
                slot.message = e.what();
            } catch (const NoChangeLocalized& e) {
                slot.index = i;
                slot.seed = derive_seed(config.seed, static_cast<std::uint64_t>(i));
                slot.ok = false;
                slot.message = e.what();
            } catch (...) {
                std::lock_guard<std::mutex> lock(fatal_mutex);
                if (!fatal) fatal = std::current_exception();
                next = config.replicates;
            }
        }
    };
    int threads = config.threads > 0 ? config.threads : default_thread_count();
    threads = static_cast<int>(std::max<std::int64_t>(1, std::min<std::int64_t>(threads, config.replicates)));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (fatal) std::rethrow_exception(fatal);

    report.summary = aggregate(config, s, report.records);
    if (report.summary.failed * 10 > config.replicates)
        throw Error("aborted: " + std::to_string(report.summary.failed) + " of " + std::to_string(config.replicates) +
                    " replicates failed (first: " +
                    std::find_if(report.records.begin(), report.records.end(), [](const auto& r) { return !r.ok; })
                        ->message +
                    ")");

    if (config.compare_limit && config.pipeline != "detect" && !report.summary.rescaled_errors.empty()) {
        LimitSamplerOptions opt;
        opt.samples = config.limit_samples;
        opt.seed = config.limit_seed;
        opt.threads = threads;
        LimitLaw law = sample_limit_argmin(limit_j(config, s), opt);
        law.scale = report.summary.rescale;
        report.ks = compare_to_limit(report.summary.rescaled_errors, law, config.ks_threshold);
        report.limit = std::move(law);
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::string format_summary(const ExperimentReport& report) {
    const auto& c = report.config;
    const auto& s = report.setting;
    const auto& sum = report.summary;
    std::ostringstream out;
    out << std::setprecision(10);
    out << "# experiment " << c.name << '\n';
    out << "[config]\n";
    for (const auto& [key, value] : c.source)
        if (key != "threads") out << key << " = " << value << '\n';
    out << "[resolved]\n";
    out << "model = " << c.model << '\n' << "pipeline = " << c.pipeline << '\n' << "change = " << c.change << '\n';
    out << "n = " << s.n << '\n' << "h = " << s.h << "  # rule " << c.h_rule << '\n';
    out << "T = " << static_cast<double>(s.n) * s.h << '\n';
    out << "tau_star = " << c.tau_star << '\n';
    out << "alpha_before = " << join(s.before.alpha) << '\n' << "beta_before = " << join(s.before.beta) << '\n';
    out << "alpha_after = " << join(s.after.alpha) << '\n' << "beta_after = " << join(s.after.beta) << '\n';
    out << "theta = " << s.theta << '\n';
    out << "x0 = " << (s.x0 ? join(*s.x0) : std::string("stationary")) << '\n';
    out << "burn_in = " << c.burn_in << '\n' << "substeps = " << c.substeps << '\n';
    out << "replicates = " << c.replicates << '\n' << "seed = " << c.seed << '\n';
    out << "schedule = " << to_string(c.schedule) << '\n' << "beta_detector = " << to_string(c.beta_detector) << '\n';
    out << "epsilon = " << c.epsilon << '\n' << "force = " << (c.force ? "true" : "false") << '\n';
    out << "scale = " << c.scale << '\n' << "rng = " << kRngName << '\n';
    out << "[summary]\n";
    out << "succeeded = " << sum.succeeded << '\n' << "failed = " << sum.failed << '\n';
    for (const auto& q : sum.quantities)
        out << "mean." << q.name << " = " << q.mean << "\nsd." << q.name << " = " << q.sd << '\n';
    for (const auto& [name, value] : sum.rates) out << "rate." << name << " = " << value << '\n';
    if (c.pipeline != "detect") {
        out << "rescale = " << sum.rescale << '\n';
        out << "q95.n_abs_error = " << sum.q95_n_error << '\n' << "q95.T_abs_error = " << sum.q95_t_error << '\n';
    }
    if (report.ks && report.limit) {
        out << "[limit]\n";
        out << "j = " << report.limit->j_value << '\n' << "samples = " << report.limit->samples.size() << '\n';
        out << "resampled = " << report.limit->resampled << '\n'
            << "boundary_flags = " << report.limit->boundary_flags << '\n';
        out << "ks.statistic = " << report.ks->statistic << '\n' << "ks.p_value = " << report.ks->p_value << '\n';
        out << "ks.threshold = " << report.ks->threshold << '\n' << "ks.accept = " << (report.ks->accept ? 1 : 0) << '\n';
    }
    return out.str();
}

namespace {

void write_replicates(std::ostream& out, const ExperimentReport& report) {
    const auto& c = report.config;
    out << std::setprecision(12);
    out << "index\tseed\tok\tx0";
    if (c.pipeline == "detect") {
        out << "\talpha_hat";
        for (auto k : c.statistics) out << "\tstat_" << to_string(k) << "\treject_" << to_string(k);
    } else {
        out << "\tfull_statistic\tfull_reject\tlocalized\ttau_lower\ttau_upper\talpha_hat\tbefore\tafter\tk_hat\ttau_hat";
    }
    out << "\tmessage\n";
    for (const auto& r : report.records) {
        out << r.index << '\t' << r.seed << '\t' << (r.ok ? 1 : 0) << '\t' << r.x0;
        if (c.pipeline == "detect") {
            out << '\t' << join(r.alpha_hat);
            for (std::size_t t = 0; t < c.statistics.size(); ++t) {
                if (r.ok) out << '\t' << r.tests[t].statistic << '\t' << (r.tests[t].reject ? 1 : 0);
                else out << "\t\t";
            }
        } else {
            out << '\t' << (r.full_test ? r.full_test->statistic : 0.0) << '\t'
                << (r.full_test && r.full_test->reject ? 1 : 0) << '\t' << (r.localized ? 1 : 0) << '\t' << r.tau_lower
                << '\t' << r.tau_upper << '\t' << join(r.alpha_hat) << '\t' << join(r.before_hat) << '\t'
                << join(r.after_hat) << '\t' << r.k_hat << '\t' << r.tau_hat;
        }
        out << '\t' << r.message << '\n';
    }
}

void write_histogram(std::ostream& out, const std::vector<double>& empirical, const std::vector<double>& limit) {
    constexpr int kBins = 40;
    const double lo = quantile(limit, 0.005), hi = quantile(limit, 0.995);
    const double width = (hi - lo) / kBins;
    std::vector<std::int64_t> e(kBins, 0), l(kBins, 0);
    auto bin = [&](double v) { return std::clamp(static_cast<int>(std::floor((v - lo) / width)), 0, kBins - 1); };
    for (double v : empirical) ++e[static_cast<std::size_t>(bin(v))];
    for (double v : limit) ++l[static_cast<std::size_t>(bin(v))];
    out << std::setprecision(10) << "# left\tright\tempirical\tlimit (outer bins absorb the tails)\n";
    for (int b = 0; b < kBins; ++b)
        out << lo + b * width << '\t' << lo + (b + 1) * width << '\t' << e[static_cast<std::size_t>(b)] << '\t'
            << l[static_cast<std::size_t>(b)] << '\n';
}

std::ofstream open_output(const std::string& file) {
    std::ofstream out(file);
    if (!out) throw ConfigError("cannot write " + file);
    return out;
}

}  // namespace

void write_report(const ExperimentReport& report) {
    const std::string& prefix = report.config.output;
    if (prefix.empty()) return;
    {
        auto out = open_output(prefix + ".summary.txt");
        out << format_summary(report);
    }
    {
        auto out = open_output(prefix + ".replicates.tsv");
        write_replicates(out, report);
    }
    if (report.limit) {
        auto lim = open_output(prefix + ".limit.txt");
        lim << std::setprecision(12);
        for (double v : report.limit->samples) lim << v << '\n';
        auto hist = open_output(prefix + ".hist.txt");
        write_histogram(hist, report.summary.rescaled_errors, report.limit->samples);
    }
}

}  // namespace dcp
