#include "dcp/critical_values.hpp"

#include "dcp/errors.hpp"
#include "dcp/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#ifndef DCP_DEFAULT_CRITVAL_CACHE
#define DCP_DEFAULT_CRITVAL_CACHE "data/critical_values.txt"
#endif

namespace dcp {

double kolmogorov_survival(double x) {
    if (x <= 0.0) return 1.0;
    if (x < 1.0) {
        // theta-function form converges fast for small x
        const double pi2 = std::numbers::pi * std::numbers::pi;
        double cdf = 0.0;
        for (int j = 1; j <= 50; ++j) {
            const double odd = 2.0 * j - 1.0;
            cdf += std::exp(-odd * odd * pi2 / (8.0 * x * x));
        }
        cdf *= std::sqrt(2.0 * std::numbers::pi) / x;
        return 1.0 - cdf;
    }
    double s = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * x * x);
        s += (j % 2 == 1 ? term : -term);
        if (term < 1e-300) break;
    }
    return 2.0 * s;
}

double kolmogorov_quantile(double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
    double lo = 1e-3, hi = 10.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (kolmogorov_survival(mid) > epsilon) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

double QuantileCurve::at(double epsilon) const {
    if (values.size() != static_cast<std::size_t>(kLevels)) throw std::logic_error("incomplete quantile curve");
    const double pos = epsilon / kStep - 1.0;
    if (pos < -1e-9 || pos > kLevels - 1 + 1e-9)
        throw std::invalid_argument("epsilon outside the tabulated range [0.001, 0.5]");
    const double clamped = std::clamp(pos, 0.0, static_cast<double>(kLevels - 1));
    const auto j = static_cast<std::size_t>(std::floor(clamped));
    if (j + 1 >= values.size()) return values.back();
    const double frac = clamped - static_cast<double>(j);
    return values[j] + frac * (values[j + 1] - values[j]);
}

std::vector<double> simulate_bridge_sup(int k, const BridgeOracle& oracle) {
    if (k < 1) throw std::invalid_argument("bridge dimension must be >= 1");
    if (oracle.grid < 2 || oracle.samples < 1) throw std::invalid_argument("invalid bridge oracle parameters");
    constexpr std::int64_t kChunk = 4096;
    const std::int64_t chunks = (oracle.samples + kChunk - 1) / kChunk;
    std::vector<double> out(static_cast<std::size_t>(oracle.samples));
    std::atomic<std::int64_t> next{0};

    auto worker = [&]() {
        const int m = oracle.grid;
        const double sd = 1.0 / std::sqrt(static_cast<double>(m));
        std::vector<double> walk(static_cast<std::size_t>(k) * static_cast<std::size_t>(m));
        std::vector<double> norm2(static_cast<std::size_t>(m));
        for (std::int64_t c = next++; c < chunks; c = next++) {
            RandomStream rng(derive_seed(oracle.seed, static_cast<std::uint64_t>(c)));
            const std::int64_t end = std::min(oracle.samples, (c + 1) * kChunk);
            for (std::int64_t s = c * kChunk; s < end; ++s) {
                std::fill(norm2.begin(), norm2.end(), 0.0);
                for (int coord = 0; coord < k; ++coord) {
                    double* w = walk.data() + static_cast<std::size_t>(coord) * static_cast<std::size_t>(m);
                    double acc = 0.0;
                    for (int t = 0; t < m; ++t) {
                        acc += sd * rng.normal();
                        w[t] = acc;
                    }
                    const double end_value = acc;
                    for (int t = 0; t < m; ++t) {
                        const double b = w[t] - (static_cast<double>(t + 1) / m) * end_value;
                        norm2[static_cast<std::size_t>(t)] += b * b;
                    }
                }
                out[static_cast<std::size_t>(s)] = std::sqrt(*std::max_element(norm2.begin(), norm2.end()));
            }
        }
    };

    int threads = oracle.threads > 0 ? oracle.threads : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min<int>(threads, static_cast<int>(chunks)));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    std::sort(out.begin(), out.end());
    return out;
}

QuantileCurve quantiles_from_sorted(const std::vector<double>& sorted) {
    if (sorted.empty()) throw std::invalid_argument("no draws");
    QuantileCurve curve;
    curve.values.resize(QuantileCurve::kLevels);
    const double n = static_cast<double>(sorted.size());
    for (int j = 0; j < QuantileCurve::kLevels; ++j) {
        const double eps = (j + 1) * QuantileCurve::kStep;
        // empirical (1 - eps)-quantile with linear interpolation between order statistics
        const double pos = (1.0 - eps) * (n - 1.0);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, sorted.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        curve.values[static_cast<std::size_t>(j)] = sorted[lo] + frac * (sorted[hi] - sorted[lo]);
    }
    return curve;
}

const QuantileCurve& CriticalValueTable::curve(int k, const BridgeOracle& oracle) {
    std::lock_guard<std::mutex> lock(mutex_);
    const Key key{k, oracle};
    auto it = curves_.find(key);
    if (it != curves_.end()) return it->second;
    QuantileCurve c = quantiles_from_sorted(simulate_bridge_sup(k, oracle));
    return curves_.emplace(key, std::move(c)).first->second;
}

bool CriticalValueTable::has(int k, const BridgeOracle& oracle) const {
    std::lock_guard<std::mutex> lock(mutex_);
    return curves_.count({k, oracle}) > 0;
}

void CriticalValueTable::load(const std::string& file) {
    std::ifstream in(file);
    if (!in) return;
    std::map<Key, QuantileCurve> loaded;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag != "entry") throw ConfigError(file + ":" + std::to_string(line_no) + ": expected 'entry'");
        int k = 0;
        BridgeOracle oracle;
        QuantileCurve curve;
        bool have_k = false, have_grid = false, have_samples = false, have_seed = false;
        std::string field;
        try {
            while (ss >> field) {
                const auto eq = field.find('=');
                if (eq == std::string::npos) throw ConfigError("missing '='");
                const std::string key = field.substr(0, eq), value = field.substr(eq + 1);
                if (key == "k") k = std::stoi(value), have_k = true;
                else if (key == "grid") oracle.grid = std::stoi(value), have_grid = true;
                else if (key == "samples") oracle.samples = std::stoll(value), have_samples = true;
                else if (key == "seed") oracle.seed = std::stoull(value), have_seed = true;
                else if (key == "quantiles") {
                    std::istringstream vs(value);
                    std::string item;
                    while (std::getline(vs, item, ',')) curve.values.push_back(std::stod(item));
                } else {
                    throw ConfigError("unknown field '" + key + "'");
                }
            }
        } catch (const std::logic_error& e) {
            throw ConfigError(file + ":" + std::to_string(line_no) + ": bad number (" + e.what() + ")");
        } catch (const ConfigError& e) {
            throw ConfigError(file + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (!(have_k && have_grid && have_samples && have_seed) ||
            curve.values.size() != static_cast<std::size_t>(QuantileCurve::kLevels))
            throw ConfigError(file + ":" + std::to_string(line_no) + ": incomplete entry");
        loaded[{k, oracle}] = std::move(curve);
    }
    std::lock_guard<std::mutex> lock(mutex_);
    for (auto& [key, curve] : loaded) curves_.emplace(key, std::move(curve));
}

void CriticalValueTable::save(const std::string& file) const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::ofstream out(file);
    if (!out) throw ConfigError("cannot write " + file);
    out << "# upper quantiles of sup ||B0_k|| at epsilon = 0.001, 0.002, ..., 0.5\n";
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const auto& [key, curve] : curves_) {
        out << "entry k=" << key.first << " grid=" << key.second.grid << " samples=" << key.second.samples
            << " seed=" << key.second.seed << " quantiles=";
        for (std::size_t j = 0; j < curve.values.size(); ++j) out << (j ? "," : "") << curve.values[j];
        out << '\n';
    }
}

std::string default_critical_value_file() {
    if (const char* env = std::getenv("DCP_CRITVAL_FILE")) return env;
    return DCP_DEFAULT_CRITVAL_CACHE;
}

CriticalValueTable& CriticalValueTable::global() {
    static CriticalValueTable* table = [] {
        auto* t = new CriticalValueTable();
        t->load(default_critical_value_file());
        return t;
    }();
    return *table;
}

double critical_value(int k, double epsilon, const BridgeOracle& oracle) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
    if (k == 1) return kolmogorov_quantile(epsilon);
    return CriticalValueTable::global().curve(k, oracle).at(epsilon);
}

}  // namespace dcp
