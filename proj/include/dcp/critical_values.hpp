#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

namespace dcp {

/// P(sup_{0<=s<=1} |B0(s)| > x) for a standard Brownian bridge.
double kolmogorov_survival(double x);

/// Upper-epsilon point of the Kolmogorov distribution.
double kolmogorov_quantile(double epsilon);

/// Parameters of the Monte Carlo oracle for w_k, k >= 2.
struct BridgeOracle {
    int grid = 4096;
    std::int64_t samples = 1'000'000;
    std::uint64_t seed = 0x5eed'b0d9'e000'0001ULL;
    int threads = 0;  // 0: hardware concurrency; does not affect the result

    bool operator<(const BridgeOracle& o) const {
        return std::tie(grid, samples, seed) < std::tie(o.grid, o.samples, o.seed);
    }
};

/// Upper quantiles of sup ||B0_k|| at epsilon = 0.001, 0.002, ..., 0.5.
struct QuantileCurve {
    static constexpr int kLevels = 500;
    static constexpr double kStep = 0.001;
    std::vector<double> values;  // values[j] is the quantile at epsilon = (j + 1) * kStep

    /// Linear interpolation in epsilon; epsilon must lie in [kStep, kLevels * kStep].
    double at(double epsilon) const;
};

/// Sorted draws of sup_{s in grid} ||B0_k(s)||, with k independent bridge coordinates.
std::vector<double> simulate_bridge_sup(int k, const BridgeOracle& oracle);

QuantileCurve quantiles_from_sorted(const std::vector<double>& sorted);

/// Write-once cache of w_k curves keyed by (k, grid, samples, seed), persisted
/// as key-value text.
class CriticalValueTable {
public:
    /// Quantile curve for dimension k, computed on first use.
    const QuantileCurve& curve(int k, const BridgeOracle& oracle);
    bool has(int k, const BridgeOracle& oracle) const;

    /// Adds entries from a cache file. Missing file is not an error; malformed content throws ConfigError.
    void load(const std::string& file);
    void save(const std::string& file) const;

    /// Process-wide table, preloaded from DCP_CRITVAL_FILE or the built-in data path.
    static CriticalValueTable& global();

private:
    using Key = std::pair<int, BridgeOracle>;
    mutable std::mutex mutex_;
    std::map<Key, QuantileCurve> curves_;
};

/// w_k(epsilon): Kolmogorov inversion for k = 1, cached Monte Carlo for k >= 2.
double critical_value(int k, double epsilon, const BridgeOracle& oracle = {});

/// Path of the shipped cache file.
std::string default_critical_value_file();

}  // namespace dcp
