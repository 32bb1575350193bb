#pragma once

#include "dcp/model.hpp"
#include "dcp/rng.hpp"

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

namespace dcp {

/// Invariant density of the hyperbolic diffusion, pi(x) = m(x) / M with
/// m(x) = exp(2 / alpha^2 (beta x - gamma sqrt(1 + x^2))).
class HyperbolicDensity {
public:
    /// Throws NonIntegrableDensity unless gamma > |beta|.
    HyperbolicDensity(double alpha, double beta, double gamma);

    double operator()(double x) const;
    double log_density(double x) const;
    double mode() const { return mode_; }

    /// Symmetric half-width with both tail masses below `tail_mass`.
    double symmetric_extent(double tail_mass) const;
    /// Range [lo, hi] carrying all but ~1e-14 of the mass; used for quadrature.
    double lower() const { return lower_; }
    double upper() const { return upper_; }

    /// Integral of f * pi over the quadrature range (adaptive Gauss-Kronrod).
    double expectation(const std::function<double(double)>& f) const;

private:
    double log_m(double x) const;
    double tail_bound(double x) const;

    double alpha_, beta_, gamma_;
    double mode_ = 0.0;
    double log_peak_ = 0.0;
    double log_normalizer_ = 0.0;  // log of integral of exp(log_m - log_peak)
    double lower_ = 0.0, upper_ = 0.0;
};

/// pi(x) for the hyperbolic model; M by adaptive quadrature on each call.
double hyperbolic_invariant_density(double x, double alpha, double beta, double gamma);

/// Exact draws from the invariant law of the built-in models: N(gamma,
/// alpha^2 / (2 beta)) for OU, inverse CDF on a tabulated grid for the
/// hyperbolic model.
class StationarySampler {
public:
    static constexpr int kGridPoints = 1 << 14;
    static constexpr double kTailMass = 1e-10;

    /// Throws NotImplemented for models other than the built-ins.
    StationarySampler(const DiffusionModel& model, const ModelParams& params);

    Vector draw(RandomStream& rng) const;

    double grid_extent() const { return extent_; }

private:
    struct Gaussian {
        double mean, sd;
    };
    struct Tabulated {
        std::vector<double> x;
        std::vector<double> cdf;
    };
    std::variant<Gaussian, Tabulated> law_;
    double extent_ = 0.0;
};

Vector stationary_sample(const DiffusionModel& model, const ModelParams& params, std::uint64_t seed);

}  // namespace dcp
