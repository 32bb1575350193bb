#include "dcp/stationary.hpp"

#include "dcp/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dcp {

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 61>;

constexpr double kQuadratureTail = 1e-14;

}  // namespace

HyperbolicDensity::HyperbolicDensity(double alpha, double beta, double gamma)
    : alpha_(alpha), beta_(beta), gamma_(gamma) {
    if (!(alpha > 0.0)) throw std::invalid_argument("hyperbolic density needs alpha > 0");
    if (!(gamma > std::abs(beta)))
        throw NonIntegrableDensity("hyperbolic density is not integrable unless gamma > |beta|");
    // beta = gamma x / sqrt(1 + x^2) at the mode
    mode_ = beta / std::sqrt(gamma * gamma - beta * beta);
    log_peak_ = log_m(mode_);

    double half = 1.0;
    while (tail_bound(mode_ + half) > kQuadratureTail || tail_bound(mode_ - half) > kQuadratureTail) half *= 2.0;
    lower_ = mode_ - half;
    upper_ = mode_ + half;

    double err = 0.0;
    const double mass = Kronrod::integrate([this](double x) { return std::exp(log_m(x) - log_peak_); }, lower_,
                                           upper_, 25, 1e-14, &err);
    log_normalizer_ = std::log(mass);
}

double HyperbolicDensity::log_m(double x) const {
    return 2.0 / (alpha_ * alpha_) * (beta_ * x - gamma_ * std::sqrt(1.0 + x * x));
}

double HyperbolicDensity::log_density(double x) const { return log_m(x) - log_peak_ - log_normalizer_; }

double HyperbolicDensity::operator()(double x) const { return std::exp(log_density(x)); }

// Tail mass beyond x (away from the mode) is bounded by pi(x) / |(log pi)'(x)|
// because log m is concave.
double HyperbolicDensity::tail_bound(double x) const {
    const double slope = 2.0 / (alpha_ * alpha_) * (beta_ - gamma_ * x / std::sqrt(1.0 + x * x));
    const double density = std::exp(log_m(x) - log_peak_ - log_normalizer_);
    if (slope == 0.0) return std::numeric_limits<double>::infinity();
    return density / std::abs(slope);
}

double HyperbolicDensity::symmetric_extent(double tail_mass) const {
    double x = std::max(1.0, 2.0 * std::abs(mode_));
    while (tail_bound(x) > tail_mass || tail_bound(-x) > tail_mass) x *= 2.0;
    double lo = std::max(std::abs(mode_), x / 2.0), hi = x;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (tail_bound(mid) > tail_mass || tail_bound(-mid) > tail_mass)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

double HyperbolicDensity::expectation(const std::function<double(double)>& f) const {
    double err = 0.0;
    return Kronrod::integrate([&](double x) { return f(x) * (*this)(x); }, lower_, upper_, 25, 1e-13, &err);
}

double hyperbolic_invariant_density(double x, double alpha, double beta, double gamma) {
    return HyperbolicDensity(alpha, beta, gamma)(x);
}

StationarySampler::StationarySampler(const DiffusionModel& model, const ModelParams& params) {
    if (!model.alpha_in_bounds(params.alpha) || !model.beta_admissible(params.beta))
        throw std::invalid_argument("stationary sampler parameters outside bounds");
    if (model.id == "ou") {
        const double alpha = params.alpha[0], rate = params.beta[0], mean = params.beta[1];
        law_ = Gaussian{mean, alpha / std::sqrt(2.0 * rate)};
        return;
    }
    if (model.id == "hyperbolic") {
        const HyperbolicDensity density(params.alpha[0], params.beta[0], params.beta[1]);
        extent_ = density.symmetric_extent(kTailMass);
        Tabulated table;
        table.x.resize(kGridPoints);
        table.cdf.resize(kGridPoints);
        const double step = 2.0 * extent_ / (kGridPoints - 1);
        double previous = 0.0;
        for (int i = 0; i < kGridPoints; ++i) {
            table.x[i] = -extent_ + step * i;
            const double pdf = density(table.x[i]);
            table.cdf[i] = i == 0 ? 0.0 : table.cdf[i - 1] + 0.5 * step * (previous + pdf);
            previous = pdf;
        }
        const double total = table.cdf.back();
        for (double& c : table.cdf) c /= total;
        law_ = std::move(table);
        return;
    }
    throw NotImplemented("stationary sampling is only available for the built-in models (ou, hyperbolic)");
}

Vector StationarySampler::draw(RandomStream& rng) const {
    Vector out(1);
    if (const auto* g = std::get_if<Gaussian>(&law_)) {
        out[0] = g->mean + g->sd * rng.normal();
        return out;
    }
    const auto& t = std::get<Tabulated>(law_);
    const double u = rng.uniform();
    const auto it = std::upper_bound(t.cdf.begin(), t.cdf.end(), u);
    if (it == t.cdf.begin()) {
        out[0] = t.x.front();
    } else if (it == t.cdf.end()) {
        out[0] = t.x.back();
    } else {
        const auto hi = static_cast<std::size_t>(it - t.cdf.begin());
        const std::size_t lo = hi - 1;
        const double span = t.cdf[hi] - t.cdf[lo];
        const double w = span > 0.0 ? (u - t.cdf[lo]) / span : 0.0;
        out[0] = t.x[lo] + w * (t.x[hi] - t.x[lo]);
    }
    return out;
}

Vector stationary_sample(const DiffusionModel& model, const ModelParams& params, std::uint64_t seed) {
    RandomStream rng(seed);
    return StationarySampler(model, params).draw(rng);
}

}  // namespace dcp
