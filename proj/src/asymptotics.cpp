#include "dcp/asymptotics.hpp"

#include "dcp/critical_values.hpp"
#include "dcp/errors.hpp"
#include "dcp/quasi_likelihood.hpp"
#include "dcp/rng.hpp"
#include "dcp/stationary.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace dcp {

Matrix xi_alpha(const DiffusionModel& model, const Vector& x, const Vector& alpha) {
    const Matrix inv = local_precision(model, x, alpha, 0).inverse;
    const auto d_a = model.covariance_derivatives(x, alpha);
    std::vector<Matrix> scaled;
    scaled.reserve(d_a.size());
    for (const auto& d : d_a) scaled.push_back(inv * d);
    const int p = model.dim_alpha;
    Matrix out(p, p);
    for (int l1 = 0; l1 < p; ++l1)
        for (int l2 = l1; l2 < p; ++l2) {
            const double v = (scaled[static_cast<std::size_t>(l1)] * scaled[static_cast<std::size_t>(l2)]).trace();
            out(l1, l2) = v;
            out(l2, l1) = v;
        }
    return out;
}

double gamma_alpha(const DiffusionModel& model, const Vector& x, const Vector& alpha1, const Vector& alpha2) {
    const Matrix inv1 = local_precision(model, x, alpha1, 0).inverse;
    const Matrix a2 = model.covariance(x, alpha2);
    if (Eigen::LLT<Matrix>(a2).info() != Eigen::Success) throw SingularDiffusion(0);
    // eigenvalues r of A1^{-1} A2 are real and positive; the value is sum(r - 1 - log r)
    const Matrix prod = inv1 * a2;
    const Eigen::VectorXcd ev = prod.eigenvalues();
    double out = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        const double r = ev[i].real();
        out += (r - 1.0) - std::log(r);
    }
    return std::max(0.0, out);
}

Matrix xi_beta(const DiffusionModel& model, const Vector& x, const Vector& alpha, const Vector& beta) {
    const Matrix inv = local_precision(model, x, alpha, 0).inverse;
    const Matrix db = model.drift_gradient(x, beta);
    const Matrix out = db.transpose() * inv * db;
    return 0.5 * (out + out.transpose());
}

double gamma_beta(const DiffusionModel& model, const Vector& x, const Vector& alpha, const Vector& beta1,
                  const Vector& beta2) {
    const Matrix inv = local_precision(model, x, alpha, 0).inverse;
    const Vector diff = model.drift(x, beta1) - model.drift(x, beta2);
    return std::max(0.0, diff.dot(inv * diff));
}

SampleMeasure stationary_draws(const DiffusionModel& model, const ModelParams& params, std::int64_t count,
                               std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("need at least one draw");
    const StationarySampler sampler(model, params);
    RandomStream rng(seed);
    SampleMeasure out;
    out.points.reserve(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i) out.points.push_back(sampler.draw(rng));
    return out;
}

DensityMeasure stationary_density(const DiffusionModel& model, const ModelParams& params) {
    if (model.id == "ou") {
        const double mean = params.beta[1];
        const double sd = params.alpha[0] / std::sqrt(2.0 * params.beta[0]);
        return {[mean, sd](double x) {
                    const double z = (x - mean) / sd;
                    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
                },
                mean - 12.0 * sd, mean + 12.0 * sd};
    }
    if (model.id == "hyperbolic") {
        auto density = std::make_shared<HyperbolicDensity>(params.alpha[0], params.beta[0], params.beta[1]);
        return {[density](double x) { return (*density)(x); }, density->lower(), density->upper()};
    }
    throw NotImplemented("no closed-form invariant density for model '" + model.id + "'");
}

Matrix integrate(const std::function<Matrix(const Vector&)>& f, const Measure& measure) {
    if (const auto* sample = std::get_if<SampleMeasure>(&measure)) {
        if (sample->points.empty()) throw std::invalid_argument("empty sample measure");
        Matrix sum = f(sample->points.front());
        for (std::size_t i = 1; i < sample->points.size(); ++i) sum += f(sample->points[i]);
        return sum / static_cast<double>(sample->points.size());
    }
    const auto& dens = std::get<DensityMeasure>(measure);
    Vector x0(1);
    x0[0] = 0.5 * (dens.lo + dens.hi);
    const Matrix shape = f(x0);
    Matrix out(shape.rows(), shape.cols());
    using Quadrature = boost::math::quadrature::gauss_kronrod<double, 61>;
    for (Eigen::Index r = 0; r < shape.rows(); ++r)
        for (Eigen::Index c = 0; c < shape.cols(); ++c) {
            auto integrand = [&](double x) {
                Vector v(1);
                v[0] = x;
                return f(v)(r, c) * dens.density(x);
            };
            out(r, c) = Quadrature::integrate(integrand, dens.lo, dens.hi, 25, 1e-12);
        }
    return out;
}

Vector unit_direction(const Vector& a, const Vector& b) {
    const Vector diff = a - b;
    const double norm = diff.norm();
    if (!(norm > 0.0)) throw std::invalid_argument("direction of identical vectors is undefined");
    return diff / norm;
}

namespace {

void check_unit(const Vector& e, int dim) {
    if (e.size() != dim) throw std::invalid_argument("direction has the wrong dimension");
    if (std::abs(e.norm() - 1.0) > 1e-9) throw std::invalid_argument("direction must have unit norm");
}

}  // namespace

double j_alpha(const DiffusionModel& model, const Vector& alpha0, const Vector& e_alpha, const Measure& measure) {
    check_unit(e_alpha, model.dim_alpha);
    Matrix xi;
    if (model.scaled_diagonal_diffusion()) {
        xi = xi_alpha(model, Vector::Zero(model.dim_state), alpha0);
    } else {
        xi = integrate([&](const Vector& x) { return xi_alpha(model, x, alpha0); }, measure);
    }
    return 0.5 * e_alpha.dot(xi * e_alpha);
}

double j_beta(const DiffusionModel& model, const Vector& alpha, const Vector& beta0, const Vector& e_beta,
              const Measure& measure) {
    check_unit(e_beta, model.dim_beta);
    const Matrix xi = integrate([&](const Vector& x) { return xi_beta(model, x, alpha, beta0); }, measure);
    return e_beta.dot(xi * e_beta);
}

namespace {

struct Draw {
    double argmin = 0.0;
    bool on_boundary = false;
};

/// One draw on [-steps, steps] grid nodes; ties resolve to the smallest v.
Draw draw_argmin(double j, double step, std::int64_t steps, RandomStream& rng) {
    const double sd = std::sqrt(step);
    const double scale = 2.0 * std::sqrt(j);
    // negative side first, generated outward from 0
    double best = 0.0;
    std::int64_t best_index = 0;
    double w = 0.0;
    for (std::int64_t i = 1; i <= steps; ++i) {
        w += sd * rng.normal();
        const double f = -scale * w + j * step * static_cast<double>(i);
        if (f <= best) {  // farther from 0 is smaller v on this side
            best = f;
            best_index = -i;
        }
    }
    w = 0.0;
    for (std::int64_t i = 1; i <= steps; ++i) {
        w += sd * rng.normal();
        const double f = -scale * w + j * step * static_cast<double>(i);
        if (f < best) {
            best = f;
            best_index = i;
        }
    }
    return {step * static_cast<double>(best_index), best_index == steps || best_index == -steps};
}

}  // namespace

LimitLaw sample_limit_argmin(double j, const LimitSamplerOptions& options) {
    if (!(j > 0.0) || !std::isfinite(j)) throw std::invalid_argument("j must be positive");
    if (options.samples < 1) throw std::invalid_argument("need at least one sample");
    const double horizon = options.horizon > 0.0 ? options.horizon : 40.0 / j;
    const double step = options.grid_step > 0.0 ? options.grid_step : horizon / 16384.0;
    const auto steps = static_cast<std::int64_t>(std::llround(horizon / step));
    if (steps < 1) throw std::invalid_argument("grid step exceeds the horizon");

    LimitLaw law;
    law.j_value = j;
    law.samples.resize(static_cast<std::size_t>(options.samples));
    std::vector<unsigned char> resampled(law.samples.size(), 0), flagged(law.samples.size(), 0);
    std::atomic<std::int64_t> next{0};
    auto worker = [&]() {
        for (std::int64_t s = next++; s < options.samples; s = next++) {
            RandomStream rng(derive_seed(options.seed, static_cast<std::uint64_t>(s)));
            std::int64_t span = steps;
            Draw d = draw_argmin(j, step, span, rng);
            for (int doubling = 0; d.on_boundary && doubling < options.max_doublings; ++doubling) {
                span *= 2;
                resampled[static_cast<std::size_t>(s)] = 1;
                d = draw_argmin(j, step, span, rng);
            }
            law.samples[static_cast<std::size_t>(s)] = d.argmin;
            flagged[static_cast<std::size_t>(s)] = d.on_boundary ? 1 : 0;
        }
    };
    int threads = options.threads > 0 ? options.threads : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min<int>(threads, static_cast<int>(std::min<std::int64_t>(options.samples, 256))));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (std::size_t i = 0; i < law.samples.size(); ++i) {
        law.resampled += resampled[i];
        law.boundary_flags += flagged[i];
    }
    return law;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("KS needs non-empty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, k = 0;
    double d = 0.0;
    while (i < a.size() && k < b.size()) {
        const double v = std::min(a[i], b[k]);
        while (i < a.size() && a[i] == v) ++i;
        while (k < b.size() && b[k] == v) ++k;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(k) / nb));
    }
    return d;
}

double ks_p_value(double distance, std::size_t n1, std::size_t n2) {
    if (n1 == 0 || n2 == 0) throw std::invalid_argument("KS needs non-empty samples");
    const double ne = static_cast<double>(n1) * static_cast<double>(n2) / static_cast<double>(n1 + n2);
    const double root = std::sqrt(ne);
    return std::clamp(kolmogorov_survival((root + 0.12 + 0.11 / root) * distance), 0.0, 1.0);
}

KsComparison compare_to_limit(const std::vector<double>& empirical, const LimitLaw& law, double threshold) {
    KsComparison out;
    out.threshold = threshold;
    out.statistic = ks_two_sample(empirical, law.samples);
    out.p_value = ks_p_value(out.statistic, empirical.size(), law.samples.size());
    out.accept = out.statistic <= threshold;
    return out;
}

}  // namespace dcp
