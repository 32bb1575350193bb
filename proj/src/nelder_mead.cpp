#include "dcp/nelder_mead.hpp"

#include "dcp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace dcp {

namespace {

Vector clamp_to(const Box& bounds, const Vector& x) {
    Vector c = x;
    for (Eigen::Index i = 0; i < x.size(); ++i)
        c[i] = std::clamp(x[i], bounds[static_cast<std::size_t>(i)].lo, bounds[static_cast<std::size_t>(i)].hi);
    return c;
}

struct Run {
    Vector best;
    double value;
    int iterations;
    bool converged;
};

Run run_simplex(const std::function<double(const Vector&)>& f, const Vector& start, const Vector& steps,
                const NelderMeadOptions& opt) {
    const auto dim = start.size();
    const int max_iter = opt.max_iter_per_dim * static_cast<int>(dim);
    std::vector<Vector> x(static_cast<std::size_t>(dim + 1), start);
    std::vector<double> fx(static_cast<std::size_t>(dim + 1));
    for (Eigen::Index j = 0; j < dim; ++j) x[static_cast<std::size_t>(j + 1)][j] += steps[j];
    for (std::size_t j = 0; j < x.size(); ++j) fx[j] = f(x[j]);

    std::vector<std::size_t> order(x.size());
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
        std::vector<Vector> xs(x.size());
        std::vector<double> fs(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) {
            xs[k] = x[order[k]];
            fs[k] = fx[order[k]];
        }
        x.swap(xs);
        fx.swap(fs);
    };

    const auto n = static_cast<std::size_t>(dim);
    int iter = 0;
    bool converged = false;
    for (; iter < max_iter; ++iter) {
        sort_simplex();
        double spread_x = 0.0;
        for (std::size_t j = 1; j <= n; ++j) spread_x = std::max(spread_x, (x[j] - x[0]).cwiseAbs().maxCoeff());
        if (std::abs(fx[n] - fx[0]) <= opt.f_tol && spread_x <= opt.x_tol) {
            converged = true;
            break;
        }

        Vector centroid = Vector::Zero(dim);
        for (std::size_t j = 0; j < n; ++j) centroid += x[j];
        centroid /= static_cast<double>(n);

        const Vector xr = centroid + (centroid - x[n]);
        const double fr = f(xr);
        if (fr < fx[0]) {
            const Vector xe = centroid + 2.0 * (xr - centroid);
            const double fe = f(xe);
            if (fe < fr) {
                x[n] = xe;
                fx[n] = fe;
            } else {
                x[n] = xr;
                fx[n] = fr;
            }
        } else if (fr < fx[n - 1]) {
            x[n] = xr;
            fx[n] = fr;
        } else {
            const bool outside = fr < fx[n];
            const Vector xc = outside ? Vector(centroid + 0.5 * (xr - centroid)) : Vector(centroid + 0.5 * (x[n] - centroid));
            const double fc = f(xc);
            if (fc < (outside ? fr : fx[n])) {
                x[n] = xc;
                fx[n] = fc;
            } else {
                for (std::size_t j = 1; j <= n; ++j) {
                    x[j] = x[0] + 0.5 * (x[j] - x[0]);
                    fx[j] = f(x[j]);
                }
            }
        }
    }
    sort_simplex();
    return {x[0], fx[0], iter, converged};
}

}  // namespace

NelderMeadResult minimize_bounded(const std::function<double(const Vector&)>& objective, const Vector& init,
                                  const Box& bounds, const NelderMeadOptions& options) {
    if (init.size() == 0 || static_cast<std::size_t>(init.size()) != bounds.size())
        throw std::invalid_argument("initial point and bounds disagree in dimension");

    auto penalized = [&](const Vector& x) {
        const Vector c = clamp_to(bounds, x);
        const double excess = (x - c).squaredNorm();
        return objective(c) + options.penalty * excess;
    };

    Vector steps(init.size());
    for (Eigen::Index i = 0; i < init.size(); ++i) {
        const auto& b = bounds[static_cast<std::size_t>(i)];
        double s = options.initial_step * b.width();
        // step towards the interior when starting on the upper face
        if (init[i] + s > b.hi) s = -s;
        steps[i] = s;
    }

    Run run = run_simplex(penalized, clamp_to(bounds, init), steps, options);
    int total_iterations = run.iterations;

    RandomStream jitter(options.jitter_seed);
    for (int r = 0; r < options.restarts; ++r) {
        Vector restart_steps(init.size());
        for (Eigen::Index i = 0; i < init.size(); ++i) {
            const double base = std::max(100.0 * options.x_tol, 0.01 * std::abs(steps[i]));
            restart_steps[i] = base * (0.5 + jitter.uniform());
            if (run.best[i] + restart_steps[i] > bounds[static_cast<std::size_t>(i)].hi) restart_steps[i] = -restart_steps[i];
        }
        Run next = run_simplex(penalized, run.best, restart_steps, options);
        total_iterations += next.iterations;
        const double improvement = run.value - next.value;
        if (next.value <= run.value) run = next;
        if (improvement <= options.f_tol) break;
    }

    return {clamp_to(bounds, run.best), objective(clamp_to(bounds, run.best)), total_iterations, run.converged};
}

}  // namespace dcp
