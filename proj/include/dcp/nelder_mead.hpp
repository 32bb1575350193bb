#pragma once

#include "dcp/types.hpp"

#include <cstdint>
#include <functional>

namespace dcp {

struct NelderMeadOptions {
    double f_tol = 1e-10;          // absolute spread of simplex values
    double x_tol = 1e-8;           // max vertex distance from the best vertex
    int max_iter_per_dim = 500;
    int restarts = 3;
    double initial_step = 0.1;     // fraction of each bound width
    double penalty = 1e6;          // quadratic penalty weight beyond the box
    std::uint64_t jitter_seed = 0x5eed;
};

struct NelderMeadResult {
    Vector x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Box-constrained Nelder-Mead. The objective is evaluated at the point
/// clamped into `bounds`, plus a quadratic penalty on the clamped distance;
/// the returned point always lies inside the box. After the first run the
/// search restarts from the best point with a fresh jittered simplex until a
/// restart stops improving or the restart budget is spent.
NelderMeadResult minimize_bounded(const std::function<double(const Vector&)>& objective, const Vector& init,
                                  const Box& bounds, const NelderMeadOptions& options = {});

}  // namespace dcp
