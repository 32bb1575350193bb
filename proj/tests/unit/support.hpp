#pragma once

#include "dcp/model.hpp"
#include "dcp/quasi_likelihood.hpp"

#include <cmath>
#include <vector>

namespace dcp::testkit {

/// a(x, alpha) = [[alpha1, alpha2], [0, alpha3]], drift -beta x (one rate per coordinate).
inline DiffusionModel triangular_model() {
    DiffusionModel m;
    m.id = "triangular";
    m.dim_state = 2;
    m.dim_alpha = 3;
    m.dim_beta = 2;
    m.drift = [](const Vector& x, const Vector& beta) {
        return make_vector({-beta[0] * x[0], -beta[1] * x[1]});
    };
    m.diffusion = [](const Vector&, const Vector& alpha) {
        Matrix a(2, 2);
        a << alpha[0], alpha[1], 0.0, alpha[2];
        return a;
    };
    m.alpha_bounds = {{0.05, 5.0}, {-5.0, 5.0}, {0.05, 5.0}};
    m.beta_bounds = {{0.05, 10.0}, {0.05, 10.0}};
    return m;
}

/// Analytic dA/dalpha_l for the triangular model.
inline std::vector<Matrix> triangular_covariance_derivatives(const Vector& alpha) {
    Matrix d1(2, 2), d2(2, 2), d3(2, 2);
    d1 << 2 * alpha[0], 0, 0, 0;
    d2 << 2 * alpha[1], alpha[2], alpha[2], 0;
    d3 << 0, alpha[1], alpha[1], 2 * alpha[2];
    return {d1, d2, d3};
}

/// a(x, alpha) = sigma(x) diag(alpha1, alpha2) with a state-dependent sigma.
inline DiffusionModel scaled_diagonal_model() {
    DiffusionModel m;
    m.id = "scaled-diagonal";
    m.dim_state = 2;
    m.dim_alpha = 2;
    m.dim_beta = 2;
    m.drift = [](const Vector& x, const Vector& beta) {
        return make_vector({-beta[0] * x[0], -beta[1] * x[1]});
    };
    auto sigma = [](const Vector& x) {
        Matrix s(2, 2);
        s << 1.0, 0.3, 0.2 * std::sin(x[0]), 1.0 + 0.25 * std::cos(x[1]);
        return s;
    };
    m.diffusion_scale = sigma;
    m.diffusion = [sigma](const Vector& x, const Vector& alpha) {
        Matrix a = sigma(x);
        a.col(0) *= alpha[0];
        a.col(1) *= alpha[1];
        return a;
    };
    m.alpha_bounds = {{0.01, 10.0}, {0.01, 10.0}};
    m.beta_bounds = {{0.05, 10.0}, {0.05, 10.0}};
    return m;
}

/// Scalar path with the given states.
inline PathSample scalar_path(const std::vector<double>& states, double h) {
    return PathSample(static_cast<std::int64_t>(states.size()) - 1, h, 1, states);
}

inline double relative_diff(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

/// Noise-free path x_i = x_{i-1} + h b(x_{i-1}, beta_k), switching to beta2 at increment k0 + 1.
inline PathSample noiseless_path(const DiffusionModel& model, const Vector& beta1, const Vector& beta2,
                                 std::int64_t k0, std::int64_t n, double h, double x0) {
    std::vector<double> states{x0};
    Vector x = make_vector({x0});
    for (std::int64_t i = 1; i <= n; ++i) {
        x += h * model.drift(x, i <= k0 ? beta1 : beta2);
        states.push_back(x[0]);
    }
    return scalar_path(states, h);
}

}  // namespace dcp::testkit
