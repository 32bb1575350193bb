#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace dcp {

/// Largest state or parameter dimension supported. Vectors and matrices use
/// inline storage of this capacity so hot loops never touch the heap.
inline constexpr int kMaxDim = 6;

using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// Closed interval [lo, hi] for one parameter coordinate.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v) const { return v >= lo && v <= hi; }
    bool strictly_contains(double v) const { return v > lo && v < hi; }
    double midpoint() const { return 0.5 * (lo + hi); }
    double width() const { return hi - lo; }
};

using Box = std::vector<Interval>;

inline bool box_contains(const Box& box, const Vector& v) {
    if (static_cast<std::size_t>(v.size()) != box.size()) return false;
    for (std::size_t i = 0; i < box.size(); ++i)
        if (!box[i].contains(v[static_cast<Eigen::Index>(i)])) return false;
    return true;
}

inline bool box_strictly_contains(const Box& box, const Vector& v) {
    if (static_cast<std::size_t>(v.size()) != box.size()) return false;
    for (std::size_t i = 0; i < box.size(); ++i)
        if (!box[i].strictly_contains(v[static_cast<Eigen::Index>(i)])) return false;
    return true;
}

inline Vector box_midpoint(const Box& box) {
    Vector m(static_cast<Eigen::Index>(box.size()));
    for (std::size_t i = 0; i < box.size(); ++i) m[static_cast<Eigen::Index>(i)] = box[i].midpoint();
    return m;
}

inline Vector make_vector(std::initializer_list<double> values) {
    Vector v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v[i++] = x;
    return v;
}

inline Vector make_vector(const std::vector<double>& values) {
    Vector v(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
    return v;
}

}  // namespace dcp
