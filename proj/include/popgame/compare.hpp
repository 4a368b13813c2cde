#pragma once

#include <cmath>

namespace popgame {

// Absolute tolerance for threshold comparisons: adoption level vs 1/2, price
// gap vs m/2, utility gap vs 0, set membership. The closed-form regime
// analysis branches on exact equalities that floating point cannot honor, so
// every such branch goes through these helpers.
inline constexpr double kEpsCmp = 1e-9;

inline bool approx_eq(double a, double b, double eps = kEpsCmp) {
    return std::fabs(a - b) <= eps;
}

// a >= b, allowing eps of slack below.
inline bool approx_ge(double a, double b, double eps = kEpsCmp) {
    return a >= b - eps;
}

inline bool approx_le(double a, double b, double eps = kEpsCmp) {
    return a <= b + eps;
}

// a > b by more than eps.
inline bool approx_gt(double a, double b, double eps = kEpsCmp) {
    return a > b + eps;
}

inline bool approx_lt(double a, double b, double eps = kEpsCmp) {
    return a < b - eps;
}

}  // namespace popgame
