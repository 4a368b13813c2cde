#pragma once

#include <cmath>
#include <vector>

#include "popgame/popgame.hpp"

namespace testutil {

// Seeded draw helper for property suites.
class Draw {
  public:
    explicit Draw(std::uint64_t seed) : rng_(seed) {}

    double uniform(double a, double b) { return a + (b - a) * rng_.next_double(); }

    popgame::GameParams game(double gap_lo_frac, double gap_hi_frac) {
        popgame::GameParams p;
        p.morality = uniform(0.5, 4.0);
        p.price_unclean = uniform(0.1, 2.0);
        const double half_m = 0.5 * p.morality;
        p.price_clean = p.price_unclean + half_m * uniform(gap_lo_frac, gap_hi_frac);
        return p;
    }

    // Uniform point on the 2-simplex.
    popgame::PopulationMix mix3() {
        double a = rng_.next_double(), b = rng_.next_double();
        if (a > b) std::swap(a, b);
        return popgame::PopulationMix{a, b - a, 1.0 - b};
    }

    popgame::PopulationMix mix2() {
        const double a = rng_.next_double();
        return popgame::PopulationMix::two_type(a);
    }

    popgame::SplitMix64& rng() { return rng_; }

  private:
    popgame::SplitMix64 rng_;
};

inline std::vector<double> z_values(const std::vector<popgame::EquilibriumPoint>& pts) {
    std::vector<double> out;
    out.reserve(pts.size());
    for (const auto& e : pts) out.push_back(e.z);
    return out;
}

inline bool sets_match(const std::vector<double>& a, const std::vector<double>& b,
                       double tol = 1e-9) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::fabs(a[i] - b[i]) > tol) return false;
    return true;
}

// Bisection root of a monotone-bracketed scalar function; the independent
// route for checking closed-form root formulas.
template <typename Fn>
double bisect(Fn&& f, double lo, double hi, int iters = 200) {
    double flo = f(lo);
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((flo <= 0.0) == (fm <= 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace testutil
