#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "popgame/compare.hpp"
#include "popgame/errors.hpp"
#include "popgame/game.hpp"

namespace popgame {

enum class Provenance { closed_form, brute_force };

// One equilibrium adoption level together with the type-wise clean shares
// that realize it: z = alpha_r*mu_r + alpha_h*mu_h + alpha_l*mu_l. Herding
// agents move as one block (mu_h is 0 or 1, ties resolved toward clean);
// lethargic agents never adopt.
struct EquilibriumPoint {
    double z = 0.0;
    double mu_r = 0.0;
    double mu_h = 0.0;
    double mu_l = 0.0;
    bool stable = false;
    Provenance provenance = Provenance::closed_form;
};

// The attractors of the turn-by-turn dynamics for one parameter regime.
struct StableSet {
    std::vector<EquilibriumPoint> points;  // ascending in z, all stable
    std::string regime_label;              // which classification row matched
};

namespace detail {

using GapFn = std::function<double(double)>;

inline void sort_dedupe(std::vector<EquilibriumPoint>& pts, double eps) {
    std::sort(pts.begin(), pts.end(),
              [](const EquilibriumPoint& a, const EquilibriumPoint& b) { return a.z < b.z; });
    std::vector<EquilibriumPoint> out;
    for (const auto& e : pts) {
        if (!out.empty() && approx_eq(out.back().z, e.z, eps)) continue;
        out.push_back(e);
    }
    pts = std::move(out);
}

// Expected one-step movement of the adoption process at state z, with the
// rational best response derived from an arbitrary utility-gap function.
// Comparisons are exact, matching the process definition (ties toward
// clean): a tolerance here would smear a spurious tie band of z-width
// eps/|gap'| around each indifference level, which dwarfs the attractor
// sampling window when the band is nearly degenerate.
inline double drift_with_gap(double z, const GapFn& gap, const PopulationMix& mix) {
    double m = -z;
    if (gap(z) >= 0.0) m += mix.alpha_r;
    if (z >= 0.5) m += mix.alpha_h;
    return m;
}

// Structural points of the drift: its discontinuities plus every equilibrium
// candidate. Used to shrink attractor test neighborhoods so a sampled window
// never straddles one of them.
inline std::vector<double> structural_points(const GameParams& p, const PopulationMix& mix,
                                             double eps = kEpsCmp) {
    std::vector<double> s{0.0, 1.0, 0.5, mix.alpha_h, mix.alpha_r, mix.alpha_r + mix.alpha_h};
    if (auto band = indifference_band(p, eps)) {
        s.push_back(band->lower);
        s.push_back(band->upper);
    }
    return s;
}

inline bool is_attractor_impl(double z_star, const GapFn& gap, const PopulationMix& mix,
                              const std::vector<double>& structural, double radius,
                              double eps) {
    double r = radius;
    for (double c : structural)
        if (!approx_eq(c, z_star, eps)) r = std::min(r, 0.5 * std::fabs(c - z_star));

    constexpr int kSamples = 64;
    if (z_star > eps) {
        const double lo = std::max(0.0, z_star - r);
        for (int i = 1; i <= kSamples; ++i) {
            const double x = z_star - (z_star - lo) * i / (kSamples + 1);
            if (!(drift_with_gap(x, gap, mix) > 0.0)) return false;
        }
    }
    if (z_star < 1.0 - eps) {
        const double hi = std::min(1.0, z_star + r);
        for (int i = 1; i <= kSamples; ++i) {
            const double x = z_star + (hi - z_star) * i / (kSamples + 1);
            if (!(drift_with_gap(x, gap, mix) < 0.0)) return false;
        }
    }
    return true;
}

// Equilibrium test for a single candidate level: herding follows the
// majority (ties toward clean), the rational share w solves
// z = alpha_r*w + alpha_h*mu_h, and every action w puts weight on must be a
// best response at z. A strictly positive gap forces w = 1, a strictly
// negative one w = 0, and indifference admits any w in [0,1]; the tolerance
// is applied in z-space so the test stays meaningful when alpha_r is tiny.
inline bool fixed_point_share(double z, const GapFn& gap, const PopulationMix& mix,
                              double eps, double* w_out, double* mu_h_out) {
    const double mu_h = approx_ge(z, 0.5, eps) ? 1.0 : 0.0;
    const double target = z - mix.alpha_h * mu_h;  // = alpha_r * w
    const double g = gap(z);
    double w;
    if (approx_gt(g, 0.0, eps)) {
        if (std::fabs(target - mix.alpha_r) > eps) return false;
        w = 1.0;
    } else if (approx_lt(g, 0.0, eps)) {
        if (std::fabs(target) > eps) return false;
        w = 0.0;
    } else {
        if (target < -eps || target > mix.alpha_r + eps) return false;
        w = mix.alpha_r > 0.0 ? std::clamp(target / mix.alpha_r, 0.0, 1.0) : 0.0;
    }
    if (w_out) *w_out = w;
    if (mu_h_out) *mu_h_out = mu_h;
    return true;
}

}  // namespace detail

// Expected one-step movement of the turn-by-turn process at state z. The
// lethargic fraction contributes nothing, so the same expression covers the
// two-type and three-type games.
inline double mean_drift(double z, const GameParams& p, const PopulationMix& mix) {
    detail::require_unit_interval(z, "adoption level z");
    return detail::drift_with_gap(
        z, [&](double x) { return utility_diff(x, p); }, mix);
}

// A point is an attractor when the drift pushes toward it from both sides:
// positive on a punctured left neighborhood, negative on a punctured right
// one. At the boundaries of [0,1] the missing side is vacuous. The test
// neighborhood defaults to 1e-3 per side and shrinks to half the gap when
// another candidate or drift discontinuity comes closer than that.
inline bool is_attractor(double z_star, const GameParams& p, const PopulationMix& mix,
                         double radius = 1e-3, double eps = kEpsCmp) {
    detail::require_unit_interval(z_star, "adoption level z");
    if (!(radius > 0.0)) throw std::invalid_argument("is_attractor: radius must be positive");
    return detail::is_attractor_impl(
        z_star, [&](double x) { return utility_diff(x, p); }, mix,
        detail::structural_points(p, mix, eps), radius, eps);
}

// Equilibria of the all-rational game: zero adoption always; both
// indifference levels when the band is interior; its degenerate midpoint
// when the moral ceiling exactly offsets the price gap.
inline std::vector<double> classical_ne_set(const GameParams& p, double eps = kEpsCmp) {
    p.validate();
    const auto band = indifference_band(p, eps);
    if (!band) return {0.0};
    if (approx_eq(band->lower, band->upper, eps)) return {0.0, 0.5};
    return {0.0, band->lower, band->upper};
}

// All multi-type aggregate mean-field equilibria (MT-AMFEs), enumerated in
// closed form. The fixed-point condition z = alpha_r*w + alpha_h*1{z>=1/2}
// forces w to 0 or 1 away from the indifference levels, so the candidates
// are exactly: 0, alpha_h, alpha_r, alpha_r+alpha_h, the two indifference
// levels, and 1/2 in the degenerate-band case. Each candidate survives iff
// the implied w lies in [0,1] and is a best response.
inline std::vector<EquilibriumPoint> mt_amfe_set(const GameParams& p, const PopulationMix& mix,
                                                 double eps = kEpsCmp) {
    p.validate();
    mix.validate();
    const double half_m = 0.5 * p.morality;
    const double gap = p.price_gap();
    const double rh = mix.alpha_r + mix.alpha_h;

    std::vector<EquilibriumPoint> pts;
    auto add = [&](double z, double w, double mu_h) {
        EquilibriumPoint e;
        e.z = z;
        e.mu_r = std::clamp(w, 0.0, 1.0);
        e.mu_h = mu_h;
        pts.push_back(e);
    };

    // Zero adoption is an equilibrium in every regime: clean pays strictly
    // less at z=0 and herding follows the unclean majority.
    add(0.0, 0.0, 0.0);

    if (approx_eq(gap, half_m, eps)) {
        // Degenerate band: rationals are indifferent only at z = 1/2.
        if (approx_gt(mix.alpha_h, 0.5, eps)) add(mix.alpha_h, 0.0, 1.0);
        if (approx_le(mix.alpha_h, 0.5, eps) && approx_ge(rh, 0.5, eps))
            add(0.5, mix.alpha_r > 0.0 ? (0.5 - mix.alpha_h) / mix.alpha_r : 0.0, 1.0);
    } else if (gap > half_m) {
        // Clean never pays for rationals.
        if (approx_gt(mix.alpha_h, 0.5, eps)) {
            add(mix.alpha_h, 0.0, 1.0);
        } else if (approx_eq(mix.alpha_h, 0.5, eps)) {
            add(0.5, 0.0, 1.0);
        }
    } else {
        const auto band = *indifference_band(p, eps);
        // Below the majority threshold herding stays out: z = alpha_r * w.
        if (approx_gt(mix.alpha_r, band.lower, eps) && approx_lt(mix.alpha_r, 0.5, eps))
            add(mix.alpha_r, 1.0, 0.0);
        if (approx_ge(mix.alpha_r, band.lower, eps) && mix.alpha_r > 0.0)
            add(band.lower, band.lower / mix.alpha_r, 0.0);
        // At or above the threshold the herding block joins: z = alpha_r*w + alpha_h.
        if (approx_ge(rh, 0.5, eps) && approx_lt(rh, band.upper, eps)) add(rh, 1.0, 1.0);
        if (approx_gt(mix.alpha_h, band.upper, eps)) add(mix.alpha_h, 0.0, 1.0);
        if (approx_le(mix.alpha_h, band.upper, eps) && approx_ge(rh, band.upper, eps))
            add(band.upper,
                mix.alpha_r > 0.0 ? (band.upper - mix.alpha_h) / mix.alpha_r : 0.0, 1.0);
    }

    detail::sort_dedupe(pts, eps);
    for (auto& e : pts) e.stable = is_attractor(e.z, p, mix, 1e-3, eps);
    return pts;
}

// Rational-plus-herding equilibria (alpha-RNEs). With two types the
// multi-type notion coincides with the alpha-RNE, so the same enumeration
// applies; it reduces to the classical set whenever alpha_r >= 1/2.
inline std::vector<EquilibriumPoint> alpha_rne_set(const GameParams& p, const PopulationMix& mix,
                                                   double eps = kEpsCmp) {
    if (std::fabs(mix.alpha_l) > 1e-12)
        throw std::invalid_argument("alpha_rne_set requires a two-type mix (alpha_l = 0)");
    return mt_amfe_set(p, mix, eps);
}

// Independent fixed-point scan: every grid level plus the closed-form
// candidates, each tested directly against the equilibrium condition. Serves
// as the oracle for mt_amfe_set.
inline std::vector<EquilibriumPoint> brute_force_equilibria(const GameParams& p,
                                                            const PopulationMix& mix,
                                                            std::size_t grid_n = 10000,
                                                            double eps = kEpsCmp) {
    p.validate();
    mix.validate();
    if (grid_n < 1000)
        throw std::invalid_argument("brute_force_equilibria: grid_n must be at least 1000");

    const auto gap_fn = [&](double x) { return utility_diff(x, p); };

    std::vector<double> candidates;
    candidates.reserve(grid_n + 9);
    for (std::size_t i = 0; i <= grid_n; ++i)
        candidates.push_back(static_cast<double>(i) / static_cast<double>(grid_n));
    candidates.insert(candidates.end(),
                      {0.0, mix.alpha_h, mix.alpha_r, mix.alpha_r + mix.alpha_h, 0.5});
    if (auto band = indifference_band(p, eps)) {
        candidates.push_back(band->lower);
        candidates.push_back(band->upper);
    }

    std::vector<EquilibriumPoint> pts;
    for (double z : candidates) {
        if (z < 0.0 || z > 1.0) continue;
        double w = 0.0, mu_h = 0.0;
        if (!detail::fixed_point_share(z, gap_fn, mix, eps, &w, &mu_h)) continue;
        EquilibriumPoint e;
        e.z = z;
        e.mu_r = w;
        e.mu_h = mu_h;
        e.provenance = Provenance::brute_force;
        pts.push_back(e);
    }
    detail::sort_dedupe(pts, eps);
    for (auto& e : pts) e.stable = is_attractor(e.z, p, mix, 1e-3, eps);
    return pts;
}

// Closed-form stable set: the regime row matching (p, mix). Throws
// RegimeAmbiguityError when the inputs sit within tolerance of a row
// boundary, since neighboring rows genuinely disagree there. A price gap
// within tolerance of morality/2 is treated as the degenerate high-gap
// regime rather than ambiguous, matching the degenerate-band convention of
// indifference_band.
inline StableSet stable_set(const GameParams& p, const PopulationMix& mix,
                            double eps = kEpsCmp) {
    p.validate();
    mix.validate();
    const double half_m = 0.5 * p.morality;
    const double gap = p.price_gap();
    const double rh = mix.alpha_r + mix.alpha_h;
    const bool two_type = std::fabs(mix.alpha_l) <= 1e-12;

    std::vector<EquilibriumPoint> pts;
    auto add = [&](double z, double w, double mu_h) {
        EquilibriumPoint e;
        e.z = z;
        e.mu_r = std::clamp(w, 0.0, 1.0);
        e.mu_h = mu_h;
        e.stable = true;
        pts.push_back(e);
    };
    add(0.0, 0.0, 0.0);

    std::string row;
    if (approx_ge(gap, half_m, eps)) {
        if (approx_eq(mix.alpha_h, 0.5, eps))
            throw RegimeAmbiguityError("alpha_h vs 1/2 (price gap at or above morality/2)");
        if (mix.alpha_h > 0.5) {
            add(mix.alpha_h, 0.0, 1.0);
            row = "dP>=m/2 & aH>1/2 -> {0, aH}";
        } else {
            row = "dP>=m/2 & aH<=1/2 -> {0}";
        }
    } else {
        const auto band = *indifference_band(p, eps);
        if (approx_eq(mix.alpha_r, 0.5, eps))
            throw RegimeAmbiguityError("alpha_r vs 1/2");
        if (approx_eq(mix.alpha_r, band.lower, eps))
            throw RegimeAmbiguityError("alpha_r vs lower indifference level");
        if (approx_eq(mix.alpha_h, band.upper, eps))
            throw RegimeAmbiguityError("alpha_h vs upper indifference level");
        if (approx_eq(rh, band.upper, eps))
            throw RegimeAmbiguityError("alpha_r+alpha_h vs upper indifference level");
        if (!two_type && approx_eq(rh, 0.5, eps))
            throw RegimeAmbiguityError("alpha_r+alpha_h vs 1/2");

        const bool low_point = mix.alpha_r > band.lower && mix.alpha_r < 0.5;
        if (low_point) add(mix.alpha_r, 1.0, 0.0);

        std::string high;
        if (mix.alpha_h > band.upper) {
            add(mix.alpha_h, 0.0, 1.0);
            high = "aH>R+ -> aH";
        } else if (rh >= band.upper) {
            add(band.upper, (band.upper - mix.alpha_h) / mix.alpha_r, 1.0);
            high = "aH<=R+<=aR+aH -> R+";
        } else if (rh > 0.5) {
            add(rh, 1.0, 1.0);
            high = "1/2<aR+aH<R+ -> aR+aH";
        } else {
            high = "aR+aH<1/2 -> none";
        }
        row = std::string("dP<m/2 & ") + (low_point ? "R-<aR<1/2 -> aR" : "no low point") +
              " & " + high;
    }

    detail::sort_dedupe(pts, eps);

    // The table rows must agree with the first-principles classification;
    // a mismatch here is an internal inconsistency, not a caller error.
    const auto amfe = mt_amfe_set(p, mix, eps);
    for (const auto& e : pts) {
        if (!is_attractor(e.z, p, mix, 1e-3, eps))
            throw std::logic_error("stable_set: table row produced a non-attractor");
        const bool member = std::any_of(amfe.begin(), amfe.end(), [&](const EquilibriumPoint& a) {
            return approx_eq(a.z, e.z, std::max(eps, 1e-9));
        });
        if (!member) throw std::logic_error("stable_set: table row produced a non-equilibrium");
    }

    StableSet out;
    out.points = std::move(pts);
    out.regime_label = (two_type ? "two-type | " : "three-type | ") + row;
    return out;
}

}  // namespace popgame
