#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "popgame/compare.hpp"
#include "popgame/errors.hpp"

namespace popgame {

// The binary technology choice faced by every agent.
enum class Action { CT = 1, UC = 2 };

// Scalar parameters of the clean-technology adoption game. Clean products
// carry a price disadvantage (price_clean > price_unclean); the morality
// coefficient scales the social-pressure term z(1-z)*morality that rewards
// adopting clean and penalizes declining it. env_weight is the sensitivity
// to the environmental damage term and enters only the environment-extended
// utilities.
struct GameParams {
    double price_clean = 2.0;
    double price_unclean = 1.0;
    double morality = 2.0;
    double env_weight = 0.0;

    double price_gap() const { return price_clean - price_unclean; }

    void validate() const {
        if (!(price_clean > price_unclean))
            throw std::invalid_argument("GameParams: price_clean must exceed price_unclean");
        if (!(morality > 0.0))
            throw std::invalid_argument("GameParams: morality must be positive");
        if (env_weight < 0.0)
            throw std::invalid_argument("GameParams: env_weight must be nonnegative");
        if (!std::isfinite(price_clean) || !std::isfinite(price_unclean) ||
            !std::isfinite(morality) || !std::isfinite(env_weight))
            throw std::invalid_argument("GameParams: parameters must be finite");
    }
};

// Behavioral composition of the population: rational, herding, and lethargic
// fractions. Two-type games set alpha_l = 0.
struct PopulationMix {
    double alpha_r = 1.0;
    double alpha_h = 0.0;
    double alpha_l = 0.0;

    void validate() const {
        auto in_unit = [](double a) { return a >= -1e-12 && a <= 1.0 + 1e-12; };
        if (!in_unit(alpha_r) || !in_unit(alpha_h) || !in_unit(alpha_l))
            throw std::invalid_argument("PopulationMix: fractions must lie in [0,1]");
        if (std::fabs(alpha_r + alpha_h + alpha_l - 1.0) > 1e-12)
            throw std::invalid_argument("PopulationMix: fractions must sum to 1");
    }

    static PopulationMix two_type(double alpha_r) {
        return PopulationMix{alpha_r, 1.0 - alpha_r, 0.0};
    }
};

// Actions a mixed choice puts strictly positive probability on.
struct ActionSupport {
    bool contains_ct = false;
    bool contains_uc = false;
};

namespace detail {
inline void require_unit_interval(double z, const char* what) {
    if (!(z >= 0.0 && z <= 1.0))
        throw std::domain_error(std::string(what) + " must lie in [0,1], got " + std::to_string(z));
}
}  // namespace detail

// Rational utility at aggregate clean-adoption level z. The moral term
// z(1-z)*morality is credited to clean adopters and charged to decliners.
inline double utility_rational(Action a, double z, const GameParams& p) {
    detail::require_unit_interval(z, "adoption level z");
    const double moral = (1.0 - z) * z * p.morality;
    return a == Action::CT ? -p.price_clean + moral : -p.price_unclean - moral;
}

// Herding agents value an action by the share of the population using it.
inline double utility_herding(Action a, double z) {
    detail::require_unit_interval(z, "adoption level z");
    return a == Action::CT ? z : 1.0 - z;
}

// Lethargic agents strictly prefer to keep the incumbent (unclean) choice.
inline double utility_lethargic(Action a) {
    return a == Action::CT ? 0.0 : 1.0;
}

// Rational utility gap between clean and unclean: 2(1-z)z*morality - price
// gap. Positive where rationals prefer clean.
inline double utility_diff(double z, const GameParams& p) {
    detail::require_unit_interval(z, "adoption level z");
    return 2.0 * (1.0 - z) * z * p.morality - p.price_gap();
}

// Interval of adoption levels on which rationals weakly prefer clean: the
// utility gap is concave with maximum morality/2 - price_gap at z = 1/2, so
// it has either two roots summing to one, a double root at 1/2, or none.
struct IndifferenceBand {
    double lower = 0.5;
    double upper = 0.5;
};

inline std::optional<IndifferenceBand> indifference_band(const GameParams& p,
                                                         double eps = kEpsCmp) {
    const double half_m = 0.5 * p.morality;
    const double gap = p.price_gap();
    if (approx_eq(gap, half_m, eps)) return IndifferenceBand{0.5, 0.5};
    if (gap > half_m) return std::nullopt;
    const double s = std::sqrt(1.0 - 2.0 * gap / p.morality);
    return IndifferenceBand{0.5 * (1.0 - s), 0.5 * (1.0 + s)};
}

// Clean-adoption share among rationals consistent with aggregate level z in a
// two-type population: below the majority threshold no herding agent adopts,
// so z = alpha_r * y; at or above it the whole herding mass adopts.
inline double rational_share(double z, const PopulationMix& mix, double eps = kEpsCmp) {
    detail::require_unit_interval(z, "adoption level z");
    if (std::fabs(mix.alpha_l) > 1e-12)
        throw std::invalid_argument("rational_share is defined for two-type mixes (alpha_l = 0)");
    if (mix.alpha_r <= 0.0)
        throw std::invalid_argument("rational_share: no rational sub-population (alpha_r = 0)");
    const double y = approx_ge(z, 0.5, eps) ? (mix.alpha_r - (1.0 - z)) / mix.alpha_r
                                            : z / mix.alpha_r;
    if (y < -eps || y > 1.0 + eps)
        throw InfeasibleStateError("adoption level z=" + std::to_string(z) +
                                   " is not reachable with alpha_r=" + std::to_string(mix.alpha_r));
    return std::clamp(y, 0.0, 1.0);
}

// Support of a mixed choice, reading y as the probability of clean adoption:
// full adoption supports CT alone, zero adoption supports UC alone.
inline ActionSupport action_support(double y, double eps = kEpsCmp) {
    detail::require_unit_interval(y, "choice probability y");
    if (approx_eq(y, 1.0, eps)) return ActionSupport{true, false};
    if (approx_eq(y, 0.0, eps)) return ActionSupport{false, true};
    return ActionSupport{true, true};
}

}  // namespace popgame
