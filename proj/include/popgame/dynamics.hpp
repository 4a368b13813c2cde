#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "popgame/compare.hpp"
#include "popgame/equilibria.hpp"
#include "popgame/game.hpp"
#include "popgame/rng.hpp"
#include "popgame/trajectory.hpp"

namespace popgame {

// Turn-by-turn run parameters. k0 is the weight index of the first update:
// the recursion weight is 1/(k+1), so k0 = 0 would overwrite z0 entirely on
// the first step; the default k0 = 1 keeps z0 influential with weight 1/2.
struct SimConfig {
    std::uint64_t steps = 100000;
    double z0 = 0.5;
    std::uint64_t record_every = 1;
    std::uint64_t seed = 0;
    std::uint64_t k0 = 1;

    void validate() const {
        if (steps < 1) throw std::invalid_argument("SimConfig: steps must be at least 1");
        if (!(z0 >= 0.0 && z0 <= 1.0))
            throw std::invalid_argument("SimConfig: z0 must lie in [0,1]");
        if (record_every < 1)
            throw std::invalid_argument("SimConfig: record_every must be at least 1");
    }
};

enum class Z0Sampling { fixed, uniform };

// Outcome of a batch of independent runs, matched against the closed-form
// stable set. matched counts plus unmatched always sum to runs.
struct MonteCarloReport {
    std::uint64_t runs = 0;
    double tolerance = 0.0;
    std::vector<double> limits;                              // terminal state per run
    std::vector<std::pair<double, std::uint64_t>> matched;   // stable level -> hits
    std::uint64_t unmatched = 0;
};

// One update of the adoption process: a random agent is drawn by type
// (rational with probability alpha_r, herding alpha_h, lethargic alpha_l),
// makes its irreversible choice against the current level z_k, and the
// average moves by (choice - z_k)/(k+1). Rationals adopt iff the utility gap
// is nonnegative, herding agents iff z_k >= 1/2 (both tie toward clean);
// lethargic agents never adopt.
inline double step_turn_by_turn(double z_k, std::uint64_t k, const GameParams& p,
                                const PopulationMix& mix, double rng_draw) {
    detail::require_unit_interval(z_k, "adoption level z");
    if (!(rng_draw >= 0.0 && rng_draw < 1.0))
        throw std::invalid_argument("step_turn_by_turn: rng_draw must lie in [0,1)");
    bool adopts;
    if (rng_draw < mix.alpha_r) {
        adopts = utility_diff(z_k, p) >= 0.0;
    } else if (rng_draw < mix.alpha_r + mix.alpha_h) {
        adopts = z_k >= 0.5;
    } else {
        adopts = false;
    }
    return z_k + ((adopts ? 1.0 : 0.0) - z_k) / static_cast<double>(k + 1);
}

// Full turn-by-turn run. Bit-reproducible: the trajectory is a pure function
// of (seed, cfg, p, mix).
inline Trajectory simulate(const SimConfig& cfg, const GameParams& p, const PopulationMix& mix) {
    cfg.validate();
    p.validate();
    mix.validate();
    SplitMix64 rng(cfg.seed);
    Trajectory traj;
    traj.kind = TrajectoryKind::turn_by_turn;
    traj.seed = cfg.seed;
    traj.samples.push_back({0.0, cfg.z0});
    double z = cfg.z0;
    for (std::uint64_t i = 0; i < cfg.steps; ++i) {
        z = step_turn_by_turn(z, cfg.k0 + i, p, mix, rng.next_double());
        const std::uint64_t done = i + 1;
        if (done % cfg.record_every == 0 || done == cfg.steps)
            traj.samples.push_back({static_cast<double>(done), z});
    }
    return traj;
}

// Independent runs with per-run seeds derive_seed(cfg.seed, run). A run
// counts as converged when the trailing 1% of its states spans less than
// 1e-3; converged terminals are matched to the nearest stable level within
// tolerance, everything else is reported unmatched. Aggregation is a
// deterministic fold in run order.
inline MonteCarloReport monte_carlo(const SimConfig& cfg, std::uint64_t runs,
                                    const GameParams& p, const PopulationMix& mix,
                                    Z0Sampling z0_sampling, double tolerance = 2e-2) {
    cfg.validate();
    if (runs < 1) throw std::invalid_argument("monte_carlo: runs must be at least 1");
    const StableSet stable = stable_set(p, mix);

    MonteCarloReport rep;
    rep.runs = runs;
    rep.tolerance = tolerance;
    rep.limits.reserve(runs);
    std::vector<std::uint64_t> hits(stable.points.size(), 0);

    const std::uint64_t window_start = cfg.steps - std::max<std::uint64_t>(1, cfg.steps / 100);
    for (std::uint64_t run = 0; run < runs; ++run) {
        SplitMix64 rng(derive_seed(cfg.seed, run));
        double z = z0_sampling == Z0Sampling::uniform ? rng.next_double() : cfg.z0;
        double wmin = 1.0, wmax = 0.0;
        for (std::uint64_t i = 0; i < cfg.steps; ++i) {
            z = step_turn_by_turn(z, cfg.k0 + i, p, mix, rng.next_double());
            if (i + 1 >= window_start) {
                wmin = std::min(wmin, z);
                wmax = std::max(wmax, z);
            }
        }
        rep.limits.push_back(z);

        const bool converged = (wmax - wmin) < 1e-3;
        std::size_t best = stable.points.size();
        double best_dist = tolerance;
        for (std::size_t j = 0; j < stable.points.size(); ++j) {
            const double d = std::fabs(z - stable.points[j].z);
            if (d <= best_dist) {
                best_dist = d;
                best = j;
            }
        }
        if (converged && best < stable.points.size())
            ++hits[best];
        else
            ++rep.unmatched;
    }
    for (std::size_t j = 0; j < stable.points.size(); ++j)
        rep.matched.emplace_back(stable.points[j].z, hits[j]);
    return rep;
}

// Replicator flow of the adoption share: growth proportional to the rational
// utility gap, damped at the boundaries.
inline double replicator_rhs(double z, const GameParams& p) {
    detail::require_unit_interval(z, "adoption level z");
    return z * (1.0 - z) * utility_diff(z, p);
}

namespace detail {
// Unvalidated polynomial right-hand side; intermediate integrator stages may
// probe slightly outside [0,1].
inline double replicator_rhs_raw(double z, const GameParams& p) {
    return z * (1.0 - z) * (2.0 * (1.0 - z) * z * p.morality - p.price_gap());
}
}  // namespace detail

// One classical fourth-order Runge-Kutta step, unclamped.
inline double replicator_rk4_step(double z, double dt, const GameParams& p) {
    const double k1 = detail::replicator_rhs_raw(z, p);
    const double k2 = detail::replicator_rhs_raw(z + 0.5 * dt * k1, p);
    const double k3 = detail::replicator_rhs_raw(z + 0.5 * dt * k2, p);
    const double k4 = detail::replicator_rhs_raw(z + dt * k3, p);
    return z + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Fixed-step RK4 integration of the replicator flow on [0, t_end]. The unit
// interval is forward invariant for the exact flow; states are clamped after
// each step only to absorb rounding at the boundaries.
inline Trajectory integrate_replicator(double z0, const GameParams& p, double t_end, double dt) {
    detail::require_unit_interval(z0, "initial state z0");
    p.validate();
    if (!(dt > 0.0) || !(t_end > 0.0))
        throw std::invalid_argument("integrate_replicator: dt and t_end must be positive");
    if (dt > t_end)
        throw std::invalid_argument("integrate_replicator: step size dt exceeds horizon t_end");

    const auto n = static_cast<std::uint64_t>(std::ceil(t_end / dt - 1e-12));
    const double h = t_end / static_cast<double>(n);

    Trajectory traj;
    traj.kind = TrajectoryKind::replicator;
    traj.samples.reserve(n + 1);
    traj.samples.push_back({0.0, z0});
    double z = z0;
    for (std::uint64_t i = 1; i <= n; ++i) {
        z = std::clamp(replicator_rk4_step(z, h, p), 0.0, 1.0);
        traj.samples.push_back({static_cast<double>(i) * h, z});
    }
    return traj;
}

// A stationary point of the replicator flow with its one-sided sign
// classification. Attracting points have inward flow on both sides;
// semi-stable ones attract on exactly one side (the degenerate double root).
struct PhasePoint {
    double z = 0.0;
    bool stable = false;
    bool semi_stable = false;
};

// Stationary points are the boundaries plus the indifference levels. Each is
// classified by sampling the sign of the flow on punctured one-sided
// neighborhoods, which stays meaningful where the derivative vanishes; a
// central finite-difference derivative cross-checks the call whenever it is
// decisive.
inline std::vector<PhasePoint> classify_phase_line(const GameParams& p, double eps = kEpsCmp) {
    p.validate();
    std::vector<double> zs{0.0};
    if (auto band = indifference_band(p, eps)) {
        if (approx_eq(band->lower, band->upper, eps)) {
            zs.push_back(0.5);
        } else {
            zs.push_back(band->lower);
            zs.push_back(band->upper);
        }
    }
    zs.push_back(1.0);

    double radius = 1e-4;
    for (std::size_t i = 1; i < zs.size(); ++i)
        radius = std::min(radius, 0.5 * (zs[i] - zs[i - 1]));

    constexpr int kSamples = 32;
    // Consistent sign of the flow on the punctured one-sided window, 0 if mixed.
    auto side_sign = [&](double z_star, int dir) {
        int sign = 0;
        for (int i = 1; i <= kSamples; ++i) {
            const double x = z_star + dir * radius * i / (kSamples + 1);
            const double f = detail::replicator_rhs_raw(x, p);
            const int s = f > 0.0 ? 1 : (f < 0.0 ? -1 : 0);
            if (sign == 0) sign = s;
            if (s == 0 || s != sign) return 0;
        }
        return sign;
    };

    std::vector<PhasePoint> out;
    for (double z_star : zs) {
        const int left = z_star <= 0.0 ? 0 : side_sign(z_star, -1);
        const int right = z_star >= 1.0 ? 0 : side_sign(z_star, +1);
        PhasePoint pt;
        pt.z = z_star;
        if (z_star <= 0.0) {
            pt.stable = right < 0;
        } else if (z_star >= 1.0) {
            pt.stable = left > 0;
        } else {
            pt.stable = left > 0 && right < 0;
            pt.semi_stable = !pt.stable && ((left < 0 && right < 0) || (left > 0 && right > 0));
        }

        const double fd = (detail::replicator_rhs_raw(z_star + 1e-6, p) -
                           detail::replicator_rhs_raw(z_star - 1e-6, p)) /
                          2e-6;
        if (std::fabs(fd) > 1e-6 && pt.stable != (fd < 0.0))
            throw std::logic_error("classify_phase_line: sign sampling disagrees with F'");
        out.push_back(pt);
    }
    return out;
}

}  // namespace popgame
