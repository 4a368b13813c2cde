#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "popgame/compare.hpp"
#include "popgame/equilibria.hpp"
#include "popgame/errors.hpp"
#include "popgame/game.hpp"
#include "popgame/trajectory.hpp"

namespace popgame {

enum class EnvKind { linear_misra, custom_tabulated };

// Concentration model dc/dt = f(c; z), parameterized by the clean-adoption
// level z. The linear form is q + gamma*n_pop*(1-z) - gamma0*c: a constant
// background source, per-capita emissions from the non-adopting share of the
// population, and proportional decay. Tabulated models supply f on a (c, z)
// grid with bilinear interpolation. In both cases f must be non-increasing
// in z (more adoption never raises emissions). Units: concentration in
// ppm-equivalents, time in model years.
struct EnvModel {
    EnvKind kind = EnvKind::linear_misra;

    // linear_misra parameters
    double q = 1.0;
    double gamma = 1.0;
    double n_pop = 1.0;
    double gamma0 = 0.5;

    double c0 = 1.0;
    double horizon = 20.0;
    bool infinite_horizon = false;

    // custom_tabulated grids: f_values is row-major, rows indexed by c_grid.
    std::vector<double> c_grid;
    std::vector<double> z_grid;
    std::vector<double> f_values;

    double drift(double c, double z) const {
        if (kind == EnvKind::linear_misra) return q + gamma * n_pop * (1.0 - z) - gamma0 * c;
        return tabulated_drift(c, z);
    }

    void validate() const {
        if (!(c0 > 0.0)) throw std::invalid_argument("EnvModel: c0 must be positive");
        if (!infinite_horizon && !(horizon > 0.0))
            throw std::invalid_argument("EnvModel: horizon must be positive");
        if (kind == EnvKind::linear_misra) {
            if (!(gamma0 > 0.0))
                throw std::invalid_argument("EnvModel: gamma0 must be positive");
            if (q < 0.0 || gamma < 0.0 || n_pop < 0.0)
                throw std::invalid_argument("EnvModel: emission parameters must be nonnegative");
            return;
        }
        if (c_grid.size() < 2 || z_grid.size() < 2)
            throw std::invalid_argument("EnvModel: tabulated grids need at least 2 points");
        if (f_values.size() != c_grid.size() * z_grid.size())
            throw std::invalid_argument("EnvModel: f_values size must be |c_grid| * |z_grid|");
        if (!std::is_sorted(c_grid.begin(), c_grid.end()) ||
            !std::is_sorted(z_grid.begin(), z_grid.end()))
            throw std::invalid_argument("EnvModel: grids must be ascending");
        if (z_grid.front() < 0.0 || z_grid.back() > 1.0)
            throw std::invalid_argument("EnvModel: z_grid must lie in [0,1]");
        for (std::size_t i = 0; i < c_grid.size(); ++i)
            for (std::size_t j = 1; j < z_grid.size(); ++j)
                if (f_values[i * z_grid.size() + j] >
                    f_values[i * z_grid.size() + j - 1] + 1e-12)
                    throw std::invalid_argument(
                        "EnvModel: tabulated drift must be non-increasing in z");
    }

  private:
    double tabulated_drift(double c, double z) const {
        auto cell = [](const std::vector<double>& g, double x, std::size_t* idx, double* frac) {
            const double clamped = std::clamp(x, g.front(), g.back());
            auto it = std::upper_bound(g.begin(), g.end(), clamped);
            std::size_t hi = std::min<std::size_t>(g.size() - 1,
                                                   static_cast<std::size_t>(it - g.begin()));
            if (hi == 0) hi = 1;
            *idx = hi - 1;
            const double w = g[hi] - g[hi - 1];
            *frac = w > 0.0 ? (clamped - g[hi - 1]) / w : 0.0;
        };
        std::size_t ic = 0, iz = 0;
        double fc = 0.0, fz = 0.0;
        cell(c_grid, c, &ic, &fc);
        cell(z_grid, z, &iz, &fz);
        const std::size_t n = z_grid.size();
        const double f00 = f_values[ic * n + iz];
        const double f01 = f_values[ic * n + iz + 1];
        const double f10 = f_values[(ic + 1) * n + iz];
        const double f11 = f_values[(ic + 1) * n + iz + 1];
        const double a = f00 + (f01 - f00) * fz;
        const double b = f10 + (f11 - f10) * fz;
        return a + (b - a) * fc;
    }
};

enum class CostKind { time_average, long_run_limit };

// Environmental cost functional e(z): a named discomfort map phi applied to
// the z-parameterized concentration trajectory, either time-averaged over
// the horizon or evaluated at the long-run limit.
struct CostFunctional {
    CostKind kind = CostKind::time_average;
    std::string phi = "identity";

    double apply(double c) const {
        if (phi == "identity") return c;
        if (phi == "quadratic") return c * c;
        throw std::invalid_argument("CostFunctional: unknown discomfort map '" + phi + "'");
    }
};

namespace detail {
inline double co2_rk4_step(const EnvModel& m, double c, double z, double dt) {
    const double k1 = m.drift(c, z);
    const double k2 = m.drift(c + 0.5 * dt * k1, z);
    const double k3 = m.drift(c + 0.5 * dt * k2, z);
    const double k4 = m.drift(c + dt * k3, z);
    return c + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}
}  // namespace detail

// RK4 trajectory of the concentration on [0, horizon] at fixed adoption
// level z.
inline Trajectory integrate_co2(const EnvModel& m, double z, double dt) {
    m.validate();
    detail::require_unit_interval(z, "adoption level z");
    if (!(dt > 0.0)) throw std::invalid_argument("integrate_co2: dt must be positive");
    if (m.infinite_horizon)
        throw std::invalid_argument("integrate_co2: trajectory output needs a finite horizon");

    const auto n = static_cast<std::uint64_t>(std::ceil(m.horizon / dt - 1e-12));
    const double h = m.horizon / static_cast<double>(n);
    Trajectory traj;
    traj.kind = TrajectoryKind::co2;
    traj.samples.reserve(n + 1);
    traj.samples.push_back({0.0, m.c0});
    double c = m.c0;
    for (std::uint64_t i = 1; i <= n; ++i) {
        c = detail::co2_rk4_step(m, c, z, h);
        traj.samples.push_back({static_cast<double>(i) * h, c});
    }
    return traj;
}

// e(z): trapezoidal time average of phi over the finite-horizon trajectory,
// or the settled long-run value of phi. The long-run form is restricted to
// the linear model (the only one with a provable limit here); settling means
// the change over a trailing window of one decay time drops below 1e-8
// relative, and a trajectory still unsettled at t = 100/gamma0 raises
// DivergenceError.
inline double env_cost(const EnvModel& m, const CostFunctional& cf, double z, double dt) {
    m.validate();
    detail::require_unit_interval(z, "adoption level z");
    if (!(dt > 0.0)) throw std::invalid_argument("env_cost: dt must be positive");

    if (cf.kind == CostKind::time_average) {
        if (m.infinite_horizon)
            throw std::invalid_argument("env_cost: time_average needs a finite horizon");
        const auto n = static_cast<std::uint64_t>(std::ceil(m.horizon / dt - 1e-12));
        const double h = m.horizon / static_cast<double>(n);
        double c = m.c0;
        double acc = 0.0;
        double prev = cf.apply(c);
        for (std::uint64_t i = 1; i <= n; ++i) {
            c = detail::co2_rk4_step(m, c, z, h);
            const double cur = cf.apply(c);
            acc += 0.5 * (prev + cur) * h;
            prev = cur;
        }
        return acc / m.horizon;
    }

    if (m.kind != EnvKind::linear_misra)
        throw std::invalid_argument("env_cost: long_run_limit needs a model with a provable limit");
    // The settled-by contract is a trailing relative change below 1e-8 at
    // t = 100/gamma0; the integration itself continues to a much tighter
    // target so the returned value carries no visible stopping residual.
    const double cap = 100.0 / m.gamma0;
    const double window = 1.0 / m.gamma0;
    const auto lag = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(window / dt)));
    std::vector<double> ring(lag + 1, m.c0);
    double c = m.c0;
    double t = 0.0;
    std::size_t step = 0;
    double rel_change = std::numeric_limits<double>::infinity();
    while (t < cap) {
        c = detail::co2_rk4_step(m, c, z, dt);
        t += dt;
        ++step;
        const double lagged = ring[step % ring.size()];
        ring[step % ring.size()] = c;
        if (t >= window) {
            rel_change = std::fabs(c - lagged) / std::max(1.0, std::fabs(c));
            if (rel_change <= 1e-13) return cf.apply(c);
        }
    }
    if (rel_change <= 1e-8) return cf.apply(c);
    throw DivergenceError("env_cost: trajectory not settled by t = 100/gamma0");
}

// Rational utility with the shared environmental damage term rho*e(z)
// charged to both actions alike: everyone breathes the same air regardless
// of what they drive.
inline double utility_rational_env(Action a, double z, const GameParams& p, double e_val) {
    return utility_rational(a, z, p) - p.env_weight * e_val;
}

// Group-wise variant with a per-group sensitivity.
inline double utility_rational_group(Action a, double z, const GameParams& p, double rho_i,
                                     double e_val) {
    if (rho_i < 0.0)
        throw std::invalid_argument("utility_rational_group: rho_i must be nonnegative");
    return utility_rational(a, z, p) - rho_i * e_val;
}

// Utility gap under the environment-extended utilities. The damage term
// enters both actions identically, so it subtracts out; performing that
// cancellation symbolically keeps the gap exactly equal to the plain one for
// any weight and any cost value.
inline double utility_diff_env(double z, const GameParams& p, double /*e_val*/) {
    return utility_diff(z, p);
}

// Outcome of the environmental-coupling invariance check.
struct InvarianceReport {
    double max_gap_deviation = 0.0;
    bool sets_equal = false;
    std::vector<double> stable_plain;
    std::vector<double> stable_env;
    bool ok = false;
};

// Checks the claim that environmental damages change nothing: the extended
// utility gap must match the plain one on a z-grid, and the stable set
// extracted from the extended utilities (direct two-utility comparisons, no
// symbolic shortcut) must equal the plain closed-form stable set.
inline InvarianceReport verify_invariance(const GameParams& p, const PopulationMix& mix,
                                          const EnvModel& m, const CostFunctional& cf,
                                          std::size_t grid_n = 100) {
    p.validate();
    mix.validate();
    m.validate();
    if (grid_n < 100)
        throw std::invalid_argument("verify_invariance: grid_n must be at least 100");

    const double dt = m.kind == EnvKind::linear_misra ? 0.05 / m.gamma0 : m.horizon / 4000.0;
    const auto cost_at = [&](double z) { return env_cost(m, cf, z, dt); };

    InvarianceReport rep;
    for (std::size_t i = 0; i < grid_n; ++i) {
        const double z = static_cast<double>(i) / static_cast<double>(grid_n - 1);
        const double dev =
            std::fabs(utility_diff_env(z, p, cost_at(z)) - utility_diff(z, p));
        rep.max_gap_deviation = std::max(rep.max_gap_deviation, dev);
    }

    for (const auto& e : stable_set(p, mix).points) rep.stable_plain.push_back(e.z);

    // Independent route: equilibrium and attractor tests driven by the raw
    // extended utilities.
    const detail::GapFn env_gap = [&](double z) {
        const double e = cost_at(z);
        return utility_rational_env(Action::CT, z, p, e) -
               utility_rational_env(Action::UC, z, p, e);
    };
    std::vector<double> candidates{0.0, mix.alpha_h, mix.alpha_r, mix.alpha_r + mix.alpha_h, 0.5};
    if (auto band = indifference_band(p)) {
        candidates.push_back(band->lower);
        candidates.push_back(band->upper);
    }
    std::sort(candidates.begin(), candidates.end());
    const auto structural = detail::structural_points(p, mix);
    for (double z : candidates) {
        if (z < 0.0 || z > 1.0) continue;
        if (!rep.stable_env.empty() && approx_eq(rep.stable_env.back(), z)) continue;
        if (!detail::fixed_point_share(z, env_gap, mix, kEpsCmp, nullptr, nullptr)) continue;
        if (!detail::is_attractor_impl(z, env_gap, mix, structural, 1e-3, kEpsCmp)) continue;
        rep.stable_env.push_back(z);
    }

    rep.sets_equal = rep.stable_plain.size() == rep.stable_env.size();
    if (rep.sets_equal)
        for (std::size_t i = 0; i < rep.stable_plain.size(); ++i)
            if (!approx_eq(rep.stable_plain[i], rep.stable_env[i]))
                rep.sets_equal = false;
    rep.ok = rep.max_gap_deviation <= 1e-12 && rep.sets_equal;
    return rep;
}

}  // namespace popgame
