#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "popgame/environment.hpp"

using namespace popgame;

namespace {

EnvModel canonical_model() {
    EnvModel m;
    m.kind = EnvKind::linear_misra;
    m.q = 1.0;
    m.gamma = 1.0;
    m.n_pop = 1.0;
    m.gamma0 = 0.5;
    m.c0 = 1.0;
    m.horizon = 20.0;
    return m;
}

// Analytic solution of the linear model, the oracle for the integrator.
double linear_solution(const EnvModel& m, double z, double t) {
    const double c_star = (m.q + m.gamma * m.n_pop * (1.0 - z)) / m.gamma0;
    return c_star + (m.c0 - c_star) * std::exp(-m.gamma0 * t);
}

GameParams params(double morality, double price_gap) {
    return GameParams{1.0 + price_gap, 1.0, morality, 0.0};
}

}  // namespace

TEST_CASE("linear model matches the analytic solution") {
    EnvModel m = canonical_model();
    m.horizon = 10.0 / m.gamma0;
    for (double z : {0.0, 0.3, 1.0}) {
        const Trajectory traj = integrate_co2(m, z, 0.01);
        for (const auto& s : traj.samples) {
            const double exact = linear_solution(m, z, s.t);
            CHECK(std::fabs(s.value - exact) <= 1e-6 * std::max(1.0, std::fabs(exact)));
        }
    }
}

TEST_CASE("steady states of the canonical model") {
    const EnvModel m = canonical_model();
    const CostFunctional limit{CostKind::long_run_limit, "identity"};
    CHECK(std::fabs(env_cost(m, limit, 0.0, 0.01) - 4.0) <= 1e-9);
    CHECK(std::fabs(env_cost(m, limit, 1.0, 0.01) - 2.0) <= 1e-9);
}

TEST_CASE("starting at the steady state keeps the trajectory constant") {
    EnvModel m = canonical_model();
    m.c0 = 4.0;  // steady state at z = 0
    const Trajectory traj = integrate_co2(m, 0.0, 0.01);
    for (const auto& s : traj.samples) CHECK(std::fabs(s.value - 4.0) <= 1e-9);
    const CostFunctional avg{CostKind::time_average, "identity"};
    CHECK(std::fabs(env_cost(m, avg, 0.0, 0.01) - 4.0) <= 1e-9);
}

TEST_CASE("environmental cost is non-increasing in adoption") {
    const EnvModel m = canonical_model();
    for (const CostFunctional& cf : {CostFunctional{CostKind::time_average, "identity"},
                                    CostFunctional{CostKind::long_run_limit, "identity"},
                                    CostFunctional{CostKind::time_average, "quadratic"}}) {
        double prev = env_cost(m, cf, 0.0, 0.01);
        for (int i = 1; i <= 20; ++i) {
            const double cur = env_cost(m, cf, i / 20.0, 0.01);
            CHECK(cur <= prev + 1e-9);
            prev = cur;
        }
    }
    const CostFunctional cf{CostKind::long_run_limit, "identity"};
    CHECK(env_cost(m, cf, 1.0, 0.01) <= env_cost(m, cf, 0.0, 0.01));
}

TEST_CASE("drift is non-increasing in z and trajectories are ordered") {
    const EnvModel m = canonical_model();
    for (double c : {0.5, 2.0, 10.0})
        for (int i = 0; i < 20; ++i) {
            const double z1 = i / 20.0, z2 = (i + 1) / 20.0;
            CHECK(m.drift(c, z1) >= m.drift(c, z2));
        }
    // comparison principle on the linear model
    const Trajectory lo_adopt = integrate_co2(m, 0.2, 0.01);
    const Trajectory hi_adopt = integrate_co2(m, 0.8, 0.01);
    REQUIRE(lo_adopt.samples.size() == hi_adopt.samples.size());
    for (std::size_t i = 0; i < lo_adopt.samples.size(); ++i)
        CHECK(lo_adopt.samples[i].value >= hi_adopt.samples[i].value - 1e-12);
}

TEST_CASE("model validation and error paths") {
    EnvModel m = canonical_model();
    m.c0 = 0.0;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    m = canonical_model();
    m.gamma0 = 0.0;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    m = canonical_model();
    m.infinite_horizon = true;
    CHECK_THROWS_AS(integrate_co2(m, 0.0, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(env_cost(m, CostFunctional{CostKind::time_average, "identity"}, 0.0, 0.01),
                    std::invalid_argument);
    // a start absurdly far from equilibrium cannot settle within the cap
    m = canonical_model();
    m.c0 = 1e300;
    CHECK_THROWS_AS(env_cost(m, CostFunctional{CostKind::long_run_limit, "identity"}, 0.0, 0.05),
                    DivergenceError);
    CHECK_THROWS_AS((CostFunctional{CostKind::time_average, "warp"}.apply(1.0)),
                    std::invalid_argument);
}

TEST_CASE("tabulated models interpolate and enforce monotonicity at load") {
    // tabulate the canonical linear drift on a coarse grid
    EnvModel lin = canonical_model();
    EnvModel tab;
    tab.kind = EnvKind::custom_tabulated;
    tab.c0 = lin.c0;
    tab.horizon = lin.horizon;
    tab.c_grid = {0.0, 2.0, 4.0, 6.0, 8.0};
    tab.z_grid = {0.0, 0.5, 1.0};
    for (double c : tab.c_grid)
        for (double z : tab.z_grid) tab.f_values.push_back(lin.drift(c, z));
    tab.validate();
    // the drift is affine in both arguments, so bilinear interpolation is exact
    for (double c : {0.7, 3.3, 7.9})
        for (double z : {0.1, 0.5, 0.9})
            CHECK(tab.drift(c, z) == doctest::Approx(lin.drift(c, z)).epsilon(1e-12));
    const Trajectory a = integrate_co2(tab, 0.3, 0.01);
    const Trajectory b = integrate_co2(lin, 0.3, 0.01);
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        CHECK(std::fabs(a.samples[i].value - b.samples[i].value) <= 1e-9);

    EnvModel bad = tab;
    bad.f_values[1] = bad.f_values[0] + 1.0;  // increasing in z
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK_THROWS_AS(env_cost(tab, CostFunctional{CostKind::long_run_limit, "identity"}, 0.0, 0.01),
                    std::invalid_argument);
}

TEST_CASE("environment-extended utilities") {
    const GameParams p{2.0, 1.0, 2.0, 1.0};  // env weight 1
    CHECK(utility_rational_env(Action::UC, 0.5, p, 4.0) == doctest::Approx(-5.5));
    GameParams rho0 = p;
    rho0.env_weight = 0.0;
    for (double z : {0.0, 0.25, 0.8})
        CHECK(utility_rational_env(Action::CT, z, rho0, 123.0) ==
              doctest::Approx(utility_rational(Action::CT, z, rho0)));
    // the gap is unchanged for any cost value, to cancellation accuracy
    for (double e : {0.0, 4.0, 1e3}) {
        for (int i = 0; i <= 100; ++i) {
            const double z = i / 100.0;
            const double g = utility_rational_env(Action::CT, z, p, e) -
                             utility_rational_env(Action::UC, z, p, e);
            CHECK(std::fabs(g - utility_diff(z, p)) <= 1e-9);
        }
    }
    CHECK_THROWS_AS(utility_rational_group(Action::CT, 0.5, p, -1.0, 4.0), std::invalid_argument);
}

TEST_CASE("group sensitivities never change the preferred action") {
    testutil::Draw draw(41);
    const std::vector<double> rhos{0.0, 0.1, 1.0, 10.0, 100.0};
    for (int rep = 0; rep < 10; ++rep) {
        const GameParams p = draw.game(0.05, 1.8);
        const double e_val = draw.uniform(0.0, 50.0);
        for (int i = 0; i <= 1000; ++i) {
            const double z = i / 1000.0;
            const bool base = utility_rational_group(Action::CT, z, p, rhos[0], e_val) >=
                              utility_rational_group(Action::UC, z, p, rhos[0], e_val);
            for (double rho : rhos) {
                const bool pick = utility_rational_group(Action::CT, z, p, rho, e_val) >=
                                  utility_rational_group(Action::UC, z, p, rho, e_val);
                CHECK(pick == base);
            }
        }
    }
}

TEST_CASE("invariance: environmental coupling changes nothing") {
    testutil::Draw draw(42);
    for (int rep = 0; rep < 10; ++rep) {
        GameParams p = draw.game(0.05, 1.9);
        p.env_weight = draw.uniform(0.0, 1000.0);
        const PopulationMix mix = draw.mix3();
        EnvModel m;
        m.q = draw.uniform(0.1, 5.0);
        m.gamma = draw.uniform(0.1, 3.0);
        m.n_pop = draw.uniform(0.5, 10.0);
        m.gamma0 = draw.uniform(0.1, 2.0);
        m.c0 = draw.uniform(0.1, 50.0);
        m.horizon = 30.0 / m.gamma0;
        const CostFunctional cf{rep % 2 == 0 ? CostKind::time_average : CostKind::long_run_limit,
                                "identity"};
        InvarianceReport rep_out;
        try {
            rep_out = verify_invariance(p, mix, m, cf, 100);
        } catch (const RegimeAmbiguityError&) {
            continue;
        }
        CHECK(rep_out.max_gap_deviation == 0.0);
        CHECK(rep_out.sets_equal);
        CHECK(rep_out.ok);
    }
    CHECK_THROWS_AS(verify_invariance(params(2.0, 0.5), PopulationMix::two_type(0.3),
                                      canonical_model(),
                                      CostFunctional{CostKind::time_average, "identity"}, 10),
                    std::invalid_argument);
}
