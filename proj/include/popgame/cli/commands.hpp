#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "popgame/cli/config.hpp"
#include "popgame/cli/output.hpp"
#include "popgame/popgame.hpp"

namespace popgame::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kConfigError = 2,
    kAmbiguity = 3,
    kNonConvergence = 4,
};

// Command-line overrides on top of the config file.
struct CliOptions {
    std::optional<std::string> out_dir;
    std::optional<std::string> format;
    std::optional<std::uint64_t> seed;
    bool strict = false;
    bool exact = false;
};

namespace detail {

inline int log_threshold() {
    static const int level = [] {
        const char* env = std::getenv("POPGAME_LOG");
        if (!env) return 1;
        const std::string s(env);
        if (s == "error") return 0;
        if (s == "warn") return 1;
        if (s == "info") return 2;
        if (s == "debug") return 3;
        return 1;
    }();
    return level;
}

inline void log_at(int level, const char* tag, const std::string& msg) {
    if (level <= log_threshold()) std::cerr << "[popgame][" << tag << "] " << msg << "\n";
}

}  // namespace detail

inline void log_error(const std::string& msg) { detail::log_at(0, "error", msg); }
inline void log_info(const std::string& msg) { detail::log_at(2, "info", msg); }

// Maps the library's error taxonomy onto the exit-code contract:
// 2 = bad configuration or parameter values, 3 = regime boundary,
// 4 = non-convergence past a threshold, 1 = anything unexpected.
template <typename Fn>
int run_guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        log_error(e.what());
        return kConfigError;
    } catch (const RegimeAmbiguityError& e) {
        log_error(e.what());
        return kAmbiguity;
    } catch (const DivergenceError& e) {
        log_error(e.what());
        return kNonConvergence;
    } catch (const std::invalid_argument& e) {
        log_error(e.what());
        return kConfigError;
    } catch (const std::domain_error& e) {
        log_error(e.what());
        return kConfigError;
    } catch (const std::exception& e) {
        log_error(e.what());
        return kFailure;
    }
}

namespace detail {

inline RunConfig with_overrides(RunConfig cfg, const CliOptions& opt) {
    if (opt.out_dir) cfg.out_dir = *opt.out_dir;
    if (opt.format) {
        if (*opt.format != "csv" && *opt.format != "json")
            throw ConfigError("--format must be csv or json");
        cfg.format = *opt.format;
    }
    if (opt.seed) cfg.sim.seed = *opt.seed;
    return cfg;
}

inline void require(bool present, const char* section) {
    if (!present)
        throw ConfigError(std::string("config: missing required [") + section + "] section");
}

inline std::filesystem::path make_out_dir(const RunConfig& cfg) {
    const std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline nlohmann::json point_json(const EquilibriumPoint& e, const std::string& regime) {
    return nlohmann::json{{"z_star", e.z},
                          {"mu_r", e.mu_r},
                          {"mu_h", e.mu_h},
                          {"mu_l", e.mu_l},
                          {"stable", e.stable},
                          {"provenance",
                           e.provenance == Provenance::closed_form ? "closed_form" : "brute_force"},
                          {"regime", regime}};
}

inline std::string write_points(const std::filesystem::path& dir, const std::string& stem,
                                const std::string& format,
                                const std::vector<EquilibriumPoint>& pts,
                                const std::string& regime) {
    const std::string name = stem + "." + format;
    if (format == "csv") {
        CsvWriter csv(dir / name, "z_star,mu_r,mu_h,mu_l,stable,provenance,regime");
        for (const auto& e : pts)
            csv.row({fmt_double(e.z), fmt_double(e.mu_r), fmt_double(e.mu_h), fmt_double(e.mu_l),
                     e.stable ? "1" : "0",
                     e.provenance == Provenance::closed_form ? "closed_form" : "brute_force",
                     regime});
    } else {
        nlohmann::json j;
        j["regime"] = regime;
        j["points"] = nlohmann::json::array();
        for (const auto& e : pts) j["points"].push_back(point_json(e, regime));
        std::ofstream out(dir / name, std::ios::binary);
        out << j.dump(2) << "\n";
    }
    return name;
}

inline std::string write_trajectory(const std::filesystem::path& dir, const std::string& format,
                                    const Trajectory& traj, const std::string& index_col,
                                    std::optional<double> env_z = std::nullopt) {
    const std::string name = std::string("trajectory.") + format;
    if (format == "csv") {
        std::string header = index_col + ",z";
        if (env_z) header += ",c";
        CsvWriter csv(dir / name, header);
        for (const auto& s : traj.samples) {
            if (env_z)
                csv.row({fmt_double(s.t), fmt_double(*env_z), fmt_double(s.value)});
            else
                csv.row({fmt_double(s.t), fmt_double(s.value)});
        }
    } else {
        nlohmann::json j;
        j["kind"] = traj.kind == TrajectoryKind::turn_by_turn ? "turn_by_turn"
                    : traj.kind == TrajectoryKind::replicator ? "replicator"
                                                              : "co2";
        if (traj.kind == TrajectoryKind::turn_by_turn) j["seed"] = traj.seed;
        if (env_z) j["z"] = *env_z;
        j["samples"] = nlohmann::json::array();
        for (const auto& s : traj.samples) j["samples"].push_back({s.t, s.value});
        std::ofstream out(dir / name, std::ios::binary);
        out << j.dump(2) << "\n";
    }
    return name;
}

}  // namespace detail

inline int cmd_equilibria(const RunConfig& raw, const CliOptions& opt) {
    return run_guarded([&] {
        const RunConfig cfg = detail::with_overrides(raw, opt);
        detail::require(cfg.has_game, "game");
        detail::require(cfg.has_mix, "mix");
        cfg.game.validate();
        cfg.mix.validate();
        const StableSet stable = stable_set(cfg.game, cfg.mix);
        const auto pts = mt_amfe_set(cfg.game, cfg.mix);
        const auto dir = detail::make_out_dir(cfg);
        ManifestWriter manifest(cfg, dir);
        manifest.add_output(
            detail::write_points(dir, "equilibria", cfg.format, pts, stable.regime_label));
        manifest.write();
        log_info("wrote equilibria for regime: " + stable.regime_label);
        return kOk;
    });
}

inline int cmd_stable_set(const RunConfig& raw, const CliOptions& opt) {
    return run_guarded([&] {
        const RunConfig cfg = detail::with_overrides(raw, opt);
        detail::require(cfg.has_game, "game");
        detail::require(cfg.has_mix, "mix");
        cfg.game.validate();
        cfg.mix.validate();
        const StableSet stable = stable_set(cfg.game, cfg.mix);
        const auto dir = detail::make_out_dir(cfg);
        ManifestWriter manifest(cfg, dir);
        manifest.add_output(detail::write_points(dir, "stable_set", cfg.format, stable.points,
                                                 stable.regime_label));
        manifest.write();
        return kOk;
    });
}

inline int cmd_simulate(const RunConfig& raw, const CliOptions& opt) {
    return run_guarded([&] {
        const RunConfig cfg = detail::with_overrides(raw, opt);
        detail::require(cfg.has_game, "game");
        detail::require(cfg.has_mix, "mix");
        detail::require(cfg.has_sim, "sim");
        cfg.game.validate();
        cfg.mix.validate();
        cfg.sim.validate();
        const Trajectory traj = simulate(cfg.sim, cfg.game, cfg.mix);
        const auto dir = detail::make_out_dir(cfg);
        ManifestWriter manifest(cfg, dir);
        manifest.add_seed(cfg.sim.seed);
        manifest.add_output(detail::write_trajectory(dir, cfg.format, traj, "k"));
        manifest.write();
        return kOk;
    });
}

inline int cmd_monte_carlo(const RunConfig& raw, const CliOptions& opt) {
    return run_guarded([&] {
        const RunConfig cfg = detail::with_overrides(raw, opt);
        detail::require(cfg.has_game, "game");
        detail::require(cfg.has_mix, "mix");
        detail::require(cfg.has_sim, "sim");
        cfg.game.validate();
        cfg.mix.validate();
        cfg.sim.validate();
        const MonteCarloReport rep = monte_carlo(cfg.sim, cfg.mc.runs, cfg.game, cfg.mix,
                                                 cfg.mc.z0_sampling, cfg.mc.tolerance);
        const auto dir = detail::make_out_dir(cfg);
        ManifestWriter manifest(cfg, dir);
        manifest.add_seed(cfg.sim.seed);

        nlohmann::json j;
        j["runs"] = rep.runs;
        j["tolerance"] = rep.tolerance;
        j["unmatched"] = rep.unmatched;
        j["matched"] = nlohmann::json::object();
        for (const auto& [z, hits] : rep.matched) j["matched"][fmt_double(z)] = hits;
        j["limits"] = rep.limits;
        {
            std::ofstream out(dir / "report.json", std::ios::binary);
            out << j.dump(2) << "\n";
        }
        manifest.add_output("report.json");
        manifest.write();
        if (opt.strict && rep.unmatched > 0) {
            log_error("monte-carlo: " + std::to_string(rep.unmatched) +
                      " run(s) did not converge to the stable set");
            return static_cast<int>(kNonConvergence);
        }
        return static_cast<int>(kOk);
    });
}

inline int cmd_replicator(const RunConfig& raw, const CliOptions& opt) {
    return run_guarded([&] {
        const RunConfig cfg = detail::with_overrides(raw, opt);
        detail::require(cfg.has_game, "game");
        cfg.game.validate();
        const Trajectory traj =
            integrate_replicator(cfg.rep.z0, cfg.game, cfg.rep.t_end, cfg.rep.dt);
        const auto phase = classify_phase_line(cfg.game);
        const auto dir = detail::make_out_dir(cfg);
        ManifestWriter manifest(cfg, dir);
        manifest.add_output(detail::write_trajectory(dir, cfg.format, traj, "t"));
        const std::string phase_name = std::string("phase_line.") + cfg.format;
        if (cfg.format == "csv") {
            CsvWriter csv(dir / phase_name, "z_star,stable,semi_stable");
            for (const auto& pt : phase)
                csv.row({fmt_double(pt.z), pt.stable ? "1" : "0", pt.semi_stable ? "1" : "0"});
        } else {
            nlohmann::json j = nlohmann::json::array();
            for (const auto& pt : phase)
                j.push_back({{"z_star", pt.z}, {"stable", pt.stable}, {"semi_stable", pt.semi_stable}});
            std::ofstream out(dir / phase_name, std::ios::binary);
            out << j.dump(2) << "\n";
        }
        manifest.add_output(phase_name);
        manifest.write();
        return kOk;
    });
}

inline int cmd_env_integrate(const RunConfig& raw, const CliOptions& opt) {
    return run_guarded([&] {
        const RunConfig cfg = detail::with_overrides(raw, opt);
        detail::require(cfg.has_env, "env");
        cfg.env.model.validate();
        const double dt = cfg.env.dt > 0.0
                              ? cfg.env.dt
                              : (cfg.env.model.kind == EnvKind::linear_misra
                                     ? std::min(cfg.env.model.horizon / 1000.0,
                                                0.1 / cfg.env.model.gamma0)
                                     : cfg.env.model.horizon / 1000.0);
        const Trajectory traj = integrate_co2(cfg.env.model, cfg.env.z, dt);
        const auto dir = detail::make_out_dir(cfg);
        ManifestWriter manifest(cfg, dir);
        manifest.add_output(detail::write_trajectory(dir, cfg.format, traj, "t", cfg.env.z));
        manifest.write();
        return kOk;
    });
}

inline int cmd_env_verify(const RunConfig& raw, const CliOptions& opt) {
    return run_guarded([&] {
        const RunConfig cfg = detail::with_overrides(raw, opt);
        detail::require(cfg.has_game, "game");
        detail::require(cfg.has_mix, "mix");
        detail::require(cfg.has_env, "env");
        cfg.game.validate();
        cfg.mix.validate();
        cfg.env.model.validate();
        const InvarianceReport rep =
            verify_invariance(cfg.game, cfg.mix, cfg.env.model, cfg.env.cost);
        const auto dir = detail::make_out_dir(cfg);
        ManifestWriter manifest(cfg, dir);
        nlohmann::json j;
        j["max_h_deviation"] = rep.max_gap_deviation;
        j["sets_equal"] = rep.sets_equal;
        j["stable_plain"] = rep.stable_plain;
        j["stable_env"] = rep.stable_env;
        j["ok"] = rep.ok;
        {
            std::ofstream out(dir / "report.json", std::ios::binary);
            out << j.dump(2) << "\n";
        }
        manifest.add_output("report.json");
        manifest.write();
        return rep.ok ? static_cast<int>(kOk) : static_cast<int>(kNonConvergence);
    });
}

inline int cmd_sweep(const RunConfig& raw, const CliOptions& opt) {
    return run_guarded([&] {
        const RunConfig cfg = detail::with_overrides(raw, opt);
        detail::require(cfg.has_game, "game");
        detail::require(cfg.has_mix, "mix");
        if (cfg.sweep.empty() || cfg.sweep.size() > 2)
            throw ConfigError("sweep: need 1 or 2 axes");
        cfg.game.validate();
        cfg.mix.validate();
        // Validate axis names upfront so an unknown parameter fails before
        // any file is written.
        for (const auto& ax : cfg.sweep) {
            GameParams g = cfg.game;
            PopulationMix m = cfg.mix;
            apply_param(g, m, ax.param, ax.start);
        }

        // Default grids sit half a step inside the axis range, so values
        // that land exactly on regime boundaries (a swept price gap crossing
        // morality/2, say) are avoided; --exact uses endpoint-inclusive
        // spacing instead.
        auto grid = [&](const SweepAxis& ax) {
            std::vector<double> v;
            v.reserve(ax.count);
            if (opt.exact) {
                if (ax.count == 1) {
                    v.push_back(ax.start);
                } else {
                    for (std::size_t i = 0; i < ax.count; ++i)
                        v.push_back(ax.start + (ax.stop - ax.start) * static_cast<double>(i) /
                                                   static_cast<double>(ax.count - 1));
                }
            } else {
                for (std::size_t i = 0; i < ax.count; ++i)
                    v.push_back(ax.start + (ax.stop - ax.start) *
                                               (static_cast<double>(i) + 0.5) /
                                               static_cast<double>(ax.count));
            }
            return v;
        };

        const auto axis1 = grid(cfg.sweep[0]);
        const std::vector<double> axis2 =
            cfg.sweep.size() == 2 ? grid(cfg.sweep[1]) : std::vector<double>{0.0};

        const auto dir = detail::make_out_dir(cfg);
        ManifestWriter manifest(cfg, dir);
        std::string header = cfg.sweep[0].param;
        if (cfg.sweep.size() == 2) header += "," + cfg.sweep[1].param;
        header += ",stable_set,regime";
        CsvWriter csv(dir / "sweep.csv", header);

        for (double v1 : axis1) {
            for (double v2 : axis2) {
                GameParams g = cfg.game;
                PopulationMix m = cfg.mix;
                apply_param(g, m, cfg.sweep[0].param, v1);
                if (cfg.sweep.size() == 2) apply_param(g, m, cfg.sweep[1].param, v2);
                std::string members;
                std::string regime;
                try {
                    g.validate();
                    m.validate();
                    const StableSet s = stable_set(g, m);
                    for (std::size_t i = 0; i < s.points.size(); ++i)
                        members += (i ? ";" : "") + fmt_double(s.points[i].z);
                    regime = s.regime_label;
                } catch (const RegimeAmbiguityError& e) {
                    regime = "ambiguous:" + e.boundary();
                } catch (const std::invalid_argument&) {
                    regime = "invalid";
                }
                std::vector<std::string> cells{fmt_double(v1)};
                if (cfg.sweep.size() == 2) cells.push_back(fmt_double(v2));
                cells.push_back(members);
                cells.push_back(regime);  // labels are comma-free by construction
                csv.row(cells);
            }
        }
        manifest.add_output("sweep.csv");
        manifest.write();
        return kOk;
    });
}

}  // namespace popgame::cli
