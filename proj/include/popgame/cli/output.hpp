#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "popgame/cli/config.hpp"
#include "popgame/popgame.hpp"

namespace popgame::cli {

// 17 significant digits: lossless round trip for 64-bit floats, '.' decimal
// separator regardless of locale state.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string iso8601_utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

// Deterministic rendering of the parsed config as a config document in its
// own right: fixed section order, alphabetical keys, 17-digit floats. The
// manifest stores these lines verbatim, so the hash can be recomputed from
// the manifest alone and the run can be repeated by feeding the lines back
// in as a config file.
inline std::vector<std::string> canonical_config_lines(const RunConfig& cfg) {
    std::vector<std::string> out;
    auto put = [&](const std::string& k, const std::string& v) {
        out.push_back(k + " = " + v);
    };
    auto put_d = [&](const std::string& k, double v) { put(k, fmt_double(v)); };
    auto put_u = [&](const std::string& k, std::uint64_t v) { put(k, std::to_string(v)); };
    auto section = [&](const char* name) { out.push_back(std::string("[") + name + "]"); };

    if (cfg.has_game) {
        section("game");
        put_d("env_weight", cfg.game.env_weight);
        put_d("morality", cfg.game.morality);
        put_d("price_clean", cfg.game.price_clean);
        put_d("price_unclean", cfg.game.price_unclean);
    }
    if (cfg.has_mix) {
        section("mix");
        put_d("alpha_h", cfg.mix.alpha_h);
        put_d("alpha_l", cfg.mix.alpha_l);
        put_d("alpha_r", cfg.mix.alpha_r);
    }
    if (cfg.has_sim) {
        section("sim");
        put_u("k0", cfg.sim.k0);
        put_u("record_every", cfg.sim.record_every);
        put_u("seed", cfg.sim.seed);
        put_u("steps", cfg.sim.steps);
        put_d("z0", cfg.sim.z0);
    }
    if (cfg.has_mc) {
        section("montecarlo");
        put_u("runs", cfg.mc.runs);
        put_d("tolerance", cfg.mc.tolerance);
        put("z0_sampling", cfg.mc.z0_sampling == Z0Sampling::uniform ? "uniform" : "fixed");
    }
    if (cfg.has_rep) {
        section("replicator");
        put_d("dt", cfg.rep.dt);
        put_d("t_end", cfg.rep.t_end);
        put_d("z0", cfg.rep.z0);
    }
    if (cfg.has_env) {
        section("env");
        auto join = [&](const std::vector<double>& v) {
            std::string s;
            for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt_double(v[i]);
            return s;
        };
        put_d("c0", cfg.env.model.c0);
        if (cfg.env.model.kind == EnvKind::custom_tabulated) {
            put("c_grid", join(cfg.env.model.c_grid));
        }
        put("cost_kind",
            cfg.env.cost.kind == CostKind::time_average ? "time_average" : "long_run_limit");
        put_d("dt", cfg.env.dt);
        if (cfg.env.model.kind == EnvKind::custom_tabulated) {
            put("f_values", join(cfg.env.model.f_values));
        } else {
            put_d("gamma", cfg.env.model.gamma);
            put_d("gamma0", cfg.env.model.gamma0);
        }
        put("horizon",
            cfg.env.model.infinite_horizon ? "inf" : fmt_double(cfg.env.model.horizon));
        put("kind",
            cfg.env.model.kind == EnvKind::linear_misra ? "linear_misra" : "custom_tabulated");
        if (cfg.env.model.kind == EnvKind::linear_misra) put_d("n_pop", cfg.env.model.n_pop);
        put("phi", cfg.env.cost.phi);
        if (cfg.env.model.kind == EnvKind::linear_misra) put_d("q", cfg.env.model.q);
        put_d("z", cfg.env.z);
        if (cfg.env.model.kind == EnvKind::custom_tabulated)
            put("z_grid", join(cfg.env.model.z_grid));
    }
    if (!cfg.sweep.empty()) {
        section("sweep");
        for (std::size_t i = 0; i < cfg.sweep.size(); ++i) {
            const auto& ax = cfg.sweep[i];
            put("axis" + std::to_string(i + 1),
                ax.param + " " + fmt_double(ax.start) + " " + fmt_double(ax.stop) + " " +
                    std::to_string(ax.count));
        }
    }
    section("output");
    put("dir", cfg.out_dir);
    put("format", cfg.format);
    return out;
}

inline std::string canonical_config_text(const RunConfig& cfg) {
    std::string all;
    for (const auto& line : canonical_config_lines(cfg)) {
        all += line;
        all += '\n';
    }
    return all;
}

inline std::string config_hash(const RunConfig& cfg) {
    return hex64(fnv1a64(canonical_config_text(cfg)));
}

// Provenance record written next to every output set.
class ManifestWriter {
  public:
    ManifestWriter(const RunConfig& cfg, std::filesystem::path out_dir)
        : out_dir_(std::move(out_dir)), started_(iso8601_utc_now()) {
        canonical_ = canonical_config_lines(cfg);
        hash_ = config_hash(cfg);
    }

    void add_seed(std::uint64_t s) { seeds_.push_back(s); }
    void add_output(const std::string& name) { outputs_.push_back(name); }

    void write() const {
        nlohmann::json j;
        j["tool_version"] = std::string(kVersion);
        j["config_hash"] = hash_;
        j["canonical_config"] = canonical_;
        j["seeds"] = seeds_;
        j["started"] = started_;
        j["finished"] = iso8601_utc_now();
        j["outputs"] = outputs_;
        std::ofstream out(out_dir_ / "manifest.json", std::ios::binary);
        out << j.dump(2) << "\n";
    }

  private:
    std::filesystem::path out_dir_;
    std::string started_;
    std::vector<std::string> canonical_;
    std::string hash_;
    std::vector<std::uint64_t> seeds_;
    std::vector<std::string> outputs_;
};

// CSV with LF line endings on every platform.
class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& path, const std::string& header)
        : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot open " + path.string());
        out_ << header << "\n";
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
    }

  private:
    std::ofstream out_;
};

}  // namespace popgame::cli
