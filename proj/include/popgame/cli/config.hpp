#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "popgame/dynamics.hpp"
#include "popgame/environment.hpp"
#include "popgame/game.hpp"

namespace popgame::cli {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct SweepAxis {
    std::string param;
    double start = 0.0;
    double stop = 1.0;
    std::size_t count = 1;
};

struct MonteCarloConfig {
    std::uint64_t runs = 100;
    Z0Sampling z0_sampling = Z0Sampling::uniform;
    double tolerance = 2e-2;
};

struct ReplicatorConfig {
    double z0 = 0.5;
    double t_end = 200.0;
    double dt = 0.01;
};

struct EnvRunConfig {
    EnvModel model;
    CostFunctional cost;
    double z = 0.0;   // adoption level for env-integrate
    double dt = 0.0;  // 0 = choose from the model's decay scale
};

// Everything a run needs, assembled from one config file. Sections are
// optional; each command checks for the ones it requires.
struct RunConfig {
    GameParams game{};
    bool has_game = false;
    PopulationMix mix{};
    bool has_mix = false;
    SimConfig sim{};
    bool has_sim = false;
    MonteCarloConfig mc{};
    bool has_mc = false;
    ReplicatorConfig rep{};
    bool has_rep = false;
    EnvRunConfig env{};
    bool has_env = false;
    std::vector<SweepAxis> sweep;
    std::string out_dir = "out";
    std::string format = "csv";
};

namespace detail {

inline double to_double(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad number for '" + key + "': " + s);
    }
}

inline std::uint64_t to_u64(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const std::uint64_t v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad count for '" + key + "': " + s);
    }
}

inline std::vector<double> to_list(const std::string& s, const std::string& key) {
    std::vector<double> out;
    std::istringstream iss(s);
    std::string tok;
    while (iss >> tok) out.push_back(to_double(tok, key));
    return out;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline SweepAxis parse_axis(const std::string& value, const std::string& key) {
    std::istringstream iss(value);
    SweepAxis ax;
    std::string start, stop, count;
    if (!(iss >> ax.param >> start >> stop >> count))
        throw ConfigError("config: '" + key + "' needs <param> <start> <stop> <count>");
    std::string extra;
    if (iss >> extra) throw ConfigError("config: trailing tokens in '" + key + "'");
    ax.start = to_double(start, key);
    ax.stop = to_double(stop, key);
    ax.count = static_cast<std::size_t>(to_u64(count, key));
    if (ax.count < 1) throw ConfigError("config: '" + key + "' count must be at least 1");
    return ax;
}

using SectionMap = std::map<std::string, std::map<std::string, std::string>>;

inline SectionMap parse_sections(const std::string& text) {
    SectionMap sections;
    std::string section;
    std::istringstream iss(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(iss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": key outside a section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        if (!sections[section].emplace(key, value).second)
            throw ConfigError("config: duplicate key '" + section + "." + key + "'");
    }
    return sections;
}

inline void apply_entry(RunConfig& cfg, const std::string& section, const std::string& key,
                        const std::string& value) {
    const std::string full = section + "." + key;
    if (section == "game") {
        cfg.has_game = true;
        if (key == "price_clean") cfg.game.price_clean = to_double(value, full);
        else if (key == "price_unclean") cfg.game.price_unclean = to_double(value, full);
        else if (key == "morality") cfg.game.morality = to_double(value, full);
        else if (key == "env_weight") cfg.game.env_weight = to_double(value, full);
        else throw ConfigError("config: unknown key '" + full + "'");
    } else if (section == "mix") {
        cfg.has_mix = true;
        if (key == "alpha_r") cfg.mix.alpha_r = to_double(value, full);
        else if (key == "alpha_h") cfg.mix.alpha_h = to_double(value, full);
        else if (key == "alpha_l") cfg.mix.alpha_l = to_double(value, full);
        else throw ConfigError("config: unknown key '" + full + "'");
    } else if (section == "sim") {
        cfg.has_sim = true;
        if (key == "steps") cfg.sim.steps = to_u64(value, full);
        else if (key == "z0") cfg.sim.z0 = to_double(value, full);
        else if (key == "record_every") cfg.sim.record_every = to_u64(value, full);
        else if (key == "seed") cfg.sim.seed = to_u64(value, full);
        else if (key == "k0") cfg.sim.k0 = to_u64(value, full);
        else throw ConfigError("config: unknown key '" + full + "'");
    } else if (section == "montecarlo") {
        cfg.has_mc = true;
        if (key == "runs") cfg.mc.runs = to_u64(value, full);
        else if (key == "tolerance") cfg.mc.tolerance = to_double(value, full);
        else if (key == "z0_sampling") {
            if (value == "fixed") cfg.mc.z0_sampling = Z0Sampling::fixed;
            else if (value == "uniform") cfg.mc.z0_sampling = Z0Sampling::uniform;
            else throw ConfigError("config: '" + full + "' must be fixed or uniform");
        } else throw ConfigError("config: unknown key '" + full + "'");
    } else if (section == "replicator") {
        cfg.has_rep = true;
        if (key == "z0") cfg.rep.z0 = to_double(value, full);
        else if (key == "t_end") cfg.rep.t_end = to_double(value, full);
        else if (key == "dt") cfg.rep.dt = to_double(value, full);
        else throw ConfigError("config: unknown key '" + full + "'");
    } else if (section == "env") {
        cfg.has_env = true;
        if (key == "kind") {
            if (value == "linear_misra") cfg.env.model.kind = EnvKind::linear_misra;
            else if (value == "custom_tabulated") cfg.env.model.kind = EnvKind::custom_tabulated;
            else throw ConfigError("config: unknown env kind '" + value + "'");
        } else if (key == "q") cfg.env.model.q = to_double(value, full);
        else if (key == "gamma") cfg.env.model.gamma = to_double(value, full);
        else if (key == "n_pop") cfg.env.model.n_pop = to_double(value, full);
        else if (key == "gamma0") cfg.env.model.gamma0 = to_double(value, full);
        else if (key == "c0") cfg.env.model.c0 = to_double(value, full);
        else if (key == "horizon") {
            if (value == "inf") cfg.env.model.infinite_horizon = true;
            else cfg.env.model.horizon = to_double(value, full);
        } else if (key == "c_grid") cfg.env.model.c_grid = to_list(value, full);
        else if (key == "z_grid") cfg.env.model.z_grid = to_list(value, full);
        else if (key == "f_values") cfg.env.model.f_values = to_list(value, full);
        else if (key == "cost_kind") {
            if (value == "time_average") cfg.env.cost.kind = CostKind::time_average;
            else if (value == "long_run_limit") cfg.env.cost.kind = CostKind::long_run_limit;
            else throw ConfigError("config: unknown cost kind '" + value + "'");
        } else if (key == "phi") cfg.env.cost.phi = value;
        else if (key == "z") cfg.env.z = to_double(value, full);
        else if (key == "dt") cfg.env.dt = to_double(value, full);
        else throw ConfigError("config: unknown key '" + full + "'");
    } else if (section == "output") {
        if (key == "dir") cfg.out_dir = value;
        else if (key == "format") {
            if (value != "csv" && value != "json")
                throw ConfigError("config: output.format must be csv or json");
            cfg.format = value;
        } else throw ConfigError("config: unknown key '" + full + "'");
    } else {
        throw ConfigError("config: unknown section '" + section + "'");
    }
}

inline RunConfig from_sections(const SectionMap& sections) {
    RunConfig cfg;
    // axis1 before axis2 regardless of file order
    for (const auto& sec_name : {"game", "mix", "sim", "montecarlo", "replicator", "env",
                                 "output"}) {
        const auto it = sections.find(sec_name);
        if (it == sections.end()) continue;
        for (const auto& [k, v] : it->second) apply_entry(cfg, sec_name, k, v);
    }
    if (const auto it = sections.find("sweep"); it != sections.end()) {
        if (const auto a1 = it->second.find("axis1"); a1 != it->second.end())
            cfg.sweep.push_back(parse_axis(a1->second, "sweep.axis1"));
        if (const auto a2 = it->second.find("axis2"); a2 != it->second.end()) {
            if (cfg.sweep.empty()) throw ConfigError("config: sweep.axis2 without axis1");
            cfg.sweep.push_back(parse_axis(a2->second, "sweep.axis2"));
        }
        for (const auto& [k, v] : it->second)
            if (k != "axis1" && k != "axis2")
                throw ConfigError("config: unknown key 'sweep." + k + "'");
    }
    for (const auto& [name, kv] : sections) {
        (void)kv;
        static const std::vector<std::string> known{"game", "mix",  "sim",   "montecarlo",
                                                    "replicator", "env", "sweep", "output"};
        if (std::find(known.begin(), known.end(), name) == known.end())
            throw ConfigError("config: unknown section '" + name + "'");
    }
    return cfg;
}

inline RunConfig from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config: JSON root must be an object");
    SectionMap sections;
    for (const auto& [sec, body] : j.items()) {
        if (!body.is_object())
            throw ConfigError("config: JSON section '" + sec + "' must be an object");
        if (sec == "sweep") {
            const auto axes = body.find("axes");
            if (axes == body.end() || !axes->is_array())
                throw ConfigError("config: sweep needs an 'axes' array");
            std::size_t n = 0;
            for (const auto& a : *axes) {
                ++n;
                if (n > 2) throw ConfigError("config: at most 2 sweep axes");
                std::ostringstream line;
                line << a.value("param", std::string{}) << " " << a.value("start", 0.0) << " "
                     << a.value("stop", 0.0) << " " << a.value("count", 0);
                sections["sweep"]["axis" + std::to_string(n)] = line.str();
            }
            continue;
        }
        for (const auto& [k, v] : body.items()) {
            std::string s;
            if (v.is_string()) {
                s = v.get<std::string>();
            } else if (v.is_boolean()) {
                s = v.get<bool>() ? "true" : "false";
            } else if (v.is_array()) {
                std::ostringstream os;
                for (std::size_t i = 0; i < v.size(); ++i)
                    os << (i ? " " : "") << v[i].get<double>();
                s = os.str();
            } else if (v.is_number_unsigned()) {
                s = std::to_string(v.get<std::uint64_t>());
            } else if (v.is_number()) {
                std::ostringstream os;
                os.precision(17);
                os << v.get<double>();
                s = os.str();
            } else {
                throw ConfigError("config: unsupported JSON value at '" + sec + "." + k + "'");
            }
            sections[sec][k] = s;
        }
    }
    return from_sections(sections);
}

}  // namespace detail

inline RunConfig parse_config_text(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{')
        return detail::from_json(nlohmann::json::parse(text, nullptr, true, true));
    return detail::from_sections(detail::parse_sections(text));
}

inline RunConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config_text(buf.str());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: JSON parse error: ") + e.what());
    }
}

// Sweep parameters are applied by name. Adjusting one mix component
// rebalances another to keep the fractions on the simplex: alpha_r and
// alpha_l changes are absorbed by alpha_h, alpha_h changes by alpha_r.
inline void apply_param(GameParams& game, PopulationMix& mix, const std::string& name,
                        double value) {
    if (name == "morality") game.morality = value;
    else if (name == "price_clean") game.price_clean = value;
    else if (name == "price_unclean") game.price_unclean = value;
    else if (name == "delta_p") game.price_clean = game.price_unclean + value;
    else if (name == "env_weight") game.env_weight = value;
    else if (name == "alpha_r") { mix.alpha_r = value; mix.alpha_h = 1.0 - value - mix.alpha_l; }
    else if (name == "alpha_h") { mix.alpha_h = value; mix.alpha_r = 1.0 - value - mix.alpha_l; }
    else if (name == "alpha_l") { mix.alpha_l = value; mix.alpha_h = 1.0 - value - mix.alpha_r; }
    else throw ConfigError("sweep: unknown parameter '" + name + "'");
}

}  // namespace popgame::cli
