#include "wgqed/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wgqed/errors.hpp"
#include "wgqed/waveguide.hpp"

namespace wgqed {

namespace {

enum class Rule { positive, non_negative, any, count };

struct NumericKey {
    const char* name;
    const char* section;
    double ScenarioConfig::*member;
    Rule rule;
};

constexpr std::array kNumericKeys = {
    NumericKey{"omega0", "physics", &ScenarioConfig::omega0, Rule::positive},
    NumericKey{"detuning", "physics", &ScenarioConfig::detuning, Rule::positive},
    NumericKey{"sigma0", "physics", &ScenarioConfig::sigma0, Rule::positive},
    NumericKey{"gamma", "physics", &ScenarioConfig::gamma, Rule::positive},
    NumericKey{"dipole", "physics", &ScenarioConfig::dipole, Rule::positive},
    NumericKey{"leak_rate", "physics", &ScenarioConfig::leak_rate, Rule::non_negative},
    NumericKey{"length", "physics", &ScenarioConfig::length, Rule::non_negative},
    NumericKey{"dt", "numerics", &ScenarioConfig::dt, Rule::non_negative},
    NumericKey{"half_window", "numerics", &ScenarioConfig::half_window, Rule::non_negative},
    NumericKey{"min_cover", "numerics", &ScenarioConfig::min_cover, Rule::non_negative},
    NumericKey{"cover_sigmas", "numerics", &ScenarioConfig::cover_sigmas, Rule::positive},
    NumericKey{"recurrence", "numerics", &ScenarioConfig::recurrence, Rule::positive},
    NumericKey{"band_cover", "numerics", &ScenarioConfig::band_cover, Rule::positive},
    NumericKey{"t_end", "numerics", &ScenarioConfig::t_end, Rule::non_negative},
    NumericKey{"samples", "numerics", &ScenarioConfig::samples, Rule::count},
    NumericKey{"t0", "numerics", &ScenarioConfig::t0, Rule::positive},
    NumericKey{"frame_step", "numerics", &ScenarioConfig::frame_step, Rule::positive},
    NumericKey{"frames", "numerics", &ScenarioConfig::frames, Rule::count},
    NumericKey{"x_min", "numerics", &ScenarioConfig::x_min, Rule::any},
    NumericKey{"x_max", "numerics", &ScenarioConfig::x_max, Rule::any},
    NumericKey{"dx", "numerics", &ScenarioConfig::dx, Rule::non_negative},
    NumericKey{"workers", "numerics", &ScenarioConfig::workers, Rule::non_negative},
    NumericKey{"max_rows", "output", &ScenarioConfig::max_rows, Rule::count},
};

constexpr std::array<std::string_view, 7> kScenarioNames = {
    "send-design", "send-roundtrip", "receive-roundtrip", "table1", "emission-decay", "bound-state", "field-movie"};

std::string where(int line) { return line > 0 ? " (line " + std::to_string(line) + ")" : ""; }

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

const NumericKey* find_numeric(std::string_view key) {
    for (const auto& k : kNumericKeys) {
        if (key == k.name) return &k;
    }
    return nullptr;
}

std::string_view section_of(std::string_view key) {
    if (key == "scenario") return "";
    if (key == "format") return "output";
    if (const auto* k = find_numeric(key)) return k->section;
    return {};
}

bool known_key(std::string_view key) { return key == "scenario" || key == "format" || find_numeric(key); }

double parse_number(const std::string& key, const std::string& text, int line) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
        throw ConfigError("config: " + key + " = '" + text + "' is not a finite number" + where(line));
    }
    return value;
}

} // namespace

std::string_view scenario_name(Scenario s) { return kScenarioNames[static_cast<std::size_t>(s)]; }

Scenario parse_scenario(std::string_view name) {
    for (std::size_t i = 0; i < kScenarioNames.size(); ++i) {
        if (kScenarioNames[i] == name) return static_cast<Scenario>(i);
    }
    throw ConfigError("config: unknown scenario '" + std::string(name) + "'");
}

std::string_view format_name(OutputFormat f) {
    switch (f) {
    case OutputFormat::csv: return "csv";
    case OutputFormat::json: return "json";
    case OutputFormat::both: return "both";
    }
    return "both";
}

OutputFormat parse_format(std::string_view name) {
    if (name == "csv") return OutputFormat::csv;
    if (name == "json") return OutputFormat::json;
    if (name == "both") return OutputFormat::both;
    throw ConfigError("config: format must be csv, json or both, got '" + std::string(name) + "'");
}

double ScenarioConfig::effective_gamma() const { return dipole > 0.0 ? rate_from_dipole(dipole) : gamma; }

std::vector<std::string> numeric_keys() {
    std::vector<std::string> out;
    for (const auto& k : kNumericKeys) out.emplace_back(k.name);
    return out;
}

void set_value(ScenarioConfig& config, const std::string& key, const std::string& value, int line) {
    if (key == "scenario") {
        try {
            config.scenario = parse_scenario(value);
        } catch (const ConfigError& e) {
            throw ConfigError(std::string(e.what()) + where(line));
        }
    } else if (key == "format") {
        try {
            config.format = parse_format(value);
        } catch (const ConfigError& e) {
            throw ConfigError(std::string(e.what()) + where(line));
        }
    } else if (const auto* k = find_numeric(key)) {
        const double v = parse_number(key, value, line);
        switch (k->rule) {
        case Rule::positive:
            if (!(v > 0.0)) throw ConfigError("config: " + key + " must be > 0" + where(line));
            break;
        case Rule::non_negative:
            if (!(v >= 0.0)) throw ConfigError("config: " + key + " must be >= 0" + where(line));
            break;
        case Rule::count:
            if (!(v >= 1.0) || v != std::floor(v)) {
                throw ConfigError("config: " + key + " must be a positive integer" + where(line));
            }
            break;
        case Rule::any: break;
        }
        config.*(k->member) = v;
    } else {
        throw ConfigError("config: unknown key '" + key + "'" + where(line));
    }
    config.origin[key] = line;
}

void validate(const ScenarioConfig& config) {
    const auto line_of = [&](const char* key) {
        const auto it = config.origin.find(key);
        return it == config.origin.end() ? 0 : it->second;
    };
    if (config.origin.count("gamma") && config.origin.count("dipole")) {
        throw ConfigError("config: gamma" + where(line_of("gamma")) + " and dipole" + where(line_of("dipole")) +
                          " are mutually exclusive");
    }
    if (!(config.x_max > config.x_min)) {
        throw ConfigError("config: x_max must exceed x_min" + where(line_of("x_max")));
    }
    if (config.scenario != Scenario::emission_decay && config.scenario != Scenario::bound_state &&
        config.scenario != Scenario::field_movie && config.sigma0 >= config.detuning) {
        throw ConfigError("config: sigma0 must be smaller than the detuning from the band edge" +
                          where(line_of("sigma0")));
    }
}

ScenarioConfig parse_config(std::string_view text) {
    ScenarioConfig config;
    std::map<std::string, int> seen;
    std::string section;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view body = raw;
        if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
        body = trim(body);
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']') throw ConfigError("config: malformed section header" + where(line));
            section = std::string(trim(body.substr(1, body.size() - 2)));
            if (section != "physics" && section != "numerics" && section != "output") {
                throw ConfigError("config: unknown section [" + section + "]" + where(line));
            }
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw ConfigError("config: expected key = value" + where(line));
        const std::string key(trim(body.substr(0, eq)));
        const std::string value(trim(body.substr(eq + 1)));
        if (key.empty()) throw ConfigError("config: empty key" + where(line));
        if (!known_key(key)) throw ConfigError("config: unknown key '" + key + "'" + where(line));
        if (!section.empty() && section_of(key) != section) {
            const auto home = section_of(key);
            throw ConfigError("config: key '" + key + "' does not belong in [" + section + "]" +
                              (home.empty() ? std::string(" (top level only)") : " (use [" + std::string(home) + "])") +
                              where(line));
        }
        if (const auto it = seen.find(key); it != seen.end()) {
            throw ConfigError("config: duplicate key '" + key + "' on lines " + std::to_string(it->second) + " and " +
                              std::to_string(line));
        }
        if (value.empty()) throw ConfigError("config: key '" + key + "' has no value" + where(line));
        seen[key] = line;
        set_value(config, key, value, line);
    }
    if (!seen.count("scenario")) throw ConfigError("config: missing required key 'scenario'");
    // canonical strong-coupling rate unless the file says otherwise
    const bool strong = config.scenario == Scenario::bound_state || config.scenario == Scenario::field_movie;
    if (strong && !seen.count("gamma") && !seen.count("dipole")) config.gamma = 4.37;
    validate(config);
    return config;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::map<std::string, std::string> resolved_values(const ScenarioConfig& config) {
    std::map<std::string, std::string> out;
    out["scenario"] = std::string(scenario_name(config.scenario));
    out["format"] = std::string(format_name(config.format));
    for (const auto& k : kNumericKeys) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", config.*(k.member));
        out[k.name] = buf;
    }
    return out;
}

} // namespace wgqed
