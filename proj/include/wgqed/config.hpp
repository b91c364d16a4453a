// config.hpp: scenario configuration files
//
//   # comment
//   scenario = send-roundtrip
//   [physics]
//   sigma0 = 0.008
//   [numerics]
//   dt = 0.002
//   [output]
//   format = csv
//
// Keys may appear before any section header or inside their own section. Unknown keys,
// keys in the wrong section, repeated keys and out-of-range values throw ConfigError
// naming the key and line.

#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace wgqed {

enum class Scenario { send_design, send_roundtrip, receive_roundtrip, table1, emission_decay, bound_state, field_movie };

enum class OutputFormat { csv, json, both };

std::string_view scenario_name(Scenario s);
Scenario parse_scenario(std::string_view name);
std::string_view format_name(OutputFormat f);
OutputFormat parse_format(std::string_view name);

struct ScenarioConfig {
    Scenario scenario{Scenario::send_design};

    // [physics]; energies in meV, lengths in um
    double omega0{1.5e6};
    double detuning{1.0};       // omega1 = eps32 = omega10 = omega0 + detuning
    double sigma0{0.08};
    double gamma{0.27};         // rate into the waveguide at omega0 + detuning
    double dipole{0.0};         // Debye; > 0 overrides gamma through rate_from_dipole
    double leak_rate{0.0};      // gamma'
    double length{1.0};         // receiving: waveguide length

    // [numerics]; 0 selects the automatic rule
    double dt{0.0};
    double half_window{0.0};
    double min_cover{3.2};
    double cover_sigmas{40.0};
    double recurrence{4.0};
    double band_cover{1600.0};  // emission k-grid reach above omega10
    double t_end{0.0};          // emission window; 0 -> 10 ps (50 hbar/gamma for bound-state)
    double samples{1000.0};     // Green's-function time samples
    double t0{10.0};            // field-movie: end of the emission window
    double frame_step{10.0};
    double frames{5.0};
    double x_min{-5.0};
    double x_max{40.0};
    double dx{0.0};
    double workers{0.0};        // sweep pool size; 0 -> hardware concurrency

    // [output]
    OutputFormat format{OutputFormat::both};
    double max_rows{4000.0};    // time series are decimated to at most this many rows

    // key -> line of the config file that set it (absent keys hold their defaults)
    std::map<std::string, int> origin;

    double effective_gamma() const;
};

// Names of every numeric key, in file order of the key table.
std::vector<std::string> numeric_keys();

ScenarioConfig parse_config(std::string_view text);
ScenarioConfig load_config(const std::string& path);

// Sets one key from its textual value, with the same validation as the parser.
void set_value(ScenarioConfig& config, const std::string& key, const std::string& value, int line = 0);

// Cross-key checks (gamma/dipole exclusivity, x window order, ...). Called by parse_config.
void validate(const ScenarioConfig& config);

// Flat key -> value map of the resolved configuration.
std::map<std::string, std::string> resolved_values(const ScenarioConfig& config);

} // namespace wgqed
