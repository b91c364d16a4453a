// units.hpp: unit convention shared by every module
//
// Energies and frequencies are carried in meV, times in ps, lengths in um.
// Every rate <-> time conversion goes through kHbar.

#pragma once

namespace wgqed::units {

inline constexpr double kHbar = 0.6582119569;          // meV * ps
inline constexpr double kSpeedOfLight = 299.792458;    // um / ps
inline constexpr double kPi = 3.14159265358979323846;

// meV -> rad/ps
constexpr double to_angular(double energy_mev) { return energy_mev / kHbar; }
// rad/ps -> meV
constexpr double to_energy(double angular) { return angular * kHbar; }

} // namespace wgqed::units
