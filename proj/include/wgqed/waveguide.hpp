// waveguide.hpp: single-mode waveguide continuum: dispersion, DOS, coupling calibration

#pragma once

#include "wgqed/units.hpp"

namespace wgqed {

// Physical configuration of the waveguide and its flat coupling to an emitter.
//
// omega0     lower cut-off (meV)
// v          propagation speed c/n (um/ps); the dispersion uses hbar*v (meV*um)
// g          flat coupling constant (meV * um^1/2), so g * C2 * dk is an energy
// leak_rate  free-space leakage gamma' (meV)
struct WaveguideModel {
    double omega0{1.5e6};
    double v{units::kSpeedOfLight};
    double g{0.0};
    double leak_rate{0.0};

    // Throws DomainError when an invariant is violated.
    void validate() const;

    double hbar_v() const { return units::kHbar * v; }
};

// omega(k) = sqrt(omega0^2 + (hbar v k)^2), k >= 0.
double omega_of_k(double k, const WaveguideModel& model);

// Inverse dispersion, omega >= omega0.
double k_of_omega(double omega, const WaveguideModel& model);

// Near-edge density of states dk/domega = sqrt(omega0/2) / (hbar v sqrt(omega - omega0)),
// in 1/(meV um). Requires omega > omega0.
double dos(double omega, const WaveguideModel& model);

// Exact dk/domega of the square-root dispersion; agrees with dos() to O(delta/omega0).
double dk_domega(double omega, const WaveguideModel& model);

// d omega/dk / hbar in um/ps. Requires omega > omega0.
double group_velocity(double omega, const WaveguideModel& model);

// gamma = 2 pi g^2 dos(omega_center), meV.
double markovian_rate(const WaveguideModel& model, double omega_center);

// Coupling g such that markovian_rate(g, omega_center) == gamma_target.
double calibrate_coupling(double gamma_target, double omega_center, const WaveguideModel& model);

// Convenience: copy of `model` with g calibrated to gamma_target at omega_center.
WaveguideModel with_rate(WaveguideModel model, double gamma_target, double omega_center);

// Level shift contributed by the modes above omega(k_max) for a discrete state at
// omega (meV), from the near-edge DOS: the infinite-band shift minus the shift of
// the band truncated at k_max. Always negative. Requires omega < omega(k_max).
double truncation_shift(const WaveguideModel& model, double k_max, double omega);

// Dipole -> waveguide emission rate, gamma proportional to p^2 and anchored at
// 75 Debye -> 0.27 meV for the default quantum-dot geometry (1 meV above the edge).
inline constexpr double kAnchorDipoleDebye = 75.0;
inline constexpr double kAnchorRateMev = 0.27;
double rate_from_dipole(double dipole_debye);

} // namespace wgqed
