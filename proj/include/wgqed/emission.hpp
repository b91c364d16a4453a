// emission.hpp: two-level emitter near the waveguide cut-off
//
// Green's-function side: self-energy R = Delta + i Gamma/2 of the excited state,
// the continuum spectral function U(omega), the bound polariton below omega0 and
// U1(t) = int U(omega) e^{-i omega t/hbar} domega + Z e^{-i omega_b t/hbar}.
// Time-domain side: direct integration of C1 and the field amplitudes C0(k).
//
// With the near-edge DOS, Gamma(omega) = 2 pi A / sqrt(omega - omega0) where
// A = g^2 sqrt(omega0/2) / (hbar v); all closed forms below use A.
//
// Time-dependent amplitudes are reported in the frame rotating at omega10.

#pragma once

#include <optional>
#include <vector>

#include "wgqed/grids.hpp"
#include "wgqed/wavepacket.hpp"
#include "wgqed/waveguide.hpp"

namespace wgqed {

struct TwoLevelParams {
    double omega10{0.0};       // meV
    WaveguideModel model;
    double leak_rate{0.0};     // gamma' (meV), time-domain propagation only

    void validate() const;
    double edge_strength() const;  // A in meV^{3/2}
};

double gamma_of_omega(double omega, const TwoLevelParams& params);

// Infinite band: -pi A / sqrt(omega0 - omega) below the edge, 0 above.
// Throws DomainError at omega == omega0.
double delta_closed_form(double omega, const TwoLevelParams& params);

// Band truncated at `cutoff` (meV): -(2A/a) atan(U/a) below the edge (a = sqrt(omega0 - omega)),
// (A/b) ln((U + b)/(U - b)) above (b = sqrt(omega - omega0)), U = sqrt(cutoff - omega0).
double delta_closed_form(double omega, const TwoLevelParams& params, double cutoff);

// Principal-value quadrature of (1/2pi) int_{omega0}^{cutoff} Gamma(w')/(omega - w') dw'
// in u = sqrt(w' - omega0), `panels` composite 8-point Gauss-Legendre panels, pole
// removed by subtracting its residue term. Throws DomainError when sqrt|omega - omega0|
// is smaller than one panel.
double delta_numeric(double omega, const TwoLevelParams& params, double cutoff, std::size_t panels = 200000);

struct SelfEnergyCurve {
    std::vector<double> omega;
    std::vector<double> gamma;
    std::vector<double> delta;
};
SelfEnergyCurve self_energy_curve(const std::vector<double>& omegas, const TwoLevelParams& params);

// Continuum spectral density (1/pi)(Gamma/2)/((omega - omega10 - Delta)^2 + (Gamma/2)^2), 0 below the edge.
double spectral_function(double omega, const TwoLevelParams& params);

struct BoundState {
    double omega_b{0.0};   // meV, below omega0
    double residue{0.0};   // Z
};
// Root of omega - omega10 - Delta(omega) = 0 below the edge; absent for g = 0.
std::optional<BoundState> bound_state(const TwoLevelParams& params);

struct EmissionResult {
    TimeGrid times;
    std::vector<cplx> u1;               // rotating frame of omega10
    std::optional<BoundState> bound;
    double plateau{0.0};                // Z^2 (0 without a bound state)
    double continuum_weight{0.0};       // int U domega over the resolved band
    double tail_weight{0.0};            // int U domega beyond the resolved band
    double sum_rule() const;            // continuum + tail + Z
};

// Throws NumericalError when the sum rule misses 1 by more than 1e-2.
EmissionResult excited_amplitude(const TimeGrid& times, const TwoLevelParams& params);

// e^{-i Delta t/hbar} e^{-Gamma t/2hbar} in the omega10 frame, Delta and Gamma at omega10.
cplx weisskopf_wigner(double t, const TwoLevelParams& params);

struct TwoLevelTrajectory {
    TimeGrid times;
    KGrid kgrid;
    std::vector<cplx> c1;                  // omega10 frame
    std::vector<double> field_norm;
    std::vector<double> norm_deficit;
    std::vector<std::vector<cplx>> snapshots;  // C0(k) every snapshot_stride steps
    std::vector<std::size_t> snapshot_steps;
    std::vector<cplx> final_field;         // C0(k, t_end), interaction picture
};

struct EmissionGrids {
    KGrid kgrid;
    TimeGrid times;
};

// k-grid up to omega10 + band_cover (dk <= 0.1 /um and short enough that the recurrence
// time 2pi/(dk v_g(omega10)) is four windows), RK4 step at most hbar/(5 band_cover) with a
// step count divisible by 100.
EmissionGrids suggest_emission_grids(const TwoLevelParams& params, double t_end, double band_cover = 1600.0);

struct TwoLevelOptions {
    // Adds the level shift of the modes beyond the k-grid (truncation_shift at omega10).
    bool restore_band_tail{true};
    std::size_t snapshot_stride{0};
};

// C1(0) = 1, C0 = 0; integrates dC1/dt = -i G sum C0 e^{-i(omega_k - omega10)t/hbar} dk - gamma'/2hbar C1,
// dC0/dt = -i G C1 e^{i(omega_k - omega10)t/hbar}.
TwoLevelTrajectory propagate_two_level(const TwoLevelParams& params, const TimeGrid& times, const KGrid& kgrid,
                                       const TwoLevelOptions& options = {});

struct FieldSnapshot {
    double t{0.0};
    std::vector<double> x;
    std::vector<cplx> f;
    double norm() const;  // sum |f|^2 dx
};

// f(x,t) = (2pi)^{-1/2} sum_k C0(k,T0) e^{-i(omega_k - omega0)t/hbar} e^{ikx} dk for free
// propagation after the emission window; C0 in the interaction picture. The atom is at x = 0.
// Throws DomainError when dx > pi / k_max or the x window is longer than the period 2pi/dk.
std::vector<FieldSnapshot> field_snapshots(const SpectralWavepacket& c0, const std::vector<double>& times,
                                           const std::vector<double>& xgrid, const TwoLevelParams& params);

// Same transform applied to the stored C0(k, t) of a trajectory, each at its own time: the
// field with the atom still coupled, where the photonic part of the bound polariton stays put.
std::vector<FieldSnapshot> coupled_field_snapshots(const TwoLevelTrajectory& trajectory,
                                                   const std::vector<double>& xgrid, const TwoLevelParams& params);

// Per snapshot: mean |f|^2 over |x| <= origin_halfwidth and the position of the largest
// |f|^2 beyond x_exclude. speed is the least-squares slope of that position against t
// (0 with fewer than two snapshots).
struct FieldMotion {
    std::vector<double> t;
    std::vector<double> origin_density;
    std::vector<double> front;
    double speed{0.0};
};
FieldMotion track_field(const std::vector<FieldSnapshot>& snapshots, double origin_halfwidth = 0.25,
                        double x_exclude = 2.0);

} // namespace wgqed
