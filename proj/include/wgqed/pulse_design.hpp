// pulse_design.hpp: exact (non-Markovian) and Markovian control-pulse design
//
// Inverse problem for a Lambda node |1> -Omega(t)- |3> -g- |2>+photon: given the
// photon amplitude F(k) that should leave (or arrive), reconstruct C3(t), the
// continuum history C2(k,t), C1(t) and finally Omega(t) = [i dC1/dt / C3]^*.
// All amplitudes are in the interaction picture; Omega is stored in meV.

#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "wgqed/grids.hpp"
#include "wgqed/wavepacket.hpp"
#include "wgqed/waveguide.hpp"

namespace wgqed {

struct ThreeLevelNode {
    double eps32{0.0};                  // |3>-|2> splitting (meV), must exceed omega0
    WaveguideModel model;
    std::optional<double> leak_override;
    // Extra energy shift of |3> (meV), enters as -i (level_shift / hbar) C3.
    // Used to restore the modes cut off by a finite k-grid (see truncation_shift).
    double level_shift{0.0};

    double leak_rate() const { return leak_override.value_or(model.leak_rate); }
    void validate() const;
};

// Omega(t) samples (meV) on a uniform grid; zero outside the grid.
struct ControlPulse {
    TimeGrid grid;
    std::vector<cplx> omega_t;

    // Sample value when t hits a grid point, Catmull-Rom interpolation otherwise.
    cplx at(double t) const;
    double max_abs() const;
};

// C3 on the design grid, plus half-step samples used by the Simpson quadratures.
struct ExcitedAmplitude {
    TimeGrid grid;
    std::vector<cplx> half_values;      // t_start + m dt/2, m = 0..2 steps
    std::vector<cplx> half_derivative;  // dC3/dt at the same points

    std::vector<cplx> values() const;   // full-step samples
    double max_abs() const;
};

// Continuum amplitude C2(k,t): scalar diagnostics at every step, the field itself
// at a stride (final state always kept).
struct ContinuumHistory {
    KGrid kgrid;
    std::vector<double> norm;        // sum |C2|^2 dk at each step
    std::vector<double> phase_flux;  // sum |C2|^2 dphi2/dt dk at each step
    std::vector<std::vector<cplx>> snapshots;
    std::vector<std::size_t> snapshot_steps;
    std::vector<cplx> final_field;
    double end_overlap{0.0};         // |<F|C2(t_end)>|
};

struct DesignRecord {
    TimeGrid grid;
    std::vector<cplx> c1;            // C1 (sending) or D1 (receiving)
    std::vector<cplx> c3;            // C3 (sending) or D3 (receiving)
    ContinuumHistory continuum;
    ControlPulse pulse;
    std::size_t active_begin{0};     // first/last sample with |C3| >= threshold
    std::size_t active_end{0};
    double max_norm_error{0.0};      // max_t |1 - |C1|^2 - |C3|^2 - sum|C2|^2 dk|
    double min_deficit{0.0};         // min_t (1 - |C3|^2 - sum|C2|^2 dk) before clamping
    double arrival_time{0.0};        // t0 = L / v_g for receiving designs, 0 otherwise
};

// Relative threshold below which Omega is masked to zero (Omega = ... / C3).
inline constexpr double kC3MaskThreshold = 1e-6;
// Below this |C1|^2 the phase of C1 is frozen and Omega is masked to zero.
inline constexpr double kC1PhaseFloor = 1e-8;

// C3(t) = i int F(k)/g* exp(-i(omega_k - eps32)t) domega_k / 2pi on the grid.
// Throws DomainError for g = 0 and NumericalError when |C3| at either end of the
// window exceeds 1e-6 max|C3|.
ExcitedAmplitude c3_from_target(const SpectralWavepacket& target, const ThreeLevelNode& node,
                                const TimeGrid& tgrid);

// C2(k,t) = -i g* int_{t_start}^t C3(t') exp(i(omega_k - eps32)t') dt'.
// Throws NumericalError when |<F|C2(t_end)>| < 0.99.
ContinuumHistory c2_history(const SpectralWavepacket& target, const ExcitedAmplitude& c3,
                            const ThreeLevelNode& node, std::size_t snapshot_stride = 0);

// |C1| from normalization and the C1 phase from the population-weighted phase rates.
// Throws NumericalError when the normalization deficit drops below -1e-6.
std::vector<cplx> c1_reconstruct(const ExcitedAmplitude& c3, const ContinuumHistory& c2, double level_shift = 0.0);

DesignRecord design_sending_pulse(const SpectralWavepacket& target, const ThreeLevelNode& node,
                                  const TimeGrid& tgrid, const KGrid& kgrid);

// Markovian design: same C3, C1 from dC3/dt = -i Omega C1 - gamma/2 C3 with
// gamma = markovian_rate at the packet center. level_shift is ignored.
struct MarkovianDesign {
    std::vector<cplx> c1;
    std::vector<cplx> c3;
    ControlPulse pulse;
    double gamma{0.0};
};
MarkovianDesign design_markovian(const SpectralWavepacket& target, const ThreeLevelNode& node,
                                 const TimeGrid& tgrid);
ControlPulse design_sending_pulse_markovian(const SpectralWavepacket& target, const ThreeLevelNode& node,
                                            const TimeGrid& tgrid);

// Receiving design for an incoming packet F(k) emitted at x = 0, absorbed at x = L.
// The time grid is relative to the arrival time t0 = L / v_g(packet center).
// Built as the time reverse of sending the time-reversed packet.
// Throws NumericalError when the designed absorption |D1(t_end)|^2 < 0.9.
DesignRecord design_receiving_pulse(const SpectralWavepacket& incoming, const ThreeLevelNode& node,
                                    double length, const TimeGrid& tgrid);

// Incoming packet as seen by a node at x = L in the arrival-time frame:
// F(k) exp(i(k L - (omega_k - eps32) t0)).
SpectralWavepacket arrival_frame_packet(const SpectralWavepacket& incoming, const ThreeLevelNode& node,
                                        double length, double arrival_time);

// Spectral centroid sum omega_k |F|^2 dk / sum |F|^2 dk, or omega1 for sech packets.
double packet_center(const SpectralWavepacket& packet, const WaveguideModel& model);

// Relative L2 distance ||a - b|| / ||a|| between two pulses on the same grid.
double relative_l2_distance(const ControlPulse& a, const ControlPulse& b);

// Default grids for a sech packet.
struct DesignGridOptions {
    double cover_sigmas{40.0};      // k-grid reaches omega1 + max(cover_sigmas * sigma0, min_cover)
    double min_cover{3.2};          // meV
    double recurrence_factor{4.0};  // mode recurrence time / design window
    double half_window{0.0};        // 0 -> max(10 hbar/sigma0, 20 hbar/gamma)
    double dt{0.0};                 // propagation step; 0 -> hbar / (20 max(detuning span, gamma))
    double center{0.0};             // temporal center of the window
    double length{0.0};             // propagation distance (um) whose dispersion widens the window
};
struct DesignGrids {
    KGrid kgrid;
    TimeGrid propagation;           // RK4 grid
    TimeGrid design;                // propagation grid refined 2x
};
DesignGrids suggest_grids(double omega1, double sigma0, const ThreeLevelNode& node,
                          const DesignGridOptions& options = {});

} // namespace wgqed
