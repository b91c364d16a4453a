// dynamics.hpp: forward propagation of a driven Lambda node coupled to the waveguide

#pragma once

#include <vector>

#include "wgqed/grids.hpp"
#include "wgqed/kernels.hpp"
#include "wgqed/pulse_design.hpp"
#include "wgqed/wavepacket.hpp"

namespace wgqed {

struct Trajectory {
    TimeGrid times;
    KGrid kgrid;
    std::vector<cplx> a1;              // C1 (sending) or D1 (receiving)
    std::vector<cplx> a3;              // C3 or D3
    std::vector<double> field_norm;    // sum |C2|^2 dk
    std::vector<double> norm_deficit;  // initial norm - current norm
    std::vector<std::vector<cplx>> snapshots;
    std::vector<std::size_t> snapshot_steps;
    std::vector<cplx> final_field;     // C2(k, t_end), interaction picture
};

struct PropagationOptions {
    std::size_t snapshot_stride{0};    // 0 -> at most 512 stored fields
    kernels::Exec exec{kernels::Exec::parallel};
};

// Starts from C1 = 1, C3 = 0, C2 = 0. The pulse is sampled at the half steps of
// `tgrid`; `leak_rate` (meV) damps |3> as exp(-leak_rate t / 2 hbar) in amplitude.
Trajectory propagate_sending(const ControlPulse& pulse, const ThreeLevelNode& node, const KGrid& kgrid,
                             const TimeGrid& tgrid, double leak_rate, const PropagationOptions& options = {});

// Receiving node at x = L; times are relative to the arrival time L / v_g(center).
// Starts from D1 = D3 = 0 and C2 = the incoming packet in the arrival frame.
Trajectory propagate_receiving(const ControlPulse& pulse, const SpectralWavepacket& incoming,
                               const ThreeLevelNode& node, double length, const TimeGrid& tgrid,
                               double leak_rate = 0.0, const PropagationOptions& options = {});

// |<ideal | C2(t_end)>|
double sending_fidelity(const Trajectory& trajectory, const SpectralWavepacket& ideal);

struct PopulationTraces {
    std::vector<double> ground;     // |C1|^2
    std::vector<double> excited;    // |C3|^2
    std::vector<double> continuum;  // sum |C2|^2 dk
};
PopulationTraces population_traces(const Trajectory& trajectory);

// hbar / (20 max(detuning span over the grid, max|Omega|, gamma)) in ps.
double default_propagation_dt(const ThreeLevelNode& node, const KGrid& kgrid, double omega_max, double gamma);

} // namespace wgqed
