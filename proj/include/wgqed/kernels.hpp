// kernels.hpp: data-parallel inner loops
//
// Every kernel has two implementations:
//   *_reference  plain serial loops, phases from std::polar at every use;
//                kept as the oracle for the optimized path
//   *_parallel   OpenMP over fixed-size blocks with incremental phasors;
//                block partial sums are combined in block order, so results
//                do not depend on the thread count
// The dispatchers pick one through Exec.

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace wgqed::kernels {

using cplx = std::complex<double>;

enum class Exec { reference, parallel };

// out[m] = sum_j weights[j] * exp(-i freqs[j] * (t0 + m*dt)), m = 0..count-1.
// When `derivative` is non-null it also receives the time derivative
// sum_j weights[j] * (-i freqs[j]) * exp(...).
void fourier_synthesis(std::span<const cplx> weights, std::span<const double> freqs, double t0, double dt,
                       std::size_t count, std::span<cplx> out, std::span<cplx> derivative, Exec exec);

// Cumulative quadrature of dc_j/dt = -i G s(t) exp(i det_j t) over a uniform grid,
// with c_j(t_start) = 0. `source` holds s on the half-step grid t_start + m*dt/2,
// m = 0..2*steps; each step is Simpson's rule on three half-step samples.
struct FieldAccumulation {
    std::vector<double> norm;          // sum_j |c_j(t_n)|^2 dk, n = 0..steps
    std::vector<double> phase_flux;    // sum_j Im(conj(c_j) dc_j/dt) dk at t_n
    std::vector<std::vector<cplx>> snapshots;
    std::vector<std::size_t> snapshot_steps;
    std::vector<cplx> final_field;
};

FieldAccumulation accumulate_field(std::span<const cplx> source, std::span<const double> detuning,
                                   double coupling, double dk, double t_start, double dt, std::size_t steps,
                                   std::size_t snapshot_stride, Exec exec);

// Linear chain a1 <-> a3 <-> {c_j}:
//   da1/dt = -i conj(W(t)) a3
//   da3/dt = -i W(t) a1 - i G sum_j c_j exp(-i det_j t) dk - decay * a3
//   dc_j/dt = -i G a3 exp(i det_j t)
// integrated with classical fixed-step RK4. `drive` holds W on the half-step grid
// (size 2*steps + 1). All frequencies in rad/ps.
struct ChainSystem {
    std::vector<double> detuning;
    double coupling{0.0};
    double dk{1.0};
    cplx decay{0.0};
};

struct ChainState {
    cplx a1{};
    cplx a3{};
    std::vector<cplx> field;
};

struct ChainHistory {
    std::vector<cplx> a1;
    std::vector<cplx> a3;
    std::vector<double> field_norm;
    std::vector<std::vector<cplx>> snapshots;
    std::vector<std::size_t> snapshot_steps;
    std::vector<cplx> final_field;
};

// Throws NumericalError when the total norm grows by more than 1e-3 (step too large).
ChainHistory propagate_chain(const ChainSystem& system, const ChainState& initial, double t_start, double dt,
                             std::size_t steps, std::span<const cplx> drive, std::size_t snapshot_stride,
                             Exec exec);

} // namespace wgqed::kernels
