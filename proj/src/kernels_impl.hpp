#pragma once

#include "wgqed/kernels.hpp"

namespace wgqed::kernels::detail {

// Plain complex product; std::complex operator* goes through the
// Annex G NaN/Inf recovery path, which costs more than the arithmetic here.
inline cplx mul(cplx a, cplx b) {
    return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

inline bool snapshot_due(std::size_t n, std::size_t steps, std::size_t stride) {
    return n == steps || (stride > 0 && n % stride == 0);
}

void fourier_synthesis_reference(std::span<const cplx> weights, std::span<const double> freqs, double t0,
                                 double dt, std::size_t count, std::span<cplx> out, std::span<cplx> derivative);
void fourier_synthesis_parallel(std::span<const cplx> weights, std::span<const double> freqs, double t0,
                                double dt, std::size_t count, std::span<cplx> out, std::span<cplx> derivative);

FieldAccumulation accumulate_field_reference(std::span<const cplx> source, std::span<const double> detuning,
                                             double coupling, double dk, double t_start, double dt,
                                             std::size_t steps, std::size_t stride);
FieldAccumulation accumulate_field_parallel(std::span<const cplx> source, std::span<const double> detuning,
                                            double coupling, double dk, double t_start, double dt,
                                            std::size_t steps, std::size_t stride);

ChainHistory propagate_chain_reference(const ChainSystem& system, const ChainState& initial, double t_start,
                                       double dt, std::size_t steps, std::span<const cplx> drive,
                                       std::size_t stride);
ChainHistory propagate_chain_parallel(const ChainSystem& system, const ChainState& initial, double t_start,
                                      double dt, std::size_t steps, std::span<const cplx> drive,
                                      std::size_t stride);

} // namespace wgqed::kernels::detail
