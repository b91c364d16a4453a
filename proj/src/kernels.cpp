#include "wgqed/kernels.hpp"

#include <string>

#include "kernels_impl.hpp"
#include "wgqed/errors.hpp"

namespace wgqed::kernels {

void fourier_synthesis(std::span<const cplx> weights, std::span<const double> freqs, double t0, double dt,
                       std::size_t count, std::span<cplx> out, std::span<cplx> derivative, Exec exec) {
    if (weights.size() != freqs.size()) throw DomainError("fourier_synthesis: weights/freqs size mismatch");
    if (out.size() < count || (!derivative.empty() && derivative.size() < count)) {
        throw DomainError("fourier_synthesis: output buffer too small");
    }
    if (exec == Exec::reference) {
        detail::fourier_synthesis_reference(weights, freqs, t0, dt, count, out, derivative);
    } else {
        detail::fourier_synthesis_parallel(weights, freqs, t0, dt, count, out, derivative);
    }
}

FieldAccumulation accumulate_field(std::span<const cplx> source, std::span<const double> detuning,
                                   double coupling, double dk, double t_start, double dt, std::size_t steps,
                                   std::size_t snapshot_stride, Exec exec) {
    if (source.size() != 2 * steps + 1) {
        throw DomainError("accumulate_field: source must hold 2*steps+1 half-step samples, got " +
                          std::to_string(source.size()));
    }
    return exec == Exec::reference
               ? detail::accumulate_field_reference(source, detuning, coupling, dk, t_start, dt, steps,
                                                    snapshot_stride)
               : detail::accumulate_field_parallel(source, detuning, coupling, dk, t_start, dt, steps,
                                                   snapshot_stride);
}

ChainHistory propagate_chain(const ChainSystem& system, const ChainState& initial, double t_start, double dt,
                             std::size_t steps, std::span<const cplx> drive, std::size_t snapshot_stride,
                             Exec exec) {
    if (initial.field.size() != system.detuning.size()) {
        throw DomainError("propagate_chain: initial field does not match the mode count");
    }
    if (drive.size() != 2 * steps + 1) throw DomainError("propagate_chain: drive must hold 2*steps+1 samples");
    return exec == Exec::reference
               ? detail::propagate_chain_reference(system, initial, t_start, dt, steps, drive, snapshot_stride)
               : detail::propagate_chain_parallel(system, initial, t_start, dt, steps, drive, snapshot_stride);
}

} // namespace wgqed::kernels
