// Serial reference kernels: direct loops, no phasor recursion.

#include <cmath>

#include "kernels_impl.hpp"
#include "wgqed/errors.hpp"

namespace wgqed::kernels::detail {

void fourier_synthesis_reference(std::span<const cplx> weights, std::span<const double> freqs, double t0,
                                 double dt, std::size_t count, std::span<cplx> out, std::span<cplx> derivative) {
    for (std::size_t m = 0; m < count; ++m) {
        const double t = t0 + dt * static_cast<double>(m);
        cplx acc{}, dacc{};
        for (std::size_t j = 0; j < weights.size(); ++j) {
            const cplx term = weights[j] * std::polar(1.0, -freqs[j] * t);
            acc += term;
            dacc += cplx(0.0, -freqs[j]) * term;
        }
        out[m] = acc;
        if (!derivative.empty()) derivative[m] = dacc;
    }
}

FieldAccumulation accumulate_field_reference(std::span<const cplx> source, std::span<const double> detuning,
                                             double coupling, double dk, double t_start, double dt,
                                             std::size_t steps, std::size_t stride) {
    const std::size_t nk = detuning.size();
    const cplx minus_ig(0.0, -coupling);
    FieldAccumulation acc;
    acc.norm.assign(steps + 1, 0.0);
    acc.phase_flux.assign(steps + 1, 0.0);
    std::vector<cplx> field(nk, cplx{});

    auto record = [&](std::size_t n) {
        const double t = t_start + dt * static_cast<double>(n);
        double norm = 0.0, flux = 0.0;
        for (std::size_t j = 0; j < nk; ++j) {
            const cplx rate = minus_ig * source[2 * n] * std::polar(1.0, detuning[j] * t);
            norm += std::norm(field[j]);
            flux += std::imag(std::conj(field[j]) * rate);
        }
        acc.norm[n] = norm * dk;
        acc.phase_flux[n] = flux * dk;
        if (snapshot_due(n, steps, stride)) {
            acc.snapshots.push_back(field);
            acc.snapshot_steps.push_back(n);
        }
    };

    record(0);
    for (std::size_t n = 0; n < steps; ++n) {
        const double t0 = t_start + dt * static_cast<double>(n);
        for (std::size_t j = 0; j < nk; ++j) {
            const cplx f0 = source[2 * n] * std::polar(1.0, detuning[j] * t0);
            const cplx f1 = source[2 * n + 1] * std::polar(1.0, detuning[j] * (t0 + 0.5 * dt));
            const cplx f2 = source[2 * n + 2] * std::polar(1.0, detuning[j] * (t0 + dt));
            field[j] += minus_ig * (dt / 6.0) * (f0 + 4.0 * f1 + f2);
        }
        record(n + 1);
    }
    acc.final_field = std::move(field);
    return acc;
}

namespace {

struct Derivative {
    cplx a1, a3;
    std::vector<cplx> field;
};

Derivative chain_rhs(const ChainSystem& sys, double t, cplx drive, cplx a1, cplx a3,
                     const std::vector<cplx>& field) {
    const std::size_t nk = field.size();
    const cplx minus_i(0.0, -1.0);
    Derivative d;
    d.field.resize(nk);
    cplx sum{};
    for (std::size_t j = 0; j < nk; ++j) {
        const cplx ph = std::polar(1.0, sys.detuning[j] * t);
        sum += field[j] * std::conj(ph);
        d.field[j] = minus_i * sys.coupling * a3 * ph;
    }
    d.a1 = minus_i * std::conj(drive) * a3;
    d.a3 = minus_i * drive * a1 + minus_i * sys.coupling * sum * sys.dk - sys.decay * a3;
    return d;
}

std::vector<cplx> axpy(const std::vector<cplx>& x, double h, const std::vector<cplx>& y) {
    std::vector<cplx> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = x[j] + h * y[j];
    return out;
}

} // namespace

ChainHistory propagate_chain_reference(const ChainSystem& sys, const ChainState& initial, double t_start,
                                       double dt, std::size_t steps, std::span<const cplx> drive,
                                       std::size_t stride) {
    ChainHistory h;
    h.a1.reserve(steps + 1);
    h.a3.reserve(steps + 1);
    h.field_norm.reserve(steps + 1);
    cplx a1 = initial.a1, a3 = initial.a3;
    std::vector<cplx> field = initial.field;

    auto field_norm = [&] {
        double s = 0.0;
        for (const auto& c : field) s += std::norm(c);
        return s * sys.dk;
    };
    const double initial_norm = std::norm(a1) + std::norm(a3) + field_norm();
    auto record = [&](std::size_t n) {
        h.a1.push_back(a1);
        h.a3.push_back(a3);
        const double fn = field_norm();
        h.field_norm.push_back(fn);
        if (std::norm(a1) + std::norm(a3) + fn > initial_norm * (1.0 + 1e-3) + 1e-12) {
            throw NumericalError("propagate_chain: norm blow-up at step " + std::to_string(n) +
                                 "; reduce dt");
        }
        if (snapshot_due(n, steps, stride)) {
            h.snapshots.push_back(field);
            h.snapshot_steps.push_back(n);
        }
    };

    record(0);
    for (std::size_t n = 0; n < steps; ++n) {
        const double t = t_start + dt * static_cast<double>(n);
        const cplx w0 = drive[2 * n], wh = drive[2 * n + 1], w1 = drive[2 * n + 2];
        const Derivative k1 = chain_rhs(sys, t, w0, a1, a3, field);
        const Derivative k2 = chain_rhs(sys, t + 0.5 * dt, wh, a1 + 0.5 * dt * k1.a1, a3 + 0.5 * dt * k1.a3,
                                        axpy(field, 0.5 * dt, k1.field));
        const Derivative k3 = chain_rhs(sys, t + 0.5 * dt, wh, a1 + 0.5 * dt * k2.a1, a3 + 0.5 * dt * k2.a3,
                                        axpy(field, 0.5 * dt, k2.field));
        const Derivative k4 = chain_rhs(sys, t + dt, w1, a1 + dt * k3.a1, a3 + dt * k3.a3,
                                        axpy(field, dt, k3.field));
        a1 += dt / 6.0 * (k1.a1 + 2.0 * k2.a1 + 2.0 * k3.a1 + k4.a1);
        a3 += dt / 6.0 * (k1.a3 + 2.0 * k2.a3 + 2.0 * k3.a3 + k4.a3);
        for (std::size_t j = 0; j < field.size(); ++j) {
            field[j] += dt / 6.0 * (k1.field[j] + 2.0 * k2.field[j] + 2.0 * k3.field[j] + k4.field[j]);
        }
        record(n + 1);
    }
    h.final_field = std::move(field);
    return h;
}

} // namespace wgqed::kernels::detail
