#include "wgqed/pulse_design.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wgqed/errors.hpp"
#include "wgqed/kernels.hpp"

namespace wgqed {

namespace {

constexpr double kTruncationLimit = 1e-6;
constexpr double kDeficitLimit = -1e-6;
constexpr double kEndOverlapLimit = 0.99;
constexpr double kEndAnchorLimit = 1e-6;
constexpr double kAbsorptionLimit = 0.9;
constexpr std::size_t kMaxSnapshots = 512;

std::size_t default_stride(std::size_t steps) {
    return std::max<std::size_t>(1, (steps + kMaxSnapshots - 2) / (kMaxSnapshots - 1));
}

double angular_coupling(const WaveguideModel& model) { return model.g / units::kHbar; }

std::vector<double> detunings(const KGrid& kgrid, const WaveguideModel& model, double carrier) {
    std::vector<double> out(kgrid.size());
    for (std::size_t j = 0; j < kgrid.size(); ++j) out[j] = (omega_of_k(kgrid[j], model) - carrier) / units::kHbar;
    return out;
}

// C1 = sqrt(deficit) exp(i phi), dphi/dt = numerator / |C1|^2 (trapezoid), frozen
// once |C1|^2 first drops below the floor.
std::vector<cplx> assemble_c1(const std::vector<double>& deficit, const std::vector<double>& numerator,
                              double dt) {
    const std::size_t n = deficit.size();
    std::vector<cplx> c1(n);
    double phase = 0.0;
    bool frozen = false;
    double prev_rate = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double pop = std::max(deficit[i], 0.0);
        if (!frozen && pop < kC1PhaseFloor) frozen = true;
        if (!frozen) {
            const double rate = numerator[i] / pop;
            if (i > 0) phase += 0.5 * dt * (prev_rate + rate);
            prev_rate = rate;
        }
        c1[i] = std::polar(std::sqrt(pop), phase);
    }
    return c1;
}

struct PulseAndWindow {
    ControlPulse pulse;
    std::size_t begin{0};
    std::size_t end{0};
};

// C2-continuous step from 0 at x <= 0 to 1 at x >= 1.
double smooth_step(double x) {
    x = std::clamp(x, 0.0, 1.0);
    return x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
}

// Omega = [i dC1/dt / C3]^*, central differences, masked where |C3| is negligible
// and where |1> has been emptied (|C1|^2 below the phase floor). Both masks are
// approached through a smooth ramp (one decade in |C3|, two in |C1|^2) so the
// drive seen by a fixed-step integrator has no jump.
PulseAndWindow pulse_from_amplitudes(const std::vector<cplx>& c1, const std::vector<cplx>& c3,
                                     const TimeGrid& grid) {
    const std::size_t n = c1.size();
    const double dt = grid.dt();
    double c3_max = 0.0;
    for (const auto& c : c3) c3_max = std::max(c3_max, std::abs(c));

    PulseAndWindow out;
    out.pulse.grid = grid;
    out.pulse.omega_t.assign(n, cplx{});
    if (c3_max == 0.0 || n < 3) return out;
    const double threshold = kC3MaskThreshold * c3_max;

    bool seen = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(c3[i]) < threshold) continue;
        if (!seen) out.begin = i;
        seen = true;
        out.end = i;
        // the difference stencil must not reach into the frozen-phase region
        const std::size_t lo = i == 0 ? 0 : i - 1;
        const std::size_t hi = std::min(i + 1, n - 1);
        if (std::min({std::norm(c1[lo]), std::norm(c1[i]), std::norm(c1[hi])}) < kC1PhaseFloor) continue;
        cplx dc1;
        if (i == 0) {
            dc1 = (-3.0 * c1[0] + 4.0 * c1[1] - c1[2]) / (2.0 * dt);
        } else if (i == n - 1) {
            dc1 = (3.0 * c1[n - 1] - 4.0 * c1[n - 2] + c1[n - 3]) / (2.0 * dt);
        } else {
            dc1 = (c1[i + 1] - c1[i - 1]) / (2.0 * dt);
        }
        const double ramp = smooth_step(std::log10(std::abs(c3[i]) / threshold)) *
                            smooth_step(0.5 * std::log10(std::norm(c1[i]) / kC1PhaseFloor));
        out.pulse.omega_t[i] = ramp * units::kHbar * std::conj(cplx(0.0, 1.0) * dc1 / c3[i]);
    }

    std::size_t masked = 0;
    for (std::size_t i = out.begin; i <= out.end; ++i) {
        if (std::abs(c3[i]) < threshold) ++masked;
    }
    if (2 * masked > out.end - out.begin + 1) {
        throw NumericalError("design: |C3| is below the mask threshold over more than half of the active window");
    }
    return out;
}

} // namespace

void ThreeLevelNode::validate() const {
    model.validate();
    if (!(eps32 > model.omega0)) throw DomainError("ThreeLevelNode: eps32 must exceed omega0");
    if (!(leak_rate() >= 0.0)) throw DomainError("ThreeLevelNode: leak rate must be >= 0");
}

cplx ControlPulse::at(double t) const {
    const std::size_t steps = grid.steps();
    if (omega_t.empty()) return {};
    const double u = (t - grid.t_start()) / grid.dt();
    if (u < -1e-9 || u > static_cast<double>(steps) + 1e-9) return {};
    const double nearest = std::round(u);
    if (std::abs(u - nearest) < 1e-6) return omega_t[static_cast<std::size_t>(nearest)];

    const auto i = static_cast<std::size_t>(std::floor(u));
    const double s = u - static_cast<double>(i);
    auto sample = [&](long idx) {
        idx = std::clamp<long>(idx, 0, static_cast<long>(steps));
        return omega_t[static_cast<std::size_t>(idx)];
    };
    const long li = static_cast<long>(i);
    const cplx p0 = sample(li - 1), p1 = sample(li), p2 = sample(li + 1), p3 = sample(li + 2);
    return 0.5 * ((2.0 * p1) + (-p0 + p2) * s + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * s * s +
                  (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * s * s * s);
}

double ControlPulse::max_abs() const {
    double m = 0.0;
    for (const auto& w : omega_t) m = std::max(m, std::abs(w));
    return m;
}

std::vector<cplx> ExcitedAmplitude::values() const {
    std::vector<cplx> out(grid.size());
    for (std::size_t n = 0; n < out.size(); ++n) out[n] = half_values[2 * n];
    return out;
}

double ExcitedAmplitude::max_abs() const {
    double m = 0.0;
    for (const auto& c : half_values) m = std::max(m, std::abs(c));
    return m;
}

ExcitedAmplitude c3_from_target(const SpectralWavepacket& target, const ThreeLevelNode& node,
                                const TimeGrid& tgrid) {
    node.validate();
    if (node.model.g == 0.0) throw DomainError("c3_from_target: g = 0, cannot divide by the coupling");
    const KGrid& kgrid = target.grid;
    const double coupling = angular_coupling(node.model);

    std::vector<cplx> weights(kgrid.size());
    const auto freqs = detunings(kgrid, node.model, node.eps32);
    for (std::size_t j = 0; j < kgrid.size(); ++j) {
        const double vg = group_velocity(omega_of_k(kgrid[j], node.model), node.model);
        weights[j] = cplx(0.0, 1.0) / coupling * target.amplitudes[j] * (vg * kgrid.dk() / (2.0 * units::kPi));
    }

    ExcitedAmplitude c3;
    c3.grid = tgrid;
    const std::size_t count = 2 * tgrid.steps() + 1;
    c3.half_values.resize(count);
    c3.half_derivative.resize(count);
    kernels::fourier_synthesis(weights, freqs, tgrid.t_start(), 0.5 * tgrid.dt(), count, c3.half_values,
                               c3.half_derivative, kernels::Exec::parallel);

    const double peak = c3.max_abs();
    if (peak > 0.0) {
        const double edge = std::max(std::abs(c3.half_values.front()), std::abs(c3.half_values.back()));
        if (edge > kTruncationLimit * peak) {
            throw NumericalError("c3_from_target: design window too narrow, |C3| at the window edge is " +
                                 std::to_string(edge / peak) + " of its maximum");
        }
    }
    return c3;
}

ContinuumHistory c2_history(const SpectralWavepacket& target, const ExcitedAmplitude& c3,
                            const ThreeLevelNode& node, std::size_t snapshot_stride) {
    const KGrid& kgrid = target.grid;
    const TimeGrid& tgrid = c3.grid;
    const auto det = detunings(kgrid, node.model, node.eps32);
    if (snapshot_stride == 0) snapshot_stride = default_stride(tgrid.steps());

    auto acc = kernels::accumulate_field(c3.half_values, det, angular_coupling(node.model), kgrid.dk(),
                                         tgrid.t_start(), tgrid.dt(), tgrid.steps(), snapshot_stride,
                                         kernels::Exec::parallel);
    ContinuumHistory h;
    h.kgrid = kgrid;
    h.norm = std::move(acc.norm);
    h.phase_flux = std::move(acc.phase_flux);
    h.snapshots = std::move(acc.snapshots);
    h.snapshot_steps = std::move(acc.snapshot_steps);
    h.final_field = std::move(acc.final_field);

    if (!target.is_zero()) {
        h.end_overlap = std::abs(overlap(target, make_wavepacket(kgrid, h.final_field)));
        if (h.end_overlap < kEndOverlapLimit) {
            throw NumericalError("c2_history: C2(t_end) reproduces the target only to overlap " +
                                 std::to_string(h.end_overlap) + "; grids are inconsistent");
        }
    }
    return h;
}

std::vector<cplx> c1_reconstruct(const ExcitedAmplitude& c3, const ContinuumHistory& c2, double level_shift) {
    const std::size_t n = c3.grid.size();
    if (c2.norm.size() != n) throw DomainError("c1_reconstruct: C2 history does not match the time grid");
    const double shift = level_shift / units::kHbar;
    std::vector<double> deficit(n), numerator(n);
    for (std::size_t i = 0; i < n; ++i) {
        const cplx a = c3.half_values[2 * i];
        const cplx da = c3.half_derivative[2 * i];
        deficit[i] = 1.0 - std::norm(a) - c2.norm[i];
        if (deficit[i] < kDeficitLimit) {
            throw NumericalError("c1_reconstruct: normalization deficit " + std::to_string(deficit[i]) +
                                 " at t = " + std::to_string(c3.grid[i]) +
                                 " ps; the target cannot be emitted with unit amplitude");
        }
        // |C3|^2 dphi3/dt - sum |C2|^2 dphi2/dt dk + shift |C3|^2
        numerator[i] = std::imag(std::conj(a) * da) - c2.phase_flux[i] + shift * std::norm(a);
    }
    // A transfer that completes up to quadrature error is anchored at |C1(t_end)| = 0,
    // so the late-time |C1| is measured from the end instead of as 1 minus almost 1.
    const double end_defect = deficit.back();
    if (std::abs(end_defect) < kEndAnchorLimit) {
        for (auto& d : deficit) d -= end_defect;
    }
    return assemble_c1(deficit, numerator, c3.grid.dt());
}

namespace {

DesignRecord zero_design(const TimeGrid& tgrid, const KGrid& kgrid, cplx c1_value) {
    DesignRecord r;
    r.grid = tgrid;
    r.c1.assign(tgrid.size(), c1_value);
    r.c3.assign(tgrid.size(), cplx{});
    r.continuum.kgrid = kgrid;
    r.continuum.norm.assign(tgrid.size(), 0.0);
    r.continuum.phase_flux.assign(tgrid.size(), 0.0);
    r.continuum.final_field.assign(kgrid.size(), cplx{});
    r.continuum.snapshots.push_back(r.continuum.final_field);
    r.continuum.snapshot_steps.push_back(tgrid.steps());
    r.pulse.grid = tgrid;
    r.pulse.omega_t.assign(tgrid.size(), cplx{});
    r.min_deficit = std::norm(c1_value);
    return r;
}

} // namespace

DesignRecord design_sending_pulse(const SpectralWavepacket& target, const ThreeLevelNode& node,
                                  const TimeGrid& tgrid, const KGrid& kgrid) {
    if (!(kgrid == target.grid)) throw DomainError("design_sending_pulse: target lives on a different k-grid");
    node.validate();
    if (target.is_zero()) return zero_design(tgrid, kgrid, cplx(1.0, 0.0));

    const ExcitedAmplitude c3 = c3_from_target(target, node, tgrid);
    DesignRecord r;
    r.grid = tgrid;
    r.continuum = c2_history(target, c3, node);
    r.c1 = c1_reconstruct(c3, r.continuum, node.level_shift);
    r.c3 = c3.values();

    r.min_deficit = 1.0;
    for (std::size_t i = 0; i < tgrid.size(); ++i) {
        const double deficit = 1.0 - std::norm(r.c3[i]) - r.continuum.norm[i];
        r.min_deficit = std::min(r.min_deficit, deficit);
        const double total = std::norm(r.c1[i]) + std::norm(r.c3[i]) + r.continuum.norm[i];
        r.max_norm_error = std::max(r.max_norm_error, std::abs(1.0 - total));
    }
    auto pw = pulse_from_amplitudes(r.c1, r.c3, tgrid);
    r.pulse = std::move(pw.pulse);
    r.active_begin = pw.begin;
    r.active_end = pw.end;
    return r;
}

double packet_center(const SpectralWavepacket& packet, const WaveguideModel& model) {
    if (packet.omega1 > 0.0) return packet.omega1;
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < packet.grid.size(); ++j) {
        const double w = std::norm(packet.amplitudes[j]);
        num += w * omega_of_k(packet.grid[j], model);
        den += w;
    }
    if (den == 0.0) throw DomainError("packet_center: empty packet");
    return num / den;
}

MarkovianDesign design_markovian(const SpectralWavepacket& target, const ThreeLevelNode& node,
                                 const TimeGrid& tgrid) {
    node.validate();
    MarkovianDesign d;
    if (target.is_zero()) {
        d.c1.assign(tgrid.size(), cplx(1.0, 0.0));
        d.c3.assign(tgrid.size(), cplx{});
        d.pulse.grid = tgrid;
        d.pulse.omega_t.assign(tgrid.size(), cplx{});
        return d;
    }
    d.gamma = markovian_rate(node.model, packet_center(target, node.model));
    const double gamma = d.gamma / units::kHbar;
    const ExcitedAmplitude c3 = c3_from_target(target, node, tgrid);
    d.c3 = c3.values();

    const std::size_t n = tgrid.size();
    const double dt = tgrid.dt();
    std::vector<double> deficit(n), numerator(n);
    double emitted = 0.0;  // int |C3|^2 dt
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            emitted += dt / 6.0 *
                       (std::norm(c3.half_values[2 * i - 2]) + 4.0 * std::norm(c3.half_values[2 * i - 1]) +
                        std::norm(c3.half_values[2 * i]));
        }
        const cplx a = c3.half_values[2 * i];
        deficit[i] = 1.0 - std::norm(a) - gamma * emitted;
        numerator[i] = std::imag(std::conj(a) * c3.half_derivative[2 * i]);
    }
    d.c1 = assemble_c1(deficit, numerator, dt);
    d.pulse = pulse_from_amplitudes(d.c1, d.c3, tgrid).pulse;
    return d;
}

ControlPulse design_sending_pulse_markovian(const SpectralWavepacket& target, const ThreeLevelNode& node,
                                            const TimeGrid& tgrid) {
    return design_markovian(target, node, tgrid).pulse;
}

SpectralWavepacket arrival_frame_packet(const SpectralWavepacket& incoming, const ThreeLevelNode& node,
                                        double length, double arrival_time) {
    SpectralWavepacket out = incoming;
    for (std::size_t j = 0; j < incoming.grid.size(); ++j) {
        const double k = incoming.grid[j];
        const double det = (omega_of_k(k, node.model) - node.eps32) / units::kHbar;
        out.amplitudes[j] = incoming.amplitudes[j] * std::polar(1.0, k * length - det * arrival_time);
    }
    return out;
}

DesignRecord design_receiving_pulse(const SpectralWavepacket& incoming, const ThreeLevelNode& node,
                                    double length, const TimeGrid& tgrid) {
    node.validate();
    if (!(length >= 0.0)) throw DomainError("design_receiving_pulse: waveguide length must be >= 0");
    const KGrid& kgrid = incoming.grid;
    if (incoming.is_zero()) return zero_design(tgrid, kgrid, cplx{});

    const double t0 = length / group_velocity(packet_center(incoming, node.model), node.model);
    const SpectralWavepacket arriving = arrival_frame_packet(incoming, node, length, t0);

    // Sending the conjugated packet on the mirrored window, then reversing time,
    // gives D3(t) = C3(-t)^*, D1(t) = C1(-t)^*, C2(k,t) = C2(k,-t)^*, Omega'(t) = Omega(-t)^*.
    SpectralWavepacket reversed = arriving;
    for (auto& a : reversed.amplitudes) a = std::conj(a);
    reversed.omega1 = incoming.omega1;
    const TimeGrid mirrored = TimeGrid::with_steps(-tgrid.t_end(), -tgrid.t_start(), tgrid.steps());
    const DesignRecord send = design_sending_pulse(reversed, node, mirrored, kgrid);

    const std::size_t n = tgrid.size();
    const std::size_t last = n - 1;
    DesignRecord r;
    r.grid = tgrid;
    r.arrival_time = t0;
    r.c1.resize(n);
    r.c3.resize(n);
    r.pulse.grid = tgrid;
    r.pulse.omega_t.resize(n);
    r.continuum.kgrid = kgrid;
    r.continuum.norm.resize(n);
    r.continuum.phase_flux.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        r.c1[i] = std::conj(send.c1[last - i]);
        r.c3[i] = std::conj(send.c3[last - i]);
        r.pulse.omega_t[i] = std::conj(send.pulse.omega_t[last - i]);
        r.continuum.norm[i] = send.continuum.norm[last - i];
        r.continuum.phase_flux[i] = send.continuum.phase_flux[last - i];
    }
    for (std::size_t s = send.continuum.snapshots.size(); s-- > 0;) {
        std::vector<cplx> field(send.continuum.snapshots[s].size());
        std::transform(send.continuum.snapshots[s].begin(), send.continuum.snapshots[s].end(), field.begin(),
                       [](cplx c) { return std::conj(c); });
        r.continuum.snapshot_steps.push_back(last - send.continuum.snapshot_steps[s]);
        r.continuum.snapshots.push_back(std::move(field));
    }
    r.continuum.final_field = r.continuum.snapshots.back();
    r.continuum.end_overlap = send.continuum.end_overlap;
    r.active_begin = last - send.active_end;
    r.active_end = last - send.active_begin;
    r.max_norm_error = send.max_norm_error;
    r.min_deficit = send.min_deficit;

    const double absorbed = std::norm(r.c1.back());
    if (absorbed < kAbsorptionLimit) {
        throw NumericalError("design_receiving_pulse: designed absorption " + std::to_string(absorbed) +
                             " < 0.9; impedance mismatch from an inadequate grid or window");
    }
    return r;
}

double relative_l2_distance(const ControlPulse& a, const ControlPulse& b) {
    if (a.omega_t.size() != b.omega_t.size()) throw DomainError("relative_l2_distance: pulses on different grids");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.omega_t.size(); ++i) {
        num += std::norm(a.omega_t[i] - b.omega_t[i]);
        den += std::norm(a.omega_t[i]);
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

DesignGrids suggest_grids(double omega1, double sigma0, const ThreeLevelNode& node,
                          const DesignGridOptions& options) {
    node.validate();
    if (!(sigma0 > 0.0)) throw DomainError("suggest_grids: sigma0 must be > 0");
    const auto& model = node.model;
    const double gamma = model.g > 0.0 ? markovian_rate(model, omega1) : 0.0;
    double half = options.half_window;
    if (!(half > 0.0)) {
        half = 10.0 * units::kHbar / sigma0;
        if (gamma > 0.0) half = std::max(half, 20.0 * units::kHbar / gamma);
        if (options.length > 0.0) {
            // group-delay spread accumulated over the packet band
            const double lo = std::max(omega1 - 15.0 * sigma0, model.omega0 + 0.05 * (omega1 - model.omega0));
            const double hi = omega1 + 15.0 * sigma0;
            half += options.length * (1.0 / group_velocity(lo, model) - 1.0 / group_velocity(hi, model));
        }
    }
    const double k_max = k_of_omega(omega1 + std::max(options.cover_sigmas * sigma0, options.min_cover), model);
    const double dk = 2.0 * units::kPi / (group_velocity(omega1, model) * options.recurrence_factor * 2.0 * half);

    DesignGrids grids;
    grids.kgrid = KGrid::covering(k_max, dk);
    const double span = std::max(std::abs(omega_of_k(grids.kgrid.k_min(), model) - node.eps32),
                                 std::abs(omega_of_k(grids.kgrid.k_max(), model) - node.eps32));
    const double dt = options.dt > 0.0 ? options.dt : units::kHbar / (20.0 * std::max(span, gamma));
    grids.propagation = TimeGrid::fitting(options.center - half, options.center + half, dt);
    grids.design = grids.propagation.refined(2);
    return grids;
}

} // namespace wgqed
