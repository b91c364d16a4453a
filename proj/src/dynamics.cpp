#include "wgqed/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "wgqed/errors.hpp"

namespace wgqed {

namespace {

std::size_t stride_for(std::size_t steps, std::size_t requested) {
    if (requested > 0) return requested;
    return std::max<std::size_t>(1, (steps + 510) / 511);
}

kernels::ChainSystem chain_for(const ThreeLevelNode& node, const KGrid& kgrid, double leak_rate) {
    if (!(leak_rate >= 0.0)) throw DomainError("propagation: leak rate must be >= 0");
    kernels::ChainSystem sys;
    sys.detuning.resize(kgrid.size());
    for (std::size_t j = 0; j < kgrid.size(); ++j) {
        sys.detuning[j] = (omega_of_k(kgrid[j], node.model) - node.eps32) / units::kHbar;
    }
    sys.coupling = node.model.g / units::kHbar;
    sys.dk = kgrid.dk();
    sys.decay = cplx(leak_rate / 2.0, node.level_shift) / units::kHbar;
    return sys;
}

std::vector<cplx> drive_samples(const ControlPulse& pulse, const TimeGrid& tgrid) {
    std::vector<cplx> drive(2 * tgrid.steps() + 1);
    const double half = 0.5 * tgrid.dt();
    for (std::size_t m = 0; m < drive.size(); ++m) {
        drive[m] = pulse.at(tgrid.t_start() + static_cast<double>(m) * half) / units::kHbar;
    }
    return drive;
}

Trajectory run(const kernels::ChainSystem& sys, const kernels::ChainState& init, const KGrid& kgrid,
               const TimeGrid& tgrid, const ControlPulse& pulse, const PropagationOptions& options) {
    double initial = std::norm(init.a1) + std::norm(init.a3);
    for (const auto& c : init.field) initial += std::norm(c) * kgrid.dk();

    auto h = kernels::propagate_chain(sys, init, tgrid.t_start(), tgrid.dt(), tgrid.steps(),
                                      drive_samples(pulse, tgrid), stride_for(tgrid.steps(), options.snapshot_stride),
                                      options.exec);
    Trajectory tr;
    tr.times = tgrid;
    tr.kgrid = kgrid;
    tr.a1 = std::move(h.a1);
    tr.a3 = std::move(h.a3);
    tr.field_norm = std::move(h.field_norm);
    tr.snapshots = std::move(h.snapshots);
    tr.snapshot_steps = std::move(h.snapshot_steps);
    tr.final_field = std::move(h.final_field);
    tr.norm_deficit.resize(tr.a1.size());
    for (std::size_t n = 0; n < tr.a1.size(); ++n) {
        tr.norm_deficit[n] = initial - (std::norm(tr.a1[n]) + std::norm(tr.a3[n]) + tr.field_norm[n]);
    }
    return tr;
}

} // namespace

Trajectory propagate_sending(const ControlPulse& pulse, const ThreeLevelNode& node, const KGrid& kgrid,
                             const TimeGrid& tgrid, double leak_rate, const PropagationOptions& options) {
    node.validate();
    kernels::ChainState init;
    init.a1 = 1.0;
    init.field.assign(kgrid.size(), cplx{});
    return run(chain_for(node, kgrid, leak_rate), init, kgrid, tgrid, pulse, options);
}

Trajectory propagate_receiving(const ControlPulse& pulse, const SpectralWavepacket& incoming,
                               const ThreeLevelNode& node, double length, const TimeGrid& tgrid,
                               double leak_rate, const PropagationOptions& options) {
    node.validate();
    if (!(length >= 0.0)) throw DomainError("propagate_receiving: waveguide length must be >= 0");
    kernels::ChainState init;
    if (incoming.is_zero()) {
        init.field.assign(incoming.grid.size(), cplx{});
    } else {
        const double t0 = length / group_velocity(packet_center(incoming, node.model), node.model);
        init.field = arrival_frame_packet(incoming, node, length, t0).amplitudes;
    }
    return run(chain_for(node, incoming.grid, leak_rate), init, incoming.grid, tgrid, pulse, options);
}

double sending_fidelity(const Trajectory& trajectory, const SpectralWavepacket& ideal) {
    return std::abs(overlap(ideal, make_wavepacket(trajectory.kgrid, trajectory.final_field)));
}

PopulationTraces population_traces(const Trajectory& trajectory) {
    PopulationTraces p;
    for (std::size_t n = 0; n < trajectory.a1.size(); ++n) {
        p.ground.push_back(std::norm(trajectory.a1[n]));
        p.excited.push_back(std::norm(trajectory.a3[n]));
    }
    p.continuum = trajectory.field_norm;
    return p;
}

double default_propagation_dt(const ThreeLevelNode& node, const KGrid& kgrid, double omega_max, double gamma) {
    const double span = std::max(std::abs(omega_of_k(kgrid.k_min(), node.model) - node.eps32),
                                 std::abs(omega_of_k(kgrid.k_max(), node.model) - node.eps32));
    return units::kHbar / (20.0 * std::max({span, omega_max, gamma}));
}

} // namespace wgqed
