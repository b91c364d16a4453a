#include "wgqed/wavepacket.hpp"

#include <cmath>

#include "wgqed/errors.hpp"

namespace wgqed {

double SpectralWavepacket::norm_squared() const {
    double s = 0.0;
    for (const auto& a : amplitudes) s += std::norm(a);
    return s * grid.dk();
}

bool SpectralWavepacket::is_zero() const {
    for (const auto& a : amplitudes) {
        if (a != cplx{}) return false;
    }
    return true;
}

SpectralWavepacket sech_wavepacket(double omega1, double sigma0, const KGrid& kgrid,
                                   const WaveguideModel& model) {
    if (!(sigma0 > 0.0)) throw DomainError("sech_wavepacket: sigma0 must be > 0");
    if (!(omega1 > model.omega0)) throw DomainError("sech_wavepacket: omega1 must lie above the cut-off");

    const double upper = omega_of_k(kgrid.k_max(), model);
    if (upper < omega1 + 10.0 * sigma0) {
        throw DomainError("sech_wavepacket: k-grid ends below omega1 + 10 sigma0");
    }
    const double lower_needed = omega1 - 10.0 * sigma0;
    if (lower_needed > model.omega0) {
        if (omega_of_k(kgrid.k_min(), model) > lower_needed) {
            throw DomainError("sech_wavepacket: k-grid starts above omega1 - 10 sigma0");
        }
    } else if (kgrid.k_min() > kgrid.dk()) {
        throw DomainError("sech_wavepacket: packet reaches the cut-off but the grid does not start at k = 0");
    }

    SpectralWavepacket packet;
    packet.grid = kgrid;
    packet.omega1 = omega1;
    packet.sigma0 = sigma0;
    packet.clipped_by_edge = omega1 - 5.0 * sigma0 < model.omega0;
    packet.amplitudes.resize(kgrid.size());
    for (std::size_t j = 0; j < kgrid.size(); ++j) {
        const double x = (omega_of_k(kgrid[j], model) - omega1) / sigma0;
        packet.amplitudes[j] = 1.0 / std::cosh(x);
    }
    const double scale = 1.0 / std::sqrt(packet.norm_squared());
    for (auto& a : packet.amplitudes) a *= scale;
    return packet;
}

SpectralWavepacket make_wavepacket(const KGrid& kgrid, std::vector<cplx> amplitudes) {
    if (amplitudes.size() != kgrid.size()) throw DomainError("make_wavepacket: size mismatch");
    SpectralWavepacket packet;
    packet.grid = kgrid;
    packet.amplitudes = std::move(amplitudes);
    return packet;
}

cplx overlap(const SpectralWavepacket& a, const SpectralWavepacket& b) {
    if (!(a.grid == b.grid) || a.amplitudes.size() != b.amplitudes.size()) {
        throw DomainError("overlap: wavepackets live on different k-grids");
    }
    cplx s{};
    for (std::size_t j = 0; j < a.amplitudes.size(); ++j) s += std::conj(a.amplitudes[j]) * b.amplitudes[j];
    return s * a.grid.dk();
}

} // namespace wgqed
