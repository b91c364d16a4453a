// wavepacket.hpp: single-photon spectral amplitudes F(k) on a k-grid

#pragma once

#include <complex>
#include <vector>

#include "wgqed/grids.hpp"
#include "wgqed/waveguide.hpp"

namespace wgqed {

using cplx = std::complex<double>;

struct SpectralWavepacket {
    KGrid grid;
    std::vector<cplx> amplitudes;   // um^1/2, sum |F|^2 dk = 1 for physical packets
    double omega1{0.0};             // center (meV), when sech-shaped
    double sigma0{0.0};             // width (meV), when sech-shaped
    bool clipped_by_edge{false};    // omega1 - 5 sigma0 falls below the cut-off

    double norm_squared() const;
    bool is_zero() const;
};

// F(k) = C sech[(omega_k - omega1)/sigma0], normalized on the grid.
// Throws DomainError when the grid covers less than +-10 sigma0 around omega1
// (the lower side is satisfied when the grid starts at the first k cell).
SpectralWavepacket sech_wavepacket(double omega1, double sigma0, const KGrid& kgrid,
                                   const WaveguideModel& model);

// Packet built from arbitrary samples (not renormalized).
SpectralWavepacket make_wavepacket(const KGrid& kgrid, std::vector<cplx> amplitudes);

// sum conj(a) b dk. Throws DomainError on mismatched grids.
cplx overlap(const SpectralWavepacket& a, const SpectralWavepacket& b);

} // namespace wgqed
