// OpenMP kernels with incremental phasors.
//
// Phasors are advanced by repeated multiplication and re-anchored from
// std::polar every kReanchor steps, which bounds the accumulated rounding.

#include <algorithm>
#include <cmath>

#include "kernels_impl.hpp"
#include "wgqed/errors.hpp"

namespace wgqed::kernels::detail {

namespace {

constexpr std::size_t kChunk = 256;     // samples per synthesis chunk
constexpr std::size_t kBlock = 256;     // modes per reduction block
constexpr std::size_t kReanchor = 256;  // steps between exact phasor refreshes

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

} // namespace

void fourier_synthesis_parallel(std::span<const cplx> weights, std::span<const double> freqs, double t0,
                                double dt, std::size_t count, std::span<cplx> out, std::span<cplx> derivative) {
    const std::size_t nk = weights.size();
    const bool want_derivative = !derivative.empty();
    std::vector<cplx> step(nk), dweights(nk);
    for (std::size_t j = 0; j < nk; ++j) {
        step[j] = std::polar(1.0, -freqs[j] * dt);
        dweights[j] = mul(cplx(0.0, -freqs[j]), weights[j]);
    }
    const auto chunks = static_cast<long>(ceil_div(count, kChunk));

#pragma omp parallel
    {
        std::vector<cplx> ph(nk);
#pragma omp for schedule(static)
        for (long c = 0; c < chunks; ++c) {
            const std::size_t m0 = static_cast<std::size_t>(c) * kChunk;
            const std::size_t m1 = std::min(count, m0 + kChunk);
            const double tc = t0 + dt * static_cast<double>(m0);
            for (std::size_t j = 0; j < nk; ++j) ph[j] = std::polar(1.0, -freqs[j] * tc);
            for (std::size_t m = m0; m < m1; ++m) {
                cplx acc{}, dacc{};
                for (std::size_t j = 0; j < nk; ++j) {
                    acc += mul(weights[j], ph[j]);
                    if (want_derivative) dacc += mul(dweights[j], ph[j]);
                    ph[j] = mul(ph[j], step[j]);
                }
                out[m] = acc;
                if (want_derivative) derivative[m] = dacc;
            }
        }
    }
}

FieldAccumulation accumulate_field_parallel(std::span<const cplx> source, std::span<const double> detuning,
                                            double coupling, double dk, double t_start, double dt,
                                            std::size_t steps, std::size_t stride) {
    const std::size_t nk = detuning.size();
    const std::size_t blocks = ceil_div(nk, kBlock);
    const cplx minus_ig(0.0, -coupling);
    const cplx simpson = minus_ig * (dt / 6.0);

    FieldAccumulation acc;
    for (std::size_t n = 0; n <= steps; ++n) {
        if (snapshot_due(n, steps, stride)) acc.snapshot_steps.push_back(n);
    }
    acc.snapshots.assign(acc.snapshot_steps.size(), std::vector<cplx>(nk));
    acc.final_field.assign(nk, cplx{});
    std::vector<double> norm_parts(blocks * (steps + 1)), flux_parts(blocks * (steps + 1));

#pragma omp parallel for schedule(static)
    for (long b = 0; b < static_cast<long>(blocks); ++b) {
        const std::size_t j0 = static_cast<std::size_t>(b) * kBlock;
        const std::size_t j1 = std::min(nk, j0 + kBlock);
        const std::size_t width = j1 - j0;
        std::vector<cplx> field(width), ph(width), half(width);
        for (std::size_t j = 0; j < width; ++j) half[j] = std::polar(1.0, detuning[j0 + j] * 0.5 * dt);
        double* norm_out = &norm_parts[static_cast<std::size_t>(b) * (steps + 1)];
        double* flux_out = &flux_parts[static_cast<std::size_t>(b) * (steps + 1)];
        std::size_t snap = 0;

        for (std::size_t n = 0; n <= steps; ++n) {
            if (n % kReanchor == 0) {
                const double t = t_start + dt * static_cast<double>(n);
                for (std::size_t j = 0; j < width; ++j) ph[j] = std::polar(1.0, detuning[j0 + j] * t);
            }
            const cplx rate_scale = mul(minus_ig, source[2 * n]);
            double norm = 0.0, flux = 0.0;
            for (std::size_t j = 0; j < width; ++j) {
                const cplx rate = mul(rate_scale, ph[j]);
                norm += std::norm(field[j]);
                flux += field[j].real() * rate.imag() - field[j].imag() * rate.real();
            }
            norm_out[n] = norm;
            flux_out[n] = flux;
            if (snap < acc.snapshot_steps.size() && acc.snapshot_steps[snap] == n) {
                std::copy(field.begin(), field.end(), acc.snapshots[snap].begin() + static_cast<long>(j0));
                ++snap;
            }
            if (n == steps) break;
            const cplx s0 = source[2 * n], s1 = source[2 * n + 1], s2 = source[2 * n + 2];
            for (std::size_t j = 0; j < width; ++j) {
                const cplx p1 = mul(ph[j], half[j]);
                const cplx p2 = mul(p1, half[j]);
                const cplx sum = mul(s0, ph[j]) + 4.0 * mul(s1, p1) + mul(s2, p2);
                field[j] += mul(simpson, sum);
                ph[j] = p2;
            }
        }
        std::copy(field.begin(), field.end(), acc.final_field.begin() + static_cast<long>(j0));
    }

    acc.norm.assign(steps + 1, 0.0);
    acc.phase_flux.assign(steps + 1, 0.0);
    for (std::size_t b = 0; b < blocks; ++b) {
        for (std::size_t n = 0; n <= steps; ++n) {
            acc.norm[n] += norm_parts[b * (steps + 1) + n];
            acc.phase_flux[n] += flux_parts[b * (steps + 1) + n];
        }
    }
    for (std::size_t n = 0; n <= steps; ++n) {
        acc.norm[n] *= dk;
        acc.phase_flux[n] *= dk;
    }
    return acc;
}

ChainHistory propagate_chain_parallel(const ChainSystem& sys, const ChainState& initial, double t_start,
                                      double dt, std::size_t steps, std::span<const cplx> drive,
                                      std::size_t stride) {
    const std::size_t nk = sys.detuning.size();
    const std::size_t blocks = ceil_div(nk, kBlock);
    const cplx minus_i(0.0, -1.0);
    const cplx minus_ig(0.0, -sys.coupling);
    const double dk = sys.dk;

    std::vector<cplx> field = initial.field;
    std::vector<cplx> ph(nk), half(nk);
    for (std::size_t j = 0; j < nk; ++j) half[j] = std::polar(1.0, sys.detuning[j] * 0.5 * dt);

    // sum_j p_n conj(p_h) dk = sum_j conj(h_j) dk; sum_j |p_h|^2 dk = nk dk
    cplx half_sum{};
    {
        std::vector<cplx> parts(blocks);
        for (std::size_t b = 0; b < blocks; ++b) {
            for (std::size_t j = b * kBlock; j < std::min(nk, (b + 1) * kBlock); ++j) parts[b] += std::conj(half[j]);
        }
        for (const auto& p : parts) half_sum += p;
        half_sum *= dk;
    }
    const double unit_sum = static_cast<double>(nk) * dk;

    std::vector<cplx> sn_parts(blocks), sh_parts(blocks), se_parts(blocks);
    std::vector<double> norm_parts(blocks);

    ChainHistory h;
    h.a1.reserve(steps + 1);
    h.a3.reserve(steps + 1);
    h.field_norm.reserve(steps + 1);
    cplx a1 = initial.a1, a3 = initial.a3;

    double fnorm = 0.0;
    for (const auto& c : field) fnorm += std::norm(c);
    fnorm *= dk;
    const double initial_norm = std::norm(a1) + std::norm(a3) + fnorm;

    auto record = [&](std::size_t n) {
        h.a1.push_back(a1);
        h.a3.push_back(a3);
        h.field_norm.push_back(fnorm);
        if (std::norm(a1) + std::norm(a3) + fnorm > initial_norm * (1.0 + 1e-3) + 1e-12) {
            throw NumericalError("propagate_chain: norm blow-up at step " + std::to_string(n) + "; reduce dt");
        }
        if (snapshot_due(n, steps, stride)) {
            h.snapshots.push_back(field);
            h.snapshot_steps.push_back(n);
        }
    };

    record(0);
    for (std::size_t n = 0; n < steps; ++n) {
        const double t = t_start + dt * static_cast<double>(n);
        if (n % kReanchor == 0) {
            for (std::size_t j = 0; j < nk; ++j) ph[j] = std::polar(1.0, sys.detuning[j] * t);
        }

#pragma omp parallel for schedule(static)
        for (long b = 0; b < static_cast<long>(blocks); ++b) {
            cplx sn{}, sh{}, se{};
            const std::size_t j1 = std::min(nk, (static_cast<std::size_t>(b) + 1) * kBlock);
            for (std::size_t j = static_cast<std::size_t>(b) * kBlock; j < j1; ++j) {
                const cplx pn = ph[j];
                const cplx phh = mul(pn, half[j]);
                const cplx pe = mul(phh, half[j]);
                sn += mul(field[j], std::conj(pn));
                sh += mul(field[j], std::conj(phh));
                se += mul(field[j], std::conj(pe));
            }
            sn_parts[static_cast<std::size_t>(b)] = sn;
            sh_parts[static_cast<std::size_t>(b)] = sh;
            se_parts[static_cast<std::size_t>(b)] = se;
        }
        cplx s_n{}, s_h{}, s_e{};
        for (std::size_t b = 0; b < blocks; ++b) {
            s_n += sn_parts[b];
            s_h += sh_parts[b];
            s_e += se_parts[b];
        }
        s_n *= dk;
        s_h *= dk;
        s_e *= dk;

        const cplx w0 = drive[2 * n], wh = drive[2 * n + 1], w1 = drive[2 * n + 2];
        auto d1 = [&](cplx w, cplx x3) { return minus_i * std::conj(w) * x3; };
        auto d3 = [&](cplx w, cplx x1, cplx x3, cplx fsum) {
            return minus_i * w * x1 + minus_ig * fsum - sys.decay * x3;
        };

        const cplx k1_1 = d1(w0, a3);
        const cplx k1_3 = d3(w0, a1, a3, s_n);
        const cplx a1_2 = a1 + 0.5 * dt * k1_1, a3_2 = a3 + 0.5 * dt * k1_3;
        const cplx k2_1 = d1(wh, a3_2);
        const cplx k2_3 = d3(wh, a1_2, a3_2, s_h + 0.5 * dt * minus_ig * a3 * half_sum);
        const cplx a1_3 = a1 + 0.5 * dt * k2_1, a3_3 = a3 + 0.5 * dt * k2_3;
        const cplx k3_1 = d1(wh, a3_3);
        const cplx k3_3 = d3(wh, a1_3, a3_3, s_h + 0.5 * dt * minus_ig * a3_2 * unit_sum);
        const cplx a1_4 = a1 + dt * k3_1, a3_4 = a3 + dt * k3_3;
        const cplx k4_1 = d1(w1, a3_4);
        const cplx k4_3 = d3(w1, a1_4, a3_4, s_e + dt * minus_ig * a3_3 * half_sum);

        const cplx coef = (dt / 6.0) * minus_ig;
        const cplx cn = coef * a3;
        const cplx ch = coef * 2.0 * (a3_2 + a3_3);
        const cplx ce = coef * a3_4;

#pragma omp parallel for schedule(static)
        for (long b = 0; b < static_cast<long>(blocks); ++b) {
            double norm = 0.0;
            const std::size_t j1 = std::min(nk, (static_cast<std::size_t>(b) + 1) * kBlock);
            for (std::size_t j = static_cast<std::size_t>(b) * kBlock; j < j1; ++j) {
                const cplx pn = ph[j];
                const cplx phh = mul(pn, half[j]);
                const cplx pe = mul(phh, half[j]);
                field[j] += mul(cn, pn) + mul(ch, phh) + mul(ce, pe);
                ph[j] = pe;
                norm += std::norm(field[j]);
            }
            norm_parts[static_cast<std::size_t>(b)] = norm;
        }
        fnorm = 0.0;
        for (const double p : norm_parts) fnorm += p;
        fnorm *= dk;

        a1 += dt / 6.0 * (k1_1 + 2.0 * k2_1 + 2.0 * k3_1 + k4_1);
        a3 += dt / 6.0 * (k1_3 + 2.0 * k2_3 + 2.0 * k3_3 + k4_3);
        record(n + 1);
    }
    h.final_field = std::move(field);
    return h;
}

} // namespace wgqed::kernels::detail
