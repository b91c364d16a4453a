#include "wgqed/emission.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "wgqed/errors.hpp"
#include "wgqed/kernels.hpp"

namespace wgqed {

namespace {

using units::kHbar;
using units::kPi;

constexpr std::array<double, 4> kGaussNode = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                              0.9602898564975363};
constexpr std::array<double, 4> kGaussWeight = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                                0.1012285362903763};

constexpr double kSumRuleLimit = 1e-2;
constexpr double kTailWeightTarget = 1e-5;

template <class F>
double gauss_panel(double a, double b, F&& f) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < kGaussNode.size(); ++i) {
        s += kGaussWeight[i] * (f(mid - half * kGaussNode[i]) + f(mid + half * kGaussNode[i]));
    }
    return s * half;
}

// Spectral density per unit u = sqrt(omega - omega0): U(omega) domega = h(u) du.
double density_in_u(double u, double a_coef, double x10) {
    if (u == 0.0) return 0.0;
    const double detune = u * u - x10;
    const double half_width = kPi * a_coef / u;
    return 2.0 * a_coef / (detune * detune + half_width * half_width);
}

struct Node {
    double u;
    double weight;  // quadrature weight times h(u)
};

} // namespace

void TwoLevelParams::validate() const {
    model.validate();
    if (!(omega10 > 0.0)) throw DomainError("TwoLevelParams: omega10 must be > 0");
    if (!(leak_rate >= 0.0)) throw DomainError("TwoLevelParams: leak_rate must be >= 0");
}

double TwoLevelParams::edge_strength() const {
    return model.g * model.g * std::sqrt(model.omega0 / 2.0) / model.hbar_v();
}

double gamma_of_omega(double omega, const TwoLevelParams& params) {
    if (omega <= params.model.omega0) return 0.0;
    return markovian_rate(params.model, omega);
}

double delta_closed_form(double omega, const TwoLevelParams& params) {
    const double x = omega - params.model.omega0;
    if (x == 0.0) throw DomainError("delta_closed_form: singular at the band edge");
    if (x > 0.0) return 0.0;
    return -kPi * params.edge_strength() / std::sqrt(-x);
}

double delta_closed_form(double omega, const TwoLevelParams& params, double cutoff) {
    const double x = omega - params.model.omega0;
    const double top = cutoff - params.model.omega0;
    if (!(top > 0.0)) throw DomainError("delta_closed_form: cutoff must lie above the edge");
    if (x == 0.0) throw DomainError("delta_closed_form: singular at the band edge");
    if (!(x < top)) throw DomainError("delta_closed_form: omega must lie below the cutoff");
    const double a_coef = params.edge_strength();
    const double u = std::sqrt(top);
    if (x < 0.0) {
        const double a = std::sqrt(-x);
        return -2.0 * a_coef / a * std::atan(u / a);
    }
    const double b = std::sqrt(x);
    return a_coef / b * std::log((u + b) / (u - b));
}

double delta_numeric(double omega, const TwoLevelParams& params, double cutoff, std::size_t panels) {
    const double x = omega - params.model.omega0;
    const double top = cutoff - params.model.omega0;
    if (!(top > 0.0)) throw DomainError("delta_numeric: cutoff must lie above the edge");
    if (panels == 0) throw DomainError("delta_numeric: need at least one panel");
    const double u_top = std::sqrt(top);
    const double h = u_top / static_cast<double>(panels);
    if (std::sqrt(std::abs(x)) < h) {
        throw DomainError("delta_numeric: omega lies within one quadrature cell of the edge");
    }
    if (!(x < top)) throw DomainError("delta_numeric: omega must lie below the cutoff");
    const double a_coef = params.edge_strength();
    if (a_coef == 0.0) return 0.0;

    // (1/2pi) Gamma(w') dw' / (omega - w') = 2A du / (x - u^2)
    double sum = 0.0;
    if (x < 0.0) {
        const auto f = [&](double u) { return 2.0 * a_coef / (x - u * u); };
        for (std::size_t p = 0; p < panels; ++p) {
            sum += gauss_panel(h * static_cast<double>(p), h * static_cast<double>(p + 1), f);
        }
        return sum;
    }
    // 2A/(b^2 - u^2) = phi(u)/(b - u) with phi(u) = 2A/(b + u); subtract phi(b)/(b - u)
    // and add its principal value ln(b/(U - b)) analytically.
    const double b = std::sqrt(x);
    const double phi_b = a_coef / b;
    const auto f = [&](double u) {
        const double phi = 2.0 * a_coef / (b + u);
        return (phi - phi_b) / (b - u);
    };
    for (std::size_t p = 0; p < panels; ++p) {
        sum += gauss_panel(h * static_cast<double>(p), h * static_cast<double>(p + 1), f);
    }
    return sum + phi_b * std::log(b / (u_top - b));
}

SelfEnergyCurve self_energy_curve(const std::vector<double>& omegas, const TwoLevelParams& params) {
    params.validate();
    SelfEnergyCurve curve;
    curve.omega = omegas;
    for (double w : omegas) {
        curve.gamma.push_back(gamma_of_omega(w, params));
        curve.delta.push_back(w == params.model.omega0 ? -INFINITY : delta_closed_form(w, params));
    }
    return curve;
}

double spectral_function(double omega, const TwoLevelParams& params) {
    if (omega <= params.model.omega0) return 0.0;
    const double half = 0.5 * gamma_of_omega(omega, params);
    const double detune = omega - params.omega10 - delta_closed_form(omega, params);
    if (half == 0.0) return 0.0;
    return half / (kPi * (detune * detune + half * half));
}

std::optional<BoundState> bound_state(const TwoLevelParams& params) {
    params.validate();
    const double a_coef = params.edge_strength();
    if (a_coef == 0.0) return std::nullopt;
    const double x10 = params.omega10 - params.model.omega0;
    // omega = omega0 - y: f(y) = -y - x10 + pi A / sqrt(y), strictly decreasing in y
    const auto f = [&](double y) { return -y - x10 + kPi * a_coef / std::sqrt(y); };
    double lo = 1e-9, hi = 1e6;
    double f_lo = f(lo), f_hi = f(hi);
    if (!(f_lo > 0.0 && f_hi < 0.0)) {
        std::ostringstream msg;
        msg << "bound_state: no sign change on [omega0 - " << hi << ", omega0 - " << lo << "] meV (f = " << f_hi
            << ", " << f_lo << ")";
        throw NumericalError(msg.str());
    }
    for (int it = 0; it < 200 && hi - lo > 1e-6 * lo; ++it) {
        const double mid = hi / lo > 4.0 ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm > 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
            f_hi = fm;
        }
    }
    double y0 = lo, y1 = hi, f0 = f_lo, f1 = f_hi;
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
        if (f1 == f0) {
            converged = std::abs(y1 - y0) <= 1e-12;
            break;
        }
        const double y2 = y1 - f1 * (y1 - y0) / (f1 - f0);
        y0 = y1;
        f0 = f1;
        y1 = std::clamp(y2, lo, hi);
        f1 = f(y1);
        if (std::abs(y1 - y0) <= 1e-12 || f1 == 0.0) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        std::ostringstream msg;
        msg << "bound_state: secant polish did not converge in [omega0 - " << hi << ", omega0 - " << lo << "] meV";
        throw NumericalError(msg.str());
    }
    BoundState b;
    b.omega_b = params.model.omega0 - y1;
    b.residue = 1.0 / (1.0 + 0.5 * kPi * a_coef * std::pow(y1, -1.5));
    return b;
}

double EmissionResult::sum_rule() const {
    return continuum_weight + tail_weight + (bound ? bound->residue : 0.0);
}

EmissionResult excited_amplitude(const TimeGrid& times, const TwoLevelParams& params) {
    params.validate();
    EmissionResult res;
    res.times = times;
    const double a_coef = params.edge_strength();
    if (a_coef == 0.0) {
        res.u1.assign(times.size(), cplx(1.0, 0.0));
        res.plateau = 1.0;
        res.continuum_weight = 1.0;
        return res;
    }
    const double x10 = params.omega10 - params.model.omega0;
    const double t_max = std::max(std::abs(times.t_start()), std::abs(times.t_end()));

    // Resolved band [0, u_core] in u; beyond it h(u) ~ 2A/u^4 only enters the sum rule.
    const double rate_scale = 2.0 * kPi * a_coef / std::sqrt(std::max(std::abs(x10), 1e-6));
    const double u_full = std::sqrt(std::abs(x10) + 1e4 * rate_scale);
    const double u_core = std::min(
        u_full, std::max({std::cbrt(2.0 * a_coef / (3.0 * kTailWeightTarget)), 4.0 * std::sqrt(std::abs(x10)), 2.0}));

    // Panel width: two radians of phase at t_max, the resonance line shape, and the edge scale.
    const double u_res = x10 > 0.0 ? std::sqrt(x10) : -1.0;
    const double res_half_width = x10 > 0.0 ? kPi * a_coef / x10 : 0.0;  // Gamma/(4 u_res) in u
    const double edge_scale = std::sqrt(kPi * a_coef / std::max(std::abs(x10), 1e-12));
    const auto width_at = [&](double u) {
        double w = std::min(0.02, 0.05 * edge_scale);
        if (t_max > 0.0) w = std::min(w, kHbar / (std::max(u, 1e-3) * t_max));
        if (u_res > 0.0 && std::abs(u - u_res) < 40.0 * res_half_width) w = std::min(w, 0.1 * res_half_width);
        return std::max(w, 1e-9);
    };
    std::vector<Node> nodes;
    for (double u = 0.0; u < u_core;) {
        const double w = std::min(width_at(u), u_core - u);
        const double mid = u + 0.5 * w, half = 0.5 * w;
        for (std::size_t i = 0; i < kGaussNode.size(); ++i) {
            for (double sgn : {-1.0, 1.0}) {
                const double un = mid + sgn * half * kGaussNode[i];
                nodes.push_back({un, kGaussWeight[i] * half * density_in_u(un, a_coef, x10)});
            }
        }
        u += w;
    }
    for (const auto& n : nodes) res.continuum_weight += n.weight;
    if (u_full > u_core) {
        const std::size_t tail_panels = 400;
        const double ratio = std::pow(u_full / u_core, 1.0 / tail_panels);
        double u = u_core;
        for (std::size_t p = 0; p < tail_panels; ++p) {
            const double next = p + 1 == tail_panels ? u_full : u * ratio;
            res.tail_weight += gauss_panel(u, next, [&](double v) { return density_in_u(v, a_coef, x10); });
            u = next;
        }
    }
    res.bound = bound_state(params);
    if (res.bound) res.plateau = res.bound->residue * res.bound->residue;

    const double sum = res.sum_rule();
    if (std::abs(sum - 1.0) > kSumRuleLimit) {
        std::ostringstream msg;
        msg << "excited_amplitude: sum rule " << sum << " misses 1 by more than " << kSumRuleLimit;
        throw NumericalError(msg.str());
    }

    res.u1.assign(times.size(), cplx{});
    const auto count = static_cast<std::ptrdiff_t>(times.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t m = 0; m < count; ++m) {
        const double t = times[static_cast<std::size_t>(m)] / kHbar;
        cplx s{};
        for (const auto& n : nodes) s += n.weight * std::polar(1.0, -(n.u * n.u - x10) * t);
        if (res.bound) s += res.bound->residue * std::polar(1.0, -(res.bound->omega_b - params.omega10) * t);
        res.u1[static_cast<std::size_t>(m)] = s;
    }
    return res;
}

cplx weisskopf_wigner(double t, const TwoLevelParams& params) {
    const double gamma = gamma_of_omega(params.omega10, params);
    const double delta = params.omega10 == params.model.omega0 ? 0.0 : delta_closed_form(params.omega10, params);
    return std::polar(std::exp(-0.5 * gamma * t / kHbar), -delta * t / kHbar);
}

EmissionGrids suggest_emission_grids(const TwoLevelParams& params, double t_end, double band_cover) {
    params.validate();
    if (!(t_end > 0.0)) throw DomainError("suggest_emission_grids: t_end must be > 0");
    if (!(band_cover > 0.0)) throw DomainError("suggest_emission_grids: band cover must be > 0");
    const double x10 = params.omega10 - params.model.omega0;
    const double top = params.omega10 + band_cover;
    const double v_ref = group_velocity(params.model.omega0 + std::max(std::abs(x10), 1.0), params.model);
    const double dk = std::min(0.1, 2.0 * kPi / (v_ref * 4.0 * t_end));
    const double dt_max = kHbar / (5.0 * (band_cover + std::max(x10, 0.0)));
    auto steps = static_cast<std::size_t>(std::ceil(t_end / dt_max / 100.0)) * 100;
    return {KGrid::covering(k_of_omega(top, params.model), dk), TimeGrid::with_steps(0.0, t_end, steps)};
}

TwoLevelTrajectory propagate_two_level(const TwoLevelParams& params, const TimeGrid& times, const KGrid& kgrid,
                                       const TwoLevelOptions& options) {
    params.validate();
    kernels::ChainSystem sys;
    sys.detuning.resize(kgrid.size());
    for (std::size_t j = 0; j < kgrid.size(); ++j) {
        sys.detuning[j] = (omega_of_k(kgrid[j], params.model) - params.omega10) / kHbar;
    }
    sys.coupling = params.model.g / kHbar;
    sys.dk = kgrid.dk();
    const double shift =
        options.restore_band_tail ? truncation_shift(params.model, kgrid.k_cutoff(), params.omega10) : 0.0;
    sys.decay = cplx(0.5 * params.leak_rate, shift) / kHbar;

    kernels::ChainState init;
    init.a3 = 1.0;
    init.field.assign(kgrid.size(), cplx{});
    const std::vector<cplx> drive(2 * times.steps() + 1);
    const std::size_t stride =
        options.snapshot_stride > 0 ? options.snapshot_stride : std::max<std::size_t>(1, (times.steps() + 510) / 511);
    auto h = kernels::propagate_chain(sys, init, times.t_start(), times.dt(), times.steps(), drive, stride,
                                      kernels::Exec::parallel);
    TwoLevelTrajectory tr;
    tr.times = times;
    tr.kgrid = kgrid;
    tr.c1 = std::move(h.a3);
    tr.field_norm = std::move(h.field_norm);
    tr.snapshots = std::move(h.snapshots);
    tr.snapshot_steps = std::move(h.snapshot_steps);
    tr.final_field = std::move(h.final_field);
    tr.norm_deficit.resize(tr.c1.size());
    for (std::size_t n = 0; n < tr.c1.size(); ++n) {
        tr.norm_deficit[n] = 1.0 - std::norm(tr.c1[n]) - tr.field_norm[n];
    }
    return tr;
}

double FieldSnapshot::norm() const {
    if (x.size() < 2) return 0.0;
    double s = 0.0;
    for (const auto& v : f) s += std::norm(v);
    return s * (x[1] - x[0]);
}

std::vector<FieldSnapshot> field_snapshots(const SpectralWavepacket& c0, const std::vector<double>& times,
                                           const std::vector<double>& xgrid, const TwoLevelParams& params) {
    params.validate();
    const KGrid& kg = c0.grid;
    if (xgrid.size() >= 2) {
        const double dx = xgrid[1] - xgrid[0];
        if (!(dx > 0.0)) throw DomainError("field_snapshots: x grid must be increasing");
        if (dx > kPi / kg.k_max()) {
            std::ostringstream msg;
            msg << "field_snapshots: dx = " << dx << " um aliases k_max = " << kg.k_max() << " /um (need dx <= "
                << kPi / kg.k_max() << ")";
            throw DomainError(msg.str());
        }
        if (xgrid.back() - xgrid.front() >= 2.0 * kPi / kg.dk()) {
            throw DomainError("field_snapshots: x window exceeds the k-grid period 2pi/dk");
        }
    }
    const double pref = kg.dk() / std::sqrt(2.0 * kPi);
    std::vector<double> energy(kg.size());
    for (std::size_t j = 0; j < kg.size(); ++j) energy[j] = (omega_of_k(kg[j], params.model) - params.model.omega0) / kHbar;

    std::vector<FieldSnapshot> out(times.size());
    for (std::size_t s = 0; s < times.size(); ++s) {
        out[s].t = times[s];
        out[s].x = xgrid;
        out[s].f.assign(xgrid.size(), cplx{});
        std::vector<cplx> evolved(kg.size());
        for (std::size_t j = 0; j < kg.size(); ++j) evolved[j] = c0.amplitudes[j] * std::polar(1.0, -energy[j] * times[s]);
        auto& f = out[s].f;
        const auto count = static_cast<std::ptrdiff_t>(xgrid.size());
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < count; ++i) {
            const double x = xgrid[static_cast<std::size_t>(i)];
            // e^{i k_j x} by recurrence from k_min
            const cplx step = std::polar(1.0, kg.dk() * x);
            cplx phase = std::polar(1.0, kg.k_min() * x);
            cplx acc{};
            for (std::size_t j = 0; j < kg.size(); ++j) {
                acc += evolved[j] * phase;
                phase *= step;
                if ((j & 255) == 255) phase = std::polar(1.0, kg[j + 1] * x);
            }
            f[static_cast<std::size_t>(i)] = pref * acc;
        }
    }
    return out;
}

std::vector<FieldSnapshot> coupled_field_snapshots(const TwoLevelTrajectory& trajectory,
                                                   const std::vector<double>& xgrid, const TwoLevelParams& params) {
    std::vector<FieldSnapshot> out;
    for (std::size_t s = 0; s < trajectory.snapshots.size(); ++s) {
        const double t = trajectory.times[trajectory.snapshot_steps[s]];
        auto snap = field_snapshots(make_wavepacket(trajectory.kgrid, trajectory.snapshots[s]), {t}, xgrid, params);
        out.push_back(std::move(snap.front()));
    }
    return out;
}

FieldMotion track_field(const std::vector<FieldSnapshot>& snapshots, double origin_halfwidth, double x_exclude) {
    FieldMotion m;
    for (const auto& s : snapshots) {
        double sum = 0.0, peak = -1.0, where = 0.0;
        int count = 0;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double density = std::norm(s.f[i]);
            if (std::abs(s.x[i]) <= origin_halfwidth) {
                sum += density;
                ++count;
            }
            if (s.x[i] > x_exclude && density > peak) {
                peak = density;
                where = s.x[i];
            }
        }
        m.t.push_back(s.t);
        m.origin_density.push_back(count ? sum / count : 0.0);
        m.front.push_back(where);
    }
    const double n = static_cast<double>(m.t.size());
    if (m.t.size() >= 2) {
        double st = 0.0, sx = 0.0, stt = 0.0, stx = 0.0;
        for (std::size_t i = 0; i < m.t.size(); ++i) {
            st += m.t[i];
            sx += m.front[i];
            stt += m.t[i] * m.t[i];
            stx += m.t[i] * m.front[i];
        }
        m.speed = (n * stx - st * sx) / (n * stt - st * st);
    }
    return m;
}

} // namespace wgqed
