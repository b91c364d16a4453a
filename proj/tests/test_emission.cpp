#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "test_main.hpp"
#include "wgqed/emission.hpp"
#include "wgqed/errors.hpp"

using namespace wgqed;
using wgqed::test::max_abs;

namespace {

constexpr double kE0 = 1.5e6;

TwoLevelParams emitter(double gamma, double detuning = 1.0) {
    TwoLevelParams p;
    p.model.omega0 = kE0;
    p.omega10 = kE0 + detuning;
    p.model = with_rate(p.model, gamma, p.omega10);
    return p;
}

// Composite Simpson of f on [a, b] with n (even) intervals.
template <class F>
double simpson(F&& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

// Truncated-band shift by Simpson in s with omega' = omega0 + s^4 (a different mesh
// from the library's u = sqrt(omega' - omega0)); below the edge only.
double shift_oracle(double omega, const TwoLevelParams& p, double cutoff) {
    const double top = std::pow(cutoff - kE0, 0.25);
    // Gamma(w)/2pi = A / s^2, dw = 4 s^3 ds; offsets kept relative to omega0
    const double a_coef = p.model.g * p.model.g * std::sqrt(kE0 / 2.0) / p.model.hbar_v();
    const double x = omega - kE0;
    const auto integrand = [&](double s) { return 4.0 * a_coef * s / (x - std::pow(s, 4)); };
    return simpson(integrand, 0.0, top, 2000000);
}

std::vector<double> test_frequencies() {
    std::vector<double> w;
    for (double d : {0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 200.0}) {
        w.push_back(kE0 - d);
        w.push_back(kE0 + d);
    }
    return w;
}

} // namespace

TEST_CASE("Gamma(omega): calibrated value, zero below the edge, 1/sqrt scaling") {
    const auto p = emitter(0.27);
    CHECK(gamma_of_omega(kE0 + 1.0, p) == doctest::Approx(0.27).epsilon(1e-12));
    CHECK(gamma_of_omega(kE0 - 1.0, p) == 0.0);
    CHECK(gamma_of_omega(kE0, p) == 0.0);
    CHECK(gamma_of_omega(kE0 + 4.0, p) == doctest::Approx(0.135).epsilon(1e-12));
    // Gamma = 2 pi A / sqrt(omega - omega0)
    CHECK(gamma_of_omega(kE0 + 2.5, p) == doctest::Approx(2.0 * units::kPi * p.edge_strength() / std::sqrt(2.5)));
}

TEST_CASE("closed-form shift of the infinite band") {
    const auto p = emitter(0.27);
    CHECK(p.edge_strength() == doctest::Approx(0.27 / (2.0 * units::kPi)).epsilon(1e-12));
    CHECK(delta_closed_form(kE0 - 1.0, p) == doctest::Approx(-0.135).epsilon(1e-12));
    CHECK(delta_closed_form(kE0 + 1.0, p) == 0.0);
    CHECK_THROWS_AS(delta_closed_form(kE0, p), DomainError);
    auto off = p;
    off.model.g = 0.0;
    CHECK(delta_closed_form(kE0 - 1.0, off) == 0.0);
    // the truncated band approaches it as the cut-off grows
    for (double w : {kE0 - 1.0, kE0 + 1.0}) {
        double prev = std::abs(delta_closed_form(w, p, kE0 + 1e3) - delta_closed_form(w, p));
        for (double top : {1e5, 1e7, 1e9}) {
            const double gap = std::abs(delta_closed_form(w, p, kE0 + top) - delta_closed_form(w, p));
            CHECK(gap < prev);
            prev = gap;
        }
        CHECK(prev < 1e-5);
    }
}

TEST_CASE("truncated-band shift: closed form against an independent quadrature below the edge") {
    const auto p = emitter(0.27);
    for (double d : {0.1, 1.0, 20.0}) {
        const double cutoff = kE0 + 100.0;
        CHECK(delta_closed_form(kE0 - d, p, cutoff) == doctest::Approx(shift_oracle(kE0 - d, p, cutoff)).epsilon(1e-6));
    }
}

TEST_CASE("truncated-band shift is the infinite-band shift minus the band-tail correction") {
    const auto p = emitter(0.27);
    const double k_cut = 200.0;
    const double cutoff = omega_of_k(k_cut, p.model);
    for (double w : test_frequencies()) {
        const double expect = delta_closed_form(w, p) - truncation_shift(p.model, k_cut, w);
        CHECK(delta_closed_form(w, p, cutoff) == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("PV quadrature matches the truncated closed form at 20 frequencies") {
    const auto p = emitter(0.27);
    const double cutoff = kE0 + 1e6;
    for (double w : test_frequencies()) {
        CAPTURE(w - kE0);
        const double exact = delta_closed_form(w, p, cutoff);
        CHECK(std::abs(delta_numeric(w, p, cutoff) - exact) <= 1e-4 * std::abs(exact));
    }
    // ω = ω0 - 1 against the infinite band: the gap is the cut-off remainder ~ 2A/sqrt(1e6)
    const double gap = delta_numeric(kE0 - 1.0, p, cutoff) - delta_closed_form(kE0 - 1.0, p);
    CHECK(gap == doctest::Approx(2.0 * p.edge_strength() / 1e3).epsilon(1e-3));
}

TEST_CASE("PV quadrature: monotone approach with the cut-off, refusal near the edge, zero coupling") {
    const auto p = emitter(0.27);
    const double w = kE0 - 1.0;
    const double a = delta_numeric(w, p, kE0 + 1e4);
    const double b = delta_numeric(w, p, kE0 + 1e6);
    const double c = delta_numeric(w, p, kE0 + 1e8);
    const double inf = delta_closed_form(w, p);
    CHECK(std::abs(b - inf) < std::abs(a - inf));
    CHECK(std::abs(c - inf) < std::abs(b - inf));
    CHECK(c > inf);

    CHECK_THROWS_AS(delta_numeric(kE0 + 1e-6, p, kE0 + 1e6), DomainError);
    CHECK_THROWS_AS(delta_numeric(kE0 - 1e-6, p, kE0 + 1e6), DomainError);
    CHECK_THROWS_AS(delta_numeric(w, p, kE0 - 1.0), DomainError);
    auto off = p;
    off.model.g = 0.0;
    CHECK(delta_numeric(w, off, kE0 + 1e6) == 0.0);
}

TEST_CASE("spectral function: Lorentzian near resonance for weak coupling") {
    const auto p = emitter(0.27);
    double peak = 0.0, peak_w = 0.0;
    for (double w = kE0 + 0.5; w <= kE0 + 1.5; w += 1e-4) {
        const double u = spectral_function(w, p);
        if (u > peak) {
            peak = u;
            peak_w = w;
        }
    }
    CHECK(std::abs(peak_w - p.omega10) <= 0.05 * 0.27);
    double lo = peak_w, hi = peak_w;
    while (spectral_function(lo, p) > 0.5 * peak) lo -= 1e-5;
    while (spectral_function(hi, p) > 0.5 * peak) hi += 1e-5;
    CHECK(hi - lo == doctest::Approx(0.27).epsilon(0.02));
    CHECK(spectral_function(kE0 - 0.5, p) == 0.0);
    // vanishing width away from resonance
    auto weak = emitter(1e-8);
    CHECK(spectral_function(kE0 + 2.0, weak) < 1e-8);
}

TEST_CASE("sum rule: continuum weight plus residue is one") {
    for (double gamma : {0.27, 4.37}) {
        CAPTURE(gamma);
        const auto p = emitter(gamma);
        const auto bound = bound_state(p);
        REQUIRE(bound);
        // omega' = omega0 + s^4, Simpson on [0, 60] (omega up to 1.3e7 meV above the edge)
        const auto integrand = [&](double s) {
            return spectral_function(kE0 + std::pow(s, 4), p) * 4.0 * std::pow(s, 3);
        };
        const double continuum = simpson(integrand, 0.0, 60.0, 400000);
        CHECK(std::abs(continuum + bound->residue - 1.0) <= 1e-3);

        const auto res = excited_amplitude(TimeGrid::with_steps(0.0, 1.0, 4), p);
        CHECK(std::abs(res.sum_rule() - 1.0) <= 1e-3);
        CHECK(res.continuum_weight + res.tail_weight == doctest::Approx(continuum).epsilon(1e-4));
    }
}

TEST_CASE("bound state: root of the pole equation and its residue") {
    const auto p = emitter(4.37);
    const auto b = bound_state(p);
    REQUIRE(b);
    CHECK(b->omega_b < kE0);
    CHECK(b->omega_b - kE0 == doctest::Approx(-1.09).epsilon(0.01));
    CHECK(b->residue == doctest::Approx(0.51).epsilon(0.01));
    CHECK(std::abs(b->omega_b - p.omega10 - delta_closed_form(b->omega_b, p)) <= 1e-9);
    // Z = 1/(1 - dDelta/domega), derivative by a five-point stencil
    const double h = 1e-3;
    const auto d = [&](double s) { return delta_closed_form(b->omega_b + s * h, p); };
    const double slope = (d(-2) - 8.0 * d(-1) + 8.0 * d(1) - d(2)) / (12.0 * h);
    CHECK(b->residue == doctest::Approx(1.0 / (1.0 - slope)).epsilon(1e-6));
}

TEST_CASE("bound state: weak coupling hugs the edge, zero coupling has none") {
    const auto weak = bound_state(emitter(0.27));
    REQUIRE(weak);
    const auto weaker = bound_state(emitter(0.027));
    REQUIRE(weaker);
    CHECK(weaker->residue < weak->residue);
    CHECK(weak->residue < 0.05);
    CHECK(kE0 - weaker->omega_b < kE0 - weak->omega_b);
    auto off = emitter(0.27);
    off.model.g = 0.0;
    CHECK_FALSE(bound_state(off));
}

TEST_CASE("U1(t): weak coupling decays at the Markovian rate, modulated by the edge") {
    const auto p = emitter(0.27);
    const auto times = TimeGrid::with_steps(0.0, 10.0, 200);
    const auto res = excited_amplitude(times, p);
    CHECK(std::abs(res.u1.front()) == doctest::Approx(1.0).epsilon(1e-3));
    // least-squares slope of ln|U1|^2
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    double lo = 1e9, hi = 0.0;
    for (std::size_t n = 0; n < times.size(); ++n) {
        const double t = times[n], y = std::log(std::norm(res.u1[n]));
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
        const double envelope = std::norm(res.u1[n]) * std::exp(0.27 * t / units::kHbar);
        lo = std::min(lo, envelope);
        hi = std::max(hi, envelope);
    }
    const double count = static_cast<double>(times.size());
    const double slope = (count * sty - st * sy) / (count * stt - st * st);
    CHECK(-slope * units::kHbar == doctest::Approx(0.27).epsilon(0.1));
    // beating with the branch point at omega0 (period 2 pi hbar / 1 meV) stays bounded
    CHECK(lo > 0.5);
    CHECK(hi < 1.6);
    CHECK(res.plateau < 2e-3);
}

TEST_CASE("U1(t): no coupling leaves the excited state untouched") {
    auto p = emitter(0.27);
    p.model.g = 0.0;
    const auto res = excited_amplitude(TimeGrid::with_steps(0.0, 10.0, 10), p);
    for (const auto& u : res.u1) CHECK(u == cplx(1.0, 0.0));
    CHECK_FALSE(res.bound);
}

TEST_CASE("U1(t): far above the edge the Weisskopf-Wigner law holds") {
    const double gamma = 0.01;
    const auto p = emitter(gamma, 100.0 * gamma);
    const double lifetime = units::kHbar / gamma;
    const auto times = TimeGrid::with_steps(0.0, 3.0 * lifetime, 300);
    const auto res = excited_amplitude(times, p);
    double worst = 0.0;
    for (std::size_t n = 0; n < times.size(); ++n) {
        const double ww = std::norm(weisskopf_wigner(times[n], p));
        worst = std::max(worst, std::abs(std::norm(res.u1[n]) - ww) / ww);
    }
    CHECK(worst <= 0.02);
}

TEST_CASE("U1(t): strong coupling shows Rabi oscillations and settles at Z^2") {
    const double gamma = 4.37;
    const auto p = emitter(gamma);
    const double window = 50.0 * units::kHbar / gamma;
    const auto times = TimeGrid::with_steps(0.0, window, 1000);
    const auto res = excited_amplitude(times, p);
    REQUIRE(res.bound);
    double avg = 0.0;
    int count = 0, maxima = 0;
    for (std::size_t n = 0; n < times.size(); ++n) {
        if (times[n] >= 0.8 * window) {
            avg += std::norm(res.u1[n]);
            ++count;
        }
        if (n > 0 && n + 1 < times.size() && std::norm(res.u1[n]) > std::norm(res.u1[n - 1]) &&
            std::norm(res.u1[n]) > std::norm(res.u1[n + 1])) {
            ++maxima;
        }
    }
    CHECK(avg / count == doctest::Approx(res.plateau).epsilon(0.04));
    CHECK(std::abs(avg / count - res.plateau) <= 1e-2);
    CHECK(maxima >= 3);
    CHECK(res.plateau == doctest::Approx(res.bound->residue * res.bound->residue));
}

TEST_CASE("Weisskopf-Wigner amplitude") {
    const auto p = emitter(0.27);
    CHECK(weisskopf_wigner(0.0, p) == cplx(1.0, 0.0));
    CHECK(std::norm(weisskopf_wigner(3.0, p)) == doctest::Approx(std::exp(-0.27 * 3.0 / units::kHbar)));
    CHECK(std::arg(weisskopf_wigner(1.0, p)) == doctest::Approx(0.0));
    // below the edge: no decay, phase slope -Delta/hbar
    auto below = emitter(0.27);
    below.omega10 = kE0 - 1.0;
    const cplx z = weisskopf_wigner(0.1, below);
    CHECK(std::abs(z) == doctest::Approx(1.0));
    CHECK(std::arg(z) == doctest::Approx(0.135 * 0.1 / units::kHbar).epsilon(1e-9));
}

TEST_CASE("direct propagation agrees with the Green's-function amplitude") {
    for (double gamma : {0.27, 4.37}) {
        CAPTURE(gamma);
        const auto p = emitter(gamma);
        const auto g = suggest_emission_grids(p, 10.0, 400.0);
        const auto tr = propagate_two_level(p, g.times, g.kgrid);
        const auto res = excited_amplitude(TimeGrid::with_steps(0.0, 10.0, 100), p);
        const std::size_t stride = g.times.steps() / 100;
        double worst = 0.0, drift = 0.0;
        for (std::size_t n = 0; n < res.u1.size(); ++n) worst = std::max(worst, std::abs(tr.c1[n * stride] - res.u1[n]));
        for (double d : tr.norm_deficit) drift = std::max(drift, std::abs(d));
        CHECK(worst <= 1e-3);
        CHECK(drift <= 1e-6);
    }
}

TEST_CASE("leakage drains the trapped population slowly and monotonically") {
    auto p = emitter(4.37);
    const auto g = suggest_emission_grids(p, 10.0, 200.0);
    const auto lossless = propagate_two_level(p, g.times, g.kgrid);
    p.leak_rate = 0.033;
    const auto lossy = propagate_two_level(p, g.times, g.kgrid);
    bool monotone = true;
    for (std::size_t n = 1; n < lossy.norm_deficit.size(); ++n) {
        monotone = monotone && lossy.norm_deficit[n] >= lossy.norm_deficit[n - 1] - 1e-13;
    }
    CHECK(monotone);
    const double ratio = std::norm(lossy.c1.back()) / std::norm(lossless.c1.back());
    CHECK(ratio < 1.0);
    CHECK(ratio > std::exp(-0.033 * 10.0 / units::kHbar));
}

TEST_CASE("field snapshots: zero field, aliasing and window guards") {
    const auto p = emitter(0.27);
    const KGrid kg(0.1, 400);
    const auto zero = make_wavepacket(kg, std::vector<cplx>(kg.size()));
    std::vector<double> xs;
    for (int i = 0; i < 200; ++i) xs.push_back(-5.0 + 0.05 * i);
    const auto snaps = field_snapshots(zero, {10.0, 20.0}, xs, p);
    REQUIRE(snaps.size() == 2);
    CHECK(max_abs(snaps[1].f) == 0.0);
    CHECK(snaps[1].t == 20.0);

    std::vector<double> coarse = {0.0, 0.1};  // pi/k_max = 0.0787 um
    CHECK_THROWS_AS(field_snapshots(zero, {10.0}, coarse, p), DomainError);
    std::vector<double> wide = {0.0, 0.05, 70.0};
    CHECK_THROWS_AS(field_snapshots(zero, {10.0}, wide, p), DomainError);
}

TEST_CASE("field snapshots: direct Fourier sum and Parseval over one period") {
    const auto p = emitter(0.27);
    const KGrid kg(0.05, 0.1, 300);
    std::vector<cplx> amp(kg.size());
    for (std::size_t j = 0; j < kg.size(); ++j) {
        amp[j] = std::polar(std::exp(-std::pow((kg[j] - 10.0) / 3.0, 2)), 0.4 * kg[j]);
    }
    const auto c0 = make_wavepacket(kg, amp);
    const double period = 2.0 * units::kPi / kg.dk();
    const std::size_t m = 1024;
    std::vector<double> xs(m);
    for (std::size_t i = 0; i < m; ++i) xs[i] = -10.0 + period * static_cast<double>(i) / m;
    const double t = 12.5;
    const auto snap = field_snapshots(c0, {t}, xs, p).front();

    double worst = 0.0;
    for (std::size_t i = 0; i < m; i += 37) {
        cplx direct{};
        for (std::size_t j = 0; j < kg.size(); ++j) {
            const double phase = kg[j] * xs[i] - (omega_of_k(kg[j], p.model) - kE0) * t / units::kHbar;
            direct += amp[j] * std::polar(1.0, phase);
        }
        direct *= kg.dk() / std::sqrt(2.0 * units::kPi);
        worst = std::max(worst, std::abs(direct - snap.f[i]));
    }
    CHECK(worst <= 1e-10);
    CHECK(snap.norm() == doctest::Approx(c0.norm_squared()).epsilon(1e-10));
}

TEST_CASE("field snapshots: a narrow packet moves at the group velocity") {
    const auto p = emitter(0.27);
    const double k1 = k_of_omega(p.omega10, p.model);
    const KGrid kg(k1 - 3.0, 0.01, 600);
    std::vector<cplx> amp(kg.size());
    for (std::size_t j = 0; j < kg.size(); ++j) amp[j] = std::exp(-std::pow((kg[j] - k1) / 0.5, 2));
    std::vector<double> xs;
    for (double x = -20.0; x < 80.0; x += 0.02) xs.push_back(x);
    const auto snaps = field_snapshots(make_wavepacket(kg, amp), {0.0, 100.0}, xs, p);
    const auto peak = [&](const FieldSnapshot& s) {
        std::size_t best = 0;
        for (std::size_t i = 0; i < s.f.size(); ++i) {
            if (std::norm(s.f[i]) > std::norm(s.f[best])) best = i;
        }
        return s.x[best];
    };
    const double speed = (peak(snaps[1]) - peak(snaps[0])) / 100.0;
    CHECK(speed == doctest::Approx(group_velocity(p.omega10, p.model)).epsilon(0.02));
}

TEST_CASE("emission grids and parameter validation") {
    const auto p = emitter(0.27);
    const auto g = suggest_emission_grids(p, 10.0);
    CHECK(omega_of_k(g.kgrid.k_max(), p.model) >= p.omega10 + 1600.0 - 1.0);
    CHECK(g.kgrid.dk() <= 0.1);
    CHECK(g.times.dt() <= units::kHbar / (5.0 * 1600.0));
    auto bad = p;
    bad.leak_rate = -1.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = p;
    bad.omega10 = 0.0;
    CHECK_THROWS_AS(propagate_two_level(bad, g.times, g.kgrid), DomainError);
    CHECK_THROWS_AS(suggest_emission_grids(p, -1.0), DomainError);
}
