#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "wgqed/errors.hpp"
#include "wgqed/wavepacket.hpp"
#include "wgqed/waveguide.hpp"

using namespace wgqed;

namespace {

constexpr double kE0 = 1.5e6;  // 1.5 eV in meV

// hbar*v = 1 meV*um: the dispersion reads omega = sqrt(omega0^2 + k^2).
WaveguideModel unit_model() {
    WaveguideModel m;
    m.omega0 = kE0;
    m.v = 1.0 / units::kHbar;
    return m;
}

WaveguideModel calibrated_model(double gamma = 0.27) {
    WaveguideModel m;
    m.omega0 = kE0;
    return with_rate(m, gamma, kE0 + 1.0);
}

} // namespace

TEST_CASE("dispersion: minimum at k = 0 and first-order expansion near the edge") {
    const auto m = unit_model();
    CHECK(omega_of_k(0.0, m) == kE0);
    // v k = sqrt(2 omega0 * 1 meV)  =>  omega = omega0 sqrt(1 + 2/omega0) ~ omega0 + 1 - 1/(2 omega0)
    const double k = std::sqrt(2.0 * kE0 * 1.0);
    const long double exact = std::sqrt(static_cast<long double>(kE0) * kE0 + static_cast<long double>(k) * k);
    CHECK(omega_of_k(k, m) == doctest::Approx(static_cast<double>(exact)).epsilon(1e-15));
    CHECK(omega_of_k(k, m) - kE0 == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_THROWS_AS(omega_of_k(-std::abs(k), m), DomainError);
}

TEST_CASE("dispersion is monotone and k_of_omega inverts it") {
    const auto m = calibrated_model();
    double prev = omega_of_k(0.0, m);
    for (double k = 0.5; k < 40.0; k += 0.5) {
        const double w = omega_of_k(k, m);
        CHECK(w > prev);
        // omega - omega0 loses ~1e-10 meV to rounding at omega0 = 1.5e6 meV
        CHECK(k_of_omega(w, m) == doctest::Approx(k).epsilon(1e-7));
        prev = w;
    }
}

TEST_CASE("density of states: edge formula, 1/sqrt scaling and the singular point") {
    const auto m = unit_model();
    CHECK(dos(kE0 + 1.0, m) == doctest::Approx(std::sqrt(7.5e5)).epsilon(1e-12));
    CHECK(dos(kE0 + 1.0, m) == doctest::Approx(866.03).epsilon(1e-5));
    CHECK(dos(kE0 + 4.0, m) == doctest::Approx(0.5 * dos(kE0 + 1.0, m)).epsilon(1e-12));
    CHECK_THROWS_AS(dos(kE0, m), DomainError);
    CHECK_THROWS_AS(dos(kE0 - 1.0, m), DomainError);
}

TEST_CASE("group velocity: near-edge value and free-photon limit") {
    const auto m = calibrated_model();
    const long double ratio = static_cast<long double>(kE0) / (kE0 + 1.0L);
    const double expected = static_cast<double>(std::sqrt(1.0L - ratio * ratio));
    CHECK(group_velocity(kE0 + 1.0, m) / m.v == doctest::Approx(expected).epsilon(1e-12));
    CHECK(group_velocity(kE0 + 1.0, m) / m.v == doctest::Approx(1.155e-3).epsilon(1e-3));
    CHECK(group_velocity(1e4 * kE0, m) / m.v == doctest::Approx(1.0).epsilon(1e-8));
    CHECK_THROWS_AS(group_velocity(kE0, m), DomainError);
}

TEST_CASE("dos times group velocity stays finite at the edge") {
    const auto m = calibrated_model();
    // dos * hbar * v_g = sqrt(omega0/2) sqrt(2 omega0 + d) / (omega0 + d), exactly, for the edge DOS formula
    for (double d : {1e-6, 1e-3, 1.0}) {
        const double w = kE0 + d;
        const double product = dos(w, m) * units::kHbar * group_velocity(w, m);
        const double oracle = std::sqrt(kE0 / 2.0) * std::sqrt(2.0 * kE0 + d) / (kE0 + d);
        CHECK(product == doctest::Approx(oracle).epsilon(1e-9));
        CHECK(product == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("dispersion/DOS duality at random frequencies") {
    const auto m = calibrated_model();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> delta(1e-4, 50.0);
    for (int i = 0; i < 10; ++i) {
        const double w = kE0 + delta(rng);
        CHECK(dk_domega(w, m) * units::kHbar * group_velocity(w, m) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(dos(w, m) / dk_domega(w, m) == doctest::Approx(1.0).epsilon(1e-4));
    }
}

TEST_CASE("markovian rate and coupling calibration") {
    const auto m = calibrated_model();
    CHECK(markovian_rate(m, kE0 + 1.0) == doctest::Approx(0.27).epsilon(1e-12));

    auto zero = m;
    zero.g = 0.0;
    CHECK(markovian_rate(zero, kE0 + 1.0) == 0.0);

    auto strong = m;
    strong.g = 4.0 * m.g;
    CHECK(markovian_rate(strong, kE0 + 1.0) == doctest::Approx(16.0 * 0.27).epsilon(1e-12));
    CHECK(rate_from_dipole(300.0) == doctest::Approx(16.0 * 0.27).epsilon(1e-12));
    CHECK(rate_from_dipole(75.0) == doctest::Approx(0.27).epsilon(1e-15));

    const auto u = unit_model();
    const double g = calibrate_coupling(0.27, kE0 + 1.0, u);
    CHECK(g == doctest::Approx(std::sqrt(0.27 / (2.0 * units::kPi * std::sqrt(7.5e5)))).epsilon(1e-12));
    CHECK(g == doctest::Approx(7.04e-3).epsilon(1e-3));

    for (double target : {1e-3, 0.27, 4.37, 30.0}) {
        auto c = m;
        c.g = calibrate_coupling(target, kE0 + 1.0, m);
        CHECK(markovian_rate(c, kE0 + 1.0) == doctest::Approx(target).epsilon(1e-12));
    }
    const double ratio = calibrate_coupling(4.37, kE0 + 1.0, m) / calibrate_coupling(0.27, kE0 + 1.0, m);
    CHECK(ratio == doctest::Approx(std::sqrt(4.37 / 0.27)).epsilon(1e-12));
    CHECK(ratio == doctest::Approx(4.02).epsilon(2e-3));

    CHECK_THROWS_AS(calibrate_coupling(0.0, kE0 + 1.0, m), DomainError);
    CHECK_THROWS_AS(calibrate_coupling(-1.0, kE0 + 1.0, m), DomainError);
    CHECK_THROWS_AS(calibrate_coupling(0.27, kE0, m), DomainError);
}

TEST_CASE("model invariants are validated") {
    WaveguideModel m;
    CHECK_NOTHROW(m.validate());
    m.leak_rate = -1.0;
    CHECK_THROWS_AS(m.validate(), DomainError);
    m = WaveguideModel{};
    m.v = 0.0;
    CHECK_THROWS_AS(m.validate(), DomainError);
}

TEST_CASE("sech wavepacket: normalization, peak position and coverage errors") {
    const auto m = calibrated_model();
    const double w1 = kE0 + 1.0;
    const double sigma = 0.08;
    const auto grid = KGrid::covering(k_of_omega(w1 + 40.0 * sigma, m), 0.01);
    const auto f = sech_wavepacket(w1, sigma, grid, m);
    CHECK(f.norm_squared() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(f.clipped_by_edge == false);

    std::size_t peak = 0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        CHECK(f.amplitudes[j].imag() == 0.0);
        CHECK(f.amplitudes[j].real() > 0.0);
        if (std::abs(f.amplitudes[j]) > std::abs(f.amplitudes[peak])) peak = j;
    }
    CHECK(std::abs(grid[peak] - k_of_omega(w1, m)) <= grid.dk());

    const auto short_grid = KGrid::covering(k_of_omega(w1 + 5.0 * sigma, m), 0.01);
    CHECK_THROWS_AS(sech_wavepacket(w1, sigma, short_grid, m), DomainError);
    const KGrid late_start(k_of_omega(w1 - 2.0 * sigma, m), 0.01, 2000);
    CHECK_THROWS_AS(sech_wavepacket(w1, sigma, late_start, m), DomainError);
}

TEST_CASE("sech wavepacket normalization does not depend on the grid extent") {
    const auto m = calibrated_model();
    const double w1 = kE0 + 1.0, sigma = 0.08;
    const double dk = 0.02;
    const auto g40 = KGrid::covering(k_of_omega(w1 + 40.0 * sigma, m), dk);
    const KGrid g80(g40.k_min(), g40.dk(), static_cast<std::size_t>(
                                               std::ceil(k_of_omega(w1 + 80.0 * sigma, m) / g40.dk())));
    const auto a = sech_wavepacket(w1, sigma, g40, m);
    const auto b = sech_wavepacket(w1, sigma, g80, m);
    double worst = 0.0;
    for (std::size_t j = 0; j < g40.size(); ++j) worst = std::max(worst, std::abs(a.amplitudes[j] - b.amplitudes[j]));
    CHECK(worst / std::abs(a.amplitudes[0] + 1.0) < 1e-6);
    CHECK(std::abs(b.norm_squared() - 1.0) < 1e-9);
}

TEST_CASE("overlap: self, disjoint, mismatched grids, purity") {
    const auto m = calibrated_model();
    const auto grid = KGrid::covering(k_of_omega(kE0 + 20.0, m), 0.01);
    const auto f = sech_wavepacket(kE0 + 1.0, 0.02, grid, m);
    const auto h = sech_wavepacket(kE0 + 15.0, 0.02, grid, m);
    CHECK(std::abs(overlap(f, f)) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(overlap(f, h)) < 1e-12);

    const auto other = KGrid::covering(k_of_omega(kE0 + 20.0, m), 0.011);
    const auto f2 = sech_wavepacket(kE0 + 1.0, 0.02, other, m);
    CHECK_THROWS_AS(overlap(f, f2), DomainError);

    const auto again = sech_wavepacket(kE0 + 1.0, 0.02, grid, m);
    CHECK(again.amplitudes == f.amplitudes);
}

TEST_CASE("truncation shift equals the level shift of the modes above the cut-off") {
    const auto m = calibrated_model();
    const double k_cut = 20.0;
    const double top = omega_of_k(k_cut, m);
    const double a_coef = m.g * m.g * std::sqrt(m.omega0 / 2.0) / m.hbar_v();
    const double u_cut = std::sqrt(top - m.omega0);
    for (double x : {-2.0, -0.3, 0.0, 0.4, 1.0, 3.0}) {
        // sum over omega' > top of g^2 dos(omega') / (omega - omega'), in u = sqrt(omega' - omega0),
        // mapped to s = u_cut / u in (0, 1] and integrated with composite Simpson
        const int n = 20000;
        auto f = [&](double s) {
            if (s == 0.0) return -2.0 * a_coef / u_cut;
            const double u = u_cut / s;
            return 2.0 * a_coef / (x - u * u) * u_cut / (s * s);
        };
        double sum = f(0.0) + f(1.0);
        for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(static_cast<double>(i) / n);
        const double oracle = sum / (3.0 * n);
        CHECK(truncation_shift(m, k_cut, m.omega0 + x) == doctest::Approx(oracle).epsilon(1e-8));
    }
    CHECK_THROWS_AS(truncation_shift(m, k_cut, top + 1.0), DomainError);
}
