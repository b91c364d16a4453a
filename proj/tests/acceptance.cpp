// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.
//
//   acceptance [--strict]
//
// Every criterion is evaluated and printed. The exit status is 0 once all eleven
// have been evaluated; with --strict it is the number of failed criteria.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "json.hpp"
#include "wgqed/config.hpp"
#include "wgqed/emission.hpp"
#include "wgqed/scenario.hpp"

using namespace wgqed;
using json = nlohmann::ordered_json;

namespace {

// Sending fidelities for (sigma0, leak) = (0.08, 1%), (0.08, 6%), (0.008, 1%), (0.008, 6%).
constexpr double kTableReference[4] = {0.9916, 0.9667, 0.9900, 0.9606};
constexpr double kTableTolerance = 0.01;
constexpr double kRoundtripBroad = 0.995;
constexpr double kRoundtripNarrow = 0.999;
constexpr double kAbsorbed = 0.99;
constexpr double kMarkovRegimeSplit = 0.05;
constexpr double kImagRatio = 10.0;
constexpr double kPvRelative = 1e-4;
constexpr double kPvCutoff = 1e6;  // meV above the edge
constexpr double kCrossValidation = 1e-3;
constexpr double kCrossValidationWindow = 10.0;  // ps
constexpr double kWeisskopfWigner = 0.02;
constexpr double kPlateau = 1e-2;
constexpr int kMinMaxima = 3;
constexpr double kUnitarity = 1e-6;
constexpr double kFloorFraction = 0.5;
constexpr double kSpeedTolerance = 0.2;

struct Line {
    int id;
    std::string name;
    bool pass;
    std::string detail;
};

std::vector<Line> lines;

void record(int id, const std::string& name, bool pass, const std::string& detail) {
    lines.push_back({id, name, pass, detail});
    std::printf("%s  %2d  %-28s %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

RunReport run(const std::string& text) {
    RunOptions opt;
    opt.write_files = false;
    return run_scenario(parse_config(text), opt);
}

double result(const RunReport& r, const char* key) { return r.results.at(key).get<double>(); }

// max_t norm deficit of every lossless propagation, collected for criterion 10
double worst_unitarity = 0.0;
bool leaky_monotone = true;

void collect_norms(const RunReport& r) {
    for (const auto& c : r.checks) {
        if (c.name == "norm_conservation") worst_unitarity = std::max(worst_unitarity, c.value);
        if (c.name.rfind("norm_nonincreasing", 0) == 0) leaky_monotone = leaky_monotone && c.passed();
    }
}

void table_fidelities() {
    const auto r = run("scenario = table1\n");
    collect_norms(r);
    const auto& cells = r.results.at("cells");
    double worst = 0.0;
    std::string values;
    for (std::size_t i = 0; i < 4; ++i) {
        const double f = cells[i].at("fidelity").get<double>();
        worst = std::max(worst, std::abs(f - kTableReference[i]));
        values += fmt("%s%.4f", i ? " " : "", f);
    }
    record(1, "sending-fidelity-table", worst <= kTableTolerance,
           fmt("F = {%s} vs {0.9916 0.9667 0.9900 0.9606}, max |dev| %.4f (tol %.2f)", values.c_str(), worst,
               kTableTolerance));
}

struct SendPair {
    RunReport broad, narrow;
};

SendPair send_roundtrips() {
    SendPair s{run("scenario = send-roundtrip\nsigma0 = 0.08\n"), run("scenario = send-roundtrip\nsigma0 = 0.008\n")};
    collect_norms(s.broad);
    collect_norms(s.narrow);
    const double fb = result(s.broad, "fidelity");
    const double fn = result(s.narrow, "fidelity");
    record(2, "design-propagate-roundtrip", fb >= kRoundtripBroad && fn >= kRoundtripNarrow,
           fmt("overlap sigma0=0.08: %.7f (>= %.3f), sigma0=0.008: %.7f (>= %.3f)", fb, kRoundtripBroad, fn,
               kRoundtripNarrow));
    return s;
}

void receive_roundtrips() {
    const auto b = run("scenario = receive-roundtrip\nsigma0 = 0.08\n");
    const auto n = run("scenario = receive-roundtrip\nsigma0 = 0.008\n");
    collect_norms(b);
    collect_norms(n);
    const double pb = result(b, "absorbed_population");
    const double pn = result(n, "absorbed_population");
    record(3, "receiving-impedance-match", pb >= kAbsorbed && pn >= kAbsorbed,
           fmt("|D1(t_end)|^2 sigma0=0.08: %.7f, sigma0=0.008: %.7f (>= %.2f)", pb, pn, kAbsorbed));
}

void markov_regime() {
    const auto b = run("scenario = send-design\nsigma0 = 0.08\n");
    const auto n = run("scenario = send-design\nsigma0 = 0.008\n");
    const double broad = result(b, "relative_l2_distance");
    const double narrow = result(n, "relative_l2_distance");
    record(4, "markov-vs-exact-pulse", narrow <= kMarkovRegimeSplit && broad > kMarkovRegimeSplit,
           fmt("relative L2 sigma0=0.008: %.4f (<= %.2f), sigma0=0.08: %.4f (> %.2f)", narrow, kMarkovRegimeSplit,
               broad, kMarkovRegimeSplit));
    const auto& fb = b.results.at("relative_l2_distance_where_abs_c1_at_least");
    const auto& fn = n.results.at("relative_l2_distance_where_abs_c1_at_least");
    std::printf("                  diagnostic, L2 restricted to |C1| >= 0.3 / 0.1 / 0.03: sigma0=0.008 %.4f %.4f "
                "%.4f, sigma0=0.08 %.4f %.4f %.4f\n",
                fn.at("0.3").get<double>(), fn.at("0.1").get<double>(), fn.at("0.03").get<double>(),
                fb.at("0.3").get<double>(), fb.at("0.1").get<double>(), fb.at("0.03").get<double>());
}

void markov_signature(const SendPair& s) {
    const double ib = result(s.broad, "max_abs_im_f_out_markov_pulse");
    const double in = result(s.narrow, "max_abs_im_f_out_markov_pulse");
    const double ratio = ib / in;
    const double normalized = (ib / result(s.broad, "max_abs_f_out_markov_pulse")) /
                              (in / result(s.narrow, "max_abs_f_out_markov_pulse"));
    record(5, "markov-imaginary-signature", ratio >= kImagRatio,
           fmt("max|Im F_out| %.4g vs %.4g, ratio %.2f (>= %.0f); peak-normalized ratio %.2f", ib, in, ratio,
               kImagRatio, normalized));
}

void self_energy_oracle() {
    TwoLevelParams p;
    p.model.omega0 = 1.5e6;
    p.omega10 = p.model.omega0 + 1.0;
    p.model = with_rate(p.model, 0.27, p.omega10);
    const double cutoff = p.model.omega0 + kPvCutoff;
    double worst = 0.0;
    int count = 0;
    for (double d : {0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 200.0}) {
        for (double sign : {-1.0, 1.0}) {
            const double w = p.model.omega0 + sign * d;
            const double exact = delta_closed_form(w, p, cutoff);
            worst = std::max(worst, std::abs(delta_numeric(w, p, cutoff) - exact) / std::abs(exact));
            ++count;
        }
    }
    record(6, "self-energy-pv-oracle", worst <= kPvRelative,
           fmt("%d frequencies within 200 meV of the edge, max relative error %.2e (tol %.0e)", count, worst,
               kPvRelative));
}

RunReport emission(double gamma) {
    return run(fmt("scenario = emission-decay\n[physics]\ngamma = %.17g\n[numerics]\nt_end = %.17g\n", gamma,
                   kCrossValidationWindow));
}

void cross_validation() {
    const auto weak = emission(0.27);
    const auto strong = emission(4.37);
    collect_norms(weak);
    collect_norms(strong);
    const double dw = result(weak, "max_abs_u1_minus_c1");
    const double ds = result(strong, "max_abs_u1_minus_c1");
    record(7, "green-vs-direct", std::max(dw, ds) <= kCrossValidation,
           fmt("max |U1 - C1| on [0, 10] ps gamma=0.27: %.2e, gamma=4.37: %.2e (tol %.0e)", dw, ds, kCrossValidation));
}

void weisskopf_wigner_limit() {
    TwoLevelParams p;
    const double gamma = 0.01;
    p.model.omega0 = 1.5e6;
    p.omega10 = p.model.omega0 + 100.0 * gamma;
    p.model = with_rate(p.model, gamma, p.omega10);
    const double lifetime = units::kHbar / gamma;
    const auto times = TimeGrid::with_steps(0.0, 3.0 * lifetime, 600);
    const auto res = excited_amplitude(times, p);
    double worst = 0.0;
    for (std::size_t n = 0; n < times.size(); ++n) {
        const double ww = std::exp(-gamma_of_omega(p.omega10, p) * times[n] / units::kHbar);
        worst = std::max(worst, std::abs(std::norm(res.u1[n]) - ww) / ww);
    }
    record(8, "weisskopf-wigner-limit", worst <= kWeisskopfWigner,
           fmt("detuning 100 gamma, 3 lifetimes: max relative deviation %.2e (tol %.2f)", worst, kWeisskopfWigner));
}

void bound_polariton() {
    const auto r = run("scenario = bound-state\n");
    collect_norms(r);
    const double avg = result(r, "late_average_abs2_u1");
    const double z2 = result(r, "plateau");
    const int maxima = r.results.at("local_maxima").get<int>();
    record(9, "bound-polariton-plateau", std::abs(avg - z2) <= kPlateau && maxima >= kMinMaxima,
           fmt("plateau %.5f vs Z^2 %.5f (|diff| %.1e, tol %.0e), %d maxima (>= %d)", avg, z2, std::abs(avg - z2),
               kPlateau, maxima, kMinMaxima));
}

void conservation() {
    record(10, "norm-conservation", worst_unitarity <= kUnitarity && leaky_monotone,
           fmt("lossless max deficit %.2e (tol %.0e); lossy runs nonincreasing: %s", worst_unitarity, kUnitarity,
               leaky_monotone ? "yes" : "no"));
}

void localization() {
    const auto r = run("scenario = field-movie\n");
    const double vg = result(r, "group_velocity_um_per_ps");
    const auto& freef = r.results.at("free");
    const auto& coupled = r.results.at("coupled");
    const double floor = freef.at("min_origin_density_over_t0").get<double>();
    const double speed = freef.at("speed_over_group_velocity").get<double>();
    const bool pass = floor >= kFloorFraction && std::abs(speed - 1.0) <= kSpeedTolerance;
    record(11, "photon-localization", pass,
           fmt("free evolution after T0: origin floor %.3f of T0 (>= %.2f), front speed %.3f v_g (1 +- %.1f)", floor,
               kFloorFraction, speed, kSpeedTolerance));
    std::printf("                  diagnostic, emitter still coupled: origin floor %.3f, front speed %.3f v_g "
                "(v_g = %.4f um/ps)\n",
                coupled.at("min_origin_density_over_t0").get<double>(),
                coupled.at("speed_over_group_velocity").get<double>(), vg);
}

} // namespace

int main(int argc, char** argv) {
    const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
    table_fidelities();
    const auto sends = send_roundtrips();
    receive_roundtrips();
    markov_regime();
    markov_signature(sends);
    self_energy_oracle();
    cross_validation();
    weisskopf_wigner_limit();
    bound_polariton();
    conservation();
    localization();

    const auto failed = std::count_if(lines.begin(), lines.end(), [](const Line& l) { return !l.pass; });
    std::printf("acceptance: %zu criteria evaluated, %zu passed, %zu failed\n", lines.size(),
                lines.size() - static_cast<std::size_t>(failed), static_cast<std::size_t>(failed));
    return strict ? static_cast<int>(failed) : 0;
}
