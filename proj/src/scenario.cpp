#include "wgqed/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <thread>

#include "wgqed/dynamics.hpp"
#include "wgqed/emission.hpp"
#include "wgqed/errors.hpp"
#include "wgqed/pulse_design.hpp"

namespace wgqed {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using units::kHbar;

constexpr const char* kSummaryName = "summary.json";

// Files a run may write; stale copies are removed before a run writes new ones.
const std::vector<std::string> kOutputNames = {"pulse.csv",    "populations.csv", "spectrum.csv", "table1.csv",
                                               "decay.csv",    "self_energy.csv", "field.csv",    "field_coupled.csv",
                                               kSummaryName,   kManifestName};

// What a scenario computation hands back before anything is written.
struct Outcome {
    json results = json::object();
    std::vector<Check> checks;
    std::vector<std::pair<std::string, CsvTable>> tables;  // name -> table, in output order
    bool decimate{true};
    std::string headline_name;
    double headline{0.0};
    double headline_tolerance{0.0};
    bool headline_relative{false};
};

std::vector<double> real_parts(const std::vector<cplx>& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].real();
    return out;
}
std::vector<double> imag_parts(const std::vector<cplx>& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].imag();
    return out;
}
std::vector<double> moduli(const std::vector<cplx>& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::abs(v[i]);
    return out;
}
double max_of(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}
std::string fmt_floor(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}
bool nonincreasing_norm(const std::vector<double>& deficit) {
    for (std::size_t n = 1; n < deficit.size(); ++n) {
        if (deficit[n] < deficit[n - 1] - 1e-12) return false;
    }
    return true;
}

ThreeLevelNode node_for(const ScenarioConfig& c) {
    ThreeLevelNode node;
    node.eps32 = c.omega0 + c.detuning;
    node.model.omega0 = c.omega0;
    node.model = with_rate(node.model, c.effective_gamma(), node.eps32);
    return node;
}

// Grids for a node; factor 2 doubles dt and dk (half resolution).
DesignGrids grids_for(const ScenarioConfig& c, double sigma0, ThreeLevelNode& node, double length, int factor) {
    DesignGridOptions o;
    o.cover_sigmas = c.cover_sigmas;
    o.min_cover = c.min_cover;
    o.recurrence_factor = c.recurrence;
    o.half_window = c.half_window;
    o.dt = c.dt;
    o.length = length;
    auto g = suggest_grids(node.eps32, sigma0, node, o);
    if (factor > 1) {
        o.dt = g.propagation.dt() * factor;
        o.recurrence_factor = c.recurrence / factor;
        g = suggest_grids(node.eps32, sigma0, node, o);
    }
    node.level_shift = truncation_shift(node.model, g.kgrid.k_cutoff(), node.eps32);
    return g;
}

json grid_json(const DesignGrids& g) {
    return {{"k_points", g.kgrid.size()},
            {"dk_per_um", g.kgrid.dk()},
            {"k_max_per_um", g.kgrid.k_max()},
            {"t_start_ps", g.propagation.t_start()},
            {"t_end_ps", g.propagation.t_end()},
            {"propagation_steps", g.propagation.steps()},
            {"propagation_dt_ps", g.propagation.dt()}};
}

CsvTable population_table(const Trajectory& tr) {
    const auto pop = population_traces(tr);
    CsvTable t;
    t.add("t_ps", tr.times.values());
    t.add("P_ground", pop.ground);
    t.add("P_excited", pop.excited);
    t.add("P_continuum", pop.continuum);
    t.add("norm_deficit", tr.norm_deficit);
    return t;
}

// ---------------------------------------------------------------- sending / receiving

Outcome run_send_design(const ScenarioConfig& c, int factor) {
    auto node = node_for(c);
    const auto g = grids_for(c, c.sigma0, node, 0.0, factor);
    const auto target = sech_wavepacket(node.eps32, c.sigma0, g.kgrid, node.model);
    const auto exact = design_sending_pulse(target, node, g.design, g.kgrid);
    const auto markov = design_markovian(target, node, g.design);

    Outcome out;
    out.results["omega1_meV"] = node.eps32;
    out.results["gamma_meV"] = c.effective_gamma();
    out.results["level_shift_meV"] = node.level_shift;
    out.results["grid"] = grid_json(g);
    out.results["max_abs_omega_meV"] = exact.pulse.max_abs();
    out.results["max_abs_omega_markov_meV"] = markov.pulse.max_abs();
    out.results["relative_l2_distance"] = relative_l2_distance(exact.pulse, markov.pulse);
    json floors;
    for (double floor : {0.3, 0.1, 0.03}) {
        double num = 0.0, den = 0.0;
        for (std::size_t n = 0; n < exact.c1.size(); ++n) {
            if (std::abs(exact.c1[n]) < floor) continue;
            num += std::norm(exact.pulse.omega_t[n] - markov.pulse.omega_t[n]);
            den += std::norm(exact.pulse.omega_t[n]);
        }
        floors[fmt_floor(floor)] = den > 0.0 ? std::sqrt(num / den) : 0.0;
    }
    out.results["relative_l2_distance_where_abs_c1_at_least"] = floors;
    out.results["max_norm_error"] = exact.max_norm_error;
    out.results["end_overlap"] = exact.continuum.end_overlap;
    out.results["abs_c1_end"] = std::abs(exact.c1.back());
    out.checks.push_back({"design_norm_error", exact.max_norm_error, 1e-6, true});
    out.checks.push_back({"design_end_overlap", exact.continuum.end_overlap, 0.999, false});

    CsvTable t;
    t.add("t_ps", g.design.values());
    t.add("re_Omega_meV", real_parts(exact.pulse.omega_t));
    t.add("im_Omega_meV", imag_parts(exact.pulse.omega_t));
    t.add("re_Omega_markov_meV", real_parts(markov.pulse.omega_t));
    t.add("im_Omega_markov_meV", imag_parts(markov.pulse.omega_t));
    t.add("abs_C1", moduli(exact.c1));
    t.add("abs_C3", moduli(exact.c3));
    t.add("abs_C3_markov", moduli(markov.c3));
    out.tables.emplace_back("pulse.csv", std::move(t));

    out.headline_name = "max_abs_omega_meV";
    out.headline = exact.pulse.max_abs();
    out.headline_tolerance = 1e-3;
    out.headline_relative = true;
    return out;
}

Outcome run_send_roundtrip(const ScenarioConfig& c, int factor) {
    auto node = node_for(c);
    const auto g = grids_for(c, c.sigma0, node, 0.0, factor);
    const auto target = sech_wavepacket(node.eps32, c.sigma0, g.kgrid, node.model);
    const auto exact = design_sending_pulse(target, node, g.design, g.kgrid);
    const auto markov = design_markovian(target, node, g.design);
    const auto tr = propagate_sending(exact.pulse, node, g.kgrid, g.propagation, c.leak_rate);
    const auto tm = propagate_sending(markov.pulse, node, g.kgrid, g.propagation, c.leak_rate);

    const double fidelity = sending_fidelity(tr, target);
    Outcome out;
    out.results["omega1_meV"] = node.eps32;
    out.results["gamma_meV"] = c.effective_gamma();
    out.results["leak_rate_meV"] = c.leak_rate;
    out.results["grid"] = grid_json(g);
    out.results["fidelity"] = fidelity;
    out.results["fidelity_markov_pulse"] = sending_fidelity(tm, target);
    out.results["max_abs_im_f_out"] = max_of(imag_parts(tr.final_field));
    out.results["max_abs_im_f_out_markov_pulse"] = max_of(imag_parts(tm.final_field));
    out.results["max_abs_f_out_markov_pulse"] = max_of(moduli(tm.final_field));
    out.results["max_norm_deficit"] = max_of(tr.norm_deficit);
    out.results["p_ground_end"] = std::norm(tr.a1.back());
    if (c.leak_rate == 0.0) {
        out.checks.push_back({"norm_conservation", max_of(tr.norm_deficit), 1e-6, true});
        out.checks.push_back({"fidelity", fidelity, 0.995, false});
    } else {
        out.checks.push_back({"norm_nonincreasing", nonincreasing_norm(tr.norm_deficit) ? 1.0 : 0.0, 1.0, false});
    }
    out.tables.emplace_back("populations.csv", population_table(tr));

    CsvTable s;
    std::vector<double> k = g.kgrid.values(), w(k.size());
    for (std::size_t j = 0; j < k.size(); ++j) w[j] = omega_of_k(k[j], node.model) - node.model.omega0;
    s.add("k_per_um", k);
    s.add("omega_minus_omega0_meV", w);
    s.add("re_F_target_um^1/2", real_parts(target.amplitudes));
    s.add("im_F_target_um^1/2", imag_parts(target.amplitudes));
    s.add("re_F_out_um^1/2", real_parts(tr.final_field));
    s.add("im_F_out_um^1/2", imag_parts(tr.final_field));
    s.add("re_F_out_markov_um^1/2", real_parts(tm.final_field));
    s.add("im_F_out_markov_um^1/2", imag_parts(tm.final_field));
    out.tables.emplace_back("spectrum.csv", std::move(s));

    out.headline_name = "fidelity";
    out.headline = fidelity;
    out.headline_tolerance = 1e-3;
    return out;
}

Outcome run_receive_roundtrip(const ScenarioConfig& c, int factor) {
    auto node = node_for(c);
    const auto g = grids_for(c, c.sigma0, node, c.length, factor);
    const auto incoming = sech_wavepacket(node.eps32, c.sigma0, g.kgrid, node.model);
    const auto design = design_receiving_pulse(incoming, node, c.length, g.design);
    const auto tr = propagate_receiving(design.pulse, incoming, node, c.length, g.propagation, c.leak_rate);
    const double absorbed = std::norm(tr.a1.back());

    Outcome out;
    out.results["omega1_meV"] = node.eps32;
    out.results["gamma_meV"] = c.effective_gamma();
    out.results["length_um"] = c.length;
    out.results["arrival_time_ps"] = design.arrival_time;
    out.results["grid"] = grid_json(g);
    out.results["absorbed_population"] = absorbed;
    out.results["designed_absorption"] = std::norm(design.c1.back());
    out.results["max_norm_deficit"] = max_of(tr.norm_deficit);
    if (c.leak_rate == 0.0) {
        out.checks.push_back({"absorbed_population", absorbed, 0.99, false});
        out.checks.push_back({"norm_conservation", max_of(tr.norm_deficit), 1e-6, true});
    } else {
        out.checks.push_back({"norm_nonincreasing", nonincreasing_norm(tr.norm_deficit) ? 1.0 : 0.0, 1.0, false});
    }

    CsvTable p;
    p.add("t_ps", g.design.values());
    p.add("re_Omega_meV", real_parts(design.pulse.omega_t));
    p.add("im_Omega_meV", imag_parts(design.pulse.omega_t));
    p.add("abs_D1", moduli(design.c1));
    p.add("abs_D3", moduli(design.c3));
    out.tables.emplace_back("pulse.csv", std::move(p));
    out.tables.emplace_back("populations.csv", population_table(tr));

    out.headline_name = "absorbed_population";
    out.headline = absorbed;
    out.headline_tolerance = 1e-3;
    return out;
}

Outcome run_table1(const ScenarioConfig& c, int factor) {
    const std::vector<double> sigmas = {0.08, 0.008};
    const std::vector<double> fractions = {0.01, 0.06};
    const double gamma = c.effective_gamma();
    CsvTable t;
    std::vector<double> col_sigma, col_frac, col_leak, col_fid, col_loss;
    Outcome out;
    json cells = json::array();
    double headline = 0.0;
    for (double sigma : sigmas) {
        auto node = node_for(c);
        const auto g = grids_for(c, sigma, node, 0.0, factor);
        const auto target = sech_wavepacket(node.eps32, sigma, g.kgrid, node.model);
        const auto design = design_sending_pulse(target, node, g.design, g.kgrid);
        for (double frac : fractions) {
            const auto tr = propagate_sending(design.pulse, node, g.kgrid, g.propagation, frac * gamma);
            const double fid = sending_fidelity(tr, target);
            col_sigma.push_back(sigma);
            col_frac.push_back(frac);
            col_leak.push_back(frac * gamma);
            col_fid.push_back(fid);
            col_loss.push_back(tr.norm_deficit.back());
            cells.push_back({{"sigma0_meV", sigma}, {"leak_fraction", frac}, {"leak_rate_meV", frac * gamma},
                             {"fidelity", fid}, {"photon_loss", tr.norm_deficit.back()}});
            out.checks.push_back({"norm_nonincreasing_sigma" + std::to_string(sigma).substr(0, 5) + "_leak" +
                                      std::to_string(static_cast<int>(std::lround(frac * 100))) + "pct",
                                  nonincreasing_norm(tr.norm_deficit) ? 1.0 : 0.0, 1.0, false});
            headline += fid;
        }
    }
    out.results["gamma_meV"] = gamma;
    out.results["cells"] = cells;
    t.add("sigma0_meV", col_sigma);
    t.add("leak_fraction", col_frac);
    t.add("leak_rate_meV", col_leak);
    t.add("fidelity", col_fid);
    t.add("photon_loss", col_loss);
    out.tables.emplace_back("table1.csv", std::move(t));
    out.decimate = false;
    out.headline_name = "mean_fidelity";
    out.headline = headline / 4.0;
    out.headline_tolerance = 1e-3;
    return out;
}

// ---------------------------------------------------------------- emission

TwoLevelParams emitter_for(const ScenarioConfig& c) {
    TwoLevelParams p;
    p.omega10 = c.omega0 + c.detuning;
    p.model.omega0 = c.omega0;
    p.model = with_rate(p.model, c.effective_gamma(), p.omega10);
    return p;
}

// Emission grids with the step count a multiple of the Green's-function sample count.
EmissionGrids emission_grids_for(const ScenarioConfig& c, const TwoLevelParams& p, double t_end, std::size_t samples,
                                 int factor) {
    auto g = suggest_emission_grids(p, t_end, c.band_cover);
    if (c.dt > 0.0) g.times = TimeGrid::fitting(0.0, t_end, c.dt);
    std::size_t steps = g.times.steps() / static_cast<std::size_t>(factor);
    steps = (steps + samples - 1) / samples * samples;
    g.times = TimeGrid::with_steps(0.0, t_end, steps);
    if (factor > 1) g.kgrid = KGrid::covering(g.kgrid.k_max(), g.kgrid.dk() * factor);
    return g;
}

CsvTable self_energy_table(const TwoLevelParams& p, double detuning) {
    std::vector<double> offsets;
    const double span = std::max(std::abs(detuning), 1.0);
    for (int i = -1000; i <= 1000; ++i) {
        const double x = span * (i < 0 ? 3.0 : 5.0) * (i + 0.5) / 1000.0;
        offsets.push_back(x);
    }
    std::vector<double> gamma, delta, u;
    for (double x : offsets) {
        const double w = p.model.omega0 + x;
        gamma.push_back(gamma_of_omega(w, p));
        delta.push_back(delta_closed_form(w, p));
        u.push_back(spectral_function(w, p));
    }
    CsvTable t;
    t.add("omega_minus_omega0_meV", offsets);
    t.add("Gamma_meV", gamma);
    t.add("Delta_meV", delta);
    t.add("U_per_meV", u);
    return t;
}

Outcome run_emission(const ScenarioConfig& c, int factor, bool bound) {
    const auto p = emitter_for(c);
    const double gamma = c.effective_gamma();
    const double t_end = c.t_end > 0.0 ? c.t_end : (bound ? 50.0 * kHbar / gamma : 10.0);
    const auto samples = static_cast<std::size_t>(c.samples) / static_cast<std::size_t>(factor);
    const auto g = emission_grids_for(c, p, t_end, samples, factor);
    const auto green_times = TimeGrid::with_steps(0.0, t_end, samples);
    const auto green = excited_amplitude(green_times, p);
    const auto tr = propagate_two_level(p, g.times, g.kgrid);
    const std::size_t stride = g.times.steps() / samples;

    std::vector<double> t = green_times.values(), green_pop, direct_pop, ww_pop, leak_pop;
    double worst = 0.0;
    for (std::size_t m = 0; m < t.size(); ++m) {
        green_pop.push_back(std::norm(green.u1[m]));
        direct_pop.push_back(std::norm(tr.c1[m * stride]));
        ww_pop.push_back(std::norm(weisskopf_wigner(t[m], p)));
        worst = std::max(worst, std::abs(tr.c1[m * stride] - green.u1[m]));
    }
    Outcome out;
    out.results["omega10_meV"] = p.omega10;
    out.results["gamma_meV"] = gamma;
    out.results["edge_strength_meV^3/2"] = p.edge_strength();
    out.results["t_end_ps"] = t_end;
    out.results["k_points"] = g.kgrid.size();
    out.results["dk_per_um"] = g.kgrid.dk();
    out.results["propagation_steps"] = g.times.steps();
    out.results["sum_rule"] = green.sum_rule();
    out.results["max_abs_u1_minus_c1"] = worst;
    out.results["max_norm_deficit"] = max_of(tr.norm_deficit);
    out.results["abs2_u1_end"] = green_pop.back();
    if (green.bound) {
        out.results["omega_b_meV"] = green.bound->omega_b;
        out.results["omega_b_minus_omega0_meV"] = green.bound->omega_b - p.model.omega0;
        out.results["Z"] = green.bound->residue;
    } else {
        out.results["omega_b_meV"] = nullptr;
        out.results["Z"] = 0.0;
    }
    out.results["plateau"] = green.plateau;
    out.checks.push_back({"sum_rule_error", std::abs(green.sum_rule() - 1.0), 1e-3, true});
    out.checks.push_back({"green_vs_direct", worst, 1e-3, true});
    out.checks.push_back({"norm_conservation", max_of(tr.norm_deficit), 1e-6, true});

    CsvTable d;
    d.add("t_ps", t);
    d.add("abs2_U1", green_pop);
    d.add("re_U1", real_parts(green.u1));
    d.add("im_U1", imag_parts(green.u1));
    d.add("abs2_C1_direct", direct_pop);
    d.add("abs2_WW", ww_pop);
    if (c.leak_rate > 0.0) {
        auto lossy = p;
        lossy.leak_rate = c.leak_rate;
        const auto tl = propagate_two_level(lossy, g.times, g.kgrid);
        for (std::size_t m = 0; m < t.size(); ++m) leak_pop.push_back(std::norm(tl.c1[m * stride]));
        d.add("abs2_C1_leak", leak_pop);
        out.results["abs2_c1_leak_end"] = leak_pop.back();
        out.checks.push_back({"norm_nonincreasing_leak", nonincreasing_norm(tl.norm_deficit) ? 1.0 : 0.0, 1.0, false});
    }

    if (bound) {
        double avg = 0.0;
        int count = 0, maxima = 0;
        for (std::size_t m = 0; m < t.size(); ++m) {
            if (t[m] >= 0.8 * t_end) {
                avg += green_pop[m];
                ++count;
            }
            if (m > 0 && m + 1 < t.size() && green_pop[m] > green_pop[m - 1] && green_pop[m] > green_pop[m + 1]) ++maxima;
        }
        avg /= std::max(count, 1);
        out.results["late_average_abs2_u1"] = avg;
        out.results["local_maxima"] = maxima;
        out.checks.push_back({"plateau_vs_Z2", std::abs(avg - green.plateau), 1e-2, true});
        out.headline_name = "late_average_abs2_c1_direct";
        double direct_avg = 0.0;
        for (std::size_t m = 0; m < t.size(); ++m) {
            if (t[m] >= 0.8 * t_end) direct_avg += direct_pop[m];
        }
        out.headline = direct_avg / std::max(count, 1);
        out.headline_tolerance = 1e-3;
    } else {
        out.headline_name = "abs2_c1_direct_end";
        out.headline = direct_pop.back();
        out.headline_tolerance = 1e-3;
    }
    out.tables.emplace_back("decay.csv", std::move(d));
    out.tables.emplace_back("self_energy.csv", self_energy_table(p, c.detuning));
    return out;
}

Outcome run_field_movie(const ScenarioConfig& c, int factor) {
    const auto p = emitter_for(c);
    const std::size_t frames = static_cast<std::size_t>(c.frames);
    const double t_last = c.t0 + c.frame_step * static_cast<double>(frames - 1);
    // step count divisible by the frame spacing so that coupled snapshots land on frame times
    auto g = suggest_emission_grids(p, t_last, c.band_cover);
    if (c.dt > 0.0) g.times = TimeGrid::fitting(0.0, t_last, c.dt);
    if (factor > 1) g.kgrid = KGrid::covering(g.kgrid.k_max(), g.kgrid.dk() * factor);
    const double per_frame = static_cast<double>(g.times.steps()) / static_cast<double>(factor) * c.frame_step / t_last;
    const auto frame_steps = static_cast<std::size_t>(std::ceil(per_frame));
    const double t0_steps = c.t0 / c.frame_step * static_cast<double>(frame_steps);
    if (std::abs(t0_steps - std::round(t0_steps)) > 1e-9) {
        throw ConfigError("config: t0 must be a whole multiple of frame_step");
    }
    const auto first = static_cast<std::size_t>(std::lround(t0_steps));
    g.times = TimeGrid::with_steps(0.0, t_last, first + frame_steps * (frames - 1));
    TwoLevelOptions opt;
    opt.snapshot_stride = frame_steps;
    auto lossy = p;
    lossy.leak_rate = c.leak_rate;
    const auto tr = propagate_two_level(lossy, g.times, g.kgrid, opt);

    const double dx = c.dx > 0.0 ? c.dx : 0.5 * units::kPi / g.kgrid.k_max();
    std::vector<double> xs;
    for (std::size_t i = 0;; ++i) {
        const double x = c.x_min + dx * static_cast<double>(i);
        if (x > c.x_max) break;
        xs.push_back(x);
    }
    std::vector<double> times;
    for (std::size_t f = 0; f < frames; ++f) times.push_back(c.t0 + c.frame_step * static_cast<double>(f));
    // C0(k, T0) from the stored history
    const auto t0_index = std::find(tr.snapshot_steps.begin(), tr.snapshot_steps.end(), first);
    if (t0_index == tr.snapshot_steps.end()) throw NumericalError("field-movie: T0 is not on the snapshot grid");
    const auto& c0_t0 = tr.snapshots[static_cast<std::size_t>(t0_index - tr.snapshot_steps.begin())];
    const auto free_frames = field_snapshots(make_wavepacket(g.kgrid, c0_t0), times, xs, p);
    std::vector<FieldSnapshot> coupled;
    for (const auto& s : coupled_field_snapshots(tr, xs, p)) {
        if (s.t >= c.t0 - 1e-9) coupled.push_back(s);
    }

    const auto free_motion = track_field(free_frames);
    const auto coupled_motion = track_field(coupled);
    const double vg = group_velocity(p.omega10, p.model);

    Outcome out;
    out.decimate = false;
    out.results["omega10_meV"] = p.omega10;
    out.results["gamma_meV"] = c.effective_gamma();
    out.results["t0_ps"] = c.t0;
    out.results["k_points"] = g.kgrid.size();
    out.results["dx_um"] = dx;
    out.results["group_velocity_um_per_ps"] = vg;
    auto motion_json = [&](const FieldMotion& m) {
        json j;
        j["t_ps"] = m.t;
        j["origin_density_per_um"] = m.origin_density;
        j["front_um"] = m.front;
        j["front_speed_um_per_ps"] = m.speed;
        j["speed_over_group_velocity"] = m.speed / vg;
        double floor = 1e300;
        for (double d : m.origin_density) floor = std::min(floor, d);
        j["min_origin_density_over_t0"] = m.origin_density.empty() ? 0.0 : floor / m.origin_density.front();
        return j;
    };
    out.results["free"] = motion_json(free_motion);
    out.results["coupled"] = motion_json(coupled_motion);
    double max_norm = 0.0;
    for (const auto& s : free_frames) max_norm = std::max(max_norm, s.norm());
    out.results["max_snapshot_norm"] = max_norm;
    out.checks.push_back({"snapshot_norm", max_norm, 1.0 + 1e-6, true});

    const auto movie = [&](const std::vector<FieldSnapshot>& snaps) {
        CsvTable t;
        std::vector<double> ct, cx, re, im, dens;
        for (const auto& s : snaps) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                ct.push_back(s.t);
                cx.push_back(s.x[i]);
                re.push_back(s.f[i].real());
                im.push_back(s.f[i].imag());
                dens.push_back(std::norm(s.f[i]));
            }
        }
        t.add("t_ps", ct);
        t.add("x_um", cx);
        t.add("re_f_um^-1/2", re);
        t.add("im_f_um^-1/2", im);
        t.add("abs2_f_per_um", dens);
        return t;
    };
    out.tables.emplace_back("field.csv", movie(free_frames));
    out.tables.emplace_back("field_coupled.csv", movie(coupled));

    out.headline_name = "origin_density_t0_per_um";
    out.headline = free_motion.origin_density.front();
    out.headline_tolerance = 1e-2;
    out.headline_relative = true;
    return out;
}

Outcome compute(const ScenarioConfig& c, int factor) {
    switch (c.scenario) {
    case Scenario::send_design: return run_send_design(c, factor);
    case Scenario::send_roundtrip: return run_send_roundtrip(c, factor);
    case Scenario::receive_roundtrip: return run_receive_roundtrip(c, factor);
    case Scenario::table1: return run_table1(c, factor);
    case Scenario::emission_decay: return run_emission(c, factor, false);
    case Scenario::bound_state: return run_emission(c, factor, true);
    case Scenario::field_movie: return run_field_movie(c, factor);
    }
    throw ConfigError("unknown scenario");
}

json provenance(const ScenarioConfig& c) {
    json sources = json::object();
    for (const auto& [key, value] : resolved_values(c)) {
        const auto it = c.origin.find(key);
        sources[key] = it == c.origin.end() ? "default" : (it->second > 0 ? "config line " + std::to_string(it->second)
                                                                            : "override");
    }
    json defaults = {
        {"omega0", "waveguide cut-off 1.5 eV"},
        {"detuning", "emitter 1 meV above the cut-off"},
        {"gamma", "0.27 meV waveguide emission rate at 1 meV detuning (75 Debye); 4.37 meV for bound-state and "
                  "field-movie (300 Debye)"},
        {"sigma0", "0.08 meV broadband packet; 0.008 meV narrowband alternative"},
        {"leak_rate", "no free-space leakage; table1 uses 1% and 6% of gamma"},
        {"length", "1 um between sending and receiving node"},
        {"t0", "emission window ends at 10 ps"},
    };
    return {{"generator", std::string("wgqed ") + kVersion},
            {"units", {{"energy", "meV"}, {"time", "ps"}, {"length", "um"}, {"hbar_meV_ps", kHbar}}},
            {"parameter_sources", sources},
            {"canonical_defaults", defaults}};
}

json checks_json(const std::vector<Check>& checks) {
    json arr = json::array();
    for (const auto& ch : checks) {
        arr.push_back({{"name", ch.name},
                       {"value", ch.value},
                       {"limit", ch.limit},
                       {"kind", ch.upper ? "max" : "min"},
                       {"passed", ch.passed()}});
    }
    return arr;
}

} // namespace

bool RunReport::passed() const {
    for (const auto& c : checks) {
        if (!c.passed()) return false;
    }
    return convergence.converged;
}

int exit_code(const RunReport& report) { return report.passed() ? 0 : 3; }

RunReport run_scenario(const ScenarioConfig& config, const RunOptions& options) {
    validate(config);
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = compute(config, 1);
    } catch (const NumericalError& e) {
        throw NumericalError(std::string(scenario_name(config.scenario)) + ": " + e.what());
    }

    RunReport report;
    report.scenario = config.scenario;
    report.parameters = resolved_values(config);
    report.results = out.results;
    report.checks = out.checks;
    if (options.half_res_check) {
        const Outcome half = compute(config, 2);
        auto& cv = report.convergence;
        cv.performed = true;
        cv.quantity = out.headline_name;
        cv.full = out.headline;
        cv.half = half.headline;
        cv.tolerance = out.headline_tolerance;
        const double change = std::abs(cv.half - cv.full) / (out.headline_relative ? std::abs(cv.full) : 1.0);
        cv.converged = change <= cv.tolerance;
    }

    const auto format = options.format.value_or(config.format);
    if (options.write_files) {
        const fs::path& dir = options.out_dir;
        fs::create_directories(dir);
        for (const auto& name : kOutputNames) fs::remove(dir / name);
        std::vector<ManifestEntry> data_files;
        if (format != OutputFormat::json) {
            for (const auto& [name, table] : out.tables) {
                const auto text =
                    to_csv(out.decimate ? decimate(table, static_cast<std::size_t>(config.max_rows)) : table);
                write_file(dir, name, text);
                data_files.push_back({name, sha256_hex(text), text.size()});
            }
        }
        if (format != OutputFormat::csv) {
            json summary;
            summary["schema_version"] = kSchemaVersion;
            summary["scenario"] = std::string(scenario_name(config.scenario));
            summary["parameters"] = report.parameters;
            summary["results"] = report.results;
            summary["checks"] = checks_json(report.checks);
            if (report.convergence.performed) {
                const auto& cv = report.convergence;
                summary["convergence"] = {{"quantity", cv.quantity}, {"full", cv.full},     {"half", cv.half},
                                          {"tolerance", cv.tolerance}, {"converged", cv.converged}};
            } else {
                summary["convergence"] = nullptr;
            }
            json files = json::array();
            for (const auto& f : data_files) files.push_back({{"file", f.file}, {"sha256", f.sha256}, {"bytes", f.bytes}});
            summary["files"] = files;
            summary["provenance"] = provenance(config);
            write_file(dir, kSummaryName, summary.dump(2) + "\n");
        }
        report.manifest = scan_directory(dir, kManifestName);
        write_file(dir, kManifestName, manifest_text(report.manifest));
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::vector<SweepCell> run_sweep(const ScenarioConfig& base, const std::string& key,
                                 const std::vector<std::string>& values, const RunOptions& options,
                                 std::size_t workers) {
    const auto keys = numeric_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        throw ConfigError("sweep: '" + key + "' is not a numeric key");
    }
    std::vector<SweepCell> cells(values.size());
    std::vector<ScenarioConfig> configs(values.size(), base);
    for (std::size_t i = 0; i < values.size(); ++i) {
        cells[i].value = values[i];
        try {
            set_value(configs[i], key, values[i]);
            validate(configs[i]);
        } catch (const ConfigError& e) {
            cells[i].error = e.what();
            cells[i].exit_code = 2;
        }
    }
    if (values.empty()) return cells;
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, values.size());

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < values.size(); i = next++) {
            auto& cell = cells[i];
            if (cell.exit_code == 2) continue;
            RunOptions o = options;
            o.out_dir = options.out_dir / (key + "=" + values[i]);
            try {
                cell.report = run_scenario(configs[i], o);
                cell.exit_code = exit_code(*cell.report);
            } catch (const ConfigError& e) {
                cell.error = e.what();
                cell.exit_code = 2;
            } catch (const DomainError& e) {
                cell.error = e.what();
                cell.exit_code = 2;
            } catch (const std::exception& e) {
                cell.error = e.what();
                cell.exit_code = 3;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return cells;
}

json sweep_summary(const std::string& key, const std::vector<SweepCell>& cells) {
    json out;
    out["schema_version"] = kSchemaVersion;
    out["parameter"] = key;
    json arr = json::array();
    for (const auto& c : cells) {
        json j;
        j["value"] = c.value;
        j["exit_code"] = c.exit_code;
        if (c.report) {
            j["results"] = c.report->results;
            j["checks"] = checks_json(c.report->checks);
        } else {
            j["error"] = c.error;
        }
        arr.push_back(j);
    }
    out["cells"] = arr;
    return out;
}

} // namespace wgqed
