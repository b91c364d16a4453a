// wgqed: run canonical waveguide-QED scenarios from a config file
//
//   wgqed run   --config <file> --out <dir> [--format csv|json|both] [--half-res-check]
//   wgqed sweep --config <file> --param <key> --values v1,v2,... [--out <dir>] [--workers n]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical or tolerance failure.

#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "wgqed/errors.hpp"
#include "wgqed/scenario.hpp"

namespace {

constexpr int kConfigFailure = 2;
constexpr int kNumericFailure = 3;

std::vector<std::string> split_values(const std::string& list) {
    std::vector<std::string> out;
    std::stringstream in(list);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) throw wgqed::ConfigError("sweep: empty entry in --values");
        out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

void print_report(const wgqed::RunReport& report) {
    std::printf("scenario %s\n", std::string(wgqed::scenario_name(report.scenario)).c_str());
    for (const auto& c : report.checks) {
        std::printf("  %-4s %s = %.6g (%s %.3g)\n", c.passed() ? "ok" : "FAIL", c.name.c_str(), c.value,
                    c.upper ? "<=" : ">=", c.limit);
    }
    if (report.convergence.performed) {
        const auto& cv = report.convergence;
        std::printf("  %-4s half-resolution %s: %.10g vs %.10g (tol %.3g)\n", cv.converged ? "ok" : "FAIL",
                    cv.quantity.c_str(), cv.full, cv.half, cv.tolerance);
    }
    std::printf("  %zu files, wall %.3f s\n", report.manifest.size(), report.wall_seconds);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"waveguide-QED scenario runner"};
    app.set_version_flag("--version", std::string(wgqed::kVersion));
    app.require_subcommand(1);

    std::string config_path, out_dir, format, param, values;
    bool half_res = false;
    std::size_t workers = 0;

    auto* run = app.add_subcommand("run", "run one scenario");
    run->add_option("--config", config_path, "scenario config file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "output directory")->required();
    run->add_option("--format", format, "csv, json or both (overrides the config)")
        ->check(CLI::IsMember({"csv", "json", "both"}));
    run->add_flag("--half-res-check", half_res, "rerun with doubled steps and compare the headline number");

    auto* sweep = app.add_subcommand("sweep", "run a scenario over a list of values of one key");
    sweep->add_option("--config", config_path, "scenario config file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--param", param, "numeric key to vary")->required();
    sweep->add_option("--values", values, "comma-separated values")->required();
    sweep->add_option("--out", out_dir, "output directory")->default_val("sweep");
    sweep->add_option("--workers", workers, "parallel runs (0: from config, else hardware threads)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigFailure;
    }

    try {
        const auto config = wgqed::load_config(config_path);
        wgqed::RunOptions options;
        options.out_dir = out_dir;
        options.half_res_check = half_res;
        if (!format.empty()) options.format = wgqed::parse_format(format);

        if (*run) {
            const auto report = wgqed::run_scenario(config, options);
            print_report(report);
            return wgqed::exit_code(report) == 0 ? 0 : kNumericFailure;
        }

        if (workers == 0) workers = static_cast<std::size_t>(config.workers);
        const auto cells = wgqed::run_sweep(config, param, split_values(values), options, workers);
        const auto summary = wgqed::sweep_summary(param, cells);
        wgqed::write_file(out_dir, "sweep.json", summary.dump(2) + "\n");
        wgqed::write_file(out_dir, wgqed::kManifestName,
                          wgqed::manifest_text(wgqed::scan_directory(out_dir, wgqed::kManifestName)));
        int worst = 0;
        for (const auto& c : cells) {
            std::printf("%s=%s: ", param.c_str(), c.value.c_str());
            if (c.report) {
                print_report(*c.report);
            } else {
                std::printf("error: %s\n", c.error.c_str());
            }
            worst = std::max(worst, c.exit_code);
        }
        return worst;
    } catch (const wgqed::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigFailure;
    } catch (const wgqed::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumericFailure;
    }
}
