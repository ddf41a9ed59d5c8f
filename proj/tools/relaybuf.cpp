// relaybuf: closed-form performance metrics for energy-buffer-aided
// incremental relaying, cross-validated against an exact Monte Carlo chain.
//
// Exit codes: 0 ok, 1 usage/config error, 2 validation failure,
// 3 numeric failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "relaybuf/experiments.hpp"
#include "relaybuf/limitdist.hpp"
#include "relaybuf/performance.hpp"

namespace {

using namespace relaybuf;

std::vector<PolicyKind> parse_schemes(const std::vector<std::string>& names) {
    std::vector<PolicyKind> out;
    for (const std::string& n : names) out.push_back(policy_from_string(n));
    return out;
}

std::optional<SimSpec> make_sim(std::uint64_t n, std::uint64_t burn,
                                std::uint64_t seed) {
    if (n == 0) return std::nullopt;
    return SimSpec{n, burn, seed};
}

int run_cli(int argc, char** argv) {
    CLI::App app{"energy-buffer relaying performance toolkit"};
    app.require_subcommand(1);

    // --- curve ---
    auto* curve = app.add_subcommand("curve", "sweep a variable and emit CSV/SVG");
    std::string config_path, var_name = "source_snr_db", metric_name = "outage";
    std::string out_dir = ".";
    double from = 10.0, to = 45.0, step = 2.5;
    std::vector<std::string> scheme_names = {"ibep", "iofp", "nibep",
                                             "niofp", "hu", "dt"};
    std::uint64_t sim_n = 0, burn_in = 0, seed = 1;
    bool reproducible = false;
    curve->add_option("--config", config_path, "scenario config JSON")->required();
    curve->add_option("--var", var_name,
                      "source_snr_db|rate_bpcu|d_rd|harvest_mean_db|phi");
    curve->add_option("--from", from, "grid start")->required();
    curve->add_option("--to", to, "grid end")->required();
    curve->add_option("--step", step, "grid step")->required();
    curve->add_option("--schemes", scheme_names, "subset of ibep iofp nibep niofp hu dt")
        ->delimiter(',');
    curve->add_option("--metric", metric_name, "outage|throughput");
    curve->add_option("--sim", sim_n, "slots per point (0 = analytic only)");
    curve->add_option("--burn-in", burn_in, "burn-in slots (0 = auto)");
    curve->add_option("--seed", seed, "simulation seed");
    curve->add_flag("--reproducible", reproducible, "omit the timestamp header");
    curve->add_option("--out", out_dir, "output directory");

    // --- figure ---
    auto* figure = app.add_subcommand("figure", "reproduce a built-in figure");
    std::string fig_name;
    figure->add_option("name", fig_name, "fig2..fig8")->required();
    figure->add_option("--sim", sim_n, "slots per point (0 = analytic only)");
    figure->add_option("--burn-in", burn_in, "burn-in slots (0 = auto)");
    figure->add_option("--seed", seed, "simulation seed");
    figure->add_flag("--reproducible", reproducible, "omit the timestamp header");
    figure->add_option("--out", out_dir, "output directory");

    // --- validate ---
    auto* validate = app.add_subcommand(
        "validate", "run the analytic-vs-simulation invariant suite");
    std::uint64_t validate_n = 1000000;
    validate->add_option("--config", config_path, "scenario config JSON")->required();
    validate->add_option("--sim", validate_n, "slots per scheme");
    validate->add_option("--seed", seed, "simulation seed");

    // --- optimize-rate ---
    auto* opt = app.add_subcommand("optimize-rate",
                                   "grid-search the throughput-optimal target rate");
    double snr_db = 25.0;
    std::string scheme_name = "ibep";
    opt->add_option("--config", config_path, "scenario config JSON")->required();
    opt->add_option("--snr-db", snr_db, "source SNR in dB")->required();
    opt->add_option("--scheme", scheme_name, "ibep|iofp|nibep|niofp|hu|dt")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;  // usage error
    }

    if (curve->parsed()) {
        SweepSpec spec;
        spec.base = load_config_file(config_path);
        spec.variable = sweep_variable_from_string(var_name);
        spec.metric = metric_from_string(metric_name);
        spec.schemes = parse_schemes(scheme_names);
        if (!(step > 0.0) || !(to >= from)) throw ConfigError("bad grid bounds");
        const int n_steps = static_cast<int>(std::floor((to - from) / step + 1e-9));
        for (int i = 0; i <= n_steps; ++i) spec.grid.push_back(from + step * i);
        spec.sim = make_sim(sim_n, burn_in, seed);
        CurveTable table = cmd_curve(spec);
        switch (spec.variable) {
            case SweepVariable::SourceSnrDb: table.x_name = "source_snr_db"; break;
            case SweepVariable::RateBpcu: table.x_name = "rate_bpcu"; break;
            case SweepVariable::DRd: table.x_name = "d_rd"; break;
            case SweepVariable::HarvestMeanDb: table.x_name = "harvest_mean_db"; break;
            case SweepVariable::Phi: table.x_name = "phi"; break;
        }
        namespace fs = std::filesystem;
        fs::create_directories(out_dir);
        const std::string csv = curve_to_csv(table, reproducible);
        const fs::path csv_path = fs::path(out_dir) / "curve.csv";
        const fs::path svg_path = fs::path(out_dir) / "curve.svg";
        std::ofstream(csv_path, std::ios::binary) << csv;
        std::ofstream(svg_path, std::ios::binary)
            << curve_to_svg(table, "curve sweep", spec.metric == Metric::Outage);
        std::cout << csv_path.string() << '\n' << svg_path.string() << '\n';
        for (const CurveRow& row : table.rows)
            for (const CurveCell& cell : row.cells)
                if (!cell.error.empty())
                    std::cerr << "point x=" << row.x << ": " << cell.error << '\n';
        return 0;
    }

    if (figure->parsed()) {
        const FigureResult r =
            cmd_figure(fig_name, out_dir, make_sim(sim_n, burn_in, seed), reproducible);
        for (const std::string& f : r.files_written) std::cout << f << '\n';
        return 0;
    }

    if (validate->parsed()) {
        const SystemParams params = load_config_file(config_path);
        const ValidationReport report = cmd_validate(params, validate_n, seed);
        std::cout << report.to_table();
        return report.all_pass() ? 0 : 2;
    }

    if (opt->parsed()) {
        const SystemParams params = load_config_file(config_path);
        const RateOptimum r =
            optimize_rate(params, policy_from_string(scheme_name), snr_db);
        std::printf("r0_star=%.12g tau_star=%.12g\n", r.r0_star, r.tau_star);
        return 0;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const QuadratureError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
}
