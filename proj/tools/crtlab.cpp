#include <CLI11.hpp>

#include <iostream>

#include "crtlab/error.hpp"
#include "crtlab/experiments.hpp"
#include "crtlab/hyperbolic.hpp"

namespace {

void add_run_options(CLI::App& run, crt::ExperimentConfig& c) {
    run.add_option("-e,--experiment", c.experiment, "Experiment name (see `list`)")->required();
    run.add_option("-m,--model", c.model, "tree | hyperbolic | excursion | loop");
    run.add_option("-s,--seed", c.seed, "Base seed");
    run.add_option("-r,--replicas", c.replicas, "Replicas per size");
    run.add_option("-o,--out", c.out_dir, "Output directory (CRTLAB_OUT overrides)");
    run.add_option("-k", c.k, "Tree degree");
    run.add_option("--sizes", c.sizes, "Walk lengths 2n")->delimiter(',');
    run.add_option("--horizons", c.horizons, "Bridge durations T")->delimiter(',');
    run.add_option("--levels", c.levels, "Dyadic levels of bridge grids");
    run.add_option("--subsample", c.subsample, "Subsample size");
    run.add_option("--eta", c.eta, "Covering radius");
    run.add_option("--cover-threshold", c.cover_threshold, "Covering threshold N");
    run.add_option("--scales", c.scales, "Scaling factors a")->delimiter(',');
    run.add_option("--windows", c.windows, "Time thresholds A")->delimiter(',');
    run.add_option("--radius", c.radius, "Ball radius r");
    run.add_option("--window", c.window, "Rescaled half-window for loop-dx");
    run.add_option("--steps", c.steps, "SDE step sizes")->delimiter(',');
    run.add_option("--sde-horizon", c.sde_horizon, "SDE horizon");
    run.add_option("--grid-points", c.grid_points, "Grid points or steps per side");
    run.add_option("--reference-replicas", c.reference_replicas, "Reference sample size");
    run.add_option("--pairs", c.pairs, "Time pairs per bridge");
    run.add_option("--probes", c.probes, "Probes per geodesic");
    run.add_option("--workers", c.workers, "Worker threads (0: hardware)");
    run.add_option("--time-limit", c.time_limit, "Wall-clock ceiling in seconds");
    run.add_option("--memory-limit", c.memory_limit, "Table memory ceiling in bytes");
    run.add_option("--bootstrap", c.bootstrap, "Bootstrap replicas");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation experiments for random trees, hyperbolic bridges and loops"};
    app.require_subcommand(1);
    // Keys for `run` live in a [run] table; command-line flags override them.
    app.set_config("--config", "", "TOML settings file, given before the subcommand");

    crt::ExperimentConfig config;
    auto* run = app.add_subcommand("run", "Run one experiment and write <out>/<experiment>.{csv,json}");
    add_run_options(*run, config);

    std::string report_path, plot_path;
    auto* plot = app.add_subcommand("plotdata", "Turn a report CSV into series,x,y,lo,hi rows");
    plot->add_option("--report", report_path, "Report CSV")->required();
    plot->add_option("--out", plot_path, "Plot CSV to write")->required();

    auto* list = app.add_subcommand("list", "List registered experiments");
    auto* kernel = app.add_subcommand("validate-kernel", "Check the H^3 heat kernel");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) {
            const crt::Report report = crt::run(config);
            std::cout << report.rows.size() << " rows written for " << config.experiment << '\n';
        } else if (plot->parsed()) {
            crt::emit_plotdata(report_path, plot_path);
        } else if (list->parsed()) {
            for (const auto& name : crt::experiment_names()) std::cout << name << '\n';
        } else if (kernel->parsed()) {
            const auto check = crt::validate_heat_kernel();
            for (int i = 0; i < 3; ++i)
                std::cout << "normalization[" << i << "] " << check.normalization_error[i] << "  chapman-kolmogorov["
                          << i << "] " << check.chapman_kolmogorov_error[i] << '\n';
            std::cout << (check.passed ? "passed" : "FAILED") << '\n';
            if (!check.passed) throw crt::ValidationGateError("heat kernel validation failed");
        }
    } catch (const crt::Error& e) {
        std::cerr << "error [" << crt::category_name(e.category()) << "]: " << e.what() << '\n';
        return crt::exit_code(e.category());
    } catch (const std::exception& e) {
        std::cerr << "error [internal]: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
