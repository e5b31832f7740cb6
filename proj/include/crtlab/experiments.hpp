#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "crtlab/report.hpp"

namespace crt {

/// Flat configuration shared by every experiment. Empty lists and zero
/// sizes are replaced by per-experiment defaults in resolve().
struct ExperimentConfig {
    std::string experiment;
    /// tree | hyperbolic | excursion | loop; empty selects the default.
    std::string model;
    unsigned k = 3;
    /// Walk lengths 2n.
    std::vector<std::size_t> sizes;
    /// Bridge durations T.
    std::vector<double> horizons;
    std::size_t levels = 0;
    std::size_t subsample = 512;
    std::size_t replicas = 1000;
    std::uint64_t seed = 1;
    std::string out_dir = "crtlab-out";

    double eta = 1.0;
    std::size_t cover_threshold = 100;
    /// Scaling factors a for the loop experiments.
    std::vector<double> scales;
    /// Time thresholds A for ball containment.
    std::vector<double> windows;
    double radius = 0.5;
    /// Rescaled half-window for loop-dx.
    double window = 2.0;
    std::vector<double> steps;
    double sde_horizon = 1.0;
    /// Grid points of excursions / steps per side of two-sided paths.
    std::size_t grid_points = 0;
    /// Size of the independent reference sample (0: ten times replicas).
    std::size_t reference_replicas = 0;
    std::size_t pairs = 32;
    std::size_t probes = 8;
    unsigned workers = 0;
    /// Wall-clock ceiling in seconds (0: none).
    double time_limit = 0.0;
    /// Ceiling on large tables in bytes.
    std::size_t memory_limit = std::size_t{2} << 30;
    /// Bootstrap replicas for confidence intervals.
    std::size_t bootstrap = 1000;
};

const std::vector<std::string>& experiment_names();

/// Copy of `config` with defaults filled in; throws UnknownExperiment or
/// InvalidParameter.
ExperimentConfig resolve(const ExperimentConfig& config);

/// Runs the experiment in memory. replicas = 0 gives an empty report.
Report run_experiment(const ExperimentConfig& config);

/// run_experiment, then saves <out_dir>/<experiment>.{csv,json}. The
/// CRTLAB_OUT environment variable overrides out_dir.
Report run(const ExperimentConfig& config);

}  // namespace crt
