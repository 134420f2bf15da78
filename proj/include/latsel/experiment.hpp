#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "latsel/models.hpp"
#include "latsel/report.hpp"

namespace latsel {

inline constexpr const char* kVersion = "0.1.0";

/// Bad configuration: unknown keys, out-of-range values, unwritable output.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind { sparse_regression, denoising, discretization_sweep, knapsack_path, robust };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment(const std::string& name);

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::sparse_regression;
    /// Problem size; K for robust. Default depends on the experiment.
    std::optional<std::size_t> n;
    std::uint64_t seed = 0;
    double lambda = 0.05;
    double mu_smooth = 0.8;
    /// Grid sizes. Default 51, 101 for denoising, (50,100,200,400) for the sweep.
    std::vector<std::size_t> k_list;
    double tol = 1e-4;
    std::size_t max_iter = 100;
    std::size_t repeats = 5;
    /// Subset of {minnorm, pgd, discretized}; default all three.
    std::vector<std::string> solvers;
    std::string output_dir = "out";
    PenaltyKind penalty = PenaltyKind::range;
    /// Robust subgradient steps.
    std::size_t T = 1000;
    /// Knapsack budget on Σ_{i∈supp x} w_i with unit weights. Default n/2.
    std::optional<double> budget;
    /// Discretization box. Default [0,1], [-1,1] for denoising.
    std::optional<double> box_lo;
    std::optional<double> box_hi;

    /// Copy with experiment-dependent defaults filled in; throws ConfigError.
    ExperimentConfig resolved() const;
    std::size_t size() const { return *n; }
};

/// Strict parse: unknown keys and wrong types raise ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg);

struct RunSummary {
    std::vector<ReportRow> rows;
    /// Names of the files written, relative to output_dir.
    std::vector<std::string> files;
    /// False if any min-norm solve hit its iteration cap.
    bool converged = true;
};

/// Runs the experiment and writes results.csv, trace_<solver>.csv,
/// solution_<solver>.csv and manifest.json (plus instance.json or path.csv
/// where relevant) into output_dir.
RunSummary run_experiment(const ExperimentConfig& config);

}  // namespace latsel
