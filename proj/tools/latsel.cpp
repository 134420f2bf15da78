#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "latsel/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNonConvergence = 3;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"latsel: exact model selection with combinatorial support penalties"};
    app.require_subcommand(1);
    app.set_version_flag("--version", latsel::kVersion);

    auto* run = app.add_subcommand("run", "Run one experiment and write its report files");
    std::string config_path;
    std::optional<std::string> experiment;
    std::optional<std::size_t> n;
    std::optional<std::uint64_t> seed;
    std::optional<double> lambda;
    std::vector<std::size_t> k;
    std::optional<std::string> out;
    run->add_option("--config", config_path, "JSON configuration file")->required();
    run->add_option("--experiment", experiment,
                    "sparse_regression | denoising | discretization_sweep | knapsack_path | robust");
    run->add_option("--n", n, "problem size (number of domains for robust)");
    run->add_option("--seed", seed, "RNG seed");
    run->add_option("--lambda", lambda, "penalty strength");
    run->add_option("--k", k, "grid size; repeat for the sweep")->expected(1, -1);
    run->add_option("--out", out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        auto cfg = latsel::load_config(config_path);
        if (experiment) cfg.experiment = latsel::parse_experiment(*experiment);
        if (n) cfg.n = *n;
        if (seed) cfg.seed = *seed;
        if (lambda) cfg.lambda = *lambda;
        if (!k.empty()) cfg.k_list = k;
        if (out) cfg.output_dir = *out;
        const auto summary = latsel::run_experiment(cfg);
        for (const auto& f : summary.files) std::cout << cfg.output_dir << '/' << f << '\n';
        if (!summary.converged) {
            std::cerr << "latsel: solver did not converge within max_iter\n";
            return kExitNonConvergence;
        }
        return kExitOk;
    } catch (const latsel::ConfigError& e) {
        std::cerr << "latsel: config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "latsel: " << e.what() << '\n';
        return kExitError;
    }
}
