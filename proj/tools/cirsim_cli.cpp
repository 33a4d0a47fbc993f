#include "cirsim/errors.hpp"
#include "cirsim/harness.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitOutput = 3;

} // namespace

int main(int argc, char** argv)
{
    cirsim::RunConfig config;
    std::string mode = "simulate";
    double ks_threshold = 0.0;
    double level_l = 0.0;

    CLI::App app{"Uniform pathwise simulation of the CIR process"};
    app.set_version_flag("--version", std::string(CIRSIM_VERSION));
    app.add_option("--mode", mode, "simulate | validate-fpt | validate-bessel | validate-marginal | export-u-grid")
        ->capture_default_str();
    app.add_option("--k", config.k, "Mean-reversion speed")->capture_default_str();
    app.add_option("--lambda", config.lambda, "Long-run mean")->capture_default_str();
    app.add_option("--sigma", config.sigma, "Volatility")->capture_default_str();
    app.add_option("--v0", config.v0, "Initial value V(t0)")->capture_default_str();
    app.add_option("--t0", config.t0, "Start time")->capture_default_str();
    app.add_option("--horizon-t", config.horizon_T, "Horizon length T")->capture_default_str();
    app.add_option("--r", config.r, "Accuracy radius r")->capture_default_str();
    app.add_option("--band-A", config.band_A, "Band amplitude A")->capture_default_str();
    app.add_option("--band-a", config.band_a, "Band exponent a in (0, 1/2)")->capture_default_str();
    app.add_option("--seed", config.seed, "Base seed")->capture_default_str();
    app.add_option("--n-paths", config.n_paths, "Number of paths")->capture_default_str();
    app.add_option("--truncation-m", config.truncation_M, "Fourier-Bessel terms")->capture_default_str();
    app.add_option("--output-path", config.output_path, "Output directory")->capture_default_str();
    app.add_option("--grid-size", config.grid_size, "Dense output / profile points")->capture_default_str();
    app.add_option("--surface-size", config.surface_size, "Side of the (t~, x~) grid")->capture_default_str();
    app.add_option("--n-samples", config.n_samples, "validate-fpt sample count")->capture_default_str();
    auto* ks_opt = app.add_option("--ks-threshold", ks_threshold, "KS pass threshold");
    auto* level_opt = app.add_option("--level-l", level_l, "export-u-grid band level");
    app.add_option("--eval-t", config.eval_t, "export-u-grid profile time")->capture_default_str();
    app.add_option("--threads", config.threads, "Worker threads, 0 = all cores")->capture_default_str();
    app.add_option("--exit-tol", config.exit_tol, "Band exit-time tolerance")->capture_default_str();
    app.add_option("--inverse-tol", config.inverse_tol, "FPT inversion tolerance")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitConfig;
    }
    if (*ks_opt) {
        config.ks_threshold = ks_threshold;
    }
    if (*level_opt) {
        config.level_l = level_l;
    }

    try {
        config.mode = cirsim::parse_mode(mode);
        const auto result = cirsim::run(config);
        for (const auto& line : result.report) {
            std::cout << line << '\n';
        }
        return result.exit_code();
    } catch (const cirsim::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const cirsim::OutputError& e) {
        std::cerr << "output error: " << e.what() << '\n';
        return kExitOutput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailed;
    }
}
