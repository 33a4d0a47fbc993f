#pragma once

#include "cirsim/near_zero.hpp"
#include "cirsim/stepper.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cirsim {

enum class Mode { Simulate, ValidateFpt, ValidateBessel, ValidateMarginal, ExportUGrid };

std::string_view mode_name(Mode mode) noexcept;
// Throws ConfigError for an unknown name.
Mode parse_mode(std::string_view name);

struct RunConfig {
    double k = 2.0;
    double lambda = 1.0;
    double sigma = 1.0;
    double v0 = 1.0;
    double t0 = 0.0;
    double horizon_T = 1.0;
    double r = 0.05;
    double band_A = 1.0;
    double band_a = 1.0 / 3.0;
    std::uint64_t seed = 1;
    int n_paths = 1;
    int truncation_M = near_zero::kDefaultTruncation;
    std::string output_path = "cirsim_out";
    Mode mode = Mode::Simulate;

    int grid_size = 1000;                 // dense output and profile points
    int surface_size = 50;                // side of the (t~, x~) export grid
    int n_samples = 100000;               // validate-fpt sample count
    std::optional<double> ks_threshold;   // 0.01 for validate-fpt, 0.02 for validate-marginal
    std::optional<double> level_l;        // export-u-grid band level; default (A r^a)^2
    double eval_t = 0.1;                  // export-u-grid profile time
    int threads = 0;                      // 0: hardware concurrency
    double exit_tol = 1e-10;
    double inverse_tol = 1e-12;
};

// Throws ConfigError with a readable message.
void validate_config(const RunConfig& config);

struct RunResult {
    bool passed = true;
    std::vector<std::string> report;  // key=value lines, also written to report.txt
    int exit_code() const noexcept { return passed ? 0 : 1; }
};

// Runs the configured mode and writes its artifacts under output_path:
//   simulate          path_<i>.csv, dense_<i>.csv
//   validate-fpt      fpt_samples.csv (sorted)
//   validate-marginal marginal_ecdf.csv (sorted V(T) with exact CDF)
//   export-u-grid     u_profile.csv (x, u_plus, u_minus, gap), u_surface.csv
//   validate-bessel   report only
// plus metadata.txt and report.txt in every mode.
// Throws ConfigError, OutputError, or other CirError on numerical failure.
RunResult run(const RunConfig& config);

struct KsReport {
    std::size_t n = 0;
    double statistic = 0.0;
    double threshold = 0.0;
    bool passed = false;
};

// Terminal V-bar(t0 + T) of n_paths paths against the exact transition CDF.
// Requires n_paths >= 10^4.
KsReport validate_marginal(const RunConfig& config);

// Same, keeping the sorted sample.
KsReport validate_marginal(const RunConfig& config, std::vector<double>& sorted_terminal);

// Skeleton CSV and metadata writers, exposed for tests.
std::string skeleton_csv(const PathSkeleton& path);
std::string metadata_text(const RunConfig& config);

// Shortest round-trip decimal form.
std::string format_double(double value);

} // namespace cirsim
