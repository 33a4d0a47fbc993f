#include "cirsim/harness.hpp"

#include "cirsim/bessel.hpp"
#include "cirsim/errors.hpp"
#include "cirsim/fpt.hpp"
#include "cirsim/rng.hpp"
#include "cirsim/stepper.hpp"
#include "cirsim/transition.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#ifndef CIRSIM_VERSION
#define CIRSIM_VERSION "unknown"
#endif

namespace cirsim {

namespace fs = std::filesystem;

namespace {

constexpr double kFptKs = 0.01;
constexpr double kMarginalKs = 0.02;
constexpr std::size_t kMarginalMinPaths = 10000;

// Calls task(i) for i in [0, count) on a pool of workers. The first
// exception is rethrown after all workers stop.
template <typename Task>
void parallel_for(std::size_t count, int threads, Task&& task)
{
    unsigned workers = threads > 0 ? static_cast<unsigned>(threads) : std::thread::hardware_concurrency();
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) {
                return;
            }
            try {
                task(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                failed = true;
            }
        }
    };
    if (workers == 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(body);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

void write_file(const fs::path& file, const std::string& content)
{
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw OutputError("cannot open " + file.string() + " for writing");
    }
    out << content;
    out.close();
    if (!out) {
        throw OutputError("write to " + file.string() + " failed");
    }
}

fs::path prepare_output(const RunConfig& config)
{
    const fs::path dir(config.output_path);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw OutputError("cannot create output directory " + dir.string());
    }
    return dir;
}

CirParams params_of(const RunConfig& config)
{
    return validate_params(config.k, config.lambda, config.sigma, config.horizon_T);
}

BandConfig band_of(const RunConfig& config)
{
    BandConfig band;
    band.amplitude_A = config.band_A;
    band.exponent_a = config.band_a;
    band.truncation_M = config.truncation_M;
    band.exit_tol = config.exit_tol;
    return band;
}

std::string kv(std::string_view key, const std::string& value)
{
    return std::string(key) + "=" + value;
}

std::string kv(std::string_view key, double value)
{
    return kv(key, format_double(value));
}

std::string kv_count(std::string_view key, std::size_t value)
{
    return kv(key, std::to_string(value));
}

std::string kv_pass(std::string_view key, bool pass)
{
    return kv(key, std::string(pass ? "pass" : "fail"));
}

std::string dense_csv(const PathSkeleton& path, int grid_size)
{
    std::string out = "t,sqrt_v,v,error_tag,in_band\n";
    const double start = path.t0;
    const double end = path.horizon_end();
    for (int i = 0; i < grid_size; ++i) {
        const double t = grid_size == 1 ? end
                                        : (i == grid_size - 1 ? end
                                                              : start + (end - start) * i / (grid_size - 1));
        const auto value = dense_eval(path, t);
        out += format_double(t) + ',' + format_double(value.sqrt_v) + ',' +
               format_double(value.sqrt_v * value.sqrt_v) + ',' + format_double(value.error_tag) + ',' +
               (value.in_band ? "1" : "0") + '\n';
    }
    return out;
}

RunResult run_simulate(const RunConfig& config, const fs::path& dir)
{
    const PathSimulator simulator(params_of(config), config.r, band_of(config));
    const auto count = static_cast<std::size_t>(config.n_paths);
    std::vector<std::optional<PathSkeleton>> paths(count);
    parallel_for(count, config.threads, [&](std::size_t i) {
        RngStream rng(config.seed, i);
        paths[i] = simulator.simulate(config.v0, config.t0, rng);
    });

    RunResult result;
    std::size_t total_points = 0;
    std::size_t lint_problems = 0;
    int excursions = 0;
    double worst_bound = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const auto& path = *paths[i];
        write_file(dir / ("path_" + std::to_string(i) + ".csv"), skeleton_csv(path));
        write_file(dir / ("dense_" + std::to_string(i) + ".csv"), dense_csv(path, config.grid_size));
        for (const auto& problem : lint_skeleton(path)) {
            result.report.push_back("lint.path_" + std::to_string(i) + "=" + problem);
            ++lint_problems;
        }
        total_points += path.points.size();
        excursions += path.ledger.band_excursions();
        worst_bound = std::max(worst_bound, path.ledger.cumulative_bound());
    }
    result.passed = lint_problems == 0;
    result.report.push_back(kv_count("paths", count));
    result.report.push_back(kv("mean_points", static_cast<double>(total_points) / static_cast<double>(count)));
    result.report.push_back(kv_count("band_excursions", static_cast<std::size_t>(excursions)));
    result.report.push_back(kv("max_cum_error_bound", worst_bound));
    result.report.push_back(kv_count("lint_problems", lint_problems));
    result.report.push_back(kv_pass("lint", result.passed));
    return result;
}

RunResult run_validate_fpt(const RunConfig& config, const fs::path& dir)
{
    if (config.n_samples < 2) {
        throw ConfigError("validate-fpt needs n_samples >= 2");
    }
    fpt::InverseOptions options;
    options.tol = config.inverse_tol;
    const auto count = static_cast<std::size_t>(config.n_samples);
    std::vector<double> sample(count);
    // Samples are split into fixed chunks, one stream per chunk.
    constexpr std::size_t chunk = 4096;
    const std::size_t chunks = (count + chunk - 1) / chunk;
    parallel_for(chunks, config.threads, [&](std::size_t c) {
        RngStream rng(config.seed, c);
        const std::size_t stop = std::min(count, (c + 1) * chunk);
        for (std::size_t i = c * chunk; i < stop; ++i) {
            sample[i] = fpt::fpt_inverse(rng.uniform(), options);
        }
    });

    double mean = 0.0;
    for (double x : sample) {
        mean += x;
    }
    mean /= static_cast<double>(count);
    double var = 0.0;
    for (double x : sample) {
        var += (x - mean) * (x - mean);
    }
    var /= static_cast<double>(count - 1);
    const double std_error = std::sqrt(var / static_cast<double>(count));
    const double threshold = config.ks_threshold.value_or(kFptKs);
    const double ks = ks_statistic(sample, [](double t) { return fpt::fpt_cdf(t); });

    std::string csv = "tau,cdf\n";
    for (double x : sample) {
        csv += format_double(x) + ',' + format_double(fpt::fpt_cdf(x)) + '\n';
    }
    write_file(dir / "fpt_samples.csv", csv);

    RunResult result;
    const bool ks_ok = ks < threshold;
    const bool mean_ok = std::abs(mean - 1.0) <= 3.0 * std_error;
    result.passed = ks_ok && mean_ok;
    result.report.push_back(kv_count("samples", count));
    result.report.push_back(kv("ks", ks));
    result.report.push_back(kv("ks_threshold", threshold));
    result.report.push_back(kv_pass("ks_check", ks_ok));
    result.report.push_back(kv("mean_tau", mean));
    result.report.push_back(kv("mean_tau_std_error", std_error));
    result.report.push_back(kv_pass("mean_check", mean_ok));
    return result;
}

// Sine series for gamma = -1/4 truncated at `terms`.
double quarter_closed_form(double t_tilde, double x_tilde, int terms)
{
    const double pi = std::numbers::pi;
    const double root = std::sqrt(x_tilde);
    double sum = 0.0;
    for (int m = 1; m <= terms; ++m) {
        const double sign = m % 2 == 0 ? 1.0 : -1.0;
        sum += sign / m * std::sin(pi * m * root) * std::exp(-pi * pi * m * m * t_tilde);
    }
    return 1.0 + 2.0 / pi / root * sum;
}

RunResult run_validate_bessel(const RunConfig& config)
{
    RunResult result;
    const int terms = config.truncation_M;

    // Closed form at gamma = -1/4.
    const auto quarter = near_zero::build_table_for_level(-0.25, 1.0, 1.0, terms);
    double closed_err = 0.0;
    for (int i = 1; i <= 20; ++i) {
        const double x_tilde = i / 20.0;
        const near_zero::NormalizedExitCdf cdf(quarter, x_tilde);
        for (int j = 1; j <= 20; ++j) {
            const double t_tilde = 0.005 * j;
            closed_err = std::max(closed_err, std::abs(cdf.raw(t_tilde) -
                                                       quarter_closed_form(t_tilde, x_tilde, terms)));
        }
    }
    const bool closed_ok = closed_err < 1e-10;
    result.report.push_back(kv("closed_form_max_error", closed_err));
    result.report.push_back(kv_pass("closed_form_check", closed_ok));

    // Orthogonality of the radial eigenfunctions.
    double ortho_err = 0.0;
    for (double nu : {0.5, 0.35}) {
        const auto zeros = bessel::bessel_zeros(nu, 4);
        for (int a = 0; a < 4; ++a) {
            for (int b = 0; b < 4; ++b) {
                auto f = [&](double z) {
                    return z * bessel::bessel_j(nu, zeros[a] * z) * bessel::bessel_j(nu, zeros[b] * z);
                };
                const double integral =
                    boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 5, 1e-12);
                const double jn1 = bessel::bessel_j(nu + 1.0, zeros[a]);
                const double expected = a == b ? 0.5 * jn1 * jn1 : 0.0;
                ortho_err = std::max(ortho_err, std::abs(integral - expected));
            }
        }
    }
    const bool ortho_ok = ortho_err < 1e-8;
    result.report.push_back(kv("orthogonality_max_error", ortho_err));
    result.report.push_back(kv_pass("orthogonality_check", ortho_ok));

    // Zero residuals and interlacing for the configured model's order.
    const auto params = params_of(config);
    const double nu = -2.0 * params.gamma();
    double residual = 0.0;
    bool interlaced = true;
    const auto zeros = bessel::bessel_zeros(nu, terms + 1);
    const auto next_zeros = bessel::bessel_zeros(nu + 1.0, terms);
    for (int m = 0; m < terms; ++m) {
        residual = std::max(residual, std::abs(bessel::bessel_j(nu, zeros[m])));
        interlaced = interlaced && zeros[m] < next_zeros[m] && next_zeros[m] < zeros[m + 1];
    }
    const bool residual_ok = residual < 1e-12;
    result.report.push_back(kv("order_nu", nu));
    result.report.push_back(kv("zero_max_residual", residual));
    result.report.push_back(kv_pass("zero_residual_check", residual_ok));
    result.report.push_back(kv_pass("interlacing_check", interlaced));

    // Truncation tail M against 2M.
    const auto table = near_zero::build_table_for_level(params.gamma(), 1.0, 1.0, terms);
    const auto doubled = near_zero::build_table_for_level(params.gamma(), 1.0, 1.0, 2 * terms);
    double tail = 0.0;
    for (int i = 1; i <= 20; ++i) {
        const near_zero::NormalizedExitCdf lo(table, i / 20.0);
        const near_zero::NormalizedExitCdf hi(doubled, i / 20.0);
        for (int j = 0; j < 40; ++j) {
            const double t_tilde = 0.01 * std::pow(10.0, j / 13.0);
            tail = std::max(tail, std::abs(lo.raw(t_tilde) - hi.raw(t_tilde)));
        }
    }
    const bool tail_ok = tail < 1e-8;
    result.report.push_back(kv("truncation_tail", tail));
    result.report.push_back(kv_pass("truncation_tail_check", tail_ok));

    result.passed = closed_ok && ortho_ok && residual_ok && interlaced && tail_ok;
    return result;
}

RunResult run_validate_marginal(const RunConfig& config, const fs::path& dir)
{
    std::vector<double> terminal;
    const auto report = validate_marginal(config, terminal);
    const auto params = params_of(config);
    std::string csv = "v,empirical_cdf,exact_cdf\n";
    const double n = static_cast<double>(terminal.size());
    for (std::size_t i = 0; i < terminal.size(); ++i) {
        csv += format_double(terminal[i]) + ',' + format_double(static_cast<double>(i + 1) / n) + ',' +
               format_double(cir_transition_cdf(params, config.v0, config.horizon_T, terminal[i])) + '\n';
    }
    write_file(dir / "marginal_ecdf.csv", csv);

    RunResult result;
    result.passed = report.passed;
    result.report.push_back(kv_count("paths", report.n));
    result.report.push_back(kv("ks", report.statistic));
    result.report.push_back(kv("ks_threshold", report.threshold));
    result.report.push_back(kv_pass("ks_check", report.passed));
    return result;
}

RunResult run_export_u_grid(const RunConfig& config, const fs::path& dir)
{
    const auto params = params_of(config);
    const double level = config.level_l.value_or(std::pow(config.band_A * std::pow(config.r, config.band_a), 2.0));
    if (!(level > 0.0)) {
        throw ConfigError("level_l must be positive");
    }
    if (!(config.eval_t >= 0.0)) {
        throw ConfigError("eval_t must be non-negative");
    }
    if (!params.near_zero_capable()) {
        throw ConfigError("export-u-grid needs 4 k lambda > sigma^2");
    }
    const auto upper = near_zero::build_table_for_level(params.gamma(), level, params.sigma(), config.truncation_M);
    const bool has_lower = level < params.lambda();
    std::optional<near_zero::FourierBesselTable> lower;
    if (has_lower) {
        lower = near_zero::build_lower_table(params, level, config.truncation_M);
    }

    RunResult result;
    double min_gap = std::numeric_limits<double>::infinity();
    std::string profile = "x,u_plus,u_minus,gap\n";
    for (int i = 1; i <= config.grid_size; ++i) {
        const double x = level * i / config.grid_size;
        const double plus = near_zero::u_value(upper, config.eval_t, x);
        std::string minus_text;
        std::string gap_text;
        if (lower) {
            const double minus = near_zero::u_value(*lower, config.eval_t, x);
            min_gap = std::min(min_gap, plus - minus);
            minus_text = format_double(minus);
            gap_text = format_double(plus - minus);
        }
        profile += format_double(x) + ',' + format_double(plus) + ',' + minus_text + ',' + gap_text + '\n';
    }
    write_file(dir / "u_profile.csv", profile);

    std::string surface = "t_tilde,x_tilde,u_tilde\n";
    const int side = config.surface_size;
    for (int i = 0; i < side; ++i) {
        const double t_tilde = 1.0 * (i + 1) / side;
        for (int j = 1; j <= side; ++j) {
            const double x_tilde = static_cast<double>(j) / side;
            surface += format_double(t_tilde) + ',' + format_double(x_tilde) + ',' +
                       format_double(near_zero::u_normalized(upper, t_tilde, x_tilde)) + '\n';
        }
    }
    write_file(dir / "u_surface.csv", surface);

    result.report.push_back(kv("level_l", level));
    result.report.push_back(kv("gamma", params.gamma()));
    result.report.push_back(kv("eval_t", config.eval_t));
    if (lower) {
        result.report.push_back(kv("gamma_lower", lower->gamma));
        result.report.push_back(kv("min_gap", min_gap));
        result.passed = min_gap >= 0.0;
        result.report.push_back(kv_pass("gap_nonnegative", result.passed));
    } else {
        result.report.push_back(kv("gamma_lower", std::string("unavailable")));
    }
    return result;
}

} // namespace

std::string_view mode_name(Mode mode) noexcept
{
    switch (mode) {
    case Mode::Simulate:
        return "simulate";
    case Mode::ValidateFpt:
        return "validate-fpt";
    case Mode::ValidateBessel:
        return "validate-bessel";
    case Mode::ValidateMarginal:
        return "validate-marginal";
    case Mode::ExportUGrid:
        return "export-u-grid";
    }
    return "unknown";
}

Mode parse_mode(std::string_view name)
{
    for (Mode mode : {Mode::Simulate, Mode::ValidateFpt, Mode::ValidateBessel, Mode::ValidateMarginal,
                      Mode::ExportUGrid}) {
        if (mode_name(mode) == name) {
            return mode;
        }
    }
    throw ConfigError("unknown mode '" + std::string(name) + "'");
}

std::string format_double(double value)
{
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

void validate_config(const RunConfig& config)
{
    const auto params = params_of(config);
    if (config.n_paths < 1) {
        throw ConfigError("n_paths must be at least 1");
    }
    if (config.truncation_M < 1) {
        throw ConfigError("truncation_M must be at least 1");
    }
    if (config.grid_size < 2) {
        throw ConfigError("grid_size must be at least 2");
    }
    if (config.surface_size < 1) {
        throw ConfigError("surface_size must be at least 1");
    }
    if (!std::isfinite(config.t0)) {
        throw ConfigError("t0 must be finite");
    }
    if (!(config.v0 >= 0.0) || !std::isfinite(config.v0)) {
        throw ConfigError("v0 must be finite and non-negative");
    }
    if (!(config.exit_tol > 0.0) || !(config.inverse_tol > 0.0)) {
        throw ConfigError("tolerances must be positive");
    }
    if (config.ks_threshold && !(*config.ks_threshold > 0.0)) {
        throw ConfigError("ks_threshold must be positive");
    }
    validate_band_config(params, config.r, config.band_A, config.band_a);
    if (std::sqrt(config.v0) < config.sigma * config.r) {
        throw ConfigError("sqrt(v0) must be at least sigma * r");
    }
}

std::string skeleton_csv(const PathSkeleton& path)
{
    std::string out = "t,sqrt_v_bar,v_bar,regime,xi,theta,cum_error_bound\n";
    for (const auto& p : path.points) {
        out += format_double(p.t);
        out += ',';
        out += format_double(p.sqrt_v_bar);
        out += ',';
        out += format_double(p.sqrt_v_bar * p.sqrt_v_bar);
        out += ',';
        out += regime_name(p.regime);
        out += ',';
        if (p.xi) {
            out += std::to_string(*p.xi);
        }
        out += ',';
        if (p.theta) {
            out += format_double(*p.theta);
        }
        out += ',';
        out += format_double(p.cum_error_bound);
        out += '\n';
    }
    return out;
}

std::string metadata_text(const RunConfig& config)
{
    std::ostringstream out;
    out << "library_version=" << CIRSIM_VERSION << '\n'
        << "generator_id=" << RngStream::kGeneratorId << '\n'
        << "mode=" << mode_name(config.mode) << '\n'
        << "k=" << format_double(config.k) << '\n'
        << "lambda=" << format_double(config.lambda) << '\n'
        << "sigma=" << format_double(config.sigma) << '\n'
        << "v0=" << format_double(config.v0) << '\n'
        << "t0=" << format_double(config.t0) << '\n'
        << "horizon_T=" << format_double(config.horizon_T) << '\n'
        << "r=" << format_double(config.r) << '\n'
        << "band_A=" << format_double(config.band_A) << '\n'
        << "band_a=" << format_double(config.band_a) << '\n'
        << "seed=" << config.seed << '\n'
        << "n_paths=" << config.n_paths << '\n'
        << "truncation_M=" << config.truncation_M << '\n'
        << "output_path=" << config.output_path << '\n'
        << "grid_size=" << config.grid_size << '\n'
        << "surface_size=" << config.surface_size << '\n'
        << "n_samples=" << config.n_samples << '\n'
        << "ks_threshold=" << (config.ks_threshold ? format_double(*config.ks_threshold) : "") << '\n'
        << "level_l=" << (config.level_l ? format_double(*config.level_l) : "") << '\n'
        << "eval_t=" << format_double(config.eval_t) << '\n'
        << "exit_tol=" << format_double(config.exit_tol) << '\n'
        << "inverse_tol=" << format_double(config.inverse_tol) << '\n';
    return out.str();
}

KsReport validate_marginal(const RunConfig& config, std::vector<double>& sorted_terminal)
{
    validate_config(config);
    if (static_cast<std::size_t>(config.n_paths) < kMarginalMinPaths) {
        throw ConfigError("validate-marginal needs n_paths >= 10000");
    }
    const auto params = params_of(config);
    const PathSimulator simulator(params, config.r, band_of(config));
    const auto count = static_cast<std::size_t>(config.n_paths);
    sorted_terminal.assign(count, 0.0);
    parallel_for(count, config.threads, [&](std::size_t i) {
        RngStream rng(config.seed, i);
        const double root = simulator.simulate_terminal(config.v0, config.t0, rng);
        sorted_terminal[i] = root * root;
    });

    KsReport report;
    report.n = count;
    report.threshold = config.ks_threshold.value_or(kMarginalKs);
    report.statistic = ks_statistic(sorted_terminal, [&](double v) {
        return cir_transition_cdf(params, config.v0, config.horizon_T, v);
    });
    report.passed = report.statistic < report.threshold;
    return report;
}

KsReport validate_marginal(const RunConfig& config)
{
    std::vector<double> terminal;
    return validate_marginal(config, terminal);
}

RunResult run(const RunConfig& config)
{
    validate_config(config);
    const fs::path dir = prepare_output(config);
    RunResult result;
    switch (config.mode) {
    case Mode::Simulate:
        result = run_simulate(config, dir);
        break;
    case Mode::ValidateFpt:
        result = run_validate_fpt(config, dir);
        break;
    case Mode::ValidateBessel:
        result = run_validate_bessel(config);
        break;
    case Mode::ValidateMarginal:
        result = run_validate_marginal(config, dir);
        break;
    case Mode::ExportUGrid:
        result = run_export_u_grid(config, dir);
        break;
    }
    result.report.push_back(kv_pass("status", result.passed));
    std::string text;
    for (const auto& line : result.report) {
        text += line + '\n';
    }
    write_file(dir / "metadata.txt", metadata_text(config));
    write_file(dir / "report.txt", text);
    return result;
}

} // namespace cirsim
