// Command-line front end: rate prediction, temperature/frequency scans
// (analytic and Monte Carlo), trace simulation, and trace/scan analysis,
// all driven by one INI config plus --set overrides.

#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qjump/analysis.hpp"
#include "qjump/atom_model.hpp"
#include "qjump/config.hpp"
#include "qjump/csv_io.hpp"
#include "qjump/errors.hpp"
#include "qjump/interaction_model.hpp"
#include "qjump/spdc_source.hpp"
#include "qjump/trajectory_sim.hpp"

namespace fs = std::filesystem;
using namespace qjump;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNonConvergence = 3;

// Streams for scan points: point i, sub-measurement j -> i * 1000 + j.
constexpr std::uint64_t kStreamsPerPoint = 1000;

struct GlobalOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::vector<std::string> overrides;
    unsigned threads = 1;
};

ExperimentConfig load_config(const GlobalOptions& g) {
    return ExperimentConfig::load(g.config_path, g.overrides);
}

double predicted_rate_per_s(const ExperimentConfig& cfg) {
    const double flux =
        resonant_flux(cfg.spdc.peak_flux_density, cfg.atom.absorption_bandwidth_mhz);
    return predicted_jump_rate(flux, cfg.coupling);
}

BackgroundRates background_rates(const ExperimentConfig& cfg) {
    BackgroundRates bg;
    bg.background_jump_rate_per_min = cfg.telegraph.background_jump_rate_per_min;
    bg.bright_count_rate = cfg.telegraph.bright_count_rate;
    bg.dark_count_rate = cfg.telegraph.dark_count_rate;
    return bg;
}

int cmd_predict(const GlobalOptions& g) {
    const ExperimentConfig cfg = load_config(g);
    const double flux =
        resonant_flux(cfg.spdc.peak_flux_density, cfg.atom.absorption_bandwidth_mhz);
    const double rate = predicted_jump_rate(flux, cfg.coupling);

    std::printf("config digest        %s\n", cfg.digest.c_str());
    std::printf("flux density         %.6g /(s MHz)\n", cfg.spdc.peak_flux_density);
    std::printf("absorption bandwidth %.6g MHz\n", cfg.atom.absorption_bandwidth_mhz);
    std::printf("resonant flux        %.6g photons/s\n", flux);
    std::printf("d32_population       %.6g\n", cfg.coupling.d32_population);
    std::printf("dipole_fraction      %.6g\n", cfg.coupling.dipole_fraction);
    std::printf("branching_to_d52     %.6g\n", cfg.coupling.branching_to_d52);
    std::printf("polarization_match   %.6g\n", cfg.coupling.polarization_match);
    std::printf("geometric_overlap    %.6g\n", cfg.coupling.geometric_overlap);
    std::printf("factor product       %.6g\n", cfg.coupling.product());
    std::printf("predicted jump rate  %.6g events/s = %.6g events/min (1 per %.4g s)\n",
                rate, rate * 60.0, 1.0 / rate);
    std::printf("background rate      %.6g events/min\n",
                cfg.telegraph.background_jump_rate_per_min);
    return kExitOk;
}

ScanResult analytic_scan(const ExperimentConfig& cfg, ScanKind kind) {
    const BackgroundRates bg = background_rates(cfg);
    if (kind == ScanKind::temperature) {
        const LineProfile window =
            LineProfile::lorentzian(0.0, cfg.atom.absorption_bandwidth_mhz, 1.0);
        ScanResult scan = temperature_scan_model(cfg.spdc, window, cfg.coupling, bg,
                                                 cfg.scan.temperature_grid());
        scan.config_digest = cfg.digest;
        scan.seed = cfg.rng.master_seed;
        return scan;
    }
    const LineProfile line =
        absorption_profile(cfg.atom.natural_fwhm_mhz, cfg.atom.zeeman_broadening_mhz);
    const double peak_rate = cfg.scan.peak_rate_is_auto()
                                 ? 60.0 * predicted_rate_per_s(cfg) *
                                       cfg.filter.peak_transmission
                                 : cfg.scan.peak_rate_per_min;
    ScanResult scan =
        frequency_scan_model(cfg.filter, line, peak_rate, bg, cfg.scan.frequency_grid());
    scan.config_digest = cfg.digest;
    scan.seed = cfg.rng.master_seed;
    return scan;
}

// One Monte Carlo scan point: simulate at the model rate, detect, estimate.
std::pair<double, double> montecarlo_point(const ExperimentConfig& cfg, ScanKind kind,
                                           double model_rate_per_min,
                                           std::size_t point_index) {
    const TelegraphParams params = cfg.telegraph_params(model_rate_per_min);
    const double bin = cfg.scan.mc_bin_width_s;
    const double threshold = cfg.detection_threshold_counts(bin);
    const std::size_t min_run = cfg.telegraph.detection_min_run;
    const std::uint64_t base_stream = point_index * kStreamsPerPoint;

    if (kind == ScanKind::temperature) {
        const CountTrace trace =
            simulate_trace(params, cfg.scan.mc_duration_per_point_s, bin,
                           cfg.rng.master_seed, base_stream, cfg.telegraph.start_state);
        const auto est = estimate_rate(detect_jumps(trace, threshold, min_run, params));
        return {est.rate_per_min, est.error_per_min};
    }
    std::vector<JumpEvents> subs;
    subs.reserve(cfg.scan.freq_sub_measurements);
    for (std::size_t j = 0; j < cfg.scan.freq_sub_measurements; ++j) {
        const CountTrace trace =
            simulate_trace(params, cfg.scan.freq_sub_duration_s, bin,
                           cfg.rng.master_seed, base_stream + j,
                           cfg.telegraph.start_state);
        subs.push_back(detect_jumps(trace, threshold, min_run, params));
    }
    const auto est = estimate_rate(std::span<const JumpEvents>(subs));
    return {est.rate_per_min, est.error_per_min};
}

ScanResult montecarlo_scan(const ExperimentConfig& cfg, ScanKind kind, unsigned threads) {
    const ScanResult model = analytic_scan(cfg, kind);
    const std::size_t n = model.x.size();

    std::vector<std::pair<double, double>> points(n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            points[i] = montecarlo_point(cfg, kind, model.rate_per_min[i], i);
    } else {
        // Workers own disjoint index sets; every point derives its RNG stream
        // from its index, so the merge is identical to serial execution.
        std::vector<std::future<void>> workers;
        for (unsigned w = 0; w < threads; ++w) {
            workers.push_back(std::async(std::launch::async, [&, w]() {
                for (std::size_t i = w; i < n; i += threads)
                    points[i] = montecarlo_point(cfg, kind, model.rate_per_min[i], i);
            }));
        }
        for (auto& f : workers)
            f.get();
    }

    ScanResult scan;
    scan.kind = kind;
    scan.x = model.x;
    scan.config_digest = cfg.digest;
    scan.seed = cfg.rng.master_seed;
    scan.rate_per_min.resize(n);
    scan.err_per_min.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        scan.rate_per_min[i] = points[i].first;
        scan.err_per_min[i] = points[i].second;
    }
    return scan;
}

int cmd_scan(const GlobalOptions& g, const std::string& kind_str,
             const std::string& mode_str) {
    const ExperimentConfig cfg = load_config(g);
    const ScanKind kind =
        kind_str == "temperature" ? ScanKind::temperature : ScanKind::frequency;
    const bool montecarlo = mode_str == "montecarlo";

    const ScanResult scan =
        montecarlo ? montecarlo_scan(cfg, kind, g.threads) : analytic_scan(cfg, kind);

    fs::create_directories(g.out_dir);
    const std::string stem = "scan_" + kind_str + "_" + mode_str;
    const fs::path csv = fs::path(g.out_dir) / (stem + ".csv");
    const fs::path meta = fs::path(g.out_dir) / (stem + ".meta");
    write_scan_csv(csv.string(), scan);

    ScanMeta m;
    m.kind = kind_str;
    m.mode = mode_str;
    m.config_digest = cfg.digest;
    m.master_seed = cfg.rng.master_seed;
    m.error_method = !montecarlo ? "none"
                     : (kind == ScanKind::temperature ? "poisson-sqrt" : "sem");
    write_scan_meta(meta.string(), m);

    std::printf("wrote %s (%zu points)\n", csv.string().c_str(), scan.x.size());
    return kExitOk;
}

int cmd_simulate(const GlobalOptions& g, double duration_s,
                 std::optional<std::uint64_t> seed_flag, std::size_t trials,
                 std::optional<std::uint64_t> single_trial) {
    const ExperimentConfig cfg = load_config(g);
    const std::uint64_t seed = seed_flag.value_or(cfg.rng.master_seed);

    // Default pump condition: unfiltered arm on the envelope peak.
    const double total_rate_per_min =
        cfg.telegraph.background_jump_rate_per_min + 60.0 * predicted_rate_per_s(cfg);
    const TelegraphParams params = cfg.telegraph_params(total_rate_per_min);

    fs::create_directories(g.out_dir);
    std::vector<std::uint64_t> trial_ids;
    if (single_trial)
        trial_ids.push_back(*single_trial);
    else
        for (std::uint64_t k = 0; k < trials; ++k)
            trial_ids.push_back(k);

    for (std::uint64_t k : trial_ids) {
        const CountTrace trace =
            simulate_trace(params, duration_s, cfg.telegraph.bin_width_s, seed, k,
                           cfg.telegraph.start_state);
        char name[32];
        std::snprintf(name, sizeof(name), "trace_%03llu",
                      static_cast<unsigned long long>(k));
        const fs::path csv = fs::path(g.out_dir) / (std::string(name) + ".csv");
        const fs::path meta = fs::path(g.out_dir) / (std::string(name) + ".meta");
        write_trace_files(csv.string(), meta.string(), trace, params, cfg.digest);
        std::printf("wrote %s (%zu bins, %zu true jumps)\n", csv.string().c_str(),
                    trace.n_bins(), trace.true_jumps.size());
    }
    return kExitOk;
}

std::string sibling_meta(const std::string& csv_path) {
    fs::path p(csv_path);
    p.replace_extension(".meta");
    return p.string();
}

void emit_report(const GlobalOptions& g, const std::string& input,
                 const std::string& task,
                 const std::vector<std::pair<std::string, std::string>>& kv) {
    for (const auto& [k, v] : kv)
        std::printf("%s=%s\n", k.c_str(), v.c_str());
    fs::create_directories(g.out_dir);
    const std::string stem = fs::path(input).stem().string();
    const fs::path path = fs::path(g.out_dir) / (stem + "." + task + ".txt");
    write_report(path.string(), kv);
}

int cmd_analyze(const GlobalOptions& g, const std::string& task,
                const std::vector<std::string>& files) {
    const ExperimentConfig cfg = load_config(g);
    if (files.empty())
        throw ValidationError("analyze: no input files given");

    int exit_code = kExitOk;
    for (const auto& file : files) {
        if (task == "jumps" || task == "dwell") {
            const TraceBundle bundle = read_trace_files(file, sibling_meta(file));
            const double threshold =
                cfg.telegraph.dark_count_rate * bundle.trace.bin_width_s +
                cfg.telegraph.detection_threshold_fraction *
                    (bundle.params.bright_count_rate - bundle.params.dark_count_rate) *
                    bundle.trace.bin_width_s;
            const JumpEvents events = detect_jumps(
                bundle.trace, threshold, cfg.telegraph.detection_min_run, bundle.params);
            if (task == "jumps") {
                const RateEstimate est = estimate_rate(events);
                emit_report(g, file, task,
                            {{"config_digest", bundle.config_digest},
                             {"n_transitions", std::to_string(events.transitions.size())},
                             {"n_cycles", std::to_string(est.n_events)},
                             {"observation_min",
                              format_sig6(events.observation_time_s / 60.0)},
                             {"rate_per_min", format_sig6(est.rate_per_min)},
                             {"err_per_min", format_sig6(est.error_per_min)},
                             {"method", "poisson-sqrt"}});
            } else {
                const DwellStats stats = dwell_statistics(events, bundle.trace);
                emit_report(g, file, task,
                            {{"config_digest", bundle.config_digest},
                             {"n_dwells", std::to_string(stats.n_dwells)},
                             {"mean_dwell_s", format_sig6(stats.mean_s)},
                             {"mle_mean_s", format_sig6(stats.mle_mean_s)},
                             {"ci_low_s", format_sig6(stats.ci_low_s)},
                             {"ci_high_s", format_sig6(stats.ci_high_s)}});
            }
        } else if (task == "fit" || task == "fit-convolved") {
            const ScanResult scan = read_scan_csv(file);
            LorentzianFit fit;
            if (task == "fit") {
                fit = fit_lorentzian(scan);
            } else {
                const LineProfile filter =
                    LineProfile::lorentzian(0.0, chain_fwhm_mhz(cfg.filter), 1.0);
                fit = fit_convolved_line(scan, filter);
            }
            emit_report(g, file, task,
                        {{"config_digest",
                          scan.config_digest.empty() ? cfg.digest : scan.config_digest},
                         {"center_mhz", format_sig6(fit.center_mhz)},
                         {"fwhm_mhz", format_sig6(fit.fwhm_mhz)},
                         {"amplitude_per_min", format_sig6(fit.amplitude)},
                         {"offset_per_min", format_sig6(fit.offset)},
                         {"center_err_mhz", format_sig6(fit.center_err_mhz)},
                         {"fwhm_err_mhz", format_sig6(fit.fwhm_err_mhz)},
                         {"residual_norm", format_sig6(fit.residual_norm)},
                         {"converged", fit.converged ? "true" : "false"}});
            if (!fit.converged)
                exit_code = kExitNonConvergence;
        } else {
            throw ValidationError("analyze: unknown task '" + task + "'");
        }
    }
    return exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"single-ion quantum jump simulator and analysis toolkit"};
    app.require_subcommand(1);
    app.fallthrough(); // global options may follow the subcommand

    GlobalOptions g;
    app.add_option("--config", g.config_path, "INI config file (built-in defaults if omitted)");
    app.add_option("--out", g.out_dir, "output directory")->capture_default_str();
    app.add_option("--set", g.overrides, "override, section.key=value (repeatable)");
    app.add_option("--threads", g.threads, "worker threads for Monte Carlo scans")
        ->capture_default_str();

    auto* predict = app.add_subcommand("predict", "factor-chain jump rate estimate");

    auto* scan = app.add_subcommand("scan", "temperature or frequency scan");
    std::string kind, mode = "analytic";
    scan->add_option("--kind", kind, "temperature | frequency")
        ->required()
        ->check(CLI::IsMember({"temperature", "frequency"}));
    scan->add_option("--mode", mode, "analytic | montecarlo")
        ->check(CLI::IsMember({"analytic", "montecarlo"}));

    auto* simulate = app.add_subcommand("simulate", "generate fluorescence traces");
    double duration_s = 3600.0;
    std::uint64_t seed_value = 0, single_trial_value = 0;
    std::size_t trials = 1;
    simulate->add_option("--duration", duration_s, "trace duration in seconds")
        ->capture_default_str();
    auto* seed_opt = simulate->add_option("--seed", seed_value, "master seed");
    simulate->add_option("--trials", trials, "number of trials (streams 0..K-1)")
        ->capture_default_str();
    auto* trial_opt =
        simulate->add_option("--trial-index", single_trial_value, "run one trial only");

    auto* analyze = app.add_subcommand("analyze", "analyze traces or scans");
    std::string task;
    std::vector<std::string> files;
    analyze->add_option("--task", task, "jumps | dwell | fit | fit-convolved")
        ->required()
        ->check(CLI::IsMember({"jumps", "dwell", "fit", "fit-convolved"}));
    analyze->add_option("files", files, "input files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (predict->parsed())
            return cmd_predict(g);
        if (scan->parsed())
            return cmd_scan(g, kind, mode);
        if (simulate->parsed())
            return cmd_simulate(g, duration_s,
                                seed_opt->count() ? std::optional(seed_value)
                                                  : std::nullopt,
                                trials,
                                trial_opt->count() ? std::optional(single_trial_value)
                                                   : std::nullopt);
        if (analyze->parsed())
            return cmd_analyze(g, task, files);
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    }
    return kExitOk;
}
