#pragma once

#include "qab/error.hpp"
#include "qab/io.hpp"
#include "qab/localization.hpp"
#include "qab/metrics.hpp"
#include "qab/noise.hpp"
#include "qab/sweep.hpp"
#include "qab/testdata.hpp"
#include "qab/text.hpp"
#include "qab/transform.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace qab::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

/// Thrown for flag combinations CLI11 cannot express (missing inputs that a
/// config file may still supply, bad enum values).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace fs = std::filesystem;

// ------------------------------------------------------------ helpers ----

/// Loaded signal or image together with what is needed to write it back.
struct Dataset {
    Potential data;
    std::optional<unsigned> pgm_maxval;   // set for images
};

inline Dataset load_dataset(const fs::path& path) {
    if (has_pgm_extension(path)) {
        const auto img = load_pgm(path);
        return {to_potential(img), img.maxval};
    }
    return {Potential::one_d(load_signal_csv(path)), std::nullopt};
}

inline void save_dataset(const fs::path& path, const Potential& x, std::optional<unsigned> maxval) {
    if (has_pgm_extension(path)) {
        if (!x.is_2d()) throw DataError("cannot write a 1D signal as PGM: '" + path.string() + "'");
        save_pgm(path, to_pgm(x, maxval.value_or(255)));
        return;
    }
    if (x.is_2d()) throw DataError("cannot write an image as CSV: '" + path.string() + "'");
    save_signal_csv(path, x.values());
}

/// Applies `key=value` entries from a config file to the options of `app`
/// that were not given on the command line. Unknown keys are rejected.
inline void apply_config(CLI::App& app, const fs::path& path) {
    const auto cfg = KeyValueConfig::load(path);
    for (const auto& [key, value] : cfg.values()) {
        CLI::Option* opt = key == "config" || key == "help" ? nullptr : app.get_option_no_throw("--" + key);
        if (opt == nullptr) throw UsageError("config '" + path.string() + "': unknown key '" + key + "'");
        if (opt->count() > 0) continue;   // the command line wins
        if (opt->get_type_size() == 0) {
            if (value != "true" && value != "false") {
                throw UsageError("config key '" + key + "' expects true or false");
            }
            if (value == "false") continue;
        }
        try {
            opt->add_result(value);
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw UsageError("config key '" + key + "': " + e.what());
        }
    }
}

inline Roi parse_roi(const std::string& text) {
    std::vector<double> v;
    try {
        v = parse_number_list(text);
    } catch (const DataError&) {
        throw UsageError("ROI must be row0,col0,rows,cols: '" + text + "'");
    }
    if (v.size() != 4 || std::any_of(v.begin(), v.end(), [](double d) { return d < 0 || d != std::floor(d); })) {
        throw UsageError("ROI must be four non-negative integers row0,col0,rows,cols: '" + text + "'");
    }
    return {static_cast<std::size_t>(v[0]), static_cast<std::size_t>(v[1]), static_cast<std::size_t>(v[2]),
            static_cast<std::size_t>(v[3])};
}

inline double max_value(const Potential& x) {
    const auto v = x.values();
    return *std::max_element(v.begin(), v.end());
}

// -------------------------------------------------------- subcommands ----

struct DenoiseArgs {
    std::string input, output, config, normalize = "auto";
    double planck = 0.5, sigma2 = 4.0, rho = 1.0;
    std::optional<std::size_t> s, block;
    bool smooth_per_block = false;
};

inline int run_denoise(const DenoiseArgs& a, std::size_t threads, std::ostream& out) {
    Hyperparams hp;
    hp.planck = a.planck;
    hp.smooth = SmoothSpec{a.sigma2};
    hp.rho = a.rho;
    hp.s = a.s;
    hp.smooth_per_block = a.smooth_per_block;
    if (a.normalize != "auto" && a.normalize != "none" && a.normalize != "unit" && a.normalize != "byte") {
        throw UsageError("--normalize must be none, unit or byte");
    }

    const Dataset in = load_dataset(a.input);
    std::string normalize = a.normalize;
    if (normalize == "auto") normalize = in.data.is_2d() ? "unit" : "none";
    hp.block = a.block;
    if (!hp.block && in.data.is_2d()) hp.block = 32;
    try {
        hp.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    double scale = 1.0;
    if (normalize != "none") {
        const double peak = max_value(in.data);
        if (!(peak > 0.0)) throw DataError("cannot normalise: maximum value is not positive");
        scale = (normalize == "unit" ? 1.0 : 255.0) / peak;
    }
    std::vector<double> scaled(in.data.values().begin(), in.data.values().end());
    for (auto& v : scaled) v *= scale;

    const Potential result = denoise(in.data.with_values(std::move(scaled)), hp, threads);
    std::vector<double> restored(result.values().begin(), result.values().end());
    for (auto& v : restored) v /= scale;
    for (double v : restored) {
        if (!std::isfinite(v)) throw NumericalError("denoise produced a non-finite value");
    }
    save_dataset(a.output, in.data.with_values(std::move(restored)), in.pgm_maxval);
    out << "wrote " << a.output << " (" << in.data.rows() << "x" << in.data.cols() << ", normalization factor "
        << format_exact(scale) << ")\n";
    return kOk;
}

struct AddNoiseArgs {
    std::string input, output, config, family = "gaussian";
    double snr_db = 15.0;
    std::uint64_t seed = 0;
};

inline int run_addnoise(const AddNoiseArgs& a, std::ostream& out) {
    NoiseSpec spec;
    try {
        spec.family = parse_noise_family(a.family);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    spec.target_snr_db = a.snr_db;
    spec.seed = a.seed;
    const Dataset in = load_dataset(a.input);
    const Potential noisy = add_noise(in.data, spec);
    save_dataset(a.output, noisy, in.pgm_maxval);
    // Report what was written, after any PGM quantisation.
    const Dataset back = load_dataset(a.output);
    out << "measured_snr_db=" << format_db(measured_snr(in.data, back.data)) << '\n';
    return kOk;
}

struct MetricsArgs {
    std::string ref, test, config, roi_a, roi_b;
    std::optional<double> peak;
};

inline int run_metrics(const MetricsArgs& a, std::ostream& out) {
    if (a.roi_a.empty() != a.roi_b.empty()) throw UsageError("--roi-a and --roi-b must be given together");
    const Dataset ref = load_dataset(a.ref);
    const Dataset test = load_dataset(a.test);
    if (ref.data.geometry() != test.data.geometry()) throw DataError("reference and test geometries differ");
    const double peak = a.peak ? *a.peak : default_peak(ref.data, ref.pgm_maxval == 255u);
    if (!(peak > 0.0)) throw UsageError("--peak must be positive");

    out << "snr_db=" << format_db(measured_snr(ref.data, test.data)) << '\n';
    out << "psnr_db=" << format_db(psnr(ref.data, test.data, peak)) << '\n';
    if (ref.data.is_2d()) {
        const double s = ssim(ref.data, test.data, peak);
        out << "ssim=" << format_db(s) << '\n';
    }
    if (!a.roi_a.empty()) {
        const Roi ra = parse_roi(a.roi_a);
        const Roi rb = parse_roi(a.roi_b);
        out << "cnr_db=" << format_db(cnr(test.data, ra, rb)) << '\n';
    }
    return kOk;
}

struct IprArgs {
    std::string input, output, config, family = "gaussian", snr_list = "25,20,15,10,5";
    std::size_t trials = 10;
    double sigma2 = 0.0, planck = 0.5;
    std::uint64_t seed = 0;
};

inline int run_ipr(const IprArgs& a, std::size_t threads, std::ostream& out) {
    std::vector<double> snrs;
    NoiseFamily family{};
    try {
        snrs = parse_number_list(a.snr_list);
        family = parse_noise_family(a.family);
    } catch (const std::exception& e) {
        throw UsageError(std::string("ipr: ") + e.what());
    }
    if (a.trials < 1) throw UsageError("--trials must be >= 1");
    Hyperparams hp;
    hp.planck = a.planck;
    hp.smooth = SmoothSpec{a.sigma2};
    try {
        hp.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const Potential clean = a.input.empty() ? testdata::synthetic_signal() : load_dataset(a.input).data;
    if (clean.size() > kMaxUnblockedDim) throw DataError("ipr: input larger than " + std::to_string(kMaxUnblockedDim));

    std::vector<IprCurvePoint> curve;
    try {
        curve = ipr_curve(clean, family, snrs, a.trials, hp, a.seed, threads);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    std::ostringstream csv;
    csv << "snr_db,mean_ipr,std_ipr\n";
    for (const auto& p : curve) {
        csv << format_db(p.snr_db) << ',' << format_db(p.mean_ipr) << ',' << format_db(p.std_ipr) << '\n';
    }
    if (a.output.empty()) {
        out << csv.str();
    } else {
        std::ofstream f(a.output);
        if (!f) throw DataError("cannot write '" + a.output + "'");
        f << csv.str();
        out << "wrote " << a.output << '\n';
    }
    return kOk;
}

struct SweepArgs {
    std::string grid_config, out_dir;
};

inline const std::set<std::string>& sweep_keys() {
    static const std::set<std::string> keys{"input",  "family", "snr_db", "seed",   "trials", "planck",
                                            "sigma2", "s",      "rho",    "block",  "smooth_per_block",
                                            "axis_x", "axis_y", "metric", "normalize"};
    return keys;
}

inline std::vector<std::size_t> parse_rank_list(std::string_view text) {
    std::vector<std::size_t> out;
    for (double v : parse_number_list(text)) {
        if (v < 1 || v != std::floor(v)) throw DataError("ranks must be positive integers");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

inline int run_sweep_cmd(const SweepArgs& a, std::size_t threads, std::ostream& out) {
    const fs::path cfg_path(a.grid_config);
    const auto cfg = KeyValueConfig::load(cfg_path);
    try {
        cfg.require_known(sweep_keys());
    } catch (const DataError& e) {
        throw UsageError(e.what());
    }
    auto get = [&](const std::string& key, const std::string& fallback) {
        return cfg.has(key) ? cfg.get(key) : fallback;
    };

    Potential clean = testdata::synthetic_signal();
    if (cfg.has("input")) {
        fs::path in(cfg.get("input"));
        if (in.is_relative()) in = cfg_path.parent_path() / in;
        clean = load_dataset(in).data;
    }
    const std::string normalize = get("normalize", "none");
    if (normalize == "unit") {
        const double peak = max_value(clean);
        if (!(peak > 0.0)) throw DataError("cannot normalise: maximum value is not positive");
        std::vector<double> v(clean.values().begin(), clean.values().end());
        for (auto& x : v) x /= peak;
        clean = clean.with_values(std::move(v));
    } else if (normalize != "none") {
        throw UsageError("sweep: normalize must be none or unit");
    }

    SweepGrid grid;
    NoiseSpec noise;
    SweepAxis ax{}, ay{};
    SweepMetric metric{};
    try {
        noise.family = parse_noise_family(get("family", "gaussian"));
        noise.target_snr_db = parse_exact(get("snr_db", "15"));
        grid.planck_values = parse_number_list(get("planck", "0.08,0.5,1,5,15"));
        grid.sigma2_values = parse_number_list(get("sigma2", "0,2,4,8"));
        grid.s_values = parse_rank_list(get("s", "160"));
        grid.trials = static_cast<std::size_t>(std::stoull(get("trials", "5")));
        grid.seed = std::stoull(get("seed", "0"));
        grid.fixed.rho = parse_exact(get("rho", "1"));
        if (cfg.has("block")) grid.fixed.block = static_cast<std::size_t>(std::stoull(cfg.get("block")));
        if (!cfg.has("block") && clean.is_2d()) grid.fixed.block = 32;
        grid.fixed.smooth_per_block = get("smooth_per_block", "false") == "true";
        ax = parse_sweep_axis(get("axis_x", "planck"));
        ay = parse_sweep_axis(get("axis_y", "sigma2"));
        metric = parse_sweep_metric(get("metric", "snr"));
        grid.validate();
    } catch (const std::exception& e) {
        throw UsageError(std::string("sweep config: ") + e.what());
    }

    const SweepTable table = run_sweep(clean, noise, grid, threads);
    const SweepSurface surf = surface(table, ax, ay);

    const fs::path dir(a.out_dir);
    fs::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw DataError("cannot write '" + (dir / name).string() + "'");
        return f;
    };
    {
        auto f = open("sweep.csv");
        write_surface_csv(f, surf);
    }
    {
        auto f = open("sweep_table.csv");
        write_table_csv(f, table);
    }
    {
        auto csv = open("heatmap.csv");
        auto pgm = open("heatmap.pgm");
        emit_heatmap(surf, metric, csv, pgm);
    }
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& c : surf.cells) best = std::max(best, c.get(metric));
    out << "wrote " << (dir / "sweep.csv").string() << " (" << surf.x.size() << "x" << surf.y.size()
        << " grid, best " << format_db(best) << ")\n";
    return kOk;
}

struct SynthArgs {
    std::string out_dir = "data";
};

inline int run_synth(const SynthArgs& a, std::ostream& out) {
    const fs::path dir(a.out_dir);
    fs::create_directories(dir);
    save_signal_csv(dir / "synthetic_1d.csv", testdata::synthetic_signal().values());
    for (std::size_t n : {64u, 128u}) {
        const Potential img = testdata::textured_image(n);
        std::vector<double> v(img.values().begin(), img.values().end());
        for (auto& x : v) x *= 65535.0;
        const auto name = "textured_" + std::to_string(n) + ".pgm";
        save_pgm(dir / name, to_pgm(img.with_values(std::move(v)), 65535));
    }
    out << "wrote synthetic_1d.csv, textured_64.pgm, textured_128.pgm to " << dir.string() << '\n';
    return kOk;
}

// ----------------------------------------------------------- dispatch ----

inline int cli_dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
    CLI::App app{"Adaptive quantum-basis denoiser for 1D signals and 2D images", "qab"};
    app.require_subcommand(1);
    std::size_t threads = default_thread_count();
    app.add_option("--threads", threads, "Worker threads (default: QAB_THREADS or all cores)")
        ->check(CLI::PositiveNumber);

    DenoiseArgs dn;
    auto* denoise_cmd = app.add_subcommand("denoise", "Denoise a signal (.csv) or image (.pgm)");
    denoise_cmd->add_option("--input", dn.input, "Input file");
    denoise_cmd->add_option("--output", dn.output, "Output file");
    denoise_cmd->add_option("--planck", dn.planck, "hbar^2/2m")->capture_default_str();
    denoise_cmd->add_option("--sigma2", dn.sigma2, "Variance of the pre-smoothing Gaussian")->capture_default_str();
    denoise_cmd->add_option("--s", dn.s, "Rank cutoff (default ceil(0.15 * block dim))");
    denoise_cmd->add_option("--rho", dn.rho, "Threshold ramp length")->capture_default_str();
    denoise_cmd->add_option("--block", dn.block, "Block side (images default to 32)");
    denoise_cmd->add_option("--normalize", dn.normalize, "none | unit | byte (default: unit for images, none for signals)");
    denoise_cmd->add_flag("--smooth-per-block", dn.smooth_per_block, "Smooth each block separately");
    denoise_cmd->add_option("--config", dn.config, "key=value file; command-line flags take precedence");

    AddNoiseArgs an;
    auto* noise_cmd = app.add_subcommand("addnoise", "Add seeded noise at a target SNR");
    noise_cmd->add_option("--input", an.input, "Clean input file");
    noise_cmd->add_option("--output", an.output, "Noisy output file");
    noise_cmd->add_option("--family", an.family, "gaussian | poisson | speckle")->capture_default_str();
    noise_cmd->add_option("--snr-db", an.snr_db, "Target SNR in dB")->capture_default_str();
    noise_cmd->add_option("--seed", an.seed, "RNG seed")->capture_default_str();
    noise_cmd->add_option("--config", an.config, "key=value file; command-line flags take precedence");

    MetricsArgs mt;
    auto* metrics_cmd = app.add_subcommand("metrics", "SNR, PSNR, SSIM and optional CNR");
    metrics_cmd->add_option("--ref", mt.ref, "Reference file");
    metrics_cmd->add_option("--test", mt.test, "Test file");
    metrics_cmd->add_option("--peak", mt.peak, "Peak value (default 255 for 8-bit, else max of reference)");
    metrics_cmd->add_option("--roi-a", mt.roi_a, "CNR region row0,col0,rows,cols");
    metrics_cmd->add_option("--roi-b", mt.roi_b, "CNR region row0,col0,rows,cols");
    metrics_cmd->add_option("--config", mt.config, "key=value file; command-line flags take precedence");

    IprArgs ip;
    auto* ipr_cmd = app.add_subcommand("ipr", "Mean inverse participation ratio versus SNR");
    ipr_cmd->add_option("--input", ip.input, "Clean 1D/2D input (default: bundled synthetic signal)");
    ipr_cmd->add_option("--output", ip.output, "CSV output (default: stdout)");
    ipr_cmd->add_option("--snr-list", ip.snr_list, "Comma-separated SNRs in dB; inf = noiseless")
        ->capture_default_str();
    ipr_cmd->add_option("--trials", ip.trials, "Trials per SNR")->capture_default_str();
    ipr_cmd->add_option("--sigma2", ip.sigma2, "Pre-smoothing variance")->capture_default_str();
    ipr_cmd->add_option("--planck", ip.planck, "hbar^2/2m")->capture_default_str();
    ipr_cmd->add_option("--family", ip.family, "gaussian | poisson | speckle")->capture_default_str();
    ipr_cmd->add_option("--seed", ip.seed, "Master seed")->capture_default_str();
    ipr_cmd->add_option("--config", ip.config, "key=value file; command-line flags take precedence");

    SweepArgs sw;
    auto* sweep_cmd = app.add_subcommand("sweep", "Hyperparameter sweep with CSV and heatmap output");
    sweep_cmd->add_option("--grid-config", sw.grid_config, "Grid definition (key=value)");
    sweep_cmd->add_option("--out-dir", sw.out_dir, "Output directory");

    SynthArgs sy;
    auto* synth_cmd = app.add_subcommand("synth", "Write the bundled synthetic test data");
    synth_cmd->add_option("--out-dir", sy.out_dir, "Output directory")->capture_default_str();

    auto usage = [&](const CLI::App* sub, const std::string& message) {
        err << "error: " << message << "\n\n" << (sub ? sub->help() : app.help());
        return kUsage;
    };

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        err << '\n' << app.help();
        return kUsage;
    }

    CLI::App* active = nullptr;
    try {
        if (denoise_cmd->parsed()) {
            active = denoise_cmd;
            if (!dn.config.empty()) apply_config(*denoise_cmd, dn.config);
            if (dn.input.empty()) return usage(active, "--input is required");
            if (dn.output.empty()) return usage(active, "--output is required");
            return run_denoise(dn, threads, out);
        }
        if (noise_cmd->parsed()) {
            active = noise_cmd;
            if (!an.config.empty()) apply_config(*noise_cmd, an.config);
            if (an.input.empty()) return usage(active, "--input is required");
            if (an.output.empty()) return usage(active, "--output is required");
            return run_addnoise(an, out);
        }
        if (metrics_cmd->parsed()) {
            active = metrics_cmd;
            if (!mt.config.empty()) apply_config(*metrics_cmd, mt.config);
            if (mt.ref.empty()) return usage(active, "--ref is required");
            if (mt.test.empty()) return usage(active, "--test is required");
            return run_metrics(mt, out);
        }
        if (ipr_cmd->parsed()) {
            active = ipr_cmd;
            if (!ip.config.empty()) apply_config(*ipr_cmd, ip.config);
            return run_ipr(ip, threads, out);
        }
        if (sweep_cmd->parsed()) {
            active = sweep_cmd;
            if (sw.grid_config.empty()) return usage(active, "--grid-config is required");
            if (sw.out_dir.empty()) return usage(active, "--out-dir is required");
            return run_sweep_cmd(sw, threads, out);
        }
        if (synth_cmd->parsed()) return run_synth(sy, out);
    } catch (const UsageError& e) {
        return usage(active, e.what());
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kNumerical;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kData;
    } catch (const std::invalid_argument& e) {
        err << "data error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kData;
    }
    return usage(nullptr, "no subcommand given");
}

inline int cli_dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
    std::vector<const char*> argv{"qab"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace qab::cli
