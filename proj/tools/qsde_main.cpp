// Command-line front end: simulate the SDE, compose the return model,
// analyze series, and ingest tick data. Every run writes a manifest that
// reproduces it exactly via --config.
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qsde/io.hpp"
#include "qsde/qgaussian.hpp"
#include "qsde/return_model.hpp"
#include "qsde/sde.hpp"
#include "qsde/spectrum.hpp"

namespace fs = std::filesystem;
using namespace qsde;

namespace {

constexpr const char* kVersion = "1.0.0";

// Resolved configuration: built-in defaults, overlaid by a config file,
// overlaid by CLI flags. Serialized verbatim as the manifest.
class Config {
public:
    Config(std::string command, KeyValueMap defaults)
        : command_(std::move(command)), values_(std::move(defaults)) {}

    void overlay_file(const std::string& path) {
        for (const auto& [key, value] : read_key_value(path)) {
            if (key == "command") {
                if (value != command_) {
                    throw std::invalid_argument(
                        "config file is for command '" + value + "'");
                }
                continue;
            }
            if (key == "version") continue;
            if (values_.find(key) == values_.end()) {
                throw std::invalid_argument("unknown config key: " + key);
            }
            values_[key] = value;
        }
    }

    void set(const std::string& key, const std::string& value) {
        values_.at(key) = value;
    }

    const std::string& str(const std::string& key) const {
        return values_.at(key);
    }
    double num(const std::string& key) const {
        return std::stod(values_.at(key));
    }
    std::uint64_t count(const std::string& key) const {
        return std::stoull(values_.at(key));
    }
    bool flag(const std::string& key) const {
        return values_.at(key) == "1" || values_.at(key) == "true";
    }

    void write_manifest(const std::string& path) const {
        KeyValueMap kv = values_;
        kv["command"] = command_;
        kv["version"] = kVersion;
        write_key_value(path, kv);
    }

private:
    std::string command_;
    KeyValueMap values_;
};

std::string default_output_dir() {
    if (const char* env = std::getenv("QSDE_OUTPUT_DIR")) {
        return env;
    }
    return ".";
}

fs::path prepare_output_dir(const Config& cfg) {
    fs::path dir(cfg.str("output"));
    fs::create_directories(dir);
    return dir;
}

SdeParams sde_params_from(const Config& cfg) {
    SdeParams p;
    p.eta = cfg.num("eta");
    p.lambda = cfg.num("lambda");
    p.epsilon = cfg.num("epsilon");
    p.r0 = cfg.num("r0");
    p.sigma = cfg.num("sigma");
    p.validate();
    return p;
}

SolverConfig solver_from(const Config& cfg) {
    SolverConfig s;
    s.kappa = cfg.num("kappa");
    s.burn_in = cfg.count("burn-in");
    s.x_init = cfg.num("x-init");
    s.seed = cfg.count("seed");
    return s;
}

// Registers --config plus one CLI option per config key; flags that the
// user actually passed overwrite the (possibly file-provided) values
// after parsing.
struct OptionBinder {
    CLI::App* app;
    Config* cfg;
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> pending;

    OptionBinder(CLI::App* app_, Config* cfg_) : app(app_), cfg(cfg_) {
        app->add_option("--config", config_path,
                        "key=value config file (a manifest works)");
    }

    void bind(const std::string& key, const std::string& help) {
        app->add_option("--" + key)
            ->description(help)
            ->each([this, key](const std::string& value) {
                pending.emplace_back(key, value);
            });
    }

    void bind_flag(const std::string& key, const std::string& help) {
        app->add_flag_callback(
            "--" + key, [this, key]() { pending.emplace_back(key, "1"); },
            help);
    }

    void resolve() {
        if (!config_path.empty()) {
            cfg->overlay_file(config_path);
        }
        for (const auto& [key, value] : pending) {
            cfg->set(key, value);
        }
    }
};

int run_simulate(Config& cfg) {
    const SdeParams p = sde_params_from(cfg);
    SolverConfig s = solver_from(cfg);
    s.t_end = cfg.num("t-end");
    s.max_steps = cfg.count("max-steps");
    s.reflect_bound = cfg.num("reflect");
    s.validate();
    const std::string format = cfg.str("format");
    if (format != "csv" && format != "bin") {
        throw std::invalid_argument("format must be csv or bin");
    }

    const Trajectory traj = simulate(p, s);

    const fs::path dir = prepare_output_dir(cfg);
    if (format == "bin") {
        write_trajectory_binary((dir / "trajectory.bin").string(), traj);
    } else {
        write_trajectory_csv((dir / "trajectory.csv").string(), traj);
    }
    cfg.write_manifest((dir / "manifest.txt").string());
    std::cout << "wrote " << (dir / ("trajectory." + format)).string()
              << " (" << traj.times.size() << " samples, final t="
              << traj.times.back() << ")\n";
    return 0;
}

int run_returns(Config& cfg) {
    ReturnModelParams params = ReturnModelParams::preset_defaults();
    params.sde = sde_params_from(cfg);
    params.solver = solver_from(cfg);
    params.lambda2 = cfg.num("lambda2");
    params.r0_bar = cfg.num("r0-bar");
    params.tau = cfg.num("tau");
    params.ma_window = cfg.count("ma-window");
    params.modulation.intercept = cfg.num("modulation-intercept");
    params.modulation.slope = cfg.num("modulation-slope");
    params.validate();

    const auto n_minutes = cfg.count("minutes");
    if (n_minutes == 0) {
        throw std::invalid_argument("minutes must be >= 1");
    }
    const auto realizations = cfg.count("realizations");
    if (realizations == 0) {
        throw std::invalid_argument("realizations must be >= 1");
    }
    const auto seed = cfg.count("seed");
    const bool emit_modulator = cfg.flag("emit-modulator");

    std::vector<std::future<GeneratedReturns>> jobs;
    for (std::uint64_t k = 0; k < realizations; ++k) {
        jobs.push_back(std::async(std::launch::async, [&, k]() {
            return generate_returns_with_modulator(params, n_minutes,
                                                   seed + k);
        }));
    }

    const fs::path dir = prepare_output_dir(cfg);
    for (std::uint64_t k = 0; k < realizations; ++k) {
        const GeneratedReturns gen = jobs[k].get();
        std::string suffix =
            realizations == 1 ? "" : "_" + std::to_string(k);
        write_series_csv((dir / ("returns" + suffix + ".csv")).string(),
                         gen.returns);
        if (emit_modulator) {
            ReturnSeries mod;
            mod.values = gen.modulator;
            mod.dt = 1.0;
            write_series_csv(
                (dir / ("modulator" + suffix + ".csv")).string(), mod);
        }
    }
    cfg.write_manifest((dir / "manifest.txt").string());
    std::cout << "wrote " << realizations << " series of " << n_minutes
              << " minutes to " << dir.string() << "\n";
    return 0;
}

ReturnSeries load_analysis_input(const std::string& path, double tau) {
    const fs::path p(path);
    if (p.extension() == ".bin") {
        return integrate_window(read_trajectory_binary(path), tau);
    }
    // Peek the CSV header to distinguish trajectory from series files.
    std::ifstream is(path);
    if (!is) throw IoError("cannot open for reading: " + path);
    std::string header;
    std::getline(is, header);
    is.close();
    if (header.rfind("t,x", 0) == 0) {
        return integrate_window(read_trajectory_csv(path), tau);
    }
    return read_series_csv(path);
}

int run_analyze(Config& cfg) {
    std::vector<std::string> inputs;
    {
        std::string joined = cfg.str("input");
        if (joined.empty()) {
            throw std::invalid_argument("analyze needs --input");
        }
        std::size_t pos = 0;
        while (pos != std::string::npos) {
            const auto next = joined.find(';', pos);
            inputs.push_back(joined.substr(
                pos, next == std::string::npos ? next : next - pos));
            pos = next == std::string::npos ? next : next + 1;
        }
    }
    std::sort(inputs.begin(), inputs.end());

    const double tau = cfg.num("tau");
    const bool use_abs = !cfg.flag("signed");
    const auto n_segments = cfg.count("segments");
    const Taper taper =
        cfg.str("taper") == "rectangular" ? Taper::Rectangular : Taper::Hann;

    std::vector<ReturnSeries> loaded;
    for (const auto& path : inputs) {
        ReturnSeries s = load_analysis_input(path, tau);
        if (s.values.empty()) throw IoError("empty input: " + path);
        if (use_abs) {
            for (double& v : s.values) v = std::abs(v);
        }
        loaded.push_back(std::move(s));
    }

    // Averaged PSD over realizations (inputs sorted above, so the reduce
    // order is deterministic).
    SpectrumEstimate psd = estimate_psd(loaded[0], n_segments, taper);
    for (std::size_t i = 1; i < loaded.size(); ++i) {
        const SpectrumEstimate next = estimate_psd(loaded[i], n_segments, taper);
        if (next.freqs.size() != psd.freqs.size()) {
            throw std::invalid_argument(
                "analyze: inputs disagree on spectral grid");
        }
        for (std::size_t k = 0; k < psd.power.size(); ++k) {
            psd.power[k] += next.power[k];
        }
    }
    for (double& v : psd.power) v /= double(loaded.size());

    PdfBinning binning;
    binning.n_bins = cfg.count("pdf-bins");
    binning.log_bins = cfg.flag("pdf-log");
    binning.absolute = use_abs;
    ReturnSeries pooled;
    for (const auto& s : loaded) {
        pooled.values.insert(pooled.values.end(), s.values.begin(),
                             s.values.end());
    }
    const auto pdf = estimate_pdf(pooled, binning);

    std::optional<PowerLawFit> fit;
    const double f_lo = cfg.num("fit-lo");
    const double f_hi = cfg.num("fit-hi");
    if (f_hi > 0.0) {
        fit = fit_power_law(psd, f_lo, f_hi);
    }

    const fs::path dir = prepare_output_dir(cfg);
    write_spectrum_csv((dir / "psd.csv").string(), psd);
    write_pdf_csv((dir / "pdf.csv").string(), pdf);

    std::ofstream report(dir / "report.txt");
    report << "inputs=" << inputs.size() << "\n";
    report << "samples=" << pooled.values.size() << "\n";
    if (fit) {
        report << "fit_exponent=" << fit->exponent << "\n";
        report << "fit_amplitude=" << fit->amplitude << "\n";
        report << "fit_range=" << fit->f_lo << "," << fit->f_hi << "\n";
        report << "fit_residual=" << fit->residual << "\n";
    }

    if (cfg.flag("theory")) {
        SdeParams p = sde_params_from(cfg);
        const double beta = spectral_exponent(p);
        const double amp = spectral_amplitude(p);
        report << "theory_beta=" << beta << "\n";
        report << "theory_amplitude=" << amp << "\n";
        // Closed-form overlays on the estimated grids.
        {
            std::ofstream os(dir / "psd_theory.csv");
            os << "freq,power,theory\n";
            for (std::size_t k = 0; k < psd.freqs.size(); ++k) {
                os << psd.freqs[k] << ',' << psd.power[k] << ','
                   << amp / std::pow(psd.freqs[k], beta) << '\n';
            }
        }
        {
            const QGaussianParams qp(p.lambda, 1.0);
            std::ofstream os(dir / "pdf_theory.csv");
            os << "bin,density,theory\n";
            for (const auto& pt : pdf) {
                const double factor = use_abs ? 2.0 : 1.0;
                os << pt.center << ',' << pt.density << ','
                   << factor * qgaussian_pdf(pt.center, qp) << '\n';
            }
        }
    }
    cfg.write_manifest((dir / "manifest.txt").string());
    std::cout << "wrote analysis to " << dir.string() << "\n";
    if (fit) {
        std::cout << "fitted exponent " << fit->exponent << " amplitude "
                  << fit->amplitude << " over [" << f_lo << ", " << f_hi
                  << "]\n";
    }
    return 0;
}

int run_ingest(Config& cfg) {
    const std::string input = cfg.str("input");
    if (input.empty()) {
        throw std::invalid_argument("ingest needs --input");
    }
    const double bar_seconds = cfg.num("bar-seconds");
    const auto ticks = read_ticks_csv(input);
    ReturnSeries bars = aggregate_ticks(ticks, bar_seconds);

    const fs::path dir = prepare_output_dir(cfg);
    write_series_csv((dir / "bars.csv").string(), bars);

    if (cfg.flag("decompose")) {
        // The modulation coefficients live in normalized-return units.
        const ReturnSeries normalized = normalize_returns(bars);
        const auto result = decompose_empirical(
            normalized, cfg.count("ma-window"), cfg.num("lambda2"),
            cfg.count("bins"));
        std::ofstream os(dir / "decomposition.csv");
        os << "ma,r0,count,underpopulated\n";
        for (const auto& bin : result.bins) {
            os << bin.ma_center << ',' << bin.r0_fit << ',' << bin.count
               << ',' << (bin.underpopulated ? 1 : 0) << '\n';
        }
        std::ofstream report(dir / "report.txt");
        report << "modulation_intercept=" << result.fitted.intercept << "\n";
        report << "modulation_slope=" << result.fitted.slope << "\n";
        for (const auto& bin : result.bins) {
            if (bin.underpopulated) {
                std::cerr << "warning: MA bin at " << bin.ma_center
                          << " has only " << bin.count << " points\n";
            }
        }
        std::cout << "modulation fit: intercept "
                  << result.fitted.intercept << ", slope "
                  << result.fitted.slope << "\n";
    }
    cfg.write_manifest((dir / "manifest.txt").string());
    std::cout << "wrote " << bars.values.size() << " bars to "
              << dir.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonlinear SDE return model: simulation and analysis"};
    app.require_subcommand(1);

    const std::string out_dir = default_output_dir();

    Config sim_cfg("simulate",
                   {{"eta", "2.5"},
                    {"lambda", "3.6"},
                    {"epsilon", "0"},
                    {"r0", "1"},
                    {"sigma", "1"},
                    {"kappa", "0.01"},
                    {"burn-in", "1000000"},
                    {"x-init", "0"},
                    {"seed", "0"},
                    {"t-end", "0"},
                    {"max-steps", "0"},
                    {"reflect", "0"},
                    {"format", "csv"},
                    {"output", out_dir}});
    auto* sim = app.add_subcommand("simulate",
                                   "simulate the SDE, write a trajectory");
    OptionBinder sim_bind(sim, &sim_cfg);
    sim_bind.bind("eta", "multiplicativity exponent (> 1)");
    sim_bind.bind("lambda", "stationary-law exponent");
    sim_bind.bind("epsilon", "regime-split parameter (0 = single power)");
    sim_bind.bind("r0", "physical scale");
    sim_bind.bind("sigma", "physical noise amplitude");
    sim_bind.bind("kappa", "step precision parameter");
    sim_bind.bind("burn-in", "discarded initial steps");
    sim_bind.bind("x-init", "initial value");
    sim_bind.bind("seed", "RNG seed");
    sim_bind.bind("t-end", "stop after this much scaled time");
    sim_bind.bind("max-steps", "stop after this many steps (0 = no cap)");
    sim_bind.bind("reflect", "mirror boundary at |x| (0 = off)");
    sim_bind.bind("format", "csv | bin");
    sim_bind.bind("output", "output directory");

    Config ret_cfg("returns",
                   {{"eta", "2.5"},
                    {"lambda", "3.6"},
                    {"epsilon", "0.01"},
                    {"r0", "1"},
                    {"sigma", "1"},
                    {"kappa", "0.01"},
                    {"burn-in", "1000000"},
                    {"x-init", "0"},
                    {"seed", "0"},
                    {"lambda2", "5"},
                    {"r0-bar", "0.2"},
                    {"tau", "0.0001"},
                    {"ma-window", "60"},
                    {"modulation-intercept", "1"},
                    {"modulation-slope", "2.5"},
                    {"minutes", "0"},
                    {"realizations", "1"},
                    {"emit-modulator", "0"},
                    {"output", out_dir}});
    auto* ret = app.add_subcommand(
        "returns", "generate double-stochastic minute returns");
    OptionBinder ret_bind(ret, &ret_cfg);
    ret_bind.bind("eta", "background multiplicativity exponent");
    ret_bind.bind("lambda", "background stationary exponent");
    ret_bind.bind("epsilon", "background regime split");
    ret_bind.bind("r0", "physical scale");
    ret_bind.bind("sigma", "physical noise amplitude");
    ret_bind.bind("kappa", "step precision parameter");
    ret_bind.bind("burn-in", "discarded initial steps");
    ret_bind.bind("x-init", "initial value");
    ret_bind.bind("seed", "RNG seed");
    ret_bind.bind("lambda2", "fluctuation-layer exponent");
    ret_bind.bind("r0-bar", "background scale of the modulator");
    ret_bind.bind("tau", "scaled-time length of one minute");
    ret_bind.bind("ma-window", "moving-average window, minutes");
    ret_bind.bind("modulation-intercept", "modulation line intercept");
    ret_bind.bind("modulation-slope", "modulation line slope");
    ret_bind.bind("minutes", "series length in minutes");
    ret_bind.bind("realizations", "independent seeded runs");
    ret_bind.bind_flag("emit-modulator", "also write the modulator series");
    ret_bind.bind("output", "output directory");
    bool preset_defaults = false;
    ret->add_flag("--preset-defaults", preset_defaults,
                  "use the published preset (already the default values)");

    Config ana_cfg("analyze",
                   {{"input", ""},
                    {"tau", "0.0001"},
                    {"signed", "0"},
                    {"segments", "32"},
                    {"taper", "hann"},
                    {"pdf-bins", "60"},
                    {"pdf-log", "0"},
                    {"fit-lo", "0"},
                    {"fit-hi", "0"},
                    {"theory", "0"},
                    {"eta", "2.5"},
                    {"lambda", "3.6"},
                    {"epsilon", "0.01"},
                    {"r0", "1"},
                    {"sigma", "1"},
                    {"output", out_dir}});
    auto* ana = app.add_subcommand("analyze",
                                   "PSD / PDF / power-law fits of a series");
    OptionBinder ana_bind(ana, &ana_cfg);
    ana_bind.bind("input", "input file(s), ';'-separated");
    ana_bind.bind("tau", "window for trajectory inputs");
    ana_bind.bind_flag("signed", "analyze X instead of |X|");
    ana_bind.bind("segments", "Welch segment count");
    ana_bind.bind("taper", "hann | rectangular");
    ana_bind.bind("pdf-bins", "histogram bin count");
    ana_bind.bind_flag("pdf-log", "logarithmic histogram bins");
    ana_bind.bind("fit-lo", "power-law fit lower frequency");
    ana_bind.bind("fit-hi", "power-law fit upper frequency");
    ana_bind.bind_flag("theory", "emit closed-form overlay columns");
    ana_bind.bind("eta", "eta for --theory");
    ana_bind.bind("lambda", "lambda for --theory");
    ana_bind.bind("epsilon", "epsilon for --theory");
    ana_bind.bind("r0", "r0 for --theory");
    ana_bind.bind("sigma", "sigma for --theory");
    ana_bind.bind("output", "output directory");

    Config ing_cfg("ingest",
                   {{"input", ""},
                    {"bar-seconds", "60"},
                    {"decompose", "0"},
                    {"ma-window", "60"},
                    {"lambda2", "5"},
                    {"bins", "20"},
                    {"output", out_dir}});
    auto* ing = app.add_subcommand("ingest",
                                   "aggregate tick data into minute bars");
    OptionBinder ing_bind(ing, &ing_cfg);
    ing_bind.bind("input", "tick CSV (timestamp,price)");
    ing_bind.bind("bar-seconds", "bar duration in seconds");
    ing_bind.bind_flag("decompose", "fit the modulation line from the bars");
    ing_bind.bind("ma-window", "moving-average window for decomposition");
    ing_bind.bind("lambda2", "fixed exponent of the per-bin scale fit");
    ing_bind.bind("bins", "number of equal-population MA bins");
    ing_bind.bind("output", "output directory");

    try {
        app.parse(argc, argv);
        if (sim->parsed()) {
            sim_bind.resolve();
            return run_simulate(sim_cfg);
        }
        if (ret->parsed()) {
            ret_bind.resolve();
            return run_returns(ret_cfg);
        }
        if (ana->parsed()) {
            ana_bind.resolve();
            return run_analyze(ana_cfg);
        }
        if (ing->parsed()) {
            ing_bind.resolve();
            return run_ingest(ing_cfg);
        }
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 3;
    } catch (const DivergenceError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
}
