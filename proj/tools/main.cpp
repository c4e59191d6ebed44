// Command-line front end: simulate, denoise, fit, crlb, bench and sound
// subcommands over CSV spectra and flat key-value configs.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "brillouin/brillouin.hpp"

namespace {

using namespace brillouin;

// exit codes: 0 ok, 1 usage, 2 data, 3 algorithm did not converge
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct AlgorithmError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& common) {
    cmd->add_option("--config", common.config_path, "key = value config file");
    cmd->add_option("--set", common.overrides, "config override key=value (repeatable, wins over file)");
}

KeyValueConfig load_config(const CommonOptions& common, const std::set<std::string>& allowed) {
    KeyValueConfig cfg;
    if (!common.config_path.empty()) {
        try {
            cfg = KeyValueConfig::from_file(common.config_path);
        } catch (const std::exception& e) {
            throw DataError(e.what());
        }
    }
    for (const std::string& assignment : common.overrides) {
        try {
            cfg.apply_override(assignment);
        } catch (const std::exception& e) {
            throw UsageError(e.what());
        }
    }
    try {
        cfg.require_known_keys(allowed);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    return cfg;
}

std::set<std::string> merge_keys(std::initializer_list<const std::set<std::string>*> sets) {
    std::set<std::string> all;
    for (const auto* s : sets) all.insert(s->begin(), s->end());
    return all;
}

const std::set<std::string>& noise_keys() {
    static const std::set<std::string> keys = {"noise.snr", "noise.sigma", "noise.seed",
                                               "noise.snr_convention"};
    return keys;
}

Spectrum read_spectrum_or_throw(const std::string& path) {
    try {
        return read_spectrum_csv(path);
    } catch (const std::exception& e) {
        throw DataError(e.what());
    }
}

void apply_mask_range(Spectrum& s, const std::string& range_ghz) {
    const auto parts = split(range_ghz, ':');
    if (parts.size() != 2) throw UsageError("--mask-ghz expects lo:hi");
    const double lo = parse_double(parts[0]) * 1e9;
    const double hi = parse_double(parts[1]) * 1e9;
    if (hi < lo) throw UsageError("--mask-ghz: hi < lo");
    if (s.mask.empty()) s.mask.assign(s.size(), 0);
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s.frequencies_hz[i] >= lo && s.frequencies_hz[i] <= hi) s.mask[i] = 1;
}

std::string fit_result_text(const FitResult& result) {
    std::string out;
    out += "shift_ghz = " + format_double(result.shift_hz / 1e9) + "\n";
    out += "fwhm_ghz = " + format_double(result.fwhm_hz / 1e9) + "\n";
    out += "rms_error_pct = " + format_double(result.rms_error_pct) + "\n";
    out += "baseline = " + format_double(result.baseline) + "\n";
    out += "converged = " + std::string(result.converged ? "true" : "false") + "\n";
    out += "iterations = " + std::to_string(result.iterations) + "\n";
    for (std::size_t k = 0; k < result.peaks.size(); ++k) {
        const std::string prefix = "peak" + std::to_string(k);
        out += prefix + ".center_ghz = " + format_double(result.peaks[k].center_hz / 1e9) + "\n";
        out += prefix + ".fwhm_ghz = " + format_double(result.peaks[k].fwhm_hz / 1e9) + "\n";
        out += prefix + ".amplitude = " + format_double(result.peaks[k].amplitude) + "\n";
    }
    return out;
}

std::string fit_result_csv(const FitResult& result) {
    std::string out = "shift_ghz,fwhm_ghz,rms_error_pct,converged,iterations\n";
    out += format_double(result.shift_hz / 1e9) + "," + format_double(result.fwhm_hz / 1e9) + "," +
           format_double(result.rms_error_pct) + "," + (result.converged ? "1" : "0") + "," +
           std::to_string(result.iterations) + "\n";
    return out;
}

int run_simulate(const CommonOptions& common, const std::string& out_path, const std::string& noisy_path,
                 double snr, double sigma, std::uint64_t seed, bool seed_given, int subpixel) {
    auto cfg = load_config(common, merge_keys({&detector_keys(), &truth_keys(), &noise_keys()}));
    const DetectorModel detector = detector_from_config(cfg);
    const GroundTruth truth = truth_from_config(cfg);

    SynthesisOptions synth;
    if (subpixel > 0) {
        synth.sampling = PixelSampling::subpixel_integrate;
        synth.subsamples = subpixel;
    }
    Spectrum clean;
    try {
        clean = synthesize(truth, detector, synth);
    } catch (const std::exception& e) {
        throw DataError(e.what());
    }
    write_spectrum_csv(out_path, clean);
    std::cout << "wrote " << out_path << " (" << clean.size() << " pixels)\n";

    const double snr_cfg = cfg.get_double("noise.snr", snr);
    double sigma_value = cfg.get_double("noise.sigma", sigma);
    const std::string convention = cfg.get_string("noise.snr_convention", "peak-based");
    if (snr_cfg > 0.0 && sigma_value <= 0.0) {
        const SnrConvention conv = convention == "per-pixel-average" ? SnrConvention::per_pixel_average
                                                                     : SnrConvention::peak_based;
        sigma_value = sigma_for_snr(snr_cfg, truth, detector, conv);
    }
    if (sigma_value > 0.0) {
        if (noisy_path.empty()) throw UsageError("--noisy-out required when noise is requested");
        NoiseSpec spec;
        spec.sigma = sigma_value;
        spec.seed = seed_given ? seed : static_cast<std::uint64_t>(cfg.get_int("noise.seed", 0));
        const Spectrum noisy = add_noise(clean, spec);
        write_spectrum_csv(noisy_path, noisy);
        std::cout << "wrote " << noisy_path << " (sigma " << format_double(sigma_value) << ", seed "
                  << spec.seed << ")\n";
    }
    return 0;
}

// wavelet coefficient dump: level 0 = approximation, 1 = finest detail band
std::string coefficients_csv(const WaveletCoefficients& coeffs) {
    std::string out = "level,index,value\n";
    for (std::size_t i = 0; i < coeffs.approximation.size(); ++i)
        out += "0," + std::to_string(i) + "," + format_double(coeffs.approximation[i]) + "\n";
    for (std::size_t l = 0; l < coeffs.detail.size(); ++l)
        for (std::size_t i = 0; i < coeffs.detail[l].size(); ++i)
            out += std::to_string(l + 1) + "," + std::to_string(i) + "," +
                   format_double(coeffs.detail[l][i]) + "\n";
    return out;
}

int run_denoise(const CommonOptions& common, const std::string& method, const std::string& in_path,
                const std::string& out_path, const std::string& mask_ghz, double sigma,
                const std::string& trace_path, const std::string& coeffs_path) {
    auto cfg = load_config(common, merge_keys({&detector_keys(), &mer_keys(), &wavelet_keys()}));
    Spectrum input = read_spectrum_or_throw(in_path);
    if (!mask_ghz.empty()) apply_mask_range(input, mask_ghz);

    if (method == "wa") {
        const WaveletConfig wav = wavelet_from_config(cfg);
        Spectrum out;
        try {
            out = denoise(input, wav);
        } catch (const std::exception& e) {
            throw DataError(e.what());
        }
        write_spectrum_csv(out_path, out);
        const auto coeffs = dwt(input.intensities, wav);
        if (!coeffs_path.empty()) write_file_atomic(coeffs_path, coefficients_csv(coeffs));
        std::cout << "method = wa\nnoise_level_estimate = " << format_double(estimate_noise_level(coeffs))
                  << "\nwrote " << out_path << "\n";
        return 0;
    }
    if (method != "mer") throw UsageError("--method must be wa or mer");

    MerConfig mer = mer_from_config(cfg);
    mer.record_trace = !trace_path.empty();
    double sigma_value = sigma > 0.0 ? sigma : cfg.get_double("mer.sigma", -1.0);
    if (sigma_value <= 0.0) {
        // fall back to the wavelet MAD estimate of the white-noise level
        WaveletConfig wav = wavelet_from_config(cfg);
        sigma_value = estimate_noise_level(dwt(input.intensities, wav));
        if (sigma_value <= 0.0) throw DataError("could not estimate noise level; pass --sigma");
    }
    const std::vector<double> sigma_vec(input.size(), sigma_value);

    const auto prior_peaks = prior_peaks_from_config(cfg);
    if (!prior_peaks.empty()) {
        const DetectorModel detector = detector_from_config(cfg);
        double total = 0.0;
        for (std::size_t i = 0; i < input.size(); ++i)
            if (!input.masked(i)) total += input.intensities[i];
        mer.prior_model = build_prior(prior_peaks, detector,
                                      cfg.get_double("mer.prior_background_fraction", 0.3), total);
        if (mer.prior_model.size() != input.size())
            throw DataError("prior model size does not match the spectrum");
    }

    const MerResult result = mer.auto_lambda ? reconstruct_auto_lambda(input, {}, sigma_vec, mer)
                                             : reconstruct(input, {}, sigma_vec, mer);
    write_spectrum_csv(out_path, result.reconstruction);
    if (!trace_path.empty()) {
        std::string trace = "iter,Q,S,chi_sq,termination_metric,mu\n";
        for (const auto& row : result.trace) {
            trace += std::to_string(row.iter) + "," + format_double(row.q) + "," + format_double(row.entropy) +
                     "," + format_double(row.chi_sq) + "," + format_double(row.termination_metric) + "," +
                     format_double(row.mu) + "\n";
        }
        write_file_atomic(trace_path, trace);
    }
    std::cout << "method = mer\nfeasible = " << (result.status == MerStatus::infeasible_data ? "false" : "true")
              << "\nstatus = " << to_string(result.status)
              << "\ntermination_metric = " << format_double(result.final_termination_metric)
              << "\nchi_sq = " << format_double(result.final_chi_sq)
              << "\nentropy = " << format_double(result.final_entropy)
              << "\nlambda = " << format_double(result.lambda_used)
              << "\niterations = " << result.iterations << "\nsigma = " << format_double(sigma_value)
              << "\nwrote " << out_path << "\n";
    if (result.status != MerStatus::converged)
        throw AlgorithmError(result.status == MerStatus::infeasible_data
                                 ? "data too noisy: no maximum-entropy solution inside the constraint"
                                 : "reconstruction hit the iteration limit");
    return 0;
}

int run_fit(const CommonOptions& common, const std::string& in_path, const std::string& out_path,
            int n_peaks, const std::string& mask_ghz, bool csv_row) {
    auto cfg = load_config(common, merge_keys({&fit_keys(), &truth_keys()}));
    Spectrum input = read_spectrum_or_throw(in_path);
    if (!mask_ghz.empty()) apply_mask_range(input, mask_ghz);

    const int peaks = n_peaks > 0 ? n_peaks : static_cast<int>(cfg.get_int("fit.n_peaks", 3));
    FitResult result;
    try {
        const FitModel guess = initial_guess(input, static_cast<std::size_t>(peaks));
        result = fit(input, guess, fit_options_from_config(cfg));
    } catch (const std::exception& e) {
        throw DataError(e.what());
    }
    const std::string text = csv_row ? fit_result_csv(result) : fit_result_text(result);
    if (out_path.empty())
        std::cout << text;
    else {
        write_file_atomic(out_path, text);
        std::cout << "shift_ghz = " << format_double(result.shift_hz / 1e9) << "\nwrote " << out_path << "\n";
    }
    if (!result.converged) throw AlgorithmError("fit did not converge");
    return 0;
}

int run_crlb(const CommonOptions& common, const std::string& out_path, const std::string& grid_text,
             const std::string& convention) {
    auto cfg = load_config(common, merge_keys({&detector_keys(), &truth_keys()}));
    const DetectorModel detector = detector_from_config(cfg);
    const GroundTruth truth = truth_from_config(cfg);

    std::vector<double> grid;
    for (const std::string& cell : split(grid_text, ','))
        if (!cell.empty()) grid.push_back(parse_double(cell));
    if (grid.empty()) throw UsageError("--snr-grid must list at least one SNR");

    CrlbInputs inputs;
    inputs.detector = detector;
    inputs.brillouin_fwhm_hz = truth.brillouin_fwhm_hz;
    double rayleigh = 1.0, best = 1e300;
    for (const auto& p : truth.peaks) {
        if (std::abs(p.center_hz) < best) {
            best = std::abs(p.center_hz);
            rayleigh = p.amplitude;
        }
    }
    inputs.relative_intensity = brillouin_amplitude(truth) / rayleigh;

    std::string csv = "snr,crlb_std_ghz\n";
    const Spectrum clean = synthesize(truth, detector);
    const double integrated = integrated_intensity(clean);
    for (double snr : grid) {
        double snr_pp = snr;
        if (convention == "peak-based") {
            const double sigma = sigma_for_snr(snr, truth, detector, SnrConvention::peak_based);
            snr_pp = snr_per_pixel(integrated, detector, sigma);
        } else if (convention != "per-pixel-average") {
            throw UsageError("--convention must be peak-based or per-pixel-average");
        }
        inputs.snr_per_pixel = snr_pp;
        csv += format_double(snr) + "," + format_double(std::sqrt(crlb_variance(inputs)) / 1e9) + "\n";
    }
    write_file_atomic(out_path, csv);
    std::cout << "wrote " << out_path << " (" << grid.size() << " points, " << convention << " grid)\n";
    return 0;
}

int run_bench_cmd(const CommonOptions& common, const std::string& out_dir, int realizations,
                  std::uint64_t seed, bool seed_given, const std::string& grid_text,
                  const std::string& methods_text, int threads) {
    auto cfg = load_config(common, merge_keys({&detector_keys(), &truth_keys(), &mer_keys(),
                                               &wavelet_keys(), &fit_keys(), &bench_keys()}));
    BenchConfig bench;
    try {
        bench = bench_from_config(cfg);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    if (realizations > 0) bench.realizations = realizations;
    if (seed_given) bench.base_seed = seed;
    if (threads >= 0) bench.threads = threads;
    if (!grid_text.empty()) {
        bench.snr_grid.clear();
        for (const std::string& cell : split(grid_text, ','))
            if (!cell.empty()) bench.snr_grid.push_back(parse_double(cell));
    }
    if (!methods_text.empty()) {
        bench.methods.clear();
        for (const std::string& name : split(methods_text, ','))
            if (!name.empty()) bench.methods.push_back(method_from_string(name));
    }

    BenchReport report = run_bench(bench, [](const std::string& line) { std::cerr << line << "\n"; });
    report.provenance = bench_provenance(bench);
    const auto files = render_plots(report, out_dir);
    for (const auto& f : files) std::cout << "wrote " << f << "\n";
    std::cout << report_to_csv(report);
    if (!report.complete)
        throw AlgorithmError("regeneration budget exhausted before reaching the realization target");
    return 0;
}

int run_sound(double shift_ghz, double wavelength_nm, double index, double angle_deg) {
    double speed = 0.0;
    try {
        speed = speed_of_sound(shift_ghz * 1e9, wavelength_nm * 1e-9, index,
                               angle_deg * 3.14159265358979323846 / 180.0);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    std::cout << "speed_mps = " << format_double(speed) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Brillouin spectrum reconstruction toolkit"};
    app.require_subcommand(1);

    CommonOptions common;

    // simulate
    auto* simulate = app.add_subcommand("simulate", "synthesize a ground-truth spectrum (optionally noisy)");
    std::string sim_out = "spectrum.csv", sim_noisy;
    double sim_snr = 0.0, sim_sigma = 0.0;
    std::uint64_t seed = 0;
    int subpixel = 0;
    add_common(simulate, common);
    simulate->add_option("-o,--output", sim_out, "clean spectrum CSV path");
    simulate->add_option("--noisy-out", sim_noisy, "noisy spectrum CSV path");
    simulate->add_option("--snr", sim_snr, "target SNR for the noisy copy (peak-based unless configured)");
    simulate->add_option("--sigma", sim_sigma, "noise sigma for the noisy copy (overrides --snr)");
    auto* seed_opt = simulate->add_option("--seed", seed, "noise seed");
    simulate->add_flag_function("--subpixel", [&](std::int64_t) { subpixel = 8; },
                                "average 8 sub-samples per pixel instead of center sampling");

    // denoise
    auto* denoise_cmd = app.add_subcommand("denoise", "reconstruct a noisy spectrum (wa or mer)");
    std::string dn_method = "wa", dn_in, dn_out = "denoised.csv", dn_mask, dn_trace, dn_coeffs;
    double dn_sigma = 0.0;
    add_common(denoise_cmd, common);
    denoise_cmd->add_option("--method", dn_method, "wa | mer")->required();
    denoise_cmd->add_option("-i,--input", dn_in, "input spectrum CSV")->required();
    denoise_cmd->add_option("-o,--output", dn_out, "output spectrum CSV");
    denoise_cmd->add_option("--mask-ghz", dn_mask, "exclude pixels with frequency in lo:hi (GHz)");
    denoise_cmd->add_option("--sigma", dn_sigma, "known noise sigma (mer); estimated when omitted");
    denoise_cmd->add_option("--trace", dn_trace, "write the mer iteration trace CSV here");
    denoise_cmd->add_option("--coeffs-out", dn_coeffs, "write wavelet coefficients as level,index,value CSV");

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "Lorentzian fit of a spectrum CSV");
    std::string fit_in, fit_out, fit_mask;
    int fit_peaks = 0;
    bool fit_csv = false;
    add_common(fit_cmd, common);
    fit_cmd->add_option("-i,--input", fit_in, "input spectrum CSV")->required();
    fit_cmd->add_option("-o,--output", fit_out, "result file (default: stdout)");
    fit_cmd->add_option("--n-peaks", fit_peaks, "number of Lorentzians (default 3)");
    fit_cmd->add_option("--mask-ghz", fit_mask, "exclude pixels with frequency in lo:hi (GHz)");
    fit_cmd->add_flag("--csv", fit_csv, "emit the CSV row form instead of key-value text");

    // crlb
    auto* crlb_cmd = app.add_subcommand("crlb", "write the shift-precision bound curve");
    std::string crlb_out = "crlb.csv", crlb_grid = "1,2,3,4,5,6,7,8,9,10", crlb_conv = "per-pixel-average";
    add_common(crlb_cmd, common);
    crlb_cmd->add_option("-o,--output", crlb_out, "output CSV path");
    crlb_cmd->add_option("--snr-grid", crlb_grid, "comma-separated SNR grid");
    crlb_cmd->add_option("--convention", crlb_conv, "peak-based | per-pixel-average");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Monte Carlo estimator benchmark");
    std::string bench_out = "bench_out", bench_grid, bench_methods;
    int bench_realizations = 0, bench_threads = -1;
    std::uint64_t bench_seed = 0;
    add_common(bench_cmd, common);
    bench_cmd->add_option("-o,--output", bench_out, "output directory");
    bench_cmd->add_option("--realizations", bench_realizations, "noise realizations per SNR");
    auto* bench_seed_opt = bench_cmd->add_option("--seed", bench_seed, "base seed");
    bench_cmd->add_option("--snr-grid", bench_grid, "comma-separated SNR grid (peak-based)");
    bench_cmd->add_option("--methods", bench_methods, "subset of none,wa,mer");
    bench_cmd->add_option("--threads", bench_threads, "worker threads (0 = hardware)");

    // sound
    auto* sound_cmd = app.add_subcommand("sound", "convert a Brillouin shift to a speed of sound");
    double sound_shift = 0.0, sound_wavelength = 0.0, sound_index = 0.0, sound_angle = 180.0;
    sound_cmd->add_option("--shift-ghz", sound_shift, "Brillouin shift in GHz")->required();
    sound_cmd->add_option("--wavelength-nm", sound_wavelength, "probe wavelength in nm")->required();
    sound_cmd->add_option("--index", sound_index, "refractive index")->required();
    sound_cmd->add_option("--angle-deg", sound_angle, "scattering angle in degrees (180 = backscattering)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed())
            return run_simulate(common, sim_out, sim_noisy, sim_snr, sim_sigma, seed, seed_opt->count() > 0,
                                subpixel);
        if (denoise_cmd->parsed())
            return run_denoise(common, dn_method, dn_in, dn_out, dn_mask, dn_sigma, dn_trace, dn_coeffs);
        if (fit_cmd->parsed()) return run_fit(common, fit_in, fit_out, fit_peaks, fit_mask, fit_csv);
        if (crlb_cmd->parsed()) return run_crlb(common, crlb_out, crlb_grid, crlb_conv);
        if (bench_cmd->parsed())
            return run_bench_cmd(common, bench_out, bench_realizations, bench_seed,
                                 bench_seed_opt->count() > 0, bench_grid, bench_methods, bench_threads);
        if (sound_cmd->parsed()) return run_sound(sound_shift, sound_wavelength, sound_index, sound_angle);
    } catch (const UsageError& e) {
        std::cerr << "ERROR 1: " << e.what() << "\n";
        return 1;
    } catch (const AlgorithmError& e) {
        std::cerr << "ERROR 3: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "ERROR 2: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
