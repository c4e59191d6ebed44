#pragma once

#include <set>
#include <string>
#include <vector>

#include "bench.hpp"
#include "config.hpp"
#include "mer.hpp"
#include "noise.hpp"
#include "peak_fit.hpp"
#include "spectrum.hpp"
#include "wavelet.hpp"

// Mapping between the flat key-value config format and the library option
// structs. These key names are the documented external interface of the CLI;
// frequencies are given in GHz and lengths in micrometers/millimeters where
// the suffix says so.

namespace brillouin {

inline const std::set<std::string>& detector_keys() {
    static const std::set<std::string> keys = {
        "detector.pixel_size_um", "detector.width_mm", "detector.num_pixels",
        "detector.bandwidth_ghz", "detector.response_fwhm_ghz",
    };
    return keys;
}

inline DetectorModel detector_from_config(const KeyValueConfig& cfg) {
    DetectorModel det = make_detector(
        static_cast<int>(cfg.get_int("detector.num_pixels", 120)),
        cfg.get_double("detector.pixel_size_um", 6.5) * 1e-6,
        cfg.get_double("detector.width_mm", 16.6) * 1e-3,
        cfg.get_double("detector.bandwidth_ghz", 60.0) * 1e9);
    det.response_fwhm_hz = cfg.get_double("detector.response_fwhm_ghz", 0.0) * 1e9;
    if (det.response_fwhm_hz > 0.0) {
        // Lorentzian blur of the stated FWHM, rows normalized to unit sum
        const std::vector<double> axis = frequency_axis(det);
        const std::size_t n = axis.size();
        det.response.assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double row_sum = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double v = lorentzian_value({axis[i], det.response_fwhm_hz, 1.0}, axis[j]);
                det.response[i * n + j] = v;
                row_sum += v;
            }
            for (std::size_t j = 0; j < n; ++j) det.response[i * n + j] /= row_sum;
        }
    }
    return det;
}

inline void detector_to_config(const DetectorModel& det, KeyValueConfig& cfg) {
    cfg.set("detector.pixel_size_um", format_double(det.pixel_size_m * 1e6));
    cfg.set("detector.width_mm", format_double(det.detector_width_m * 1e3));
    cfg.set("detector.num_pixels", std::to_string(det.num_pixels));
    cfg.set("detector.bandwidth_ghz", format_double(det.bandwidth_hz() / 1e9));
    cfg.set("detector.response_fwhm_ghz", format_double(det.response_fwhm_hz / 1e9));
}

inline const std::set<std::string>& truth_keys() {
    static const std::set<std::string> keys = {
        "truth.shift_ghz", "truth.fwhm_ghz", "truth.rayleigh_amplitude",
        "truth.brillouin_amplitude", "truth.background",
    };
    return keys;
}

inline GroundTruth truth_from_config(const KeyValueConfig& cfg) {
    return make_three_peak_truth(cfg.get_double("truth.shift_ghz", 10.0) * 1e9,
                                 cfg.get_double("truth.fwhm_ghz", 1.0) * 1e9,
                                 cfg.get_double("truth.rayleigh_amplitude", 1e4),
                                 cfg.get_double("truth.brillouin_amplitude", 1e3),
                                 cfg.get_double("truth.background", 0.0));
}

inline void truth_to_config(const GroundTruth& truth, KeyValueConfig& cfg) {
    cfg.set("truth.shift_ghz", format_double(truth.brillouin_shift_hz / 1e9));
    cfg.set("truth.fwhm_ghz", format_double(truth.brillouin_fwhm_hz / 1e9));
    double rayleigh = 0.0, best = 1e300;
    for (const auto& p : truth.peaks) {
        if (std::abs(p.center_hz) < best) {
            best = std::abs(p.center_hz);
            rayleigh = p.amplitude;
        }
    }
    cfg.set("truth.rayleigh_amplitude", format_double(rayleigh));
    cfg.set("truth.brillouin_amplitude", format_double(brillouin_amplitude(truth)));
    cfg.set("truth.background", format_double(truth.background));
}

inline const std::set<std::string>& mer_keys() {
    static const std::set<std::string> keys = {
        "mer.lambda", "mer.chi0_sq", "mer.termination_threshold", "mer.max_iterations",
        "mer.num_conjugate_dirs", "mer.positivity_floor", "mer.wolfe_c1", "mer.wolfe_c2",
        "mer.entropy_form", "mer.auto_lambda", "mer.sigma", "mer.prior_background_fraction",
        "mer.prior_peaks", "mer.max_line_search_evals",
    };
    return keys;
}

/// mer.prior_peaks format: semicolon-separated center_ghz:fwhm_ghz:amplitude
/// triples, e.g. "-10:1:1000;10:1:1000".
inline std::vector<LorentzianPeak> prior_peaks_from_config(const KeyValueConfig& cfg) {
    std::vector<LorentzianPeak> peaks;
    const std::string text = cfg.get_string("mer.prior_peaks", "");
    if (text.empty()) return peaks;
    for (const std::string& entry : split(text, ';')) {
        const auto parts = split(entry, ':');
        if (parts.size() != 3) throw std::runtime_error("mer.prior_peaks: expected center:fwhm:amplitude");
        peaks.push_back({parse_double(parts[0]) * 1e9, parse_double(parts[1]) * 1e9, parse_double(parts[2])});
    }
    return peaks;
}

inline MerConfig mer_from_config(const KeyValueConfig& cfg) {
    MerConfig mer;
    mer.lambda = cfg.get_double("mer.lambda", mer.lambda);
    mer.chi0_sq = cfg.get_double("mer.chi0_sq", mer.chi0_sq);
    mer.termination_threshold = cfg.get_double("mer.termination_threshold", mer.termination_threshold);
    mer.max_iterations = static_cast<int>(cfg.get_int("mer.max_iterations", mer.max_iterations));
    mer.num_conjugate_dirs = static_cast<int>(cfg.get_int("mer.num_conjugate_dirs", mer.num_conjugate_dirs));
    mer.positivity_floor = cfg.get_double("mer.positivity_floor", mer.positivity_floor);
    mer.wolfe_c1 = cfg.get_double("mer.wolfe_c1", mer.wolfe_c1);
    mer.wolfe_c2 = cfg.get_double("mer.wolfe_c2", mer.wolfe_c2);
    const std::string form = cfg.get_string("mer.entropy_form", "skilling-gull");
    if (form == "skilling-gull")
        mer.entropy_form = EntropyForm::skilling_gull;
    else if (form == "paper-shannon")
        mer.entropy_form = EntropyForm::paper_shannon;
    else
        throw std::runtime_error("mer.entropy_form: expected skilling-gull or paper-shannon");
    mer.auto_lambda = cfg.get_bool("mer.auto_lambda", mer.auto_lambda);
    mer.max_line_search_evals =
        static_cast<int>(cfg.get_int("mer.max_line_search_evals", mer.max_line_search_evals));
    return mer;
}

inline void mer_to_config(const MerConfig& mer, KeyValueConfig& cfg) {
    cfg.set("mer.lambda", format_double(mer.lambda));
    cfg.set("mer.chi0_sq", format_double(mer.chi0_sq));
    cfg.set("mer.termination_threshold", format_double(mer.termination_threshold));
    cfg.set("mer.max_iterations", std::to_string(mer.max_iterations));
    cfg.set("mer.num_conjugate_dirs", std::to_string(mer.num_conjugate_dirs));
    cfg.set("mer.positivity_floor", format_double(mer.positivity_floor));
    cfg.set("mer.wolfe_c1", format_double(mer.wolfe_c1));
    cfg.set("mer.wolfe_c2", format_double(mer.wolfe_c2));
    cfg.set("mer.entropy_form", to_string(mer.entropy_form));
    cfg.set("mer.auto_lambda", mer.auto_lambda ? "true" : "false");
}

inline const std::set<std::string>& wavelet_keys() {
    static const std::set<std::string> keys = {
        "wavelet.family", "wavelet.levels", "wavelet.threshold_mode", "wavelet.threshold_rule",
        "wavelet.noise_level", "wavelet.boundary", "wavelet.threshold_scale",
    };
    return keys;
}

inline WaveletConfig wavelet_from_config(const KeyValueConfig& cfg, const WaveletConfig& base = {}) {
    WaveletConfig wav = base;
    wav.family = cfg.get_string("wavelet.family", wav.family);
    wav.levels = static_cast<int>(cfg.get_int("wavelet.levels", wav.levels));
    const std::string mode = cfg.get_string("wavelet.threshold_mode", to_string(wav.threshold_mode));
    if (mode == "soft")
        wav.threshold_mode = ThresholdMode::soft;
    else if (mode == "hard")
        wav.threshold_mode = ThresholdMode::hard;
    else
        throw std::runtime_error("wavelet.threshold_mode: expected soft or hard");
    const std::string rule = cfg.get_string("wavelet.threshold_rule", to_string(wav.threshold_rule));
    if (rule == "donoho-universal")
        wav.threshold_rule = ThresholdRule::donoho_universal;
    else if (rule == "paper-universal")
        wav.threshold_rule = ThresholdRule::paper_universal;
    else if (rule == "level-dependent")
        wav.threshold_rule = ThresholdRule::level_dependent;
    else
        throw std::runtime_error("wavelet.threshold_rule: unknown rule " + rule);
    wav.noise_level = cfg.get_double("wavelet.noise_level", wav.noise_level);
    const std::string boundary = cfg.get_string("wavelet.boundary", to_string(wav.boundary));
    if (boundary == "symmetric")
        wav.boundary = BoundaryMode::symmetric;
    else if (boundary == "periodic")
        wav.boundary = BoundaryMode::periodic;
    else if (boundary == "zero")
        wav.boundary = BoundaryMode::zero;
    else
        throw std::runtime_error("wavelet.boundary: unknown mode " + boundary);
    wav.threshold_scale = cfg.get_double("wavelet.threshold_scale", wav.threshold_scale);
    return wav;
}

inline void wavelet_to_config(const WaveletConfig& wav, KeyValueConfig& cfg) {
    cfg.set("wavelet.family", wav.family);
    cfg.set("wavelet.levels", std::to_string(wav.levels));
    cfg.set("wavelet.threshold_mode", to_string(wav.threshold_mode));
    cfg.set("wavelet.threshold_rule", to_string(wav.threshold_rule));
    cfg.set("wavelet.noise_level", format_double(wav.noise_level));
    cfg.set("wavelet.boundary", to_string(wav.boundary));
    cfg.set("wavelet.threshold_scale", format_double(wav.threshold_scale));
}

inline const std::set<std::string>& fit_keys() {
    static const std::set<std::string> keys = {
        "fit.n_peaks", "fit.max_iter", "fit.tol", "fit.max_count_value",
    };
    return keys;
}

inline FitOptions fit_options_from_config(const KeyValueConfig& cfg) {
    FitOptions opt;
    opt.max_iter = static_cast<int>(cfg.get_int("fit.max_iter", opt.max_iter));
    opt.tol = cfg.get_double("fit.tol", opt.tol);
    opt.max_count_value = cfg.get_double("fit.max_count_value", opt.max_count_value);
    return opt;
}

inline const std::set<std::string>& bench_keys() {
    static const std::set<std::string> keys = {
        "bench.snr_grid", "bench.realizations", "bench.methods", "bench.regenerate_infeasible",
        "bench.seed", "bench.threads", "bench.mer_use_prior", "bench.prior_background_fraction",
        "bench.mer_lambda_from_table",
    };
    return keys;
}

inline BenchConfig bench_from_config(const KeyValueConfig& cfg) {
    BenchConfig bench;
    bench.truth = truth_from_config(cfg);
    bench.detector = detector_from_config(cfg);
    bench.snr_grid = cfg.get_double_list("bench.snr_grid", bench.snr_grid);
    bench.realizations = static_cast<int>(cfg.get_int("bench.realizations", bench.realizations));
    const std::string methods = cfg.get_string("bench.methods", "none,wa,mer");
    bench.methods.clear();
    for (const std::string& name : split(methods, ','))
        if (!name.empty()) bench.methods.push_back(method_from_string(name));
    bench.regenerate_infeasible = cfg.get_bool("bench.regenerate_infeasible", bench.regenerate_infeasible);
    bench.base_seed = static_cast<std::uint64_t>(cfg.get_int("bench.seed", 1));
    bench.threads = static_cast<int>(cfg.get_int("bench.threads", bench.threads));
    bench.mer_config = mer_from_config(cfg);
    bench.mer_use_prior = cfg.get_bool("bench.mer_use_prior", bench.mer_use_prior);
    bench.prior_background_fraction =
        cfg.get_double("bench.prior_background_fraction", bench.prior_background_fraction);
    bench.mer_lambda_from_table = cfg.get_bool("bench.mer_lambda_from_table", bench.mer_lambda_from_table);
    // layer user keys over the bench's own wavelet defaults (2 thresholded
    // octaves), not the raw module defaults
    bench.wavelet_config = wavelet_from_config(cfg, bench.wavelet_config);
    bench.fit_options = fit_options_from_config(cfg);
    return bench;
}

/// Canonical echo of a bench run's full configuration (provenance sidecar).
inline std::string bench_provenance(const BenchConfig& bench) {
    KeyValueConfig cfg;
    truth_to_config(bench.truth, cfg);
    detector_to_config(bench.detector, cfg);
    mer_to_config(bench.mer_config, cfg);
    wavelet_to_config(bench.wavelet_config, cfg);
    std::string grid;
    for (std::size_t i = 0; i < bench.snr_grid.size(); ++i) {
        if (i) grid += ',';
        grid += format_double(bench.snr_grid[i]);
    }
    cfg.set("bench.snr_grid", grid);
    cfg.set("bench.realizations", std::to_string(bench.realizations));
    std::string methods;
    for (std::size_t i = 0; i < bench.methods.size(); ++i) {
        if (i) methods += ',';
        methods += to_string(bench.methods[i]);
    }
    cfg.set("bench.methods", methods);
    cfg.set("bench.regenerate_infeasible", bench.regenerate_infeasible ? "true" : "false");
    cfg.set("bench.seed", std::to_string(bench.base_seed));
    cfg.set("bench.threads", std::to_string(bench.threads));
    cfg.set("bench.mer_use_prior", bench.mer_use_prior ? "true" : "false");
    cfg.set("bench.prior_background_fraction", format_double(bench.prior_background_fraction));
    cfg.set("bench.mer_lambda_from_table", bench.mer_lambda_from_table ? "true" : "false");
    cfg.set("fit.max_iter", std::to_string(bench.fit_options.max_iter));
    cfg.set("fit.tol", format_double(bench.fit_options.tol));
    cfg.set("fit.max_count_value", format_double(bench.fit_options.max_count_value));
    cfg.set("noise.snr_convention", "peak-based");
    return cfg.to_string();
}

}  // namespace brillouin
