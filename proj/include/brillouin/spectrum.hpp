#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace brillouin {

/// A single Lorentzian line, peak-height normalized: the profile equals
/// `amplitude` at the center and `amplitude / 2` at center +- fwhm/2.
struct LorentzianPeak {
    double center_hz = 0.0;
    double fwhm_hz = 1.0;
    double amplitude = 1.0;
};

inline double lorentzian_value(const LorentzianPeak& peak, double freq_hz) {
    const double half_width = 0.5 * peak.fwhm_hz;
    const double offset = freq_hz - peak.center_hz;
    return peak.amplitude * half_width * half_width / (offset * offset + half_width * half_width);
}

/// Dispersive-spectrometer geometry: pixel pitch, detector width, number of
/// active pixels and the linear position<->frequency scale. The response
/// matrix (row-major N x N) models instrument blur; empty means identity.
struct DetectorModel {
    double pixel_size_m = 6.5e-6;     // pixel pitch
    double detector_width_m = 16.6e-3;
    int num_pixels = 120;             // active region, may be less than width/pitch
    double dispersion_scale = 1.3e-14;  // meters per Hz; active width / bandwidth
    double response_fwhm_hz = 0.0;    // 0 together with empty response = ideal system
    std::vector<double> response;     // row-major N x N, empty = identity

    double bandwidth_hz() const { return num_pixels * pixel_size_m / dispersion_scale; }
    double frequency_step_hz() const { return pixel_size_m / dispersion_scale; }
    bool identity_response() const { return response.empty(); }

    void validate() const {
        if (num_pixels < 4) throw std::invalid_argument("detector: num_pixels must be >= 4");
        if (dispersion_scale <= 0.0) throw std::invalid_argument("detector: dispersion_scale must be > 0");
        if (pixel_size_m <= 0.0 || detector_width_m <= 0.0)
            throw std::invalid_argument("detector: pixel size and width must be > 0");
        if (!response.empty()) {
            const std::size_t n = static_cast<std::size_t>(num_pixels);
            if (response.size() != n * n)
                throw std::invalid_argument("detector: response matrix must be num_pixels^2");
            for (double v : response)
                if (v < 0.0) throw std::invalid_argument("detector: response entries must be non-negative");
        }
    }
};

/// Detector from active-region geometry; dispersion follows from the active
/// width N*pixel_size spanning `bandwidth_hz`.
inline DetectorModel make_detector(int num_pixels, double pixel_size_m, double detector_width_m,
                                   double bandwidth_hz) {
    DetectorModel det;
    det.num_pixels = num_pixels;
    det.pixel_size_m = pixel_size_m;
    det.detector_width_m = detector_width_m;
    det.dispersion_scale = num_pixels * pixel_size_m / bandwidth_hz;
    det.validate();
    return det;
}

/// Default simulation geometry: 6.5 um pixels, 16.6 mm detector, 120 active
/// pixels spanning 60 GHz (0.5 GHz per pixel).
inline DetectorModel default_detector() { return make_detector(120, 6.5e-6, 16.6e-3, 60e9); }

/// A sampled spectrum: pixel-center frequencies (relative to the Rayleigh
/// line), per-pixel intensities, and an optional exclusion mask. mask[i] != 0
/// marks a pixel excluded from fitting and data-fidelity terms (saturated
/// Rayleigh region etc.); an empty mask means all pixels active.
struct Spectrum {
    std::vector<double> frequencies_hz;
    std::vector<double> intensities;
    std::vector<std::uint8_t> mask;

    std::size_t size() const { return frequencies_hz.size(); }
    bool masked(std::size_t i) const { return !mask.empty() && mask[i] != 0; }

    double frequency_step_hz() const {
        if (frequencies_hz.size() < 2) throw std::invalid_argument("spectrum: need >= 2 pixels");
        return frequencies_hz[1] - frequencies_hz[0];
    }

    void validate() const {
        if (intensities.size() != frequencies_hz.size())
            throw std::invalid_argument("spectrum: intensity/frequency length mismatch");
        if (!mask.empty() && mask.size() != frequencies_hz.size())
            throw std::invalid_argument("spectrum: mask length mismatch");
        if (frequencies_hz.size() >= 2) {
            const double step = frequencies_hz[1] - frequencies_hz[0];
            if (step <= 0.0) throw std::invalid_argument("spectrum: frequencies must increase");
            const double span = frequencies_hz.back() - frequencies_hz.front();
            for (std::size_t i = 1; i < frequencies_hz.size(); ++i) {
                const double d = frequencies_hz[i] - frequencies_hz[i - 1];
                if (std::abs(d - step) > 1e-9 * span)
                    throw std::invalid_argument("spectrum: frequency grid not uniform");
            }
        }
    }
};

/// Pixel-center frequency axis for a detector, relative to the Rayleigh line:
/// pixel i sits at (i - N/2) * bandwidth / N.
inline std::vector<double> frequency_axis(const DetectorModel& det) {
    const double step = det.frequency_step_hz();
    std::vector<double> axis(static_cast<std::size_t>(det.num_pixels));
    const int center = det.num_pixels / 2;
    for (int i = 0; i < det.num_pixels; ++i)
        axis[static_cast<std::size_t>(i)] = (i - center) * step;
    return axis;
}

/// Ground-truth line configuration used for synthesis and benchmarking.
struct GroundTruth {
    std::vector<LorentzianPeak> peaks;   // typically Rayleigh + Stokes + anti-Stokes
    double brillouin_shift_hz = 10e9;
    double brillouin_fwhm_hz = 1e9;
    double background = 0.0;             // constant offset, default none
};

/// Rayleigh at 0 plus a symmetric Stokes/anti-Stokes pair.
inline GroundTruth make_three_peak_truth(double shift_hz, double fwhm_hz, double rayleigh_amplitude,
                                         double brillouin_amplitude, double background = 0.0) {
    GroundTruth truth;
    truth.brillouin_shift_hz = shift_hz;
    truth.brillouin_fwhm_hz = fwhm_hz;
    truth.background = background;
    truth.peaks = {
        {-shift_hz, fwhm_hz, brillouin_amplitude},
        {0.0, fwhm_hz, rayleigh_amplitude},
        {shift_hz, fwhm_hz, brillouin_amplitude},
    };
    return truth;
}

/// Simulation defaults: +-10 GHz shift, 1 GHz FWHM, amplitudes 1e4 / 1e3.
inline GroundTruth default_truth() { return make_three_peak_truth(10e9, 1e9, 1e4, 1e3); }

/// Amplitude of the Brillouin (non-Rayleigh) line in a truth configuration:
/// the peak whose |center| is closest to the nominal shift.
inline double brillouin_amplitude(const GroundTruth& truth) {
    if (truth.peaks.empty()) throw std::invalid_argument("truth: no peaks");
    double best = truth.peaks.front().amplitude;
    double best_err = std::abs(std::abs(truth.peaks.front().center_hz) - truth.brillouin_shift_hz);
    for (const auto& p : truth.peaks) {
        const double err = std::abs(std::abs(p.center_hz) - truth.brillouin_shift_hz);
        if (err < best_err) {
            best_err = err;
            best = p.amplitude;
        }
    }
    return best;
}

enum class PixelSampling { center_sample, subpixel_integrate };

struct SynthesisOptions {
    PixelSampling sampling = PixelSampling::center_sample;
    int subsamples = 8;  // per pixel, subpixel_integrate only
};

/// R * intensities. Identity (empty) response returns the input unchanged.
inline Spectrum apply_response(const DetectorModel& det, const Spectrum& raw) {
    if (raw.size() != static_cast<std::size_t>(det.num_pixels))
        throw std::invalid_argument("apply_response: spectrum/detector size mismatch");
    if (det.identity_response()) return raw;
    det.validate();
    const std::size_t n = raw.size();
    Spectrum out = raw;
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        const double* row = det.response.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) acc += row[j] * raw.intensities[j];
        out.intensities[i] = acc;
    }
    return out;
}

/// Pixelated sum of all peak profiles on the detector axis, optionally
/// averaged over sub-pixel samples, then passed through the response matrix.
inline Spectrum synthesize(const GroundTruth& truth, const DetectorModel& det,
                           const SynthesisOptions& options = {}) {
    det.validate();
    Spectrum out;
    out.frequencies_hz = frequency_axis(det);
    out.intensities.assign(out.frequencies_hz.size(), truth.background);

    const double lo = out.frequencies_hz.front();
    const double hi = out.frequencies_hz.back();
    for (const auto& peak : truth.peaks) {
        if (peak.fwhm_hz <= 0.0) throw std::invalid_argument("synthesize: peak fwhm must be > 0");
        if (peak.amplitude < 0.0) throw std::invalid_argument("synthesize: peak amplitude must be >= 0");
        if (peak.center_hz < lo || peak.center_hz > hi)
            throw std::invalid_argument("synthesize: peak center outside detector span");
    }

    const double step = det.frequency_step_hz();
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double f = out.frequencies_hz[i];
        double value = 0.0;
        if (options.sampling == PixelSampling::center_sample) {
            for (const auto& peak : truth.peaks) value += lorentzian_value(peak, f);
        } else {
            const int k = options.subsamples > 0 ? options.subsamples : 1;
            for (int s = 0; s < k; ++s) {
                // midpoints of k equal sub-intervals across the pixel
                const double fs = f + step * ((s + 0.5) / k - 0.5);
                for (const auto& peak : truth.peaks) value += lorentzian_value(peak, fs);
            }
            value /= k;
        }
        out.intensities[i] += value;
    }
    return det.identity_response() ? out : apply_response(det, out);
}

/// Integrated spectral intensity over the pixel index (trapezoid rule), in
/// detector counts. This is the I_inf entering the per-pixel SNR definition.
inline double integrated_intensity(const Spectrum& s) {
    if (s.size() < 2) throw std::invalid_argument("integrated_intensity: need >= 2 pixels");
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < s.size(); ++i)
        acc += 0.5 * (s.intensities[i] + s.intensities[i + 1]);
    return acc;
}

}  // namespace brillouin
