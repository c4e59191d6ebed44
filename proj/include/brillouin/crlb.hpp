#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "spectrum.hpp"

namespace brillouin {

/// Inputs for the shift-estimation variance bound. snr_per_pixel follows the
/// per-pixel-average convention I_inf * Delta / (X * sigma); when
/// integrated_intensity and noise_sigma are also supplied they must be
/// consistent with it.
struct CrlbInputs {
    DetectorModel detector;
    double brillouin_fwhm_hz = 1e9;
    double relative_intensity = 0.1;   // Brillouin / Rayleigh amplitude ratio
    double snr_per_pixel = 1.0;
    double integrated_intensity = 0.0;  // optional, counts
    double noise_sigma = 0.0;           // optional, counts

    void validate() const {
        detector.validate();
        if (brillouin_fwhm_hz <= 0.0) throw std::invalid_argument("crlb: fwhm must be > 0");
        if (snr_per_pixel <= 0.0) throw std::invalid_argument("crlb: snr must be > 0");
        if (relative_intensity < 0.0) throw std::invalid_argument("crlb: relative intensity must be >= 0");
        if (integrated_intensity > 0.0 && noise_sigma > 0.0) {
            const double implied = integrated_intensity * detector.pixel_size_m /
                                   (detector.detector_width_m * noise_sigma);
            if (std::abs(implied - snr_per_pixel) > 1e-9 * snr_per_pixel)
                throw std::invalid_argument("crlb: snr inconsistent with (I_inf, sigma)");
        }
    }
};

/// Average per-pixel SNR of a spectrum with integrated intensity I_inf under
/// noise sigma: I_inf * Delta / (X * sigma).
inline double snr_per_pixel(double integrated, const DetectorModel& det, double sigma) {
    if (integrated <= 0.0 || sigma <= 0.0) throw std::invalid_argument("snr_per_pixel: inputs must be > 0");
    return integrated * det.pixel_size_m / (det.detector_width_m * sigma);
}

/// Lower bound on the variance of any unbiased Brillouin-shift estimate for a
/// dispersion-limited spectrometer under white Gaussian noise:
///
///   var >= (pi Delta / 4 X^2) * (alpha (Gamma + gamma))^3 / SNR^2
///          * (1 + 2 I)^2 / (alpha^2 I^2)     [Hz^2]
///
/// alpha converts frequencies to detector position, so the width term is in
/// meters and the net units come out in Hz^2. Diverges as I -> 0 (a vanishing
/// Brillouin line carries no shift information); that case reports infinity.
inline double crlb_variance(const CrlbInputs& inputs) {
    inputs.validate();
    if (inputs.relative_intensity == 0.0) return std::numeric_limits<double>::infinity();
    const DetectorModel& det = inputs.detector;
    const double alpha = det.dispersion_scale;
    const double width_m = alpha * (inputs.brillouin_fwhm_hz + det.response_fwhm_hz);
    const double lead = 3.14159265358979323846 * det.pixel_size_m /
                        (4.0 * det.detector_width_m * det.detector_width_m);
    const double rel = inputs.relative_intensity;
    return lead * width_m * width_m * width_m / (inputs.snr_per_pixel * inputs.snr_per_pixel) *
           (1.0 + 2.0 * rel) * (1.0 + 2.0 * rel) / (alpha * alpha * rel * rel);
}

/// Standard-deviation bound across an ascending SNR grid; strictly decreasing.
inline std::vector<double> crlb_curve(const CrlbInputs& inputs, const std::vector<double>& snr_grid) {
    std::vector<double> out;
    out.reserve(snr_grid.size());
    CrlbInputs point = inputs;
    point.integrated_intensity = 0.0;  // the grid overrides any fixed sigma pairing
    point.noise_sigma = 0.0;
    double prev = 0.0;
    for (double snr : snr_grid) {
        if (snr <= 0.0 || snr < prev) throw std::invalid_argument("crlb_curve: grid must be positive ascending");
        prev = snr;
        point.snr_per_pixel = snr;
        out.push_back(std::sqrt(crlb_variance(point)));
    }
    return out;
}

}  // namespace brillouin
