#pragma once

#include <cstdint>
#include <stdexcept>

#include "rng.hpp"
#include "spectrum.hpp"

namespace brillouin {

/// The two SNR definitions in circulation for this problem. peak_based is
/// Brillouin peak amplitude over the noise sigma; per_pixel_average is
/// I_inf * pixel_size / (detector_width * sigma), the mean per-pixel signal
/// over sigma. Reports should always name which one they used.
enum class SnrConvention { peak_based, per_pixel_average };

inline const char* to_string(SnrConvention c) {
    return c == SnrConvention::peak_based ? "peak-based" : "per-pixel-average";
}

struct NoiseSpec {
    double sigma = 1.0;                 // std of additive white Gaussian noise, counts
    SnrConvention snr_convention = SnrConvention::peak_based;
    std::uint64_t seed = 0;

    void validate() const {
        if (sigma <= 0.0) throw std::invalid_argument("noise: sigma must be > 0");
    }
};

/// Noise sigma that realizes a target SNR for a given truth + detector.
inline double sigma_for_snr(double target_snr, const GroundTruth& truth, const DetectorModel& det,
                            SnrConvention convention) {
    if (target_snr <= 0.0) throw std::invalid_argument("sigma_for_snr: snr must be > 0");
    if (convention == SnrConvention::peak_based) {
        const double amplitude = brillouin_amplitude(truth);
        if (amplitude <= 0.0) throw std::invalid_argument("sigma_for_snr: zero-amplitude truth");
        return amplitude / target_snr;
    }
    const double total = integrated_intensity(synthesize(truth, det));
    if (total <= 0.0) throw std::invalid_argument("sigma_for_snr: zero-intensity truth");
    return total * det.pixel_size_m / (det.detector_width_m * target_snr);
}

/// clean + i.i.d. Gaussian(0, sigma^2), deterministic for a fixed seed.
inline Spectrum add_noise(const Spectrum& clean, const NoiseSpec& spec) {
    clean.validate();
    spec.validate();
    GaussianSampler gauss(spec.seed);
    Spectrum out = clean;
    for (double& v : out.intensities) v += spec.sigma * gauss.next();
    return out;
}

}  // namespace brillouin
