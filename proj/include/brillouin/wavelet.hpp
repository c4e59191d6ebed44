#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "spectrum.hpp"
#include "wavelet_filters.hpp"

namespace brillouin {

enum class ThresholdMode { soft, hard };
enum class ThresholdRule { paper_universal, donoho_universal, level_dependent };
enum class BoundaryMode { symmetric, periodic, zero };

inline const char* to_string(ThresholdMode m) { return m == ThresholdMode::soft ? "soft" : "hard"; }
inline const char* to_string(ThresholdRule r) {
    switch (r) {
        case ThresholdRule::paper_universal: return "paper-universal";
        case ThresholdRule::donoho_universal: return "donoho-universal";
        default: return "level-dependent";
    }
}
inline const char* to_string(BoundaryMode b) {
    switch (b) {
        case BoundaryMode::symmetric: return "symmetric";
        case BoundaryMode::periodic: return "periodic";
        default: return "zero";
    }
}

struct WaveletConfig {
    std::string family = "db8";     // db1..db10, sym2..sym8
    int levels = 0;                 // 0 = auto: floor(log2 N) - 2, at least 1
    ThresholdMode threshold_mode = ThresholdMode::soft;
    ThresholdRule threshold_rule = ThresholdRule::donoho_universal;
    double noise_level = -1.0;      // < 0: estimate from finest detail level
    BoundaryMode boundary = BoundaryMode::symmetric;
    double threshold_scale = 1.0;   // multiplier on every threshold
};

struct WaveletFilter {
    std::vector<double> dec_lo;
    std::vector<double> dec_hi;
    int support() const { return static_cast<int>(dec_lo.size()); }
};

inline WaveletFilter wavelet_filter(const std::string& family) {
    const auto& tables = detail::wavelet_dec_lo_tables();
    auto it = tables.find(family);
    if (it == tables.end()) throw std::invalid_argument("unknown wavelet family: " + family);
    WaveletFilter f;
    f.dec_lo = it->second;
    const std::size_t n = f.dec_lo.size();
    f.dec_hi.resize(n);
    // quadrature mirror: g[m] = (-1)^(m+1) h[F-1-m]
    for (std::size_t m = 0; m < n; ++m)
        f.dec_hi[m] = ((m % 2 == 0) ? -1.0 : 1.0) * f.dec_lo[n - 1 - m];
    return f;
}

/// Pyramid of detail coefficients (detail[0] = finest) plus the coarsest
/// approximation. input_lengths records the signal length fed into each
/// level so the inverse can crop exactly.
struct WaveletCoefficients {
    std::vector<std::vector<double>> detail;
    std::vector<double> approximation;
    std::vector<std::size_t> input_lengths;
    std::size_t original_length = 0;
    WaveletConfig config;

    std::size_t total_count() const {
        std::size_t m = approximation.size();
        for (const auto& d : detail) m += d.size();
        return m;
    }
};

namespace detail {

// index into a signal of length n under an extension rule
inline double extended_at(const std::vector<double>& x, long long i, BoundaryMode mode) {
    const long long n = static_cast<long long>(x.size());
    if (i >= 0 && i < n) return x[static_cast<std::size_t>(i)];
    switch (mode) {
        case BoundaryMode::zero:
            return 0.0;
        case BoundaryMode::periodic: {
            long long m = i % n;
            if (m < 0) m += n;
            return x[static_cast<std::size_t>(m)];
        }
        case BoundaryMode::symmetric:
        default: {
            // half-point reflection with period 2n: ..., x1, x0 | x0, x1, ...
            long long m = i % (2 * n);
            if (m < 0) m += 2 * n;
            if (m >= n) m = 2 * n - 1 - m;
            return x[static_cast<std::size_t>(m)];
        }
    }
}

// One analysis level. Periodic mode uses periodization (circular transform,
// ceil(n/2) outputs per band, orthonormal); symmetric/zero use extension by
// the filter support (floor((n+F-1)/2) outputs, redundant but exactly
// invertible).
inline void analyze_level(const std::vector<double>& x, const WaveletFilter& f, BoundaryMode mode,
                          std::vector<double>& approx, std::vector<double>& det) {
    const int F = f.support();
    if (mode == BoundaryMode::periodic) {
        std::vector<double> xp = x;
        if (xp.size() % 2 != 0) xp.push_back(xp.back());
        const long long n = static_cast<long long>(xp.size());
        const std::size_t out_len = static_cast<std::size_t>(n / 2);
        approx.assign(out_len, 0.0);
        det.assign(out_len, 0.0);
        for (std::size_t k = 0; k < out_len; ++k) {
            double a = 0.0, d = 0.0;
            for (int m = 0; m < F; ++m) {
                long long idx = (2 * static_cast<long long>(k) + 1 - m) % n;
                if (idx < 0) idx += n;
                const double v = xp[static_cast<std::size_t>(idx)];
                a += f.dec_lo[static_cast<std::size_t>(m)] * v;
                d += f.dec_hi[static_cast<std::size_t>(m)] * v;
            }
            approx[k] = a;
            det[k] = d;
        }
        return;
    }
    const long long n = static_cast<long long>(x.size());
    const std::size_t out_len = static_cast<std::size_t>((n + F - 1) / 2);
    approx.assign(out_len, 0.0);
    det.assign(out_len, 0.0);
    for (std::size_t k = 0; k < out_len; ++k) {
        double a = 0.0, d = 0.0;
        for (int m = 0; m < F; ++m) {
            const long long idx = 2 * static_cast<long long>(k) + 1 - m;
            const double v = extended_at(x, idx, mode);
            a += f.dec_lo[static_cast<std::size_t>(m)] * v;
            d += f.dec_hi[static_cast<std::size_t>(m)] * v;
        }
        approx[k] = a;
        det[k] = d;
    }
}

// Transposed synthesis of one level; out_len is the length fed into the
// matching analysis step.
inline std::vector<double> synthesize_level(const std::vector<double>& approx,
                                            const std::vector<double>& det, const WaveletFilter& f,
                                            BoundaryMode mode, std::size_t out_len) {
    const int F = f.support();
    if (mode == BoundaryMode::periodic) {
        const std::size_t padded = out_len % 2 != 0 ? out_len + 1 : out_len;
        const long long n = static_cast<long long>(padded);
        std::vector<double> y(padded, 0.0);
        for (std::size_t k = 0; k < approx.size(); ++k) {
            for (int m = 0; m < F; ++m) {
                long long idx = (2 * static_cast<long long>(k) + 1 - m) % n;
                if (idx < 0) idx += n;
                y[static_cast<std::size_t>(idx)] += approx[k] * f.dec_lo[static_cast<std::size_t>(m)] +
                                                    det[k] * f.dec_hi[static_cast<std::size_t>(m)];
            }
        }
        y.resize(out_len);
        return y;
    }
    std::vector<double> y(out_len, 0.0);
    for (std::size_t k = 0; k < approx.size(); ++k) {
        for (int m = 0; m < F; ++m) {
            const long long idx = 2 * static_cast<long long>(k) + 1 - m;
            if (idx >= 0 && idx < static_cast<long long>(out_len))
                y[static_cast<std::size_t>(idx)] += approx[k] * f.dec_lo[static_cast<std::size_t>(m)] +
                                                    det[k] * f.dec_hi[static_cast<std::size_t>(m)];
        }
    }
    return y;
}

}  // namespace detail

inline int default_levels(std::size_t n) {
    int l = static_cast<int>(std::floor(std::log2(static_cast<double>(n)))) - 2;
    return std::max(l, 1);
}

inline WaveletCoefficients dwt(const std::vector<double>& signal, const WaveletConfig& config) {
    const WaveletFilter filter = wavelet_filter(config.family);
    const std::size_t n = signal.size();
    if (n < static_cast<std::size_t>(filter.support()))
        throw std::invalid_argument("dwt: signal shorter than filter support");
    int levels = config.levels > 0 ? config.levels : default_levels(n);
    const int max_levels = static_cast<int>(std::floor(std::log2(static_cast<double>(n))));
    if (levels > max_levels) throw std::invalid_argument("dwt: too many levels for signal length");

    WaveletCoefficients out;
    out.original_length = n;
    out.config = config;
    out.config.levels = levels;

    std::vector<double> current = signal;
    for (int level = 0; level < levels; ++level) {
        // stop early rather than run a level the inverse could not undo
        if (config.boundary != BoundaryMode::periodic &&
            current.size() < static_cast<std::size_t>(filter.support()))
            break;
        if (config.boundary == BoundaryMode::periodic && current.size() < 2) break;
        out.input_lengths.push_back(current.size());
        std::vector<double> approx, det;
        detail::analyze_level(current, filter, config.boundary, approx, det);
        out.detail.push_back(std::move(det));
        current = std::move(approx);
    }
    out.approximation = std::move(current);
    out.config.levels = static_cast<int>(out.detail.size());
    return out;
}

inline WaveletCoefficients dwt(const Spectrum& signal, const WaveletConfig& config) {
    signal.validate();
    return dwt(signal.intensities, config);
}

inline std::vector<double> idwt(const WaveletCoefficients& coeffs) {
    const WaveletFilter filter = wavelet_filter(coeffs.config.family);
    std::vector<double> current = coeffs.approximation;
    for (std::size_t level = coeffs.detail.size(); level-- > 0;) {
        current = detail::synthesize_level(current, coeffs.detail[level], filter,
                                           coeffs.config.boundary, coeffs.input_lengths[level]);
    }
    return current;
}

/// Robust noise-sigma estimate from the finest detail band:
/// median(|d|) / 0.6745.
inline double estimate_noise_level(const WaveletCoefficients& coeffs) {
    if (coeffs.detail.empty() || coeffs.detail.front().empty())
        throw std::invalid_argument("estimate_noise_level: no detail coefficients");
    std::vector<double> mags = coeffs.detail.front();
    for (double& v : mags) v = std::abs(v);
    std::sort(mags.begin(), mags.end());
    const std::size_t n = mags.size();
    const double median = n % 2 == 1 ? mags[n / 2] : 0.5 * (mags[n / 2 - 1] + mags[n / 2]);
    return median / 0.6745;
}

/// Shrinkage threshold for noise level n and signal length N.
/// paper-universal: n*sqrt(2 ln N / N); donoho-universal: n*sqrt(2 ln N).
inline double threshold_value(double noise_level, std::size_t signal_length, ThresholdRule rule) {
    if (noise_level < 0.0) throw std::invalid_argument("threshold_value: negative noise level");
    if (signal_length < 2) throw std::invalid_argument("threshold_value: need N >= 2");
    const double ln_n = std::log(static_cast<double>(signal_length));
    switch (rule) {
        case ThresholdRule::paper_universal:
            return noise_level * std::sqrt(2.0 * ln_n / static_cast<double>(signal_length));
        case ThresholdRule::donoho_universal:
        case ThresholdRule::level_dependent:
        default:
            return noise_level * std::sqrt(2.0 * ln_n);
    }
}

/// Per-detail-level thresholds for a coefficient set. level_dependent
/// re-estimates the noise level per band; the universal rules use one value
/// (supplied or estimated from the finest band) for all of them.
inline std::vector<double> thresholds_for(const WaveletCoefficients& coeffs, const WaveletConfig& config) {
    std::vector<double> q(coeffs.detail.size(), 0.0);
    const std::size_t n = coeffs.original_length;
    if (config.threshold_rule == ThresholdRule::level_dependent) {
        for (std::size_t l = 0; l < coeffs.detail.size(); ++l) {
            std::vector<double> mags = coeffs.detail[l];
            for (double& v : mags) v = std::abs(v);
            std::sort(mags.begin(), mags.end());
            const std::size_t m = mags.size();
            const double median = m == 0 ? 0.0
                                  : m % 2 == 1 ? mags[m / 2]
                                               : 0.5 * (mags[m / 2 - 1] + mags[m / 2]);
            q[l] = config.threshold_scale * threshold_value(median / 0.6745, n, config.threshold_rule);
        }
        return q;
    }
    const double noise = config.noise_level >= 0.0 ? config.noise_level : estimate_noise_level(coeffs);
    const double value = config.threshold_scale * threshold_value(noise, n, config.threshold_rule);
    std::fill(q.begin(), q.end(), value);
    return q;
}

/// Nonlinear shrinkage of the detail bands; the approximation band is left
/// untouched. soft: c -> sign(c) max(|c|-Q, 0); hard: c -> c 1[|c| > Q].
inline WaveletCoefficients shrink(const WaveletCoefficients& coeffs, const std::vector<double>& q_per_level,
                                  ThresholdMode mode) {
    if (q_per_level.size() != coeffs.detail.size())
        throw std::invalid_argument("shrink: one threshold per detail level required");
    WaveletCoefficients out = coeffs;
    for (std::size_t l = 0; l < out.detail.size(); ++l) {
        const double q = q_per_level[l];
        if (q < 0.0) throw std::invalid_argument("shrink: thresholds must be non-negative");
        for (double& c : out.detail[l]) {
            if (mode == ThresholdMode::soft) {
                const double mag = std::abs(c) - q;
                c = mag > 0.0 ? (c > 0.0 ? mag : -mag) : 0.0;
            } else {
                if (std::abs(c) <= q) c = 0.0;
            }
        }
    }
    return out;
}

/// Full wavelet-shrinkage chain: decompose, estimate the noise level if not
/// given, threshold the detail bands, reconstruct.
inline Spectrum denoise(const Spectrum& noisy, const WaveletConfig& config) {
    noisy.validate();
    WaveletCoefficients coeffs = dwt(noisy.intensities, config);
    const std::vector<double> q = thresholds_for(coeffs, config);
    const WaveletCoefficients kept = shrink(coeffs, q, config.threshold_mode);
    Spectrum out = noisy;
    out.intensities = idwt(kept);
    out.intensities.resize(noisy.size());
    return out;
}

}  // namespace brillouin
