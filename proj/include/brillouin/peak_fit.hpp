#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "spectrum.hpp"

namespace brillouin {

/// Multi-Lorentzian model: per-peak (amplitude, center, fwhm) plus a constant
/// baseline. fixed_mask flags parameters held constant during the fit, in the
/// layout [baseline, A0, c0, w0, A1, c1, w1, ...]. fit_region is an optional
/// exclusion mask with the same semantics as Spectrum.mask.
struct FitModel {
    std::vector<LorentzianPeak> peaks;
    double baseline = 0.0;
    std::vector<std::uint8_t> fixed_mask;
    std::vector<std::uint8_t> fit_region;

    std::size_t parameter_count() const { return 1 + 3 * peaks.size(); }
};

struct FitOptions {
    int max_iter = 200;
    double tol = 1e-10;            // relative change of the squared residual
    double max_count_value = 0.0;  // > 0: auto-mask pixels >= 99.5% of this
};

struct FitResult {
    std::vector<LorentzianPeak> peaks;  // sorted by center
    double baseline = 0.0;
    double shift_hz = 0.0;       // half Stokes/anti-Stokes separation
    double fwhm_hz = 0.0;        // mean Brillouin FWHM
    double brillouin_amplitude = 0.0;
    double rms_error_pct = 0.0;  // 100 * rms residual / brillouin amplitude
    bool converged = false;
    int iterations = 0;
};

namespace detail {

inline double lorentz_sum(const std::vector<double>& params, double x) {
    double value = params[0];
    for (std::size_t k = 1; k + 2 < params.size(); k += 3) {
        const double amp = params[k];
        const double u = x - params[k + 1];
        const double h = 0.5 * params[k + 2];
        value += amp * h * h / (u * u + h * h);
    }
    return value;
}

// Cholesky solve of the (small, SPD after damping) normal equations
inline bool cholesky_solve(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) sum -= a[i * n + k] * a[j * n + k];
            if (i == j) {
                if (sum <= 0.0) return false;
                a[i * n + i] = std::sqrt(sum);
            } else {
                a[i * n + j] = sum / a[j * n + j];
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double sum = b[i];
        for (std::size_t k = 0; k < i; ++k) sum -= a[i * n + k] * b[k];
        b[i] = sum / a[i * n + i];
    }
    for (std::size_t i = n; i-- > 0;) {
        double sum = b[i];
        for (std::size_t k = i + 1; k < n; ++k) sum -= a[k * n + i] * b[k];
        b[i] = sum / a[i * n + i];
    }
    return true;
}

}  // namespace detail

/// Analytic partials of a single Lorentzian with respect to (amplitude,
/// center, fwhm), exposed for gradient verification.
inline void lorentzian_partials(const LorentzianPeak& peak, double freq_hz, double& d_amp, double& d_center,
                                double& d_fwhm) {
    const double u = freq_hz - peak.center_hz;
    const double h = 0.5 * peak.fwhm_hz;
    const double denom = u * u + h * h;
    d_amp = h * h / denom;
    d_center = peak.amplitude * h * h * 2.0 * u / (denom * denom);
    d_fwhm = peak.amplitude * h * u * u / (denom * denom);
}

/// Damped Gauss-Newton (Levenberg-Marquardt) least-squares fit of the model
/// to the spectrum over its unmasked fit region. Damping scales with
/// diag(J^T J); rejected steps raise it tenfold, accepted steps relax it.
/// Returns converged = false (not an error) when max_iter is exhausted.
inline FitResult fit(const Spectrum& spectrum, const FitModel& model, const FitOptions& options = {}) {
    spectrum.validate();
    if (model.peaks.empty()) throw std::invalid_argument("fit: need at least one peak");
    for (const auto& p : model.peaks)
        if (p.fwhm_hz <= 0.0) throw std::invalid_argument("fit: initial fwhm must be > 0");
    if (!model.fit_region.empty() && model.fit_region.size() != spectrum.size())
        throw std::invalid_argument("fit: fit_region length mismatch");
    if (!model.fixed_mask.empty() && model.fixed_mask.size() != model.parameter_count())
        throw std::invalid_argument("fit: fixed_mask length mismatch");

    const std::size_t n = spectrum.size();
    std::vector<std::size_t> region;
    region.reserve(n);
    double sat_limit = options.max_count_value > 0.0 ? 0.995 * options.max_count_value : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (spectrum.masked(i)) continue;
        if (!model.fit_region.empty() && model.fit_region[i]) continue;
        if (sat_limit > 0.0 && spectrum.intensities[i] >= sat_limit) continue;
        region.push_back(i);
    }

    const std::size_t n_params = model.parameter_count();
    std::vector<std::uint8_t> fixed = model.fixed_mask;
    if (fixed.empty()) fixed.assign(n_params, 0);
    std::vector<std::size_t> free_idx;
    for (std::size_t p = 0; p < n_params; ++p)
        if (!fixed[p]) free_idx.push_back(p);
    const std::size_t n_free = free_idx.size();
    if (region.size() < 3 * std::max<std::size_t>(n_free, 1))
        throw std::invalid_argument("fit: region too small for parameter count");

    // internal units: frequencies in spans, intensities relative to the data scale
    const double f_scale = std::max(std::abs(spectrum.frequencies_hz.back() - spectrum.frequencies_hz.front()),
                                    1e-300);
    double a_scale = 0.0;
    for (std::size_t i : region) a_scale = std::max(a_scale, std::abs(spectrum.intensities[i]));
    for (const auto& p : model.peaks) a_scale = std::max(a_scale, p.amplitude);
    if (a_scale <= 0.0) a_scale = 1.0;

    std::vector<double> params(n_params);
    params[0] = model.baseline / a_scale;
    for (std::size_t k = 0; k < model.peaks.size(); ++k) {
        params[1 + 3 * k] = model.peaks[k].amplitude / a_scale;
        params[2 + 3 * k] = model.peaks[k].center_hz / f_scale;
        params[3 + 3 * k] = model.peaks[k].fwhm_hz / f_scale;
    }
    // narrower than half a pixel is unresolvable and only breeds
    // single-pixel spike solutions
    const double min_width = 0.5 * spectrum.frequency_step_hz() / f_scale;

    std::vector<double> x(region.size()), y(region.size());
    for (std::size_t r = 0; r < region.size(); ++r) {
        x[r] = spectrum.frequencies_hz[region[r]] / f_scale;
        y[r] = spectrum.intensities[region[r]] / a_scale;
    }

    auto ssr_of = [&](const std::vector<double>& p) {
        double acc = 0.0;
        for (std::size_t r = 0; r < x.size(); ++r) {
            const double d = detail::lorentz_sum(p, x[r]) - y[r];
            acc += d * d;
        }
        return acc;
    };
    // box constraints: centers stay on the fitted axis and widths below twice
    // its span, else a runaway far-off Lorentzian degenerates into a baseline
    double x_lo = x.front(), x_hi = x.front();
    for (double v : x) {
        x_lo = std::min(x_lo, v);
        x_hi = std::max(x_hi, v);
    }
    const double max_width = 2.0 * (x_hi - x_lo);
    auto project = [&](std::vector<double>& p) {
        for (std::size_t k = 0; k < model.peaks.size(); ++k) {
            p[1 + 3 * k] = std::max(p[1 + 3 * k], 0.0);
            p[2 + 3 * k] = std::clamp(p[2 + 3 * k], x_lo, x_hi);
            p[3 + 3 * k] = std::clamp(p[3 + 3 * k], min_width, max_width);
        }
    };
    project(params);

    double ssr = ssr_of(params);
    double damping = 1e-3;
    bool converged = false;
    int iter = 0;

    std::vector<double> jtj(n_free * n_free), jtr(n_free), jrow(n_params);
    for (; iter < options.max_iter; ++iter) {
        std::fill(jtj.begin(), jtj.end(), 0.0);
        std::fill(jtr.begin(), jtr.end(), 0.0);
        for (std::size_t r = 0; r < x.size(); ++r) {
            const double resid = detail::lorentz_sum(params, x[r]) - y[r];
            jrow[0] = 1.0;
            for (std::size_t k = 0; k < model.peaks.size(); ++k) {
                LorentzianPeak peak{params[2 + 3 * k], params[3 + 3 * k], params[1 + 3 * k]};
                double da, dc, dw;
                lorentzian_partials(peak, x[r], da, dc, dw);
                jrow[1 + 3 * k] = da;
                jrow[2 + 3 * k] = dc;
                jrow[3 + 3 * k] = dw;
            }
            for (std::size_t a = 0; a < n_free; ++a) {
                const double ja = jrow[free_idx[a]];
                jtr[a] -= ja * resid;
                for (std::size_t b = 0; b <= a; ++b) jtj[a * n_free + b] += ja * jrow[free_idx[b]];
            }
        }
        for (std::size_t a = 0; a < n_free; ++a)
            for (std::size_t b = a + 1; b < n_free; ++b) jtj[a * n_free + b] = jtj[b * n_free + a];

        bool stepped = false;
        while (damping <= 1e12) {
            std::vector<double> lhs = jtj;
            std::vector<double> rhs = jtr;
            for (std::size_t a = 0; a < n_free; ++a)
                lhs[a * n_free + a] += damping * std::max(jtj[a * n_free + a], 1e-30);
            if (detail::cholesky_solve(lhs, rhs, n_free)) {
                std::vector<double> candidate = params;
                double step_inf = 0.0;
                for (std::size_t a = 0; a < n_free; ++a) {
                    candidate[free_idx[a]] += rhs[a];
                    step_inf = std::max(step_inf, std::abs(rhs[a]));
                }
                project(candidate);
                const double ssr_new = ssr_of(candidate);
                if (ssr_new <= ssr) {
                    const double drop = ssr - ssr_new;
                    params = std::move(candidate);
                    ssr = ssr_new;
                    damping = std::max(damping * 0.1, 1e-12);
                    stepped = true;
                    // converged on a vanishing relative improvement, an
                    // essentially exact fit, or a negligible step
                    if (drop <= options.tol * std::max(ssr, 1e-300) ||
                        ssr <= 1e-24 * static_cast<double>(x.size()) || step_inf <= 1e-11) {
                        converged = true;
                        ++iter;
                    }
                    break;
                }
            }
            damping *= 10.0;
        }
        if (converged || !stepped) break;
    }

    FitResult out;
    out.converged = converged;
    out.iterations = iter;
    out.baseline = params[0] * a_scale;
    out.peaks.resize(model.peaks.size());
    for (std::size_t k = 0; k < model.peaks.size(); ++k) {
        out.peaks[k].amplitude = params[1 + 3 * k] * a_scale;
        out.peaks[k].center_hz = params[2 + 3 * k] * f_scale;
        out.peaks[k].fwhm_hz = params[3 + 3 * k] * f_scale;
    }
    std::sort(out.peaks.begin(), out.peaks.end(),
              [](const LorentzianPeak& a, const LorentzianPeak& b) { return a.center_hz < b.center_hz; });

    // shift/linewidth extraction: with several peaks the outermost pair is
    // Stokes/anti-Stokes and the shift is half their separation; a lone pair
    // with one near-zero center is treated as Rayleigh + single Brillouin line
    const auto& first = out.peaks.front();
    const auto& last = out.peaks.back();
    if (out.peaks.size() == 1) {
        out.shift_hz = std::abs(first.center_hz);
        out.fwhm_hz = first.fwhm_hz;
        out.brillouin_amplitude = first.amplitude;
    } else if (out.peaks.size() == 2 &&
               std::min(std::abs(first.center_hz), std::abs(last.center_hz)) <
                   0.25 * std::max(std::abs(first.center_hz), std::abs(last.center_hz))) {
        const auto& rayleigh = std::abs(first.center_hz) < std::abs(last.center_hz) ? first : last;
        const auto& brillouin = std::abs(first.center_hz) < std::abs(last.center_hz) ? last : first;
        out.shift_hz = std::abs(brillouin.center_hz - rayleigh.center_hz);
        out.fwhm_hz = brillouin.fwhm_hz;
        out.brillouin_amplitude = brillouin.amplitude;
    } else {
        out.shift_hz = 0.5 * (last.center_hz - first.center_hz);
        out.fwhm_hz = 0.5 * (first.fwhm_hz + last.fwhm_hz);
        out.brillouin_amplitude = 0.5 * (first.amplitude + last.amplitude);
    }

    const double rms = std::sqrt(ssr / static_cast<double>(region.size())) * a_scale;
    out.rms_error_pct = out.brillouin_amplitude > 0.0 ? 100.0 * rms / out.brillouin_amplitude : 0.0;
    return out;
}

/// Data-driven starting point: smooth with a 5-pixel moving average, take the
/// n_peaks strongest interior local maxima as centers, half-prominence widths
/// as FWHM guesses and the smoothed minimum as baseline. Hints, when given,
/// pass straight through with widths/centers preserved.
inline FitModel initial_guess(const Spectrum& spectrum, std::size_t n_peaks,
                              const GroundTruth* hints = nullptr) {
    spectrum.validate();
    if (n_peaks < 1) throw std::invalid_argument("initial_guess: need n_peaks >= 1");
    FitModel model;
    if (hints != nullptr) {
        model.peaks = hints->peaks;
        model.baseline = hints->background;
        return model;
    }
    const std::size_t n = spectrum.size();
    if (n < 7) throw std::invalid_argument("initial_guess: spectrum too short");

    std::vector<double> smooth(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        int count = 0;
        for (long long j = static_cast<long long>(i) - 2; j <= static_cast<long long>(i) + 2; ++j) {
            if (j < 0 || j >= static_cast<long long>(n)) continue;
            acc += spectrum.intensities[static_cast<std::size_t>(j)];
            ++count;
        }
        smooth[i] = acc / count;
    }

    double baseline = smooth[0];
    for (std::size_t i = 0; i < n; ++i)
        if (!spectrum.masked(i)) baseline = std::min(baseline, smooth[i]);

    struct Candidate {
        std::size_t index;
        double value;
    };
    std::vector<Candidate> maxima;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (spectrum.masked(i)) continue;
        if (smooth[i] > smooth[i - 1] && smooth[i] >= smooth[i + 1] && smooth[i] > baseline)
            maxima.push_back({i, smooth[i]});
    }
    std::sort(maxima.begin(), maxima.end(),
              [](const Candidate& a, const Candidate& b) { return a.value > b.value; });
    if (maxima.size() < n_peaks) throw std::invalid_argument("initial_guess: fewer detectable maxima than peaks");

    const double step = spectrum.frequency_step_hz();
    for (std::size_t k = 0; k < n_peaks; ++k) {
        const std::size_t c = maxima[k].index;
        const double half_level = 0.5 * (smooth[c] + baseline);
        std::size_t left = c, right = c;
        while (left > 0 && smooth[left] > half_level) --left;
        while (right + 1 < n && smooth[right] > half_level) ++right;
        const double width_px = std::max<double>(static_cast<double>(right - left), 1.0);
        LorentzianPeak peak;
        peak.center_hz = spectrum.frequencies_hz[c];
        peak.fwhm_hz = width_px * step;
        peak.amplitude = std::max(smooth[c] - baseline, 1e-12);
        model.peaks.push_back(peak);
    }
    model.baseline = baseline;
    std::sort(model.peaks.begin(), model.peaks.end(),
              [](const LorentzianPeak& a, const LorentzianPeak& b) { return a.center_hz < b.center_hz; });
    return model;
}

/// Brillouin kinematics: v = Omega * lambda / (2 n sin(theta/2)).
inline double speed_of_sound(double shift_hz, double wavelength_m, double refractive_index,
                             double scattering_angle_rad) {
    if (scattering_angle_rad <= 0.0 || scattering_angle_rad > 3.14159265358979323846 + 1e-12)
        throw std::invalid_argument("speed_of_sound: angle must be in (0, pi]");
    if (refractive_index < 1.0) throw std::invalid_argument("speed_of_sound: index must be >= 1");
    if (wavelength_m <= 0.0) throw std::invalid_argument("speed_of_sound: wavelength must be > 0");
    return shift_hz * wavelength_m / (2.0 * refractive_index * std::sin(0.5 * scattering_angle_rad));
}

/// Inverse of speed_of_sound: the shift produced by a given sound speed.
inline double shift_for_speed(double speed_mps, double wavelength_m, double refractive_index,
                              double scattering_angle_rad) {
    if (scattering_angle_rad <= 0.0 || scattering_angle_rad > 3.14159265358979323846 + 1e-12)
        throw std::invalid_argument("shift_for_speed: angle must be in (0, pi]");
    return 2.0 * refractive_index * speed_mps * std::sin(0.5 * scattering_angle_rad) / wavelength_m;
}

}  // namespace brillouin
