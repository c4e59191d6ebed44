#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spectrum.hpp"

namespace brillouin {

enum class EntropyForm { paper_shannon, skilling_gull };
enum class MerStatus { converged, max_iterations, infeasible_data };

inline const char* to_string(EntropyForm f) {
    return f == EntropyForm::paper_shannon ? "paper-shannon" : "skilling-gull";
}
inline const char* to_string(MerStatus s) {
    switch (s) {
        case MerStatus::converged: return "converged";
        case MerStatus::max_iterations: return "max-iterations";
        default: return "infeasible-data";
    }
}

struct MerConfig {
    double lambda = 1000.0;             // Lagrange multiplier, fixed per run
    double chi0_sq = 1.0;               // constraint level (95% confidence ~ 1)
    double termination_threshold = 0.01;
    int max_iterations = 2000;
    int num_conjugate_dirs = 2;         // previous directions conjugated against
    double positivity_floor = 1e-12;
    std::vector<double> prior_model;    // empty = flat default model at mean(d)
    double wolfe_c1 = 1e-4;
    double wolfe_c2 = 0.9;
    EntropyForm entropy_form = EntropyForm::skilling_gull;
    bool auto_lambda = false;           // outer bisection targeting chi^2 = chi0_sq
    int max_line_search_evals = 40;
    bool record_trace = false;

    void validate() const {
        if (lambda <= 0.0) throw std::invalid_argument("mer: lambda must be > 0");
        if (chi0_sq <= 0.0) throw std::invalid_argument("mer: chi0_sq must be > 0");
        if (termination_threshold <= 0.0) throw std::invalid_argument("mer: termination threshold must be > 0");
        if (!(0.0 < wolfe_c1 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0))
            throw std::invalid_argument("mer: need 0 < c1 < c2 < 1");
        if (positivity_floor <= 0.0) throw std::invalid_argument("mer: positivity floor must be > 0");
        for (double m : prior_model)
            if (m <= 0.0) throw std::invalid_argument("mer: prior model must be strictly positive");
    }
};

struct MerTraceRow {
    int iter;
    double q;
    double entropy;
    double chi_sq;
    double termination_metric;
    double mu;
};

struct MerResult {
    Spectrum reconstruction;
    int iterations = 0;
    double final_chi_sq = 0.0;
    double final_entropy = 0.0;
    double final_termination_metric = 0.0;
    MerStatus status = MerStatus::converged;
    double lambda_used = 0.0;
    std::vector<MerTraceRow> trace;
};

namespace detail {

inline void check_positive(const std::vector<double>& f, double floor_value) {
    for (double v : f)
        if (v < floor_value) throw std::invalid_argument("mer: entry below positivity floor");
}

inline std::vector<double> flat_model(const std::vector<double>& d, const std::vector<std::uint8_t>& mask,
                                      double floor_value) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!mask.empty() && mask[i]) continue;
        sum += d[i];
        ++count;
    }
    const double level = count > 0 ? sum / static_cast<double>(count) : 1.0;
    return std::vector<double>(d.size(), std::max(level, 1e3 * floor_value));
}

// R * v, identity when R is empty
inline std::vector<double> response_apply(const std::vector<double>& response, const std::vector<double>& v) {
    if (response.empty()) return v;
    const std::size_t n = v.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = response.data() + i * n;
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += row[j] * v[j];
        out[i] = acc;
    }
    return out;
}

// R^T * v
inline std::vector<double> response_apply_t(const std::vector<double>& response, const std::vector<double>& v) {
    if (response.empty()) return v;
    const std::size_t n = v.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const double* row = response.data() + j * n;
        for (std::size_t i = 0; i < n; ++i) out[i] += row[i] * v[j];
    }
    return out;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace detail

/// Entropy of an intensity vector. paper_shannon treats f as an unnormalized
/// distribution, -sum p log p with p = f / sum f. skilling_gull is the
/// relative form sum (f - m - f log(f/m)) against the model m, maximal (= 0)
/// at f = m.
inline double entropy(const std::vector<double>& f, const std::vector<double>& model, EntropyForm form,
                      double positivity_floor = 1e-12) {
    detail::check_positive(f, positivity_floor);
    if (form == EntropyForm::paper_shannon) {
        double total = 0.0;
        for (double v : f) total += v;
        double s = 0.0;
        for (double v : f) {
            const double p = v / total;
            s -= p * std::log(p);
        }
        return s;
    }
    if (model.size() != f.size()) throw std::invalid_argument("entropy: model/f size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        s += f[i] - model[i] - f[i] * std::log(f[i] / model[i]);
    return s;
}

inline double entropy(const std::vector<double>& f, const MerConfig& config) {
    std::vector<double> model = config.prior_model;
    if (model.empty() && config.entropy_form == EntropyForm::skilling_gull)
        model = detail::flat_model(f, {}, config.positivity_floor);
    return entropy(f, model, config.entropy_form, config.positivity_floor);
}

/// Normalized mean-square misfit (1/N_active) sum (R f - d)^2 / sigma^2 over
/// unmasked pixels.
inline double chi_square(const std::vector<double>& f, const Spectrum& data,
                         const std::vector<double>& response, const std::vector<double>& sigma) {
    if (f.size() != data.size() || sigma.size() != data.size())
        throw std::invalid_argument("chi_square: size mismatch");
    const std::vector<double> predicted = detail::response_apply(response, f);
    double acc = 0.0;
    std::size_t active = 0;
    for (std::size_t j = 0; j < data.size(); ++j) {
        if (data.masked(j)) continue;
        if (sigma[j] <= 0.0) throw std::invalid_argument("chi_square: sigma must be > 0");
        const double r = predicted[j] - data.intensities[j];
        acc += r * r / (sigma[j] * sigma[j]);
        ++active;
    }
    if (active == 0) throw std::invalid_argument("chi_square: all pixels masked");
    return acc / static_cast<double>(active);
}

/// Analytic gradients of the entropy (for the given model/form) and of the
/// chi-square misfit. Masked pixels contribute nothing to grad chi^2.
inline void gradients(const std::vector<double>& f, const Spectrum& data, const std::vector<double>& response,
                      const std::vector<double>& sigma, const std::vector<double>& model, EntropyForm form,
                      std::vector<double>& grad_entropy, std::vector<double>& grad_chi_sq) {
    const std::size_t n = f.size();
    grad_entropy.assign(n, 0.0);
    grad_chi_sq.assign(n, 0.0);

    if (form == EntropyForm::paper_shannon) {
        double total = 0.0;
        for (double v : f) total += v;
        double mean_log = 0.0;
        for (double v : f) mean_log += (v / total) * std::log(v);
        for (std::size_t i = 0; i < n; ++i) grad_entropy[i] = (mean_log - std::log(f[i])) / total;
    } else {
        for (std::size_t i = 0; i < n; ++i) grad_entropy[i] = -std::log(f[i] / model[i]);
    }

    const std::vector<double> predicted = detail::response_apply(response, f);
    std::size_t active = 0;
    std::vector<double> weighted(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (data.masked(j)) continue;
        weighted[j] = (predicted[j] - data.intensities[j]) / (sigma[j] * sigma[j]);
        ++active;
    }
    const std::vector<double> back = detail::response_apply_t(response, weighted);
    const double scale = 2.0 / static_cast<double>(active);
    for (std::size_t i = 0; i < n; ++i) grad_chi_sq[i] = scale * back[i];
}

enum class Feasibility { feasible, infeasible };

/// The reconstruction problem degenerates when the unconstrained entropy
/// maximizer already satisfies the chi-square constraint: the data carry no
/// structure beyond the noise. For skilling_gull the entropy maximum is the
/// model m; for paper_shannon it is the best-fitting uniform vector.
inline Feasibility feasibility_check(const Spectrum& data, const std::vector<double>& response,
                                     const std::vector<double>& sigma, const MerConfig& config) {
    config.validate();
    std::vector<double> fstar;
    if (config.entropy_form == EntropyForm::skilling_gull) {
        fstar = config.prior_model.empty()
                    ? detail::flat_model(data.intensities, data.mask, config.positivity_floor)
                    : config.prior_model;
    } else {
        // best uniform level c* = <R1, d/s^2> / <R1, R1/s^2> over active pixels
        std::vector<double> ones(data.size(), 1.0);
        const std::vector<double> r1 = detail::response_apply(response, ones);
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < data.size(); ++j) {
            if (data.masked(j)) continue;
            num += r1[j] * data.intensities[j] / (sigma[j] * sigma[j]);
            den += r1[j] * r1[j] / (sigma[j] * sigma[j]);
        }
        const double level = den > 0.0 ? std::max(num / den, 1e3 * config.positivity_floor) : 1.0;
        fstar.assign(data.size(), level);
    }
    return chi_square(fstar, data, response, sigma) <= config.chi0_sq ? Feasibility::infeasible
                                                                     : Feasibility::feasible;
}

/// Default model encoding approximate peak knowledge: a flat pedestal plus
/// the synthesized profile of the guessed peaks, rescaled to a target total
/// intensity. Strictly positive everywhere.
inline std::vector<double> build_prior(const std::vector<LorentzianPeak>& peaks, const DetectorModel& det,
                                       double background_fraction, double target_total) {
    if (background_fraction <= 0.0 || background_fraction > 1.0)
        throw std::invalid_argument("build_prior: background fraction must be in (0, 1]");
    const std::vector<double> axis = frequency_axis(det);
    const std::size_t n = axis.size();
    std::vector<double> profile(n, 0.0);
    for (const auto& peak : peaks) {
        if (peak.center_hz < axis.front() || peak.center_hz > axis.back())
            throw std::invalid_argument("build_prior: prior peak outside detector span");
        for (std::size_t i = 0; i < n; ++i) profile[i] += lorentzian_value(peak, axis[i]);
    }
    double profile_sum = 0.0;
    for (double v : profile) profile_sum += v;
    const double flat = peaks.empty() ? 1.0 : profile_sum / static_cast<double>(n);

    std::vector<double> model(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        model[i] = background_fraction * flat + profile[i];
        total += model[i];
    }
    if (target_total > 0.0 && total > 0.0) {
        const double scale = target_total / total;
        for (double& v : model) v *= scale;
    }
    for (double& v : model) v = std::max(v, 1e-12);
    return model;
}

namespace detail {

struct MerProblem {
    const Spectrum& data;
    const std::vector<double>& response;
    const std::vector<double>& sigma;
    const std::vector<double>& model;
    const MerConfig& config;

    double objective(const std::vector<double>& f, double& entropy_out, double& chi_out) const {
        entropy_out = entropy(f, model, config.entropy_form, config.positivity_floor / 2);
        chi_out = chi_square(f, data, response, sigma);
        return entropy_out - config.lambda * (chi_out - config.chi0_sq);
    }
};

inline std::vector<double> clamped_step(const std::vector<double>& f, const std::vector<double>& dir,
                                        double mu, double floor_value) {
    std::vector<double> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::max(f[i] + mu * dir[i], floor_value);
    return out;
}

// largest step keeping at least 90% of components off the positivity floor
inline double max_step(const std::vector<double>& f, const std::vector<double>& dir, double floor_value) {
    std::vector<double> crossings;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (dir[i] < 0.0) crossings.push_back((floor_value - f[i]) / dir[i]);
    const std::size_t allowed = f.size() / 10;
    if (crossings.size() <= allowed) return std::numeric_limits<double>::infinity();
    std::sort(crossings.begin(), crossings.end());
    return std::max(crossings[allowed], 1e-300);
}

}  // namespace detail

/// Maximum-entropy reconstruction: maximize Q = S - lambda (chi^2 - chi0^2)
/// over positive f by conjugate-gradient ascent (Polak-Ribiere+, restart
/// every N iterations or on a non-ascent direction) with a Wolfe-condition
/// line search.
inline MerResult reconstruct(const Spectrum& data, const std::vector<double>& response,
                             const std::vector<double>& sigma, const MerConfig& config_in) {
    data.validate();
    config_in.validate();
    if (!config_in.prior_model.empty() && config_in.prior_model.size() != data.size())
        throw std::invalid_argument("mer: prior model length mismatch");

    MerConfig config = config_in;
    const std::size_t n = data.size();
    const double floor_value = config.positivity_floor;

    std::vector<double> model = config.prior_model.empty()
                                    ? detail::flat_model(data.intensities, data.mask, floor_value)
                                    : config.prior_model;

    MerResult result;
    result.lambda_used = config.lambda;
    result.reconstruction = data;

    if (feasibility_check(data, response, sigma, config) == Feasibility::infeasible) {
        result.status = MerStatus::infeasible_data;
        result.reconstruction.intensities = model;
        result.final_entropy = entropy(model, model, config.entropy_form, floor_value / 2);
        result.final_chi_sq = chi_square(model, data, response, sigma);
        result.final_termination_metric = 2.0;
        return result;
    }

    detail::MerProblem problem{data, response, sigma, model, config};

    std::vector<double> f = model;
    for (double& v : f) v = std::max(v, floor_value);

    double s_val, chi_val;
    double q = problem.objective(f, s_val, chi_val);

    std::vector<double> grad_s, grad_chi, grad(n), prev_grad, direction;
    // history of (direction, gradient change) pairs for extra conjugation
    std::deque<std::pair<std::vector<double>, std::vector<double>>> history;

    auto compute_gradient = [&](const std::vector<double>& point) {
        gradients(point, data, response, sigma, model, config.entropy_form, grad_s, grad_chi);
        for (std::size_t i = 0; i < n; ++i) grad[i] = grad_s[i] - config.lambda * grad_chi[i];
    };
    auto termination_metric = [&]() {
        const double ns = detail::norm(grad_s);
        const double nc = detail::norm(grad_chi);
        if (ns < 1e-300 || nc < 1e-300) return 2.0;
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = grad_s[i] / ns - grad_chi[i] / nc;
            acc += d * d;
        }
        return 0.5 * acc;
    };

    compute_gradient(f);
    double metric = termination_metric();
    int iter = 0;
    MerStatus status = MerStatus::max_iterations;

    for (; iter < config.max_iterations; ++iter) {
        if (metric < config.termination_threshold) {
            status = MerStatus::converged;
            break;
        }

        // search direction: steepest ascent on restart, else PR+ against the
        // previous direction and Hestenes-Stiefel conjugation against up to
        // num_conjugate_dirs - 1 older ones
        if (direction.empty() || iter % static_cast<int>(n) == 0) {
            direction = grad;
            history.clear();
        } else {
            double beta_num = 0.0, beta_den = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                beta_num += grad[i] * (grad[i] - prev_grad[i]);
                beta_den += prev_grad[i] * prev_grad[i];
            }
            const double beta = std::max(0.0, beta_den > 0.0 ? beta_num / beta_den : 0.0);
            std::vector<double> candidate(n);
            for (std::size_t i = 0; i < n; ++i) candidate[i] = grad[i] + beta * direction[i];
            for (std::size_t h = 1; h < history.size(); ++h) {
                const auto& [p_old, y_old] = history[h];
                const double denom = detail::dot(p_old, y_old);
                if (std::abs(denom) < 1e-300) continue;
                const double coef = detail::dot(candidate, y_old) / denom;
                for (std::size_t i = 0; i < n; ++i) candidate[i] -= coef * p_old[i];
            }
            direction = std::move(candidate);
        }
        double slope = detail::dot(grad, direction);
        if (slope <= 0.0) {  // not an ascent direction: restart
            direction = grad;
            history.clear();
            slope = detail::dot(grad, grad);
            if (slope <= 0.0) break;
        }

        // Newton guess for the step from the directional curvature of Q
        // (for paper_shannon the dominant -sum u^2/f / T term is enough; the
        // line search corrects the estimate)
        double curv_s = 0.0, curv_chi = 0.0;
        if (config.entropy_form == EntropyForm::skilling_gull) {
            for (std::size_t i = 0; i < n; ++i) curv_s -= direction[i] * direction[i] / f[i];
        } else {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) total += f[i];
            for (std::size_t i = 0; i < n; ++i) curv_s -= direction[i] * direction[i] / f[i];
            curv_s /= total;
        }
        {
            const std::vector<double> rp = detail::response_apply(response, direction);
            std::size_t active = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (data.masked(j)) continue;
                curv_chi += rp[j] * rp[j] / (sigma[j] * sigma[j]);
                ++active;
            }
            curv_chi *= 2.0 / static_cast<double>(active);
        }
        const double curvature = -(curv_s - config.lambda * curv_chi);  // positive for concave Q
        const double mu_cap = detail::max_step(f, direction, floor_value);
        double mu = curvature > 0.0 ? slope / curvature : 1.0;
        if (!(mu > 0.0) || !std::isfinite(mu)) mu = 1.0;
        mu = std::min(mu, 0.9 * std::min(mu_cap, 1e30));

        // Wolfe line search on the clamped ray
        const std::vector<double> grad_old = grad;
        const double q0 = q;
        double best_mu = 0.0, best_q = q0;
        double s_new = s_val, chi_new = chi_val;
        std::vector<double> f_new;
        bool accepted = false;
        int evals = 0;
        double lo = 0.0, hi = std::min(mu_cap, 1e30);
        while (evals < config.max_line_search_evals) {
            ++evals;
            std::vector<double> candidate = detail::clamped_step(f, direction, mu, floor_value);
            double s_c, chi_c;
            const double q_c = problem.objective(candidate, s_c, chi_c);
            if (q_c > best_q) {
                best_q = q_c;
                best_mu = mu;
            }
            if (q_c < q0 + config.wolfe_c1 * mu * slope) {
                hi = mu;  // overshoot: sufficient-increase failed
                mu = 0.5 * (lo + mu);
                continue;
            }
            // directional derivative at the candidate (clamped components inert)
            compute_gradient(candidate);
            double slope_c = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                if (!(candidate[i] <= floor_value && direction[i] < 0.0)) slope_c += grad[i] * direction[i];
            if (slope_c > config.wolfe_c2 * slope && mu < hi * 0.999) {
                lo = mu;  // curvature not yet satisfied: lengthen
                mu = (hi < 1e30) ? 0.5 * (mu + hi) : 2.0 * mu;
                continue;
            }
            f_new = std::move(candidate);
            s_new = s_c;
            chi_new = chi_c;
            q = q_c;
            accepted = true;
            break;
        }
        if (!accepted) {
            if (best_mu > 0.0) {
                f_new = detail::clamped_step(f, direction, best_mu, floor_value);
                q = problem.objective(f_new, s_new, chi_new);
                compute_gradient(f_new);
                mu = best_mu;
            } else {
                compute_gradient(f);  // restore gradient at f, then give up
                break;
            }
        }

        // grad now holds the gradient at the accepted point
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = grad[i] - grad_old[i];
        prev_grad = grad_old;
        f = std::move(f_new);
        s_val = s_new;
        chi_val = chi_new;
        metric = termination_metric();

        if (config.record_trace)
            result.trace.push_back({iter + 1, q, s_val, chi_val, metric, mu});

        history.push_front({direction, std::move(y)});
        while (history.size() > static_cast<std::size_t>(std::max(config.num_conjugate_dirs, 1)))
            history.pop_back();
    }

    result.iterations = iter;
    result.status = status;
    result.reconstruction.intensities = f;
    result.final_chi_sq = chi_val;
    result.final_entropy = s_val;
    result.final_termination_metric = metric;
    return result;
}

/// reconstruct() with an outer bisection on lambda so the converged solution
/// lands on the constraint chi^2 = chi0_sq.
inline MerResult reconstruct_auto_lambda(const Spectrum& data, const std::vector<double>& response,
                                         const std::vector<double>& sigma, const MerConfig& config_in,
                                         double rel_tol = 0.05, int max_outer = 40) {
    MerConfig config = config_in;
    config.auto_lambda = false;

    if (feasibility_check(data, response, sigma, config) == Feasibility::infeasible)
        return reconstruct(data, response, sigma, config);

    // chi^2 of the solution decreases monotonically in lambda: bracket the
    // crossing, then bisect in log space
    auto solve = [&](double lambda) {
        config.lambda = lambda;
        return reconstruct(data, response, sigma, config);
    };
    double lambda = config.lambda;
    MerResult result = solve(lambda);
    double lo = lambda, hi = lambda;
    if (result.final_chi_sq > config.chi0_sq) {
        for (int i = 0; i < 60 && result.final_chi_sq > config.chi0_sq; ++i) {
            lo = lambda;
            lambda *= 4.0;
            result = solve(lambda);
        }
        hi = lambda;
    } else {
        for (int i = 0; i < 60 && result.final_chi_sq <= config.chi0_sq; ++i) {
            hi = lambda;
            lambda /= 4.0;
            result = solve(lambda);
        }
        lo = lambda;
    }
    for (int i = 0; i < max_outer; ++i) {
        if (std::abs(result.final_chi_sq - config.chi0_sq) <= rel_tol * config.chi0_sq) break;
        result = solve(std::sqrt(lo * hi));
        if (result.final_chi_sq > config.chi0_sq)
            lo = config.lambda;
        else
            hi = config.lambda;
        if (hi / lo < 1.0 + 1e-6) break;
    }
    return result;
}

}  // namespace brillouin
