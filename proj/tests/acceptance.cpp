// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria. The Monte Carlo criteria share one desk-scale benchmark
// run (500 realizations, SNR grid {1,2,3,5,7,10}, prior-enabled MER).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "brillouin/brillouin.hpp"

using namespace brillouin;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] C%02d %s%s%s\n", pass ? "PASS" : "FAIL", criterion, name.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double scale) {
    GaussianSampler gauss(seed);
    std::vector<double> x(n);
    for (double& v : x) v = scale * gauss.next();
    return x;
}

// --- criterion 1: perfect reconstruction ---------------------------------

void criterion_dwt_perfect_reconstruction() {
    const std::vector<std::string> families = {"db1",  "db2",  "db3",  "db4", "db5", "db6",
                                               "db7",  "db8",  "db9",  "db10", "sym2", "sym3",
                                               "sym4", "sym5", "sym6", "sym7", "sym8"};
    const std::vector<BoundaryMode> modes = {BoundaryMode::symmetric, BoundaryMode::periodic,
                                             BoundaryMode::zero};
    const std::vector<std::size_t> lengths = {64, 120, 128};
    const double start = now_seconds();
    double worst = 0.0;
    std::string worst_case;
    int signals = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const std::string& family = families[rep % families.size()];
        for (BoundaryMode mode : modes) {
            for (std::size_t n : lengths) {
                const std::vector<double> x = random_vector(n, derive_seed(1000, rep, n), 25.0);
                WaveletConfig config;
                config.family = family;
                config.boundary = mode;
                const std::vector<double> back = idwt(dwt(x, config));
                double err = 0.0;
                for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(back[i] - x[i]));
                if (err > worst) {
                    worst = err;
                    worst_case = family + "/" + to_string(mode) + "/n=" + std::to_string(n);
                }
            }
        }
        ++signals;
    }
    const double elapsed = now_seconds() - start;
    char detail[160];
    std::snprintf(detail, sizeof(detail), "%d signals, max |x - idwt(dwt(x))| = %.3e (%s), %.2f s",
                  signals, worst, worst_case.c_str(), elapsed);
    report(1, "dwt perfect reconstruction", worst < 1e-9 && elapsed < 5.0, detail);
}

// --- criterion 2: gradient oracles ----------------------------------------

void criterion_gradient_oracles() {
    const double start = now_seconds();
    double worst = 0.0;

    // entropy and chi-square gradients at 50 random points
    GaussianSampler gauss(2000);
    const std::size_t n = 16;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> f(n), m(n), data_values(n);
        for (std::size_t i = 0; i < n; ++i) {
            f[i] = 2.0 + std::abs(gauss.next());
            m[i] = 1.0 + std::abs(gauss.next());
            data_values[i] = 3.0 + gauss.next();
        }
        Spectrum d;
        d.frequencies_hz.resize(n);
        for (std::size_t i = 0; i < n; ++i) d.frequencies_hz[i] = 1e9 * static_cast<double>(i);
        d.intensities = data_values;
        const std::vector<double> sigma(n, 0.8);
        const EntropyForm form = trial % 2 ? EntropyForm::paper_shannon : EntropyForm::skilling_gull;
        std::vector<double> gs, gc;
        gradients(f, d, {}, sigma, m, form, gs, gc);
        const std::size_t i = trial % n;
        const double h = 1e-6 * std::max(1.0, std::abs(f[i]));
        std::vector<double> fp = f, fm = f;
        fp[i] += h;
        fm[i] -= h;
        const double ds = (entropy(fp, m, form) - entropy(fm, m, form)) / (2 * h);
        const double dc = (chi_square(fp, d, {}, sigma) - chi_square(fm, d, {}, sigma)) / (2 * h);
        worst = std::max(worst, std::abs(gs[i] - ds) / std::max(std::abs(ds), 1e-8));
        worst = std::max(worst, std::abs(gc[i] - dc) / std::max(std::abs(dc), 1e-8));
    }

    // Lorentzian jacobian at 50 random points
    for (int trial = 0; trial < 50; ++trial) {
        LorentzianPeak peak{5.0 + gauss.next(), 1.0 + std::abs(gauss.next()), 8.0 + std::abs(gauss.next())};
        const double x = peak.center_hz + 1.5 * gauss.next();
        double da, dc2, dw;
        lorentzian_partials(peak, x, da, dc2, dw);
        const double h = 1e-6;
        auto fd = [&](double LorentzianPeak::* field, double analytic) {
            LorentzianPeak p1 = peak, p2 = peak;
            p1.*field += h;
            p2.*field -= h;
            const double numeric = (lorentzian_value(p1, x) - lorentzian_value(p2, x)) / (2 * h);
            worst = std::max(worst, std::abs(analytic - numeric) / std::max(std::abs(numeric), 1e-8));
        };
        fd(&LorentzianPeak::amplitude, da);
        fd(&LorentzianPeak::center_hz, dc2);
        fd(&LorentzianPeak::fwhm_hz, dw);
    }

    const double elapsed = now_seconds() - start;
    char detail[120];
    std::snprintf(detail, sizeof(detail), "max relative error %.3e, %.2f s", worst, elapsed);
    report(2, "analytic gradients vs finite differences", worst < 1e-5 && elapsed < 10.0, detail);
}

// --- criterion 3: noiseless exactness -------------------------------------

void criterion_noiseless_exactness() {
    const double start = now_seconds();
    const Spectrum clean = synthesize(default_truth(), default_detector());
    bool pass = false;
    double shift_err = 1.0, width_err = 1.0;
    try {
        const FitResult result = fit(clean, initial_guess(clean, 3));
        shift_err = std::abs(result.shift_hz - 10e9) / 10e9;
        width_err = std::abs(result.fwhm_hz - 1e9) / 1e9;
        pass = result.converged && shift_err < 1e-4 && width_err < 1e-4;
    } catch (const std::exception&) {
    }
    const double elapsed = now_seconds() - start;
    char detail[120];
    std::snprintf(detail, sizeof(detail), "shift err %.2e, fwhm err %.2e, %.2f s", shift_err, width_err,
                  elapsed);
    report(3, "noiseless three-peak fit exactness", pass && elapsed < 1.0, detail);
}

// --- criterion 4: MER small-instance oracle -------------------------------

double golden_max(const std::function<double(double)>& fn, double lo, double hi) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = fn(c), fd = fn(d);
    for (int i = 0; i < 120; ++i) {
        if (fc > fd) {
            b = d; d = c; fd = fc;
            c = b - phi * (b - a);
            fc = fn(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + phi * (b - a);
            fd = fn(d);
        }
    }
    return 0.5 * (a + b);
}

void criterion_mer_small_instance() {
    const double start = now_seconds();
    const std::size_t n = 8;
    double worst = 0.0;
    bool all_ok = true;
    GaussianSampler gauss(4000);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> values(n);
        for (std::size_t i = 0; i < n; ++i) values[i] = 25.0 + 8.0 * std::abs(gauss.next());
        values[trial % n] += 70.0;
        Spectrum d;
        d.frequencies_hz.resize(n);
        for (std::size_t i = 0; i < n; ++i) d.frequencies_hz[i] = 1e9 * static_cast<double>(i);
        d.intensities = values;
        const std::vector<double> sigma(n, 2.5);

        MerConfig config;
        config.lambda = 25.0 + 12.0 * trial;
        config.termination_threshold = 1e-9;
        config.max_iterations = 100000;
        if (feasibility_check(d, {}, sigma, config) == Feasibility::infeasible) {
            all_ok = false;
            continue;
        }
        const MerResult result = reconstruct(d, {}, sigma, config);

        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(n);
        const std::vector<double> model(n, mean);
        auto objective = [&](const std::vector<double>& f) {
            return entropy(f, model, config.entropy_form, config.positivity_floor / 2) -
                   config.lambda * (chi_square(f, d, {}, sigma) - config.chi0_sq);
        };
        std::vector<double> brute = model;
        for (int sweep = 0; sweep < 350; ++sweep) {
            for (std::size_t i = 0; i < n; ++i) {
                auto line = [&](double v) {
                    std::vector<double> probe = brute;
                    probe[i] = v;
                    return objective(probe);
                };
                brute[i] = golden_max(line, config.positivity_floor, 8.0 * (std::abs(brute[i]) + 10.0));
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double rel = std::abs(result.reconstruction.intensities[i] - brute[i]) /
                               std::max(std::abs(brute[i]), 1e-9);
            worst = std::max(worst, rel);
        }
    }
    const double elapsed = now_seconds() - start;
    char detail[120];
    std::snprintf(detail, sizeof(detail), "10 instances, worst per-component error %.3e, %.1f s", worst,
                  elapsed);
    report(4, "mer matches brute-force maximization at N=8", all_ok && worst < 0.01 && elapsed < 60.0,
           detail);
}

// --- criteria 5-7, 9: desk-scale Monte Carlo ------------------------------

double std_se(const MethodStats& s) {
    return s.n_success > 1 ? s.std_hz / std::sqrt(2.0 * static_cast<double>(s.n_success - 1)) : 0.0;
}

void criteria_monte_carlo(const BenchReport& report_data, double bench_seconds) {
    const double shift = report_data.true_shift_hz;

    // 5a: ordering with 2-combined-SE slack at SNR >= 3
    bool ordering_ok = true;
    std::string ordering_detail;
    for (double snr : {3.0, 5.0, 7.0, 10.0}) {
        const MethodStats& none = report_data.at(snr, Method::none);
        const MethodStats& wa = report_data.at(snr, Method::wa);
        const MethodStats& mer = report_data.at(snr, Method::mer);
        const double slack_mw = 2.0 * std::sqrt(std_se(mer) * std_se(mer) + std_se(wa) * std_se(wa));
        const double slack_wn = 2.0 * std::sqrt(std_se(wa) * std_se(wa) + std_se(none) * std_se(none));
        if (!(mer.std_hz <= wa.std_hz + slack_mw && wa.std_hz <= none.std_hz + slack_wn)) {
            ordering_ok = false;
            char buf[160];
            std::snprintf(buf, sizeof(buf), " violated at snr %.0f (mer %.4f, wa %.4f, none %.4f GHz)", snr,
                          report_data.at(snr, Method::mer).std_hz / 1e9, wa.std_hz / 1e9, none.std_hz / 1e9);
            ordering_detail += buf;
        }
    }
    report(5, "std ordering mer <= wa <= none at snr >= 3",
           ordering_ok, ordering_ok ? "all grid points" : ordering_detail);

    // 5b: MER bias at snr 1 below 3%
    const MethodStats& mer1 = report_data.at(1.0, Method::mer);
    char detail_b[120];
    std::snprintf(detail_b, sizeof(detail_b), "|bias| = %.2f%% of the true shift (n=%ld)",
                  std::abs(mer1.bias_hz) / shift * 100.0, mer1.n_success);
    report(5, "mer bias at snr 1 below 3%", std::abs(mer1.bias_hz) / shift < 0.03, detail_b);

    // 5c: raw-fit bias at snr 10 in [0.3%, 2%]
    const MethodStats& none10 = report_data.at(10.0, Method::none);
    const double bias10 = std::abs(none10.bias_hz) / shift * 100.0;
    char detail_c[120];
    std::snprintf(detail_c, sizeof(detail_c), "|bias| = %.3f%% (n=%ld, %.0f s bench)", bias10,
                  none10.n_success, bench_seconds);
    report(5, "raw-fit bias at snr 10 in [0.3%, 2%]", bias10 >= 0.3 && bias10 <= 2.0, detail_c);

    // 6: linewidths at snr 5
    const MethodStats& none5 = report_data.at(5.0, Method::none);
    const MethodStats& wa5 = report_data.at(5.0, Method::wa);
    const MethodStats& mer5 = report_data.at(5.0, Method::mer);
    const bool none_w_ok = none5.linewidth_mean_hz >= 4e9 && none5.linewidth_mean_hz <= 11e9;
    const bool wa_w_ok = wa5.linewidth_mean_hz >= 1.5e9 && wa5.linewidth_mean_hz <= 3.2e9;
    const bool mer_w_ok = mer5.linewidth_mean_hz >= 0.9e9 && mer5.linewidth_mean_hz <= 1.3e9;
    char detail_w[200];
    std::snprintf(detail_w, sizeof(detail_w),
                  "mean fwhm: none %.2f GHz (band [4, 11]%s), wa %.2f (band [1.5, 3.2]%s), "
                  "mer %.2f (band [0.9, 1.3]%s)",
                  none5.linewidth_mean_hz / 1e9, none_w_ok ? "" : " MISSED",
                  wa5.linewidth_mean_hz / 1e9, wa_w_ok ? "" : " MISSED",
                  mer5.linewidth_mean_hz / 1e9, mer_w_ok ? "" : " MISSED");
    report(6, "linewidth scale and ordering at snr 5", none_w_ok && wa_w_ok && mer_w_ok, detail_w);

    // 7: regeneration fraction at snr 1
    const double regen_fraction =
        static_cast<double>(mer1.n_regenerated) /
        std::max(1.0, static_cast<double>(mer1.n_regenerated + mer1.n_success));
    char detail_r[120];
    std::snprintf(detail_r, sizeof(detail_r), "%ld regenerated / %ld success -> %.1f%%",
                  mer1.n_regenerated, mer1.n_success, 100.0 * regen_fraction);
    report(7, "mer infeasibility rate at snr 1 in [5%, 40%]",
           regen_fraction >= 0.05 && regen_fraction <= 0.40, detail_r);
}

void criterion_crlb_benchmark_relation(const BenchReport& report_data) {
    // 9: no method std below the CRLB at snr >= 3 (2-SE slack)
    bool crlb_ok = true;
    std::string crlb_detail;
    for (std::size_t i = 0; i < report_data.snr_grid.size(); ++i) {
        if (report_data.snr_grid[i] < 3.0) continue;
        for (Method m : report_data.methods) {
            const MethodStats& s = report_data.stats[i].at(m);
            if (s.n_success < 2) continue;
            if (s.std_hz < report_data.crlb_std_hz[i] - 2.0 * std_se(s)) {
                crlb_ok = false;
                char buf[120];
                std::snprintf(buf, sizeof(buf), " %s at snr %.0f: std %.4f < bound %.4f GHz;",
                              to_string(m), report_data.snr_grid[i], s.std_hz / 1e9,
                              report_data.crlb_std_hz[i] / 1e9);
                crlb_detail += buf;
            }
        }
    }
    report(9, "no estimator std below the crlb at snr >= 3", crlb_ok,
           crlb_ok ? "bound respected on the whole grid" : crlb_detail);
}

// --- criterion 8: CRLB golden constant ------------------------------------

void criterion_crlb_golden() {
    const double start = now_seconds();
    CrlbInputs inputs;
    inputs.detector = default_detector();
    inputs.brillouin_fwhm_hz = 1e9;
    inputs.relative_intensity = 0.1;
    inputs.snr_per_pixel = 1.0;
    // frozen by scripts/crlb_reference.py
    const double golden = 3.468110339751833006025316e13;
    const double value = crlb_variance(inputs);
    bool pass = std::abs(value - golden) <= 1e-12 * golden;

    CrlbInputs snr2 = inputs;
    snr2.snr_per_pixel = 2.0;
    pass = pass && std::abs(crlb_variance(snr2) - value / 4.0) <= 1e-12 * value;
    CrlbInputs gam2 = inputs;
    gam2.brillouin_fwhm_hz = 2e9;
    pass = pass && std::abs(crlb_variance(gam2) - 8.0 * value) <= 8e-12 * value;
    CrlbInputs px2 = inputs;
    px2.detector.pixel_size_m *= 2.0;
    pass = pass && std::abs(crlb_variance(px2) - 2.0 * value) <= 2e-12 * value;

    const double elapsed = now_seconds() - start;
    char detail[140];
    std::snprintf(detail, sizeof(detail), "var = %.15e Hz^2 vs golden %.15e, %.3f s", value, golden,
                  elapsed);
    report(8, "crlb golden constant and scaling laws", pass && elapsed < 1.0, detail);
}

// --- criterion 10: throughput ----------------------------------------------

void criterion_throughput() {
    const Spectrum clean = synthesize(default_truth(), default_detector());
    NoiseSpec spec;
    spec.sigma = 200.0;
    spec.seed = 4242;
    const Spectrum noisy = add_noise(clean, spec);
    const std::vector<double> sigma(noisy.size(), spec.sigma);

    MerConfig config;
    config.lambda = default_mer_lambda(5.0);
    config.prior_model =
        build_prior(default_truth().peaks, default_detector(), 0.3, integrated_intensity(noisy));
    double t0 = now_seconds();
    const MerResult mer = reconstruct(noisy, {}, sigma, config);
    const double mer_seconds = now_seconds() - t0;

    WaveletConfig wav;
    t0 = now_seconds();
    for (int i = 0; i < 50; ++i) denoise(noisy, wav);
    const double wa_ms = (now_seconds() - t0) / 50.0 * 1e3;

    char detail[140];
    std::snprintf(detail, sizeof(detail), "mer %.3f s (%d iterations, %s), wa %.3f ms", mer_seconds,
                  mer.iterations, to_string(mer.status), wa_ms);
    report(10, "single-spectrum throughput (mer <= 1 s, wa <= 10 ms)",
           mer_seconds <= 1.0 && wa_ms <= 10.0, detail);
}

// --- criterion 11: speed-of-sound round trip --------------------------------

void criterion_speed_of_sound() {
    GaussianSampler gauss(1100);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double v = 600.0 + 2500.0 * std::abs(std::sin(gauss.next()));
        const double lambda = (350.0 + 400.0 * std::abs(std::sin(gauss.next()))) * 1e-9;
        const double index = 1.0 + 1.4 * std::abs(std::sin(gauss.next()));
        const double angle = 0.15 + 2.98 * std::abs(std::sin(gauss.next()));
        const double back = speed_of_sound(shift_for_speed(v, lambda, index, angle), lambda, index, angle);
        worst = std::max(worst, std::abs(back - v) / v);
    }
    const double water = speed_of_sound(7.081e9, 561e-9, 1.333, 3.14159265358979323846);
    char detail[120];
    std::snprintf(detail, sizeof(detail), "worst round-trip error %.2e, backscatter example %.1f m/s",
                  worst, water);
    report(11, "speed-of-sound round trip and water example", worst < 1e-12 && std::abs(water - 1490.0) < 1.5,
           detail);
}

// --- criterion 12: determinism ----------------------------------------------

void criterion_determinism() {
    BenchConfig config;
    config.realizations = 60;
    config.snr_grid = {5.0, 10.0};
    config.methods = {Method::none, Method::wa, Method::mer};
    config.base_seed = 77;
    config.threads = 3;
    const std::string a = report_to_csv(run_bench(config));
    const std::string b = report_to_csv(run_bench(config));
    config.threads = 1;
    const std::string c = report_to_csv(run_bench(config));
    report(12, "bench reports byte-identical across runs and thread counts", a == b && a == c,
           a == b ? (a == c ? "3 threads x2 and 1 thread agree" : "thread count changed the bytes")
                  : "repeat run differed");
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");

    criterion_dwt_perfect_reconstruction();
    criterion_gradient_oracles();
    criterion_noiseless_exactness();
    criterion_mer_small_instance();

    // desk-scale Monte Carlo shared by criteria 5, 6, 7, 9
    BenchConfig config;
    config.realizations = 500;
    config.snr_grid = {1.0, 2.0, 3.0, 5.0, 7.0, 10.0};
    config.methods = {Method::none, Method::wa, Method::mer};
    config.base_seed = 20240901;
    config.threads = 2;
    config.mer_use_prior = true;
    const double t0 = now_seconds();
    const BenchReport bench_report = run_bench(config);
    const double bench_seconds = now_seconds() - t0;
    criteria_monte_carlo(bench_report, bench_seconds);

    criterion_crlb_golden();
    criterion_crlb_benchmark_relation(bench_report);
    criterion_throughput();
    criterion_speed_of_sound();
    criterion_determinism();

    std::printf("%d criteria failed\n", g_failures);
    return g_failures;
}
