#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "brillouin/bench.hpp"
#include "brillouin/config_map.hpp"

using namespace brillouin;

namespace {

BenchConfig small_config() {
    BenchConfig config;
    config.realizations = 60;
    config.snr_grid = {10.0};
    config.methods = {Method::none};
    config.base_seed = 42;
    config.threads = 2;
    return config;
}

}  // namespace

TEST_CASE("near-noiseless bench run estimates the shift almost exactly") {
    BenchConfig config = small_config();
    config.snr_grid = {1e6};  // sigma ~ 1e-3 counts against a 1e3 peak
    config.methods = {Method::none, Method::wa};
    // the noise level is known here; auto-estimation would pick up the
    // signal's own fine-scale content and shave the peaks
    config.wavelet_config.noise_level = 1e-3;
    const BenchReport report = run_bench(config);
    for (Method m : config.methods) {
        const MethodStats& s = report.at(1e6, m);
        INFO(to_string(m));
        CHECK(s.n_success == 60);
        CHECK(std::abs(s.bias_hz) / 10e9 < 1e-6);
        CHECK(s.std_hz / 10e9 < 1e-6);
    }
}

TEST_CASE("raw fitting at SNR 10 lands in the expected bias/std regime") {
    BenchConfig config = small_config();
    config.realizations = 120;
    const BenchReport report = run_bench(config);
    const MethodStats& s = report.at(10.0, Method::none);
    CHECK(s.n_success + s.n_fit_failures == 120);
    CHECK(s.n_success > 100);
    // generous windows: rare peak-identification outliers fatten the spread
    CHECK(std::abs(s.bias_pct) < 3.0);
    CHECK(s.std_pct > 0.1);
    CHECK(s.std_pct < 12.0);
}

TEST_CASE("bench reports are byte-deterministic with parallelism enabled") {
    BenchConfig config = small_config();
    config.methods = {Method::none, Method::wa, Method::mer};
    config.realizations = 50;
    config.threads = 3;
    const BenchReport a = run_bench(config);
    config.threads = 1;
    const BenchReport b = run_bench(config);
    CHECK(report_to_csv(a) == report_to_csv(b));

    config.threads = 4;
    const BenchReport c = run_bench(config);
    CHECK(report_to_csv(a) == report_to_csv(c));
}

TEST_CASE("report csv carries the documented header and one row per (snr, method)") {
    BenchConfig config = small_config();
    config.methods = {Method::none, Method::wa};
    config.snr_grid = {5.0, 10.0};
    config.realizations = 50;
    const BenchReport report = run_bench(config);
    const std::string csv = report_to_csv(report);
    CHECK(csv.rfind("snr,method,bias_ghz,std_ghz,bias_pct,std_pct,linewidth_mean_ghz,linewidth_std_ghz,"
                    "n_success,n_regenerated,n_fit_failures,crlb_std_ghz\n", 0) == 0);
    std::size_t rows = 0;
    for (char ch : csv)
        if (ch == '\n') ++rows;
    CHECK(rows == 1 + 2 * 2);
}

TEST_CASE("linewidth stats lookup") {
    BenchConfig config = small_config();
    config.realizations = 50;
    const BenchReport report = run_bench(config);
    const auto stats = linewidth_stats(report, 10.0);
    REQUIRE(stats.count(Method::none) == 1);
    CHECK(stats.at(Method::none).first > 0.0);
    CHECK_THROWS_AS(linewidth_stats(report, 3.3), std::invalid_argument);
}

TEST_CASE("render_plots writes parsable svg and the csv pair") {
    BenchConfig config = small_config();
    config.realizations = 50;
    BenchReport report = run_bench(config);
    report.provenance = bench_provenance(config);

    const std::string dir = (std::filesystem::temp_directory_path() / "bench_plot_test").string();
    const auto files = render_plots(report, dir);
    REQUIRE(files.size() == 5);
    for (const auto& path : files) {
        INFO(path);
        CHECK(std::filesystem::exists(path));
    }
    std::ifstream svg(files[0]);
    std::string text((std::istreambuf_iterator<char>(svg)), std::istreambuf_iterator<char>());
    CHECK(text.rfind("<svg", 0) == 0);
    CHECK(text.find("</svg>") != std::string::npos);
    CHECK(text.find("<polyline") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("bench config validation") {
    BenchConfig config = small_config();
    config.realizations = 10;
    CHECK_THROWS_AS(run_bench(config), std::invalid_argument);
    config = small_config();
    config.snr_grid = {};
    CHECK_THROWS_AS(run_bench(config), std::invalid_argument);
    config = small_config();
    config.methods = {};
    CHECK_THROWS_AS(run_bench(config), std::invalid_argument);
}

TEST_CASE("mer lambda table interpolates between calibration points") {
    const double mid = default_mer_lambda(4.0);
    CHECK(mid <= std::max(default_mer_lambda(3.0), default_mer_lambda(5.0)));
    CHECK(mid >= std::min(default_mer_lambda(3.0), default_mer_lambda(5.0)));
    // below/above the grid: clamped, then decaying with SNR
    CHECK(default_mer_lambda(0.5) == default_mer_lambda(1.0));
    CHECK(default_mer_lambda(20.0) < default_mer_lambda(10.0));
    for (double snr : {1.0, 2.0, 3.0, 5.0, 7.0, 10.0}) CHECK(default_mer_lambda(snr) > 0.0);
}
