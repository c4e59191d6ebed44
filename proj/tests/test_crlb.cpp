#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "brillouin/crlb.hpp"
#include "brillouin/noise.hpp"

using namespace brillouin;

namespace {

CrlbInputs paper_inputs() {
    CrlbInputs inputs;
    inputs.detector = default_detector();
    inputs.brillouin_fwhm_hz = 1e9;
    inputs.relative_intensity = 0.1;
    inputs.snr_per_pixel = 1.0;
    return inputs;
}

// frozen from scripts/crlb_reference.py (50-digit evaluation)
constexpr double kGoldenVarianceHz2 = 3.468110339751833006025316e13;

}  // namespace

TEST_CASE("variance bound matches the independently computed golden constant") {
    CHECK(crlb_variance(paper_inputs()) == Catch::Approx(kGoldenVarianceHz2).epsilon(1e-12));
}

TEST_CASE("scaling laws of the bound") {
    const CrlbInputs base = paper_inputs();
    const double v0 = crlb_variance(base);

    SECTION("SNR^-2") {
        CrlbInputs doubled = base;
        doubled.snr_per_pixel = 2.0;
        CHECK(crlb_variance(doubled) == Catch::Approx(v0 / 4.0).epsilon(1e-12));
    }
    SECTION("(alpha Gamma)^3 with gamma = 0") {
        CrlbInputs wide = base;
        wide.brillouin_fwhm_hz = 2e9;
        CHECK(crlb_variance(wide) == Catch::Approx(8.0 * v0).epsilon(1e-12));
    }
    SECTION("proportional to the pixel size at fixed SNR") {
        CrlbInputs coarse = base;
        coarse.detector.pixel_size_m *= 2.0;  // alpha untouched
        CHECK(crlb_variance(coarse) == Catch::Approx(2.0 * v0).epsilon(1e-12));
    }
    SECTION("response width adds to the Brillouin width inside the cube") {
        CrlbInputs blurred = base;
        blurred.detector.response_fwhm_hz = 1e9;
        CHECK(crlb_variance(blurred) == Catch::Approx(8.0 * v0).epsilon(1e-12));
    }
}

TEST_CASE("vanishing Brillouin line carries no shift information") {
    CrlbInputs inputs = paper_inputs();
    inputs.relative_intensity = 0.0;
    CHECK(std::isinf(crlb_variance(inputs)));
}

TEST_CASE("per-pixel snr definition") {
    const DetectorModel det = default_detector();
    SECTION("identity: I_inf = X sigma / Delta gives SNR 1") {
        const double sigma = 3.0;
        const double integrated = det.detector_width_m * sigma / det.pixel_size_m;
        CHECK(snr_per_pixel(integrated, det, sigma) == Catch::Approx(1.0).epsilon(1e-12));
    }
    SECTION("doubling sigma halves the SNR") {
        CHECK(snr_per_pixel(1e4, det, 2.0) == Catch::Approx(0.5 * snr_per_pixel(1e4, det, 1.0)).epsilon(1e-12));
    }
    SECTION("consistency invariant enforced") {
        CrlbInputs inputs = paper_inputs();
        inputs.integrated_intensity = 1e4;
        inputs.noise_sigma = 1.0;
        inputs.snr_per_pixel = 123.0;  // inconsistent on purpose
        CHECK_THROWS_AS(crlb_variance(inputs), std::invalid_argument);
        inputs.snr_per_pixel = snr_per_pixel(1e4, inputs.detector, 1.0);
        CHECK_NOTHROW(crlb_variance(inputs));
    }
}

TEST_CASE("trapezoid and plain-sum integrated intensities agree for the default spectrum") {
    const Spectrum clean = synthesize(default_truth(), default_detector());
    const double trapezoid = integrated_intensity(clean);
    double riemann = 0.0;
    for (double v : clean.intensities) riemann += v;
    CHECK(trapezoid == Catch::Approx(riemann).epsilon(0.005));

    // conversion chain: peak SNR 5 -> sigma -> per-pixel SNR
    const double sigma = sigma_for_snr(5.0, default_truth(), default_detector(), SnrConvention::peak_based);
    CHECK(sigma == Catch::Approx(200.0));
    const double converted = snr_per_pixel(trapezoid, default_detector(), sigma);
    const double direct = riemann * default_detector().pixel_size_m /
                          (default_detector().detector_width_m * sigma);
    CHECK(converted == Catch::Approx(direct).epsilon(0.005));
}

TEST_CASE("bound curve is strictly decreasing with exact SNR ratios") {
    const CrlbInputs inputs = paper_inputs();
    const std::vector<double> bounds = crlb_curve(inputs, {1.0, 2.0, 4.0});
    REQUIRE(bounds.size() == 3);
    CHECK(bounds[1] == Catch::Approx(bounds[0] / 2.0).epsilon(1e-12));
    CHECK(bounds[2] == Catch::Approx(bounds[0] / 4.0).epsilon(1e-12));

    const std::vector<double> single = crlb_curve(inputs, {1.0});
    CHECK(single[0] == Catch::Approx(std::sqrt(crlb_variance(inputs))).epsilon(1e-12));

    const std::vector<double> grid = crlb_curve(inputs, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] < grid[i - 1]);
    CHECK_THROWS_AS(crlb_curve(inputs, {3.0, 1.0}), std::invalid_argument);
}
