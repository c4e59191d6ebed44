#include <catch2/catch_amalgamated.hpp>

#include "brillouin/spectrum.hpp"

using namespace brillouin;

TEST_CASE("lorentzian profile normalization") {
    LorentzianPeak peak{10e9, 1e9, 1000.0};
    CHECK(lorentzian_value(peak, 10e9) == Catch::Approx(1000.0));
    CHECK(lorentzian_value(peak, 10.5e9) == Catch::Approx(500.0));

    LorentzianPeak wide{0.0, 1e9, 1e4};
    // hand evaluation: 1e4 * 0.25 / (100 + 0.25)
    CHECK(lorentzian_value(wide, 10e9) == Catch::Approx(24.937655860349127).epsilon(1e-12));
}

TEST_CASE("frequency axis of the default detector") {
    const DetectorModel det = default_detector();
    CHECK(det.num_pixels == 120);
    CHECK(det.frequency_step_hz() == Catch::Approx(0.5e9));
    CHECK(det.bandwidth_hz() == Catch::Approx(60e9));
    CHECK(det.dispersion_scale == Catch::Approx(1.3e-14));

    const auto axis = frequency_axis(det);
    REQUIRE(axis.size() == 120);
    CHECK(axis[60] == Catch::Approx(0.0).margin(1e-3));
    CHECK(axis.front() == Catch::Approx(-30e9));
    CHECK(axis.back() == Catch::Approx(29.5e9));
}

TEST_CASE("synthesize the default three-peak configuration") {
    const Spectrum s = synthesize(default_truth(), default_detector());
    REQUIRE(s.size() == 120);
    double max_val = 0.0;
    std::size_t arg_max = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.intensities[i] > max_val) {
            max_val = s.intensities[i];
            arg_max = i;
        }
    }
    CHECK(arg_max == 60);  // Rayleigh on the center pixel
    CHECK(max_val == Catch::Approx(1e4).epsilon(1e-3));
    // Brillouin peaks on-grid at +-10 GHz = pixels 40 and 80; the Rayleigh
    // tail adds ~25 counts there
    CHECK(s.intensities[40] == Catch::Approx(1e3).epsilon(3e-2));
    CHECK(s.intensities[80] == Catch::Approx(1e3).epsilon(3e-2));
    s.validate();
}

TEST_CASE("peak centered between two pixels splits evenly") {
    const DetectorModel det = default_detector();
    GroundTruth truth;
    truth.peaks = {{0.25e9, 1e9, 1000.0}};  // halfway between pixel 60 (0) and 61 (0.5 GHz)
    const Spectrum s = synthesize(truth, det);
    CHECK(s.intensities[60] == Catch::Approx(s.intensities[61]).epsilon(1e-12));
}

TEST_CASE("empty peak list synthesizes the background only") {
    GroundTruth truth;
    truth.background = 0.0;
    const Spectrum s = synthesize(truth, default_detector());
    for (double v : s.intensities) CHECK(v == 0.0);
}

TEST_CASE("peak outside the axis span is rejected") {
    GroundTruth truth;
    truth.peaks = {{45e9, 1e9, 1.0}};
    CHECK_THROWS_AS(synthesize(truth, default_detector()), std::invalid_argument);
}

TEST_CASE("synthesis is linear in the peak list") {
    const DetectorModel det = default_detector();
    GroundTruth a, b, both;
    a.peaks = {{-5e9, 2e9, 300.0}};
    b.peaks = {{7.5e9, 1e9, 900.0}};
    both.peaks = {a.peaks[0], b.peaks[0]};
    const Spectrum sa = synthesize(a, det);
    const Spectrum sb = synthesize(b, det);
    const Spectrum sc = synthesize(both, det);
    for (std::size_t i = 0; i < sc.size(); ++i)
        CHECK(sc.intensities[i] == Catch::Approx(sa.intensities[i] + sb.intensities[i]).margin(1e-9));
}

TEST_CASE("symmetric truth gives a mirror-symmetric spectrum") {
    // odd pixel count puts the axis center exactly on a pixel
    const DetectorModel det = make_detector(121, 6.5e-6, 16.6e-3, 60.5e9);
    const GroundTruth truth = make_three_peak_truth(10e9, 1e9, 1e4, 1e3);
    const Spectrum s = synthesize(truth, det);
    const std::size_t c = 60;
    for (std::size_t k = 1; k <= 40; ++k)
        CHECK(s.intensities[c - k] == Catch::Approx(s.intensities[c + k]).epsilon(1e-9));
}

TEST_CASE("subpixel integration stays close to center sampling for smooth peaks") {
    SynthesisOptions sub;
    sub.sampling = PixelSampling::subpixel_integrate;
    sub.subsamples = 8;
    const Spectrum center = synthesize(default_truth(), default_detector());
    const Spectrum averaged = synthesize(default_truth(), default_detector(), sub);
    REQUIRE(center.size() == averaged.size());
    // sub-pixel averaging shaves the sharp peak top by several percent
    CHECK(averaged.intensities[60] < center.intensities[60]);
    CHECK(averaged.intensities[60] == Catch::Approx(center.intensities[60]).epsilon(0.12));
}

TEST_CASE("apply_response identity and averaging") {
    const DetectorModel det = default_detector();
    const Spectrum s = synthesize(default_truth(), det);

    SECTION("identity response returns the input") {
        const Spectrum out = apply_response(det, s);
        CHECK(out.intensities == s.intensities);
    }

    SECTION("uniform rows average the spectrum") {
        DetectorModel blur = det;
        const std::size_t n = s.size();
        blur.response.assign(n * n, 1.0 / static_cast<double>(n));
        const Spectrum out = apply_response(blur, s);
        double mean = 0.0;
        for (double v : s.intensities) mean += v;
        mean /= static_cast<double>(n);
        for (double v : out.intensities) CHECK(v == Catch::Approx(mean).epsilon(1e-12));
    }

    SECTION("3-pixel box blur of a delta matches a direct matrix multiply") {
        DetectorModel blur = det;
        const std::size_t n = s.size();
        blur.response.assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (std::llabs(static_cast<long long>(i) - static_cast<long long>(j)) <= 1)
                    blur.response[i * n + j] = 1.0 / 3.0;
        Spectrum delta = s;
        std::fill(delta.intensities.begin(), delta.intensities.end(), 0.0);
        delta.intensities[50] = 3.0;
        const Spectrum out = apply_response(blur, delta);
        // oracle: direct multiply
        for (std::size_t i = 0; i < n; ++i) {
            double expected = 0.0;
            for (std::size_t j = 0; j < n; ++j) expected += blur.response[i * n + j] * delta.intensities[j];
            CHECK(out.intensities[i] == Catch::Approx(expected).margin(1e-12));
        }
        CHECK(out.intensities[49] == Catch::Approx(1.0));
        CHECK(out.intensities[50] == Catch::Approx(1.0));
        CHECK(out.intensities[51] == Catch::Approx(1.0));
    }

    SECTION("dimension mismatch throws") {
        DetectorModel small = make_detector(8, 6.5e-6, 16.6e-3, 4e9);
        CHECK_THROWS_AS(apply_response(small, s), std::invalid_argument);
    }
}

TEST_CASE("integrated intensity approximates the analytic line area") {
    const Spectrum s = synthesize(default_truth(), default_detector());
    const double integrated = integrated_intensity(s);
    // sum of Lorentzian areas in pixel units: (pi/2) Gamma (A_R + 2 A_B) / step
    const double analytic = 0.5 * 3.14159265358979323846 * 1e9 * (1e4 + 2e3) / 0.5e9;
    CHECK(integrated == Catch::Approx(analytic).epsilon(0.05));
    double direct = 0.0;
    for (double v : s.intensities) direct += v;
    CHECK(integrated == Catch::Approx(direct).epsilon(0.005));
}

TEST_CASE("three-peak truth is symmetric about the Rayleigh line") {
    const GroundTruth truth = make_three_peak_truth(10e9, 1e9, 1e4, 1e3);
    REQUIRE(truth.peaks.size() == 3);
    CHECK(truth.peaks[1].center_hz == 0.0);
    CHECK(std::abs(truth.peaks[0].center_hz + truth.peaks[2].center_hz) <= 1e-9 * truth.brillouin_shift_hz);
    CHECK(brillouin_amplitude(truth) == 1e3);
}

TEST_CASE("spectrum validation catches a non-uniform grid") {
    Spectrum s;
    s.frequencies_hz = {0.0, 1.0, 2.5};
    s.intensities = {0.0, 0.0, 0.0};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}
