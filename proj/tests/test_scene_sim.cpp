#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ch4flux/error.hpp"
#include "ch4flux/scene_sim.hpp"
#include "test_util.hpp"

using namespace ch4flux;

namespace {

FineSlope builtin_slope() {
    return analytic_fine_slope(synthetic_methane_cross_section(1550.0, 2600.0, 0.1), 30.0);
}

SimConfig quiet_config(const char* sensor, std::size_t rows, std::size_t cols) {
    SimConfig cfg;
    cfg.sensor = builtin_spec(sensor);
    cfg.rows = rows;
    cfg.cols = cols;
    cfg.noise = false;
    cfg.scene_seed = 7;
    return cfg;
}

}  // namespace

TEST_CASE("Gaussian blob integrates to its analytic volume") {
    const PlumeField f = gaussian_blob_field(64, 64, {32.0, 32.0}, {3.0, 3.0}, 1000.0);
    CHECK(f.analytic_total == doctest::Approx(2.0 * std::numbers::pi * 9.0 * 1000.0).epsilon(1e-12));
    CHECK(std::abs(f.total() - 56548.667764616) / 56548.667764616 < 0.005);
    CHECK(f.peak() == 1000.0);
    CHECK(f.at(32, 32) == 1000.0);
    for (std::size_t r = 0; r < 64; ++r) {
        for (std::size_t c = 0; c < 64; ++c) {
            const double d2 = (r - 32.0) * (r - 32.0) + (c - 32.0) * (c - 32.0);
            CHECK(f.at(r, c) >= 0.0);
            if (d2 > 25.0 * 9.0) {
                CHECK(f.at(r, c) < 1e-5 * 1000.0);
            }
        }
    }
    const PlumeField elongated = gaussian_blob_field(80, 80, {40.0, 40.0}, {4.0, 8.0}, 500.0);
    CHECK(elongated.at(40, 48) == doctest::Approx(500.0 * std::exp(-0.5)).epsilon(1e-12));
    CHECK(elongated.at(44, 40) == doctest::Approx(500.0 * std::exp(-0.5)).epsilon(1e-12));
    CHECK(zero_field(5, 6).total() == 0.0);
}

TEST_CASE("rendering is deterministic in the seeds and thread count") {
    SimConfig cfg = quiet_config("PRISMA", 24, 20);
    cfg.noise = true;
    cfg.striping = 0.005;
    cfg.smile = true;
    cfg.seed = 3;
    const PlumeField field = gaussian_blob_field(24, 20, {12.0, 10.0}, {2.0, 2.0}, 500.0);
    const FineSlope slope = builtin_slope();

    const RadianceCube a = render_cube(field, slope, cfg, 1);
    const RadianceCube b = render_cube(field, slope, cfg, 3);
    CHECK(a.data == b.data);

    SimConfig other = cfg;
    other.seed = 4;
    const RadianceCube c = render_cube(field, slope, other, 1);
    CHECK(c.data != a.data);

    // Changing the noise seed leaves the scene itself alone.
    other.noise = false;
    cfg.noise = false;
    CHECK(render_cube(field, slope, cfg).data == render_cube(field, slope, other).data);
}

TEST_CASE("a zero field without noise or striping reproduces the background") {
    const SimConfig cfg = quiet_config("EnMAP", 16, 12);
    const FineSlope slope = builtin_slope();
    const RadianceCube bg = render_background(slope, cfg);
    const RadianceCube cube = render_cube(zero_field(16, 12), slope, cfg);
    CHECK(cube.data == bg.data);
    CHECK(cube.wavelengths_nm == cfg.sensor.band_centers_nm);
    for (double v : cube.data) {
        CHECK(v > 0.0);
    }
}

TEST_CASE("plume pixels follow Beer-Lambert against the background") {
    SimConfig cfg = quiet_config("PRISMA", 20, 20);
    cfg.smile = true;
    const FineSlope slope = builtin_slope();
    const PlumeField field = gaussian_blob_field(20, 20, {10.0, 10.0}, {3.0, 3.0}, 800.0);
    const RadianceCube bg = render_background(slope, cfg);
    const RadianceCube cube = render_cube(field, slope, cfg);
    for (std::size_t c : {0u, 10u, 19u}) {
        const auto slopes = column_band_slopes(slope, cfg.sensor, c, 20, true);
        for (std::size_t r : {5u, 10u, 14u}) {
            for (std::size_t b = 0; b < cube.bands; b += 7) {
                const double expected = std::exp(slopes[b] * field.at(r, c));
                CHECK(cube.at(b, r, c) / bg.at(b, r, c) == doctest::Approx(expected).epsilon(1e-12));
            }
        }
    }
    const auto edge = column_band_slopes(slope, cfg.sensor, 0, 20, true);
    const auto centre = column_band_slopes(slope, cfg.sensor, 0, 20, false);
    CHECK(edge != centre);
}

TEST_CASE("sensor noise matches the configured SNR") {
    for (const char* sensor : {"PRISMA", "EnMAP"}) {
        SimConfig cfg = quiet_config(sensor, 64, 64);
        const FineSlope slope = builtin_slope();
        const RadianceCube bg = render_background(slope, cfg);
        cfg.noise = true;
        cfg.seed = 21;
        const RadianceCube noisy = render_cube(zero_field(64, 64), slope, cfg);
        double sum = 0.0;
        double sum_sq = 0.0;
        for (std::size_t i = 0; i < noisy.data.size(); ++i) {
            const double d = noisy.data[i] - bg.data[i];
            sum += d;
            sum_sq += d * d;
        }
        const double n = static_cast<double>(noisy.data.size());
        const double std = std::sqrt(sum_sq / n - (sum / n) * (sum / n));
        const double expected = cfg.sensor.reference_radiance / cfg.sensor.snr_reference;
        CHECK(std::abs(std - expected) / expected < 0.03);
        CHECK(std::abs(sum / n) < 5.0 * expected / std::sqrt(n));
    }
}

TEST_CASE("truth mask keeps pixels above one percent of the peak") {
    const PlumeField f = gaussian_blob_field(40, 40, {20.0, 20.0}, {3.0, 3.0}, 1000.0);
    const PlumeMask mask = truth_mask(f, 900.0);
    std::size_t expected = 0;
    for (double v : f.values) {
        if (v > 10.0) ++expected;
    }
    CHECK(mask.count() == expected);
    CHECK(mask.pixel_area_m2 == 900.0);
}

TEST_CASE("configuration validation and JSON round trip") {
    SimConfig cfg = quiet_config("EMIT", 10, 10);
    cfg.snr = 150.0;
    cfg.striping = 0.01;
    cfg.seed = 99;
    const SimConfig back = nlohmann::json(cfg).get<SimConfig>();
    CHECK(back.sensor == cfg.sensor);
    CHECK(back.snr == cfg.snr);
    CHECK(back.seed == 99);
    CHECK(back.scene_seed == 7);
    CHECK(back.striping == 0.01);
    CHECK(back.ambient_ch4_ppmm == kAmbientCh4Ppmm);

    SimConfig bad = cfg;
    bad.snr = 0.0;
    CHECK_THROWS_AS(bad.validate(), ContractError);
    bad = cfg;
    bad.striping = -0.1;
    CHECK_THROWS_AS(bad.validate(), ContractError);
    bad = cfg;
    bad.background.mode = BackgroundMode::gaussian;
    bad.background.mean = {1.0, 2.0};
    CHECK_THROWS_AS(bad.validate(), ContractError);

    nlohmann::json doc = nlohmann::json(cfg);
    doc["background"]["mode"] = "fractal";
    CHECK_THROWS_AS(doc.get<SimConfig>(), ContractError);
}

TEST_CASE("plume fields round trip through files") {
    testing::TempDir dir;
    PlumeField f = gaussian_blob_field(9, 11, {4.0, 5.0}, {2.0, 2.0}, 300.0);
    write_plume_field(dir / "truth.json", f);
    const PlumeField back = read_plume_field(dir / "truth.json");
    CHECK(back.rows == 9);
    CHECK(back.cols == 11);
    CHECK(back.analytic_total == doctest::Approx(f.analytic_total));
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        CHECK(back.values[i] == doctest::Approx(f.values[i]).epsilon(1e-7));
    }
}
