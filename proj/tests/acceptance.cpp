// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "ch4flux/commands.hpp"
#include "ch4flux/compare.hpp"
#include "ch4flux/io.hpp"
#include "ch4flux/quantify.hpp"
#include "ch4flux/retrieval.hpp"
#include "ch4flux/scene_sim.hpp"

#include <httplib.h>

#include <unistd.h>

using namespace ch4flux;
namespace fs = std::filesystem;

namespace {

const fs::path kData = CH4FLUX_DATA_DIR;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

const FineSlope& builtin_slope() {
    static const FineSlope slope =
        analytic_fine_slope(synthetic_methane_cross_section(1550.0, 2600.0, 0.1), 30.0);
    return slope;
}

// 50 bands at 7.5 nm over the 2.3 um window.
SensorSpec fifty_band_sensor() {
    SensorSpec spec = builtin_spec("PRISMA");
    spec.name = SensorName::CUSTOM;
    spec.band_centers_nm.clear();
    spec.fwhm_nm.clear();
    for (int k = 0; k < 50; ++k) {
        spec.band_centers_nm.push_back(2080.0 + 7.5 * k);
        spec.fwhm_nm.push_back(10.0);
    }
    spec.smile_shift_nm = 0.0;
    return spec;
}

TargetProvider provider_for(const SensorSpec& spec, const SpectralWindow& window) {
    return [spec, window](std::optional<ColumnPosition> col) {
        return target_from_fine_slope(builtin_slope(), spec, window, col);
    };
}

double stddev(const std::vector<double>& v) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double x : v) {
        sum += x;
        sum_sq += x * x;
    }
    const double n = static_cast<double>(v.size());
    const double mean = sum / n;
    return std::sqrt(std::max(sum_sq / n - mean * mean, 0.0));
}

// ---------------------------------------------------------------------------

Outcome matched_filter_oracle() {
    SimConfig cfg;
    cfg.sensor = fifty_band_sensor();
    cfg.rows = 256;
    cfg.cols = 256;
    cfg.noise = false;
    cfg.scene_seed = 7;
    const PlumeField field = gaussian_blob_field(256, 256, {128.0, 128.0}, {3.0, 3.0}, 500.0);
    RoundTripSettings settings;
    settings.window = SpectralWindow{2075.0, 2450.0};

    const TargetSpectrum t = target_from_fine_slope(builtin_slope(), cfg.sensor, *settings.window);
    double max_slope = 0.0;
    for (double s : t.log_slope) max_slope = std::max(max_slope, std::abs(s));
    const double small_signal = max_slope * field.peak();

    const auto t0 = std::chrono::steady_clock::now();
    const RoundTripReport r = round_trip(field, builtin_slope(), cfg, settings);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const double mean_err = r.plume_mean_retrieved_ppmm / r.plume_mean_true_ppmm - 1.0;
    Outcome o;
    o.pass = small_signal < 0.01 && r.max_pixel_relative_error <= 0.02 && std::abs(mean_err) <= 0.005 &&
             seconds < 10.0;
    o.detail = fmt("256x256x%zu, |slope*dX| max %.4f, worst pixel %.2f%% over %zu plume pixels, "
                   "plume mean %+.3f%%, %.2f s",
                   cfg.sensor.band_count(), small_signal, 100.0 * r.max_pixel_relative_error,
                   r.mask_pixels, 100.0 * mean_err, seconds);
    return o;
}

RadianceCube noisy_prisma_cube() {
    SimConfig cfg;
    cfg.sensor = builtin_spec("PRISMA");
    cfg.rows = 128;
    cfg.cols = 128;
    cfg.scene_seed = 7;
    cfg.seed = 1;
    const PlumeField field = gaussian_blob_field(128, 128, {64.0, 64.0}, {5.0, 7.0}, 500.0);
    return render_cube(field, builtin_slope(), cfg);
}

Outcome scale_invariance() {
    const RadianceCube cube = noisy_prisma_cube();
    RadianceCube scaled = cube;
    for (double& v : scaled.data) v *= 7.3;
    const SpectralWindow window = default_window(cube.sensor);
    RetrievalOptions opts;
    opts.delta = 0.0;
    opts.exclude_plume = false;
    const EnhancementMap a = matched_filter(cube, provider_for(cube.sensor, window), opts);
    const EnhancementMap b = matched_filter(scaled, provider_for(cube.sensor, window), opts);

    double worst = 0.0;
    double worst_abs = 0.0;
    bool zero_moved = false;
    for (std::size_t p = 0; p < a.values.size(); ++p) {
        const double diff = std::abs(b.values[p] - a.values[p]);
        worst_abs = std::max(worst_abs, diff);
        if (a.values[p] == 0.0) {
            zero_moved = zero_moved || diff != 0.0;
        } else {
            worst = std::max(worst, diff / std::abs(a.values[p]));
        }
    }
    Outcome o;
    o.pass = worst <= 1e-10 && !zero_moved;
    o.detail = fmt("c = 7.3, delta = 0: worst per-pixel relative change %.2e "
                   "(largest absolute %.2e ppm m, map std %.1f)",
                   worst, worst_abs, stddev(a.values));
    return o;
}

Outcome zero_mean_identity() {
    const RadianceCube cube = noisy_prisma_cube();
    RetrievalOptions opts;
    opts.delta = 0.0;
    const EnhancementMap map =
        matched_filter(cube, provider_for(cube.sensor, default_window(cube.sensor)), opts);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t p = 0; p < map.values.size(); ++p) {
        if (map.background_used[p]) {
            sum += map.values[p];
            ++n;
        }
    }
    const double ratio = std::abs(sum / static_cast<double>(n)) / stddev(map.values);
    Outcome o;
    o.pass = ratio <= 1e-8;
    o.detail = fmt("|mean| / std = %.2e over %zu statistics pixels", ratio, n);
    return o;
}

Outcome snr_scaling() {
    auto background_std = [](double snr) {
        SimConfig cfg;
        cfg.sensor = builtin_spec("PRISMA");
        cfg.rows = 256;
        cfg.cols = 256;
        cfg.scene_seed = 7;
        cfg.seed = 2;
        cfg.snr = snr;
        const RadianceCube cube = render_cube(zero_field(256, 256), builtin_slope(), cfg);
        RetrievalOptions opts;
        const EnhancementMap map =
            matched_filter(cube, provider_for(cube.sensor, default_window(cube.sensor)), opts);
        return stddev(map.values);
    };
    const double snr = builtin_spec("PRISMA").snr_reference;
    const double low = background_std(snr);
    const double high = background_std(2.0 * snr);
    const double ratio = high / low;
    Outcome o;
    o.pass = std::abs(ratio - 0.5) <= 0.05;
    o.detail = fmt("std %.1f -> %.1f ppm m (%.1f -> %.1f ppb) over 65536 pixels, ratio %.3f", low,
                   high, low * kPpmmToPpb, high * kPpmmToPpb, ratio);
    return o;
}

Outcome smile_benefit() {
    const nlohmann::json doc = io::read_json_file(kData / "sim_prisma.json");
    const SimConfig cfg = doc.get<SimConfig>();
    const auto& plume = doc.at("plume");
    const PlumeField field =
        gaussian_blob_field(cfg.rows, cfg.cols, plume.at("center").get<std::array<double, 2>>(),
                            plume.at("sigma_px").get<std::array<double, 2>>(),
                            plume.at("peak_ppmm").get<double>());

    auto mean_abs = [&](const SimConfig& c, RetrievalMode mode) {
        RoundTripSettings settings;
        settings.retrieval.mode = mode;
        return round_trip(field, builtin_slope(), c, settings).background_mean_abs_ppmm;
    };
    const double global = mean_abs(cfg, RetrievalMode::global);
    const double columnwise = mean_abs(cfg, RetrievalMode::columnwise);
    const double reduction = 1.0 - columnwise / global;

    SimConfig smile_only = cfg;
    smile_only.striping = 0.0;
    const double so_reduction = 1.0 - mean_abs(smile_only, RetrievalMode::columnwise) /
                                          mean_abs(smile_only, RetrievalMode::global);
    Outcome o;
    o.pass = cfg.smile && cfg.sensor.smile_shift_nm == 2.8 && reduction >= 0.25;
    o.detail = fmt("standard fixture: mean |dX| %.1f -> %.1f ppm m (%.1f%% lower); "
                   "without striping %.1f%% lower",
                   global, columnwise, 100.0 * reduction, 100.0 * so_reduction);
    return o;
}

Outcome unit_conversion() {
    EnhancementMap map;
    map.rows = 1;
    map.cols = 1;
    map.values = {1000.0};
    const double ppb = convert_units(map, EnhancementUnits::ppb).values[0];
    Outcome o;
    o.pass = ppb == 125.0;
    o.detail = fmt("1000 ppm m -> %.17g ppb", ppb);
    return o;
}

Outcome quantification_chain() {
    EnhancementMap map;
    map.rows = 32;
    map.cols = 32;
    map.values.assign(32 * 32, 200.0);
    map.units = EnhancementUnits::ppb;
    const PlumePolygon poly{{{10.0, 10.0}, {20.0, 10.0}, {20.0, 20.0}, {10.0, 20.0}}};
    WindRecord wind;
    wind.u10_ms = 6.7;
    const FluxEstimate est = quantify_plume(map, poly, builtin_spec("PRISMA"), wind);

    const bool ime_ok = std::abs(est.ime_kg - 102.99) <= 0.01;
    const bool l_ok = est.plume_length_m == 300.0;
    const bool u_ok = std::abs(est.u_eff_ms - 3.179) <= 1e-12;
    const bool q_ok = std::abs(est.q_kg_per_h - 3929.5) <= 0.5;
    Outcome o;
    o.pass = ime_ok && l_ok && u_ok && q_ok && est.plume_pixels == 100;
    o.detail = fmt("IME %.6f kg [%s], L %.1f m [%s], U_eff %.15g m/s [%s], Q %.4f kg/h vs "
                   "3929.5 +- 0.5 [%s]",
                   est.ime_kg, ime_ok ? "ok" : "off", est.plume_length_m, l_ok ? "ok" : "off",
                   est.u_eff_ms, u_ok ? "ok" : "off", est.q_kg_per_h, q_ok ? "ok" : "off");
    return o;
}

Outcome effective_wind_table() {
    auto w = [](double u10) {
        WindRecord r;
        r.u10_ms = u10;
        return r;
    };
    const double prisma = effective_wind(builtin_spec("PRISMA"), w(6.7));
    const double enmap = effective_wind(builtin_spec("EnMAP"), w(6.7));
    const double emit = effective_wind(builtin_spec("EMIT"), w(2.7));
    Outcome o;
    o.pass = std::abs(prisma - 3.179) <= 1e-12 && std::abs(enmap - 3.169) <= 1e-12 &&
             std::abs(emit - 1.885) <= 1e-12;
    o.detail = fmt("PRISMA %.15g, EnMAP %.15g, EMIT %.15g m/s", prisma, enmap, emit);
    return o;
}

Outcome linearity_and_monotonicity() {
    std::mt19937_64 rng(20240112);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const AtmosphereParams atm;
    const double exact_scales[] = {0.25, 0.5, 2.0, 4.0, 8.0};
    std::size_t failures = 0;
    double worst_general = 0.0;

    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t rows = 16 + rng() % 48;
        const std::size_t cols = 16 + rng() % 48;
        EnhancementMap map;
        map.rows = rows;
        map.cols = cols;
        map.units = EnhancementUnits::ppb;
        for (std::size_t i = 0; i < rows * cols; ++i) map.values.push_back(500.0 * unit(rng));
        EnhancementMap other = map;
        for (double& v : other.values) v = 300.0 * unit(rng);

        const double x0 = 1.0 + unit(rng) * (cols / 2.0);
        const double y0 = 1.0 + unit(rng) * (rows / 2.0);
        const double w = 2.0 + unit(rng) * (cols / 2.0 - 2.0);
        const double h = 2.0 + unit(rng) * (rows / 2.0 - 2.0);
        const PlumePolygon inner{{{x0, y0}, {x0 + w, y0}, {x0 + w, y0 + h}, {x0, y0 + h}}};
        const PlumePolygon outer{{{x0 - 1.0, y0 - 1.0},
                                  {x0 + w + 1.0, y0 - 1.0},
                                  {x0 + w + 1.0, y0 + h + 1.0},
                                  {x0 - 1.0, y0 + h + 1.0}}};
        const double area = 900.0 * (1.0 + static_cast<double>(rng() % 4));
        const PlumeMask small = rasterize_mask(inner, rows, cols, area);
        const PlumeMask large = rasterize_mask(outer, rows, cols, area);
        const double k = scaling_factor(atm, area);
        const double u = 1.0 + 5.0 * unit(rng);

        const double base = ime(map, small, k);
        const double q = flux(base, u, plume_length(small));
        for (double c : exact_scales) {
            EnhancementMap scaled = map;
            for (double& v : scaled.values) v *= c;
            const double s = ime(scaled, small, k);
            if (s != c * base || flux(s, u, plume_length(small)) != c * q) ++failures;
            if (flux(base, c * u, plume_length(small)) != c * q) ++failures;
        }
        const double c = 0.1 + 10.0 * unit(rng);
        EnhancementMap scaled = map;
        for (double& v : scaled.values) v *= c;
        worst_general = std::max(worst_general, std::abs(ime(scaled, small, k) - c * base) / (c * base));

        EnhancementMap sum = map;
        for (std::size_t i = 0; i < sum.values.size(); ++i) sum.values[i] += other.values[i];
        const double additive = ime(map, small, k) + ime(other, small, k);
        worst_general = std::max(worst_general, std::abs(ime(sum, small, k) - additive) / additive);

        // A mask that contains another never has less IME or a shorter L on a nonnegative map.
        const bool contained = std::all_of(small.pixels.begin(), small.pixels.end(), [&](const PixelIndex& px) {
            return std::find(large.pixels.begin(), large.pixels.end(), px) != large.pixels.end();
        });
        if (!contained || ime(map, large, k) < base || plume_length(large) < plume_length(small)) {
            ++failures;
        }
    }
    Outcome o;
    o.pass = failures == 0 && worst_general <= 1e-12;
    o.detail = fmt("100 fixtures: %zu exact-law violations, worst general-scale/additivity error %.2e",
                   failures, worst_general);
    return o;
}

Outcome comparison_fixtures() {
    const auto ba = pair_acquisitions(buenos_aires_fixture(), 600.0);
    const bool ba_ok = ba.size() == 1 && ba[0].dt_s == 97;

    const ComparisonReport kam = build_report("kamishlidza_compressor", kamishlidza_fixture(), 600.0);
    double g = 0.0, e = 0.0, p = 0.0;
    for (const auto& r : kam.records) {
        if (r.sensor == "GHGSAT") g = r.flux_t_per_h();
        if (r.sensor == "EnMAP") e = r.flux_t_per_h();
        if (r.sensor == "PRISMA") p = r.flux_t_per_h();
    }
    const bool order_ok = g == 18.54 && e == 37.72 && p == 12.29 && g < e &&
                          kam.min_flux_sensor == "PRISMA" && kam.max_flux_sensor == "EnMAP";

    auto rd = [](double a, double b) { return 2.0 * std::abs(a - b) / (a + b); };
    double worst = 0.0;
    for (const auto& fixture : {buenos_aires_fixture(), kamishlidza_fixture()}) {
        for (const auto& pair : pair_acquisitions(fixture, 1e9)) {
            const double expected = rd(pair.first_flux_t_per_h, pair.second_flux_t_per_h);
            const double swapped = relative_difference(pair.second_flux_t_per_h, pair.first_flux_t_per_h);
            worst = std::max({worst, std::abs(pair.relative_difference - expected),
                              std::abs(swapped - pair.relative_difference)});
        }
    }
    const double kam_pe = relative_difference(12.29, 37.72);
    Outcome o;
    o.pass = ba_ok && order_ok && worst <= 1e-9 && std::abs(kam_pe - 1.016996600679864) <= 1e-9;
    o.detail = fmt("landfill pairs <= 600 s: %zu (dt %lld s); compressor min %s max %s; "
                   "PRISMA-EnMAP rd %.10f; worst rd deviation %.1e",
                   ba.size(), ba.empty() ? -1LL : static_cast<long long>(ba[0].dt_s),
                   kam.min_flux_sensor.c_str(), kam.max_flux_sensor.c_str(), kam_pe, worst);
    return o;
}

Outcome round_trip_ime() {
    SimConfig cfg;
    cfg.sensor = builtin_spec("EnMAP");
    cfg.rows = 256;
    cfg.cols = 256;
    cfg.scene_seed = 7;
    const PlumeField field = gaussian_blob_field(256, 256, {128.0, 128.0}, {6.0, 6.0}, 500.0);
    const RoundTripSettings settings;

    cfg.noise = false;
    const RoundTripReport clean = round_trip(field, builtin_slope(), cfg, settings);

    cfg.noise = true;
    double mean_err = 0.0;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        cfg.seed = seed;
        const RoundTripReport r = round_trip(field, builtin_slope(), cfg, settings);
        mean_err += r.ime_relative_error / 10.0;
        worst = std::max(worst, std::abs(r.ime_relative_error));
    }
    Outcome o;
    o.pass = std::abs(clean.ime_relative_error) <= 0.03 && std::abs(mean_err) <= 0.10;
    o.detail = fmt("noiseless IME error %+.2f%%; noisy mean over 10 seeds %+.2f%% (worst seed %.2f%%)",
                   100.0 * clean.ime_relative_error, 100.0 * mean_err, 100.0 * worst);
    return o;
}

// ---------------------------------------------------------------------------
// Determinism: every command twice, in separate directories, with different
// worker counts; all produced files must match byte for byte.

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run_cli(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    if (code != 0) {
        std::fprintf(stderr, "  command failed (%d): %s", code, err.str().c_str());
    }
    return code;
}

Outcome determinism() {
    httplib::Server server;
    server.Get(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"data": [{"wind_speed": 6.7, "wind_deg": 90.0}]})", "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread worker([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    const std::string base = "http://127.0.0.1:" + std::to_string(port);

    const fs::path root = fs::temp_directory_path() / ("ch4flux_accept_" + std::to_string(::getpid()));
    fs::remove_all(root);
    int failures = 0;
    auto session = [&](const fs::path& dir, const std::string& threads) {
        fs::create_directories(dir);
        const auto f = [&](const char* name) { return (dir / name).string(); };
        fs::copy_file(kData / "sim_prisma.json", dir / "sim.json");
        const std::string data = kData.string() + "/";
        const std::vector<std::vector<std::string>> commands = {
            {"synth-xsec", "--step", "0.2", "-o", f("xsec.csv")},
            {"lut-build", "--xsec", f("xsec.csv"), "--axes", data + "lut_axes.json", "-o", f("lut.json")},
            {"target", "--lut", f("lut.json"), "--scene", data + "scene.json", "--sensor", "PRISMA",
             "--column", "5", "--columns", "128", "-o", f("target.json")},
            {"simulate", "--config", f("sim.json"), "--seed", "3", "--threads", threads, "-o", f("cube.json")},
            {"retrieve", "--cube", f("cube.json"), "--lut", f("lut.json"), "--scene", data + "scene.json",
             "--threads", threads, "-o", f("map_global.json")},
            {"retrieve", "--cube", f("cube.json"), "--lut", f("lut.json"), "--scene", data + "scene.json",
             "--mode", "columnwise", "--units", "ppb", "--threads", threads, "-o", f("map_column.json")},
            {"quantify", "--map", f("map_column.json"), "--polygon", data + "plume_polygon.json", "--wind",
             data + "wind_buenos_aires.json", "-o", f("flux.json")},
            {"compare", "--records", data + "records.jsonl", "-o", f("compare.json"), "--table",
             f("compare.txt")},
            {"sensor", "EMIT", "-o", f("emit.json")},
            {"fetch-wind", "--base-url", base, "--lat", "-34.6", "--lon", "-58.4", "--time",
             "2024-01-12T14:45:16Z", "-o", f("wind.json")},
        };
        for (const auto& cmd : commands) {
            if (run_cli(cmd) != 0) ++failures;
        }
    };
    session(root / "a", "1");
    session(root / "b", "4");
    server.stop();
    worker.join();

    std::size_t files = 0;
    std::vector<std::string> differing;
    for (const auto& entry : fs::directory_iterator(root / "a")) {
        ++files;
        const fs::path other = root / "b" / entry.path().filename();
        if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
            differing.push_back(entry.path().filename().string());
        }
    }
    fs::remove_all(root);

    Outcome o;
    o.pass = failures == 0 && differing.empty() && files > 10;
    std::string names;
    for (const auto& d : differing) names += " " + d;
    o.detail = fmt("10 commands, threads 1 vs 4: %zu files compared, %zu differ%s, %d command failures",
                   files, differing.size(), names.c_str(), failures);
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"matched-filter oracle", matched_filter_oracle},
        {"scale invariance", scale_invariance},
        {"zero-mean identity", zero_mean_identity},
        {"SNR scaling", snr_scaling},
        {"smile benefit", smile_benefit},
        {"unit conversion", unit_conversion},
        {"quantification chain", quantification_chain},
        {"effective-wind table", effective_wind_table},
        {"IME/flux linearity and mask monotonicity", linearity_and_monotonicity},
        {"comparison fixtures", comparison_fixtures},
        {"end-to-end round trip", round_trip_ime},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("[%s] %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
                criteria.size());
    return failed == 0 ? 0 : 1;
}
