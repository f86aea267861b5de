#include <doctest.h>

#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "ch4flux/commands.hpp"
#include "ch4flux/io.hpp"
#include "ch4flux/retrieval.hpp"
#include "test_util.hpp"

#include <httplib.h>

using ch4flux::testing::read_bytes;
using ch4flux::testing::TempDir;
using ch4flux::testing::write_text;
namespace cli = ch4flux::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kData = CH4FLUX_DATA_DIR;

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

nlohmann::json read_json(const fs::path& p) {
    return nlohmann::json::parse(read_bytes(p));
}

// Small end-to-end fixture: LUT, simulated PRISMA scene and its products.
struct Pipeline {
    TempDir dir;
    fs::path xsec = dir / "xsec.csv";
    fs::path lut = dir / "lut.json";
    fs::path config = dir / "sim.json";
    fs::path cube = dir / "cube.json";
    fs::path map = dir / "map.json";
    fs::path polygon = dir / "polygon.json";

    Pipeline() {
        REQUIRE(run({"synth-xsec", "--step", "0.5", "-o", xsec.string()}).code == 0);
        REQUIRE(run({"lut-build", "--xsec", xsec.string(), "--axes", (kData / "lut_axes.json").string(),
                     "-o", lut.string()})
                    .code == 0);
        write_text(config, R"({"sensor": "PRISMA", "rows": 32, "cols": 32, "noise": true, "seed": 5,
            "scene_seed": 7, "plume": {"center": [16, 16], "sigma_px": [3, 3], "peak_ppmm": 800}})");
        REQUIRE(run({"simulate", "--config", config.string(), "-o", cube.string()}).code == 0);
        write_text(polygon, R"({"crs": "pixel", "vertices": [[8, 8], [24, 8], [24, 24], [8, 24]]})");
    }

    Result retrieve(std::vector<std::string> extra = {}) const {
        std::vector<std::string> args = {"retrieve", "--cube", cube.string(), "--lut", lut.string(),
                                         "--scene", (kData / "scene.json").string(), "-o",
                                         map.string()};
        args.insert(args.end(), extra.begin(), extra.end());
        return run(args);
    }
};

}  // namespace

TEST_CASE("cli: usage errors exit 2 and help exits 0") {
    CHECK(run({}).code == cli::kExitContract);
    CHECK(run({"--help"}).code == cli::kExitOk);
    CHECK(run({"frobnicate"}).code == cli::kExitContract);
    CHECK(run({"sensor"}).code == cli::kExitContract);
    CHECK(run({"sensor", "AVIRIS"}).code == cli::kExitContract);

    const Result ok = run({"sensor", "enmap"});
    CHECK(ok.code == cli::kExitOk);
    CHECK(nlohmann::json::parse(ok.out).at("gsd_m") == 30.0);
}

TEST_CASE("cli: LUT construction rejects bad tables and axes") {
    TempDir dir;
    write_text(dir / "neg.csv", "wavelength_nm,cross_section_per_ppmm\n2300,1e-6\n2301,-1e-6\n");
    const Result neg = run({"lut-build", "--xsec", (dir / "neg.csv").string(), "--axes",
                            (kData / "lut_axes.json").string(), "-o", (dir / "lut.json").string()});
    CHECK(neg.code == cli::kExitContract);
    CHECK(neg.err.find(":3:") != std::string::npos);

    nlohmann::json axes = read_json(kData / "lut_axes.json");
    axes["ch4_enhancement_ppmm"] = {1000, 4000, 64000, 70000};
    write_text(dir / "axes.json", axes.dump());
    write_text(dir / "ok.csv", "2300,1e-6\n2301,2e-6\n");
    const Result no_zero = run({"lut-build", "--xsec", (dir / "ok.csv").string(), "--axes",
                                (dir / "axes.json").string(), "-o", (dir / "lut.json").string()});
    CHECK(no_zero.code == cli::kExitContract);
    CHECK(no_zero.err.find("ch4_enhancement_ppmm") != std::string::npos);
}

TEST_CASE("cli: full pipeline and its failure modes") {
    Pipeline p;

    SUBCASE("target") {
        const fs::path out = p.dir / "target.json";
        const Result ok = run({"target", "--lut", p.lut.string(), "--scene",
                               (kData / "scene.json").string(), "--sensor", "PRISMA", "-o",
                               out.string()});
        REQUIRE(ok.code == cli::kExitOk);
        const auto doc = read_json(out);
        CHECK(doc.at("log_slope").size() >= 8);
        CHECK(doc.at("sensor") == "PRISMA");

        const Result empty = run({"target", "--lut", p.lut.string(), "--scene",
                                  (kData / "scene.json").string(), "--sensor", "PRISMA", "--window",
                                  "1000,1100", "-o", out.string()});
        CHECK(empty.code == cli::kExitNumerical);

        const Result both = run({"target", "--lut", p.lut.string(), "--scene",
                                 (kData / "scene.json").string(), "--sensor", "PRISMA",
                                 "--sensor-file", p.config.string(), "-o", out.string()});
        CHECK(both.code == cli::kExitContract);
    }

    SUBCASE("retrieve and quantify") {
        REQUIRE(p.retrieve().code == cli::kExitOk);
        const auto header = read_json(p.map);
        CHECK(header.at("units") == "ppmm");

        const fs::path report = p.dir / "flux.json";
        const Result q = run({"quantify", "--map", p.map.string(), "--polygon", p.polygon.string(),
                              "--wind", (kData / "wind_buenos_aires.json").string(), "-o",
                              report.string()});
        REQUIRE(q.code == cli::kExitOk);
        const auto doc = read_json(report);
        CHECK(doc.dump().find("q_kg_per_h") != std::string::npos);

        const Result ghgsat = run({"quantify", "--map", p.map.string(), "--polygon",
                                   p.polygon.string(), "--wind",
                                   (kData / "wind_buenos_aires.json").string(), "--sensor", "GHGSAT",
                                   "-o", report.string()});
        CHECK(ghgsat.code == cli::kExitContract);
        CHECK(ghgsat.err.find("U_eff") != std::string::npos);
        CHECK(run({"quantify", "--map", p.map.string(), "--polygon", p.polygon.string(), "--wind",
                   (kData / "wind_buenos_aires.json").string(), "--sensor", "GHGSAT", "--ueff",
                   "3.0", "-o", report.string()})
                  .code == cli::kExitOk);

        write_text(p.dir / "far.json", R"({"vertices": [[100, 100], [110, 100], [110, 110]]})");
        CHECK(run({"quantify", "--map", p.map.string(), "--polygon", (p.dir / "far.json").string(),
                   "--wind", (kData / "wind_buenos_aires.json").string(), "-o", report.string()})
                  .code == cli::kExitContract);
    }

    SUBCASE("retrieval rejects a mismatched sensor and a starved window") {
        CHECK(p.retrieve({"--sensor", "EMIT"}).code == cli::kExitContract);
        CHECK(p.retrieve({"--window", "2440,2450"}).code == cli::kExitNumerical);
        CHECK(p.retrieve({"--window", "2450,2100"}).code == cli::kExitContract);
    }

    SUBCASE("thread count does not change any output byte") {
        REQUIRE(p.retrieve({"--threads", "1", "--mode", "columnwise"}).code == 0);
        const fs::path map_data = ch4flux::io::companion_data_path(p.map);
        const fs::path cube_data = ch4flux::io::companion_data_path(p.cube);
        const std::string one = read_bytes(map_data);
        REQUIRE(one.size() == 32 * 32 * sizeof(float));
        const std::string one_header = read_bytes(p.map);
        REQUIRE(p.retrieve({"--threads", "4", "--mode", "columnwise"}).code == 0);
        CHECK(read_bytes(map_data) == one);
        CHECK(read_bytes(p.map) == one_header);

        const std::string cube = read_bytes(cube_data);
        REQUIRE(!cube.empty());
        REQUIRE(run({"simulate", "--config", p.config.string(), "-o", p.cube.string(), "--threads",
                     "3"})
                    .code == 0);
        CHECK(read_bytes(cube_data) == cube);
    }

    SUBCASE("ppb output is the ppm m map scaled by 1/8") {
        REQUIRE(p.retrieve().code == 0);
        const auto ppmm = ch4flux::read_enhancement_map(p.map);
        REQUIRE(p.retrieve({"--units", "ppb"}).code == 0);
        const auto ppb = ch4flux::read_enhancement_map(p.map);
        CHECK(ppb.units == ch4flux::EnhancementUnits::ppb);
        for (std::size_t i = 0; i < ppb.values.size(); i += 17) {
            CHECK(ppb.values[i] == doctest::Approx(ppmm.values[i] * 0.125).epsilon(1e-6));
        }
    }
}

TEST_CASE("cli: compare") {
    TempDir dir;
    const fs::path out = dir / "compare.json";
    const fs::path table = dir / "compare.txt";
    const Result ok = run({"compare", "--records", (kData / "records.jsonl").string(), "-o",
                           out.string(), "--table", table.string()});
    REQUIRE(ok.code == cli::kExitOk);
    const auto doc = read_json(out);
    bool found = false;
    for (const auto& report : doc.at("reports")) {
        for (const auto& pair : report.at("pairs")) {
            if (report.at("site_id") == "buenos_aires_landfill" && pair.at("dt_s") == 97) {
                found = true;
            }
        }
    }
    CHECK(found);
    CHECK(read_bytes(table).find("GHGSAT") != std::string::npos);

    std::string text = read_bytes(kData / "records.jsonl");
    text += "{\"sensor\": \"EMIT\", \"timestamp\": \"not a time\", \"site_id\": \"x\", \"flux\": 1}\n";
    write_text(dir / "bad.jsonl", text);
    const Result bad = run({"compare", "--records", (dir / "bad.jsonl").string(), "-o", out.string()});
    CHECK(bad.code == cli::kExitContract);
    CHECK(bad.err.find("line 7") != std::string::npos);
}

TEST_CASE("cli: fetch-wind talks to an HTTP provider") {
    httplib::Server server;
    std::string seen_key;
    server.Get("/data/3.0/onecall/timemachine", [&](const httplib::Request& req, httplib::Response& res) {
        seen_key = req.get_param_value("appid");
        if (req.get_param_value("dt") != "1705070716") {
            res.status = 400;
            return;
        }
        res.set_content(R"({"data": [{"wind_speed": 6.7, "wind_deg": 450.0}]})", "application/json");
    });
    server.Get("/broken", [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread worker([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    TempDir dir;
    const std::string base = "http://127.0.0.1:" + std::to_string(port);
    const fs::path out = dir / "wind.json";
    const Result ok = run({"fetch-wind", "--base-url", base, "--lat", "-34.6", "--lon", "-58.4",
                           "--time", "2024-01-12T14:45:16Z", "--api-key", "k123", "-o",
                           out.string()});
    CHECK(ok.code == cli::kExitOk);
    CHECK(seen_key == "k123");
    if (ok.code == cli::kExitOk) {
        const auto doc = read_json(out);
        CHECK(doc.at("u10_ms") == 6.7);
        CHECK(doc.at("direction_deg") == 90.0);
    }

    const Result broken = run({"fetch-wind", "--base-url", base, "--path", "/broken", "--lat", "0",
                               "--lon", "0", "--time", "2024-01-12T14:45:16Z", "-o", out.string()});
    CHECK(broken.code == cli::kExitContract);

    server.stop();
    worker.join();
}
