#include "ch4flux/commands.hpp"

#include <fstream>
#include <map>
#include <ostream>

#include "ch4flux/compare.hpp"
#include "ch4flux/cube.hpp"
#include "ch4flux/error.hpp"
#include "ch4flux/io.hpp"
#include "ch4flux/quantify.hpp"
#include "ch4flux/scene_sim.hpp"
#include "ch4flux/target.hpp"
#include "ch4flux/wind_fetch.hpp"

namespace ch4flux::commands {

namespace {

nlohmann::json tool_stamp() {
    return {{"name", kToolName}, {"version", kToolVersion}};
}

nlohmann::json window_json(const SpectralWindow& w) {
    return nlohmann::json::array({w.low_nm, w.high_nm});
}

SceneParams read_scene(const fs::path& path) {
    try {
        return io::read_json_file(path).get<SceneParams>();
    } catch (const nlohmann::json::exception& e) {
        throw ContractError("scene parameters " + path.string() + ": " + e.what());
    }
}

template <typename T>
T read_json_as(const fs::path& path, const char* what) {
    const nlohmann::json doc = io::read_json_file(path);
    try {
        return doc.get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ContractError(std::string(what) + " " + path.string() + ": " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text)) {
        throw ContractError("cannot write file: " + path.string());
    }
}

struct SimPlan {
    PlumeField field;
    PlumeSignature signature;
    nlohmann::json inputs = nlohmann::json::object();
};

SimPlan plan_simulation(const fs::path& config_path, const nlohmann::json& doc,
                        const SimConfig& config) {
    SimPlan plan;
    if (doc.contains("plume") && !doc.at("plume").is_null()) {
        const auto& p = doc.at("plume");
        try {
            plan.field = gaussian_blob_field(config.rows, config.cols,
                                             p.at("center").get<std::array<double, 2>>(),
                                             p.at("sigma_px").get<std::array<double, 2>>(),
                                             p.at("peak_ppmm").get<double>());
        } catch (const nlohmann::json::exception& e) {
            throw ContractError(std::string("sim config plume: ") + e.what());
        }
    } else {
        plan.field = zero_field(config.rows, config.cols);
    }

    const nlohmann::json target =
        doc.contains("target") ? doc.at("target") : nlohmann::json::object();
    try {
        if (target.contains("lut")) {
            const fs::path lut_path =
                io::resolve_beside(config_path, target.at("lut").get<std::string>());
            const SceneParams scene = target.at("scene").get<SceneParams>();
            plan.signature = regress_log_slope(interpolate_lut(read_lut(lut_path), scene));
            plan.inputs["lut"] = io::container_digest(lut_path);
            plan.inputs["scene"] = target.at("scene");
        } else {
            const double sza = target.value("solar_zenith_deg", default_scene().solar_zenith_deg);
            CrossSectionTable xsec;
            if (target.contains("cross_section_csv")) {
                const fs::path csv = io::resolve_beside(
                    config_path, target.at("cross_section_csv").get<std::string>());
                xsec = read_cross_section_csv(csv);
                plan.inputs["cross_section"] = io::file_digest(csv);
            } else {
                const SynthXsecArgs d;
                xsec = synthetic_methane_cross_section(d.start_nm, d.stop_nm, d.step_nm);
                plan.inputs["cross_section"] = "builtin-synthetic";
            }
            plan.signature = analytic_fine_slope(xsec, sza);
            plan.inputs["solar_zenith_deg"] = sza;
        }
    } catch (const nlohmann::json::exception& e) {
        throw ContractError(std::string("sim config target: ") + e.what());
    }
    return plan;
}

}  // namespace

SensorSpec SensorChoice::resolve(const SensorSpec* fallback) const {
    if (name && file) {
        throw ContractError("--sensor and --sensor-file are mutually exclusive");
    }
    if (name) {
        return builtin_spec(*name);
    }
    if (file) {
        SensorSpec spec = read_json_as<SensorSpec>(*file, "sensor spec");
        spec.validate();
        return spec;
    }
    if (fallback != nullptr) {
        return *fallback;
    }
    throw ContractError("a sensor is required (--sensor or --sensor-file)");
}

SpectralWindow parse_window(const std::string& text) {
    const auto comma = text.find(',');
    SpectralWindow w;
    try {
        if (comma == std::string::npos) throw std::invalid_argument("no comma");
        std::size_t used = 0;
        w.low_nm = std::stod(text.substr(0, comma), &used);
        w.high_nm = std::stod(text.substr(comma + 1), &used);
    } catch (const std::exception&) {
        throw ContractError("window must be \"low,high\" in nm, got \"" + text + "\"");
    }
    if (!(w.low_nm < w.high_nm)) {
        throw ContractError("window low edge must be below the high edge");
    }
    return w;
}

void lut_build(const LutBuildArgs& args, std::ostream& log) {
    const CrossSectionTable xsec = read_cross_section_csv(args.cross_section_csv);
    const LutAxes axes = read_json_as<LutAxes>(args.axes_json, "LUT axes");
    RadianceLUT lut = build_synthetic_lut(xsec, axes);
    lut.provenance = {{"builder", "beer-lambert-synthetic"},
                      {"digest_algorithm", kDigestAlgorithm},
                      {"inputs",
                       {{"cross_section", io::file_digest(args.cross_section_csv)},
                        {"axes", io::file_digest(args.axes_json)}}}};
    write_lut(args.out, lut);

    log << "wrote " << args.out.string() << '\n';
    log << "  " << kCh4AxisName << ": " << axes.ch4_ppmm.size() << " nodes ["
        << axes.ch4_ppmm.front() << ", " << axes.ch4_ppmm.back() << "]\n";
    for (std::size_t a = 0; a < 4; ++a) {
        log << "  " << kSceneAxisNames[a] << ": " << axes.scene[a].size() << " nodes ["
            << axes.scene[a].front() << ", " << axes.scene[a].back() << "]\n";
    }
    log << "  wavelengths: " << lut.wavelengths_nm.size() << " ["
        << lut.wavelengths_nm.front() << ", " << lut.wavelengths_nm.back() << "] nm\n";
}

void synth_xsec(const SynthXsecArgs& args, std::ostream& log) {
    const CrossSectionTable xsec =
        synthetic_methane_cross_section(args.start_nm, args.stop_nm, args.step_nm);
    write_cross_section_csv(args.out, xsec);
    log << "wrote " << xsec.wavelengths_nm.size() << " samples to " << args.out.string() << '\n';
}

void target(const TargetArgs& args, std::ostream& log) {
    const SensorSpec spec = args.sensor.resolve();
    const SceneParams scene = read_scene(args.scene);
    const SpectralWindow window = args.window.value_or(default_window(spec));
    std::optional<ColumnPosition> column;
    if (args.column) {
        if (*args.column >= args.columns) {
            throw ContractError("--column must be below --columns");
        }
        column = ColumnPosition{*args.column, args.columns};
    }
    const TargetSpectrum t = make_target(read_lut(args.lut), scene, spec, window, column);
    nlohmann::json doc = t;
    doc["sensor"] = to_string(spec.name);
    doc["scene"] = scene;
    doc["digest_algorithm"] = kDigestAlgorithm;
    doc["inputs"] = {{"lut", io::container_digest(args.lut)},
                     {"sensor", io::json_digest(nlohmann::json(spec))}};
    doc["tool"] = tool_stamp();
    io::write_json_file(args.out, doc);
    log << "wrote " << t.size() << "-band target to " << args.out.string() << '\n';
}

void retrieve(const RetrieveArgs& args, std::ostream& log) {
    RadianceCube cube = read_cube(args.cube);
    const SensorSpec spec = args.sensor.resolve(&cube.sensor);
    check_cube_matches_sensor(cube, spec);
    cube.sensor = spec;
    const SceneParams scene = read_scene(args.scene);
    const SpectralWindow window = args.window.value_or(default_window(spec));

    const FineSlope fine = regress_log_slope(interpolate_lut(read_lut(args.lut), scene));
    const TargetProvider provider = [&](std::optional<ColumnPosition> col) {
        return target_from_fine_slope(fine, spec, window, col);
    };

    RetrievalOptions options;
    options.mode = args.mode;
    options.delta = args.delta;
    options.exclude_plume = args.exclude_plume;
    options.threads = args.threads;
    EnhancementMap map = convert_units(matched_filter(cube, provider, options), args.units);

    map.provenance = {
        {"digest_algorithm", kDigestAlgorithm},
        {"inputs",
         {{"cube", io::container_digest(args.cube)}, {"lut", io::container_digest(args.lut)}}},
        {"target", {{"scene", scene}, {"window_nm", window_json(window)}}},
        {"sensor", spec},
        {"plume_exclusion", options.exclude_plume},
        {"plume_percentile", options.plume_percentile},
    };
    write_enhancement_map(args.out, map);
    log << "wrote " << map.rows << "x" << map.cols << " map (" << to_string(map.units) << ", "
        << to_string(map.mode) << ") to " << args.out.string() << '\n';
}

void quantify(const QuantifyArgs& args, std::ostream& log) {
    const EnhancementMap map = read_enhancement_map(args.map);
    std::optional<SensorSpec> recorded;
    if (map.provenance.contains("sensor")) {
        try {
            recorded = map.provenance.at("sensor").get<SensorSpec>();
        } catch (const nlohmann::json::exception& e) {
            throw ContractError(std::string("map provenance sensor: ") + e.what());
        }
    }
    const SensorSpec spec = args.sensor.resolve(recorded ? &*recorded : nullptr);
    const auto poly = read_json_as<PlumePolygon>(args.polygon, "plume polygon");
    const auto wind = read_json_as<WindRecord>(args.wind, "wind record");
    AtmosphereParams atm;
    if (args.atmosphere) {
        atm = read_json_as<AtmosphereParams>(*args.atmosphere, "atmosphere");
    }
    atm.validate();

    const FluxEstimate est = quantify_plume(map, poly, spec, wind, atm, args.ueff_ms,
                                            ImeOptions{args.clamp_negative});
    nlohmann::json report = flux_report(est, atm);
    report["sensor"] = to_string(spec.name);
    report["wind"] = wind;
    report["clamp_negative"] = args.clamp_negative;
    report["files"] = {{"map", io::container_digest(args.map)},
                       {"polygon", io::file_digest(args.polygon)},
                       {"wind", io::file_digest(args.wind)}};
    if (args.atmosphere) {
        report["files"]["atmosphere"] = io::file_digest(*args.atmosphere);
    }
    io::write_json_file(args.out, report);
    log << "IME " << est.ime_kg << " kg, L " << est.plume_length_m << " m, U_eff "
        << est.u_eff_ms << " m/s, Q " << est.q_kg_per_h << " kg/h\n";
}

fs::path default_truth_path(const fs::path& cube_header) {
    fs::path truth = cube_header;
    truth.replace_filename(cube_header.stem().string() + "_truth.json");
    return truth;
}

void simulate(const SimulateArgs& args, std::ostream& log) {
    const nlohmann::json doc = io::read_json_file(args.config);
    SimConfig config;
    try {
        config = doc.get<SimConfig>();
    } catch (const nlohmann::json::exception& e) {
        throw ContractError(std::string("sim config: ") + e.what());
    }
    if (args.seed) {
        config.seed = *args.seed;
    }
    SimPlan plan = plan_simulation(args.config, doc, config);

    RadianceCube cube = render_cube(plan.field, plan.signature, config, args.threads);
    plan.inputs["config"] = io::file_digest(args.config);
    cube.provenance["digest_algorithm"] = kDigestAlgorithm;
    cube.provenance["inputs"] = plan.inputs;

    const fs::path truth = args.truth.value_or(default_truth_path(args.out));
    plan.field.provenance["seed"] = config.seed;
    plan.field.provenance["scene_seed"] = config.scene_seed;
    plan.field.provenance["inputs"] = plan.inputs;
    write_cube(args.out, cube);
    write_plume_field(truth, plan.field);
    log << "wrote " << cube.rows << "x" << cube.cols << "x" << cube.bands << " cube to "
        << args.out.string() << " and truth to " << truth.string() << '\n';
}

void compare(const CompareArgs& args, std::ostream& log) {
    const std::vector<AcquisitionRecord> records = read_records_jsonl(args.records);
    std::map<std::string, std::vector<AcquisitionRecord>> by_site;
    for (const auto& r : records) {
        by_site[r.site_id].push_back(r);
    }
    nlohmann::json reports = nlohmann::json::array();
    std::string table;
    for (const auto& [site, recs] : by_site) {
        const ComparisonReport report = build_report(site, recs, args.dt_max_s);
        reports.push_back(report_json(report));
        table += report_table(report);
        table += '\n';
    }
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : pair_acquisitions(records, args.dt_max_s)) {
        pairs.push_back({{"site_id", p.site_id},
                         {"first_sensor", p.first_sensor},
                         {"second_sensor", p.second_sensor},
                         {"dt_s", p.dt_s},
                         {"relative_difference", p.relative_difference}});
    }
    const nlohmann::json doc{{"dt_max_s", args.dt_max_s},
                             {"reports", reports},
                             {"paired", pairs},
                             {"digest_algorithm", kDigestAlgorithm},
                             {"inputs", {{"records", io::file_digest(args.records)}}},
                             {"tool", tool_stamp()}};
    io::write_json_file(args.out, doc);
    if (args.table) {
        write_text(*args.table, table);
    }
    log << table;
}

void sensor(const SensorArgs& args, std::ostream& log) {
    const nlohmann::json doc = builtin_spec(args.name);
    if (args.out) {
        io::write_json_file(*args.out, doc);
    } else {
        log << doc.dump(2) << '\n';
    }
}

void fetch_wind(const FetchWindArgs& args, std::ostream& log) {
    WindQuery query;
    query.base_url = args.base_url;
    query.path = args.path;
    query.lat = args.lat;
    query.lon = args.lon;
    query.timestamp = args.timestamp;
    query.api_key = args.api_key;
    const WindRecord wind = ch4flux::fetch_wind(query);
    io::write_json_file(args.out, nlohmann::json(wind));
    log << "U10 " << wind.u10_ms << " m/s from " << wind.direction_deg << " deg\n";
}

}  // namespace ch4flux::commands
