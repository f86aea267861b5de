#include <algorithm>
#include <ostream>
#include <thread>

#include <CLI11.hpp>

#include "ch4flux/commands.hpp"
#include "ch4flux/error.hpp"
#include "ch4flux/io.hpp"

namespace ch4flux::cli {

namespace {

namespace cmd = ch4flux::commands;

void add_sensor_options(CLI::App& sub, cmd::SensorChoice& choice) {
    auto* name = sub.add_option("--sensor", choice.name, "Built-in sensor (PRISMA, EnMAP, EMIT, GHGSAT)");
    auto* file = sub.add_option("--sensor-file", choice.file, "Sensor spec JSON")
                     ->check(CLI::ExistingFile);
    name->excludes(file);
}

void add_window_option(CLI::App& sub, std::optional<SpectralWindow>& window) {
    sub.add_option_function<std::string>(
           "--window", [&window](const std::string& text) { window = commands::parse_window(text); },
           "Retrieval window \"low,high\" in nm")
        ->type_name("LOW,HIGH");
}

unsigned default_threads() {
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Methane plume retrieval and emission quantification", "ch4flux"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    cmd::LutBuildArgs lut_args;
    auto* lut = app.add_subcommand("lut-build", "Build a synthetic radiance LUT");
    lut->add_option("--xsec", lut_args.cross_section_csv, "Cross-section CSV")
        ->required()
        ->check(CLI::ExistingFile);
    lut->add_option("--axes", lut_args.axes_json, "LUT axes JSON")->required()->check(CLI::ExistingFile);
    lut->add_option("-o,--out", lut_args.out, "Output LUT header")->required();

    cmd::SynthXsecArgs xsec_args;
    auto* xsec = app.add_subcommand("synth-xsec", "Write the built-in synthetic cross-section table");
    xsec->add_option("--start", xsec_args.start_nm, "First wavelength, nm")->capture_default_str();
    xsec->add_option("--stop", xsec_args.stop_nm, "Last wavelength, nm")->capture_default_str();
    xsec->add_option("--step", xsec_args.step_nm, "Grid spacing, nm")->capture_default_str();
    xsec->add_option("-o,--out", xsec_args.out, "Output CSV")->required();

    cmd::TargetArgs target_args;
    auto* target = app.add_subcommand("target", "Generate a unit target spectrum");
    target->add_option("--lut", target_args.lut, "LUT header")->required()->check(CLI::ExistingFile);
    target->add_option("--scene", target_args.scene, "Scene parameters JSON")
        ->required()
        ->check(CLI::ExistingFile);
    add_sensor_options(*target, target_args.sensor);
    add_window_option(*target, target_args.window);
    auto* column = target->add_option("--column", target_args.column, "Column index for smile");
    target->add_option("--columns", target_args.columns, "Image width for --column")->needs(column);
    target->add_option("-o,--out", target_args.out, "Output JSON")->required();

    cmd::RetrieveArgs ret_args;
    ret_args.threads = default_threads();
    std::string ret_mode = "global";
    std::string ret_units = "ppmm";
    bool no_exclusion = false;
    auto* retrieve = app.add_subcommand("retrieve", "Matched-filter enhancement retrieval");
    retrieve->add_option("--cube", ret_args.cube, "Radiance cube header")
        ->required()
        ->check(CLI::ExistingFile);
    retrieve->add_option("--lut", ret_args.lut, "LUT header")->required()->check(CLI::ExistingFile);
    retrieve->add_option("--scene", ret_args.scene, "Scene parameters JSON")
        ->required()
        ->check(CLI::ExistingFile);
    add_sensor_options(*retrieve, ret_args.sensor);
    retrieve->add_option("--mode", ret_mode, "global or columnwise")
        ->check(CLI::IsMember({"global", "columnwise"}))
        ->capture_default_str();
    retrieve->add_option("--delta", ret_args.delta, "Covariance ridge fraction")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    add_window_option(*retrieve, ret_args.window);
    retrieve->add_option("--units", ret_units, "ppmm or ppb")
        ->check(CLI::IsMember({"ppmm", "ppb"}))
        ->capture_default_str();
    retrieve->add_flag("--no-plume-exclusion", no_exclusion,
                       "Skip the second pass that drops plume pixels from the statistics");
    retrieve->add_option("--threads", ret_args.threads, "Worker cap")->check(CLI::PositiveNumber);
    retrieve->add_option("-o,--out", ret_args.out, "Output map header")->required();

    cmd::QuantifyArgs q_args;
    auto* quantify = app.add_subcommand("quantify", "IME flux estimate for a plume polygon");
    quantify->add_option("--map", q_args.map, "Enhancement map header")
        ->required()
        ->check(CLI::ExistingFile);
    quantify->add_option("--polygon", q_args.polygon, "Plume polygon JSON")
        ->required()
        ->check(CLI::ExistingFile);
    quantify->add_option("--wind", q_args.wind, "Wind record JSON")->required()->check(CLI::ExistingFile);
    add_sensor_options(*quantify, q_args.sensor);
    quantify->add_option("--atmosphere", q_args.atmosphere, "Atmosphere constants JSON")
        ->check(CLI::ExistingFile);
    quantify->add_option("--ueff", q_args.ueff_ms, "Explicit effective wind, m/s")
        ->check(CLI::PositiveNumber);
    quantify->add_flag("--clamp-negative", q_args.clamp_negative,
                       "Treat negative enhancements inside the mask as zero");
    quantify->add_option("-o,--out", q_args.out, "Output report JSON")->required();

    cmd::SimulateArgs sim_args;
    sim_args.threads = default_threads();
    std::uint64_t seed = 0;
    auto* simulate = app.add_subcommand("simulate", "Render a synthetic scene and its truth field");
    simulate->add_option("--config", sim_args.config, "Simulation config JSON")
        ->required()
        ->check(CLI::ExistingFile);
    simulate->add_option("-o,--out", sim_args.out, "Output cube header")->required();
    simulate->add_option("--truth", sim_args.truth, "Output truth header");
    auto* seed_opt = simulate->add_option("--seed", seed, "Noise seed (overrides the config)");
    simulate->add_option("--threads", sim_args.threads, "Worker cap")->check(CLI::PositiveNumber);

    cmd::CompareArgs cmp_args;
    auto* compare = app.add_subcommand("compare", "Cross-sensor flux comparison");
    compare->add_option("--records", cmp_args.records, "Acquisition records (JSON lines)")
        ->required()
        ->check(CLI::ExistingFile);
    compare->add_option("--dt-max", cmp_args.dt_max_s, "Pairing threshold, s")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    compare->add_option("-o,--out", cmp_args.out, "Output report JSON")->required();
    compare->add_option("--table", cmp_args.table, "Also write the plain-text table here");

    cmd::SensorArgs sensor_args;
    auto* sensor = app.add_subcommand("sensor", "Print a built-in sensor spec");
    sensor->add_option("name", sensor_args.name, "Sensor name")->required();
    sensor->add_option("-o,--out", sensor_args.out, "Write JSON here instead of stdout");

    cmd::FetchWindArgs wind_args;
    auto* wind = app.add_subcommand("fetch-wind", "Query a weather provider for a wind record");
    wind->add_option("--base-url", wind_args.base_url, "Provider base URL")->required();
    wind->add_option("--path", wind_args.path, "Request path")->capture_default_str();
    wind->add_option("--lat", wind_args.lat, "Latitude, deg")->required();
    wind->add_option("--lon", wind_args.lon, "Longitude, deg")->required();
    wind->add_option("--time", wind_args.timestamp, "ISO-8601 UTC time")->required();
    wind->add_option("--api-key", wind_args.api_key, "Provider API key")->envname("CH4FLUX_WIND_API_KEY");
    wind->add_option("-o,--out", wind_args.out, "Output wind record JSON")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitContract;
    } catch (const ContractError& e) {
        err << "error: " << e.what() << '\n';
        return kExitContract;
    }

    try {
        if (lut->parsed()) {
            cmd::lut_build(lut_args, out);
        } else if (xsec->parsed()) {
            cmd::synth_xsec(xsec_args, out);
        } else if (target->parsed()) {
            cmd::target(target_args, out);
        } else if (retrieve->parsed()) {
            ret_args.mode = mode_from_string(ret_mode);
            ret_args.units = units_from_string(ret_units);
            ret_args.exclude_plume = !no_exclusion;
            cmd::retrieve(ret_args, out);
        } else if (quantify->parsed()) {
            cmd::quantify(q_args, out);
        } else if (simulate->parsed()) {
            if (seed_opt->count() > 0) {
                sim_args.seed = seed;
            }
            cmd::simulate(sim_args, out);
        } else if (compare->parsed()) {
            cmd::compare(cmp_args, out);
        } else if (sensor->parsed()) {
            cmd::sensor(sensor_args, out);
        } else if (wind->parsed()) {
            cmd::fetch_wind(wind_args, out);
        }
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitContract;
    }
    return kExitOk;
}

}  // namespace ch4flux::cli
