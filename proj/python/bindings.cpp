#include <algorithm>
#include <cstring>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ch4flux/commands.hpp"
#include "ch4flux/compare.hpp"
#include "ch4flux/error.hpp"
#include "ch4flux/io.hpp"
#include "ch4flux/quantify.hpp"
#include "ch4flux/retrieval.hpp"
#include "ch4flux/scene_sim.hpp"

namespace py = pybind11;
using namespace ch4flux;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Python objects cross the boundary as JSON text.
nlohmann::json to_json_value(const py::handle& obj) {
    const auto dumps = py::module_::import("json").attr("dumps");
    return nlohmann::json::parse(dumps(obj).cast<std::string>());
}

py::object to_python(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

SensorSpec sensor_from(const py::handle& obj) {
    if (py::isinstance<py::str>(obj)) {
        return builtin_spec(obj.cast<std::string>());
    }
    SensorSpec spec = to_json_value(obj).get<SensorSpec>();
    spec.validate();
    return spec;
}

std::optional<SpectralWindow> window_from(const std::optional<std::pair<double, double>>& w) {
    if (!w) return std::nullopt;
    return SpectralWindow{w->first, w->second};
}

const FineSlope& builtin_fine_slope(double sza) {
    static std::map<double, FineSlope> cache;
    auto it = cache.find(sza);
    if (it == cache.end()) {
        const commands::SynthXsecArgs d;
        it = cache
                 .emplace(sza, analytic_fine_slope(
                                   synthetic_methane_cross_section(d.start_nm, d.stop_nm, d.step_nm), sza))
                 .first;
    }
    return it->second;
}

RadianceCube cube_from(const Array& data, const SensorSpec& spec) {
    if (data.ndim() != 3) {
        throw ContractError("cube must be a (bands, rows, cols) array");
    }
    if (static_cast<std::size_t>(data.shape(0)) != spec.band_count()) {
        throw ContractError("cube has " + std::to_string(data.shape(0)) + " bands, sensor has " +
                            std::to_string(spec.band_count()));
    }
    RadianceCube cube(static_cast<std::size_t>(data.shape(1)), static_cast<std::size_t>(data.shape(2)),
                      spec);
    std::memcpy(cube.data.data(), data.data(), cube.data.size() * sizeof(double));
    return cube;
}

Array to_array(const std::vector<double>& values, std::vector<py::ssize_t> shape) {
    Array out(shape);
    std::memcpy(out.mutable_data(), values.data(), values.size() * sizeof(double));
    return out;
}

py::tuple simulate(const py::dict& config, const std::optional<py::dict>& plume,
                   std::optional<std::uint64_t> seed, double solar_zenith_deg, unsigned threads) {
    SimConfig cfg = to_json_value(config).get<SimConfig>();
    if (seed) cfg.seed = *seed;
    PlumeField field = zero_field(cfg.rows, cfg.cols);
    if (plume) {
        const nlohmann::json p = to_json_value(*plume);
        field = gaussian_blob_field(cfg.rows, cfg.cols, p.at("center").get<std::array<double, 2>>(),
                                    p.at("sigma_px").get<std::array<double, 2>>(),
                                    p.at("peak_ppmm").get<double>());
    }
    const FineSlope& slope = builtin_fine_slope(solar_zenith_deg);
    RadianceCube cube;
    {
        py::gil_scoped_release release;
        cube = render_cube(field, slope, cfg, threads);
    }
    const auto b = static_cast<py::ssize_t>(cube.bands);
    const auto r = static_cast<py::ssize_t>(cube.rows);
    const auto c = static_cast<py::ssize_t>(cube.cols);
    return py::make_tuple(to_array(cube.data, {b, r, c}), to_array(field.values, {r, c}),
                          to_array(cube.wavelengths_nm, {b}));
}

py::tuple retrieve(const Array& data, const py::object& sensor, const std::string& mode,
                   double delta, const std::string& units,
                   const std::optional<std::pair<double, double>>& window, bool exclude_plume,
                   const std::optional<std::string>& lut, const std::optional<py::dict>& scene,
                   unsigned threads) {
    const SensorSpec spec = sensor_from(sensor);
    const RadianceCube cube = cube_from(data, spec);
    const SpectralWindow win = window_from(window).value_or(default_window(spec));
    const SceneParams params = scene ? to_json_value(*scene).get<SceneParams>() : default_scene();

    FineSlope fine;
    if (lut) {
        fine = regress_log_slope(interpolate_lut(read_lut(*lut), params));
    } else {
        fine = builtin_fine_slope(params.solar_zenith_deg);
    }
    RetrievalOptions opts;
    opts.mode = mode_from_string(mode);
    opts.delta = delta;
    opts.exclude_plume = exclude_plume;
    opts.threads = threads;
    EnhancementMap map;
    {
        py::gil_scoped_release release;
        map = matched_filter(
            cube,
            [&](std::optional<ColumnPosition> col) { return target_from_fine_slope(fine, spec, win, col); },
            opts);
        map = convert_units(map, units_from_string(units));
    }
    const auto r = static_cast<py::ssize_t>(map.rows);
    const auto c = static_cast<py::ssize_t>(map.cols);
    return py::make_tuple(to_array(map.values, {r, c}), to_array(map.noise_estimate, {c}));
}

py::object quantify(const Array& values, const std::vector<std::array<double, 2>>& polygon,
                    const py::object& sensor, double u10_ms, const std::string& units,
                    std::optional<double> ueff_ms, bool clamp_negative) {
    if (values.ndim() != 2) {
        throw ContractError("enhancement map must be a (rows, cols) array");
    }
    EnhancementMap map;
    map.rows = static_cast<std::size_t>(values.shape(0));
    map.cols = static_cast<std::size_t>(values.shape(1));
    map.values.assign(values.data(), values.data() + values.size());
    map.units = units_from_string(units);
    WindRecord wind;
    wind.u10_ms = u10_ms;
    const AtmosphereParams atm;
    const FluxEstimate est = quantify_plume(map, PlumePolygon{polygon}, sensor_from(sensor), wind, atm,
                                            ueff_ms, ImeOptions{clamp_negative});
    return to_python(flux_report(est, atm));
}

py::object compare(const py::list& records, double dt_max_s) {
    std::vector<AcquisitionRecord> parsed;
    for (const auto& item : records) {
        AcquisitionRecord r = to_json_value(item).get<AcquisitionRecord>();
        r.validate();
        parsed.push_back(std::move(r));
    }
    std::vector<std::string> sites;
    for (const auto& r : parsed) {
        if (std::find(sites.begin(), sites.end(), r.site_id) == sites.end()) sites.push_back(r.site_id);
    }
    std::sort(sites.begin(), sites.end());
    nlohmann::json out = nlohmann::json::array();
    for (const auto& site : sites) {
        std::vector<AcquisitionRecord> subset;
        std::copy_if(parsed.begin(), parsed.end(), std::back_inserter(subset),
                     [&](const AcquisitionRecord& r) { return r.site_id == site; });
        out.push_back(report_json(build_report(site, subset, dt_max_s)));
    }
    return to_python(out);
}

py::tuple run_cli(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    int code = 0;
    {
        py::gil_scoped_release release;
        code = cli::run(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Methane plume retrieval and IME flux quantification";
    m.attr("__version__") = std::string(kToolVersion);
    m.attr("PPMM_TO_PPB") = kPpmmToPpb;

    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);

    m.def("sensor_spec", [](const std::string& name) { return to_python(nlohmann::json(builtin_spec(name))); },
          py::arg("name"), "Built-in sensor spec as a dict.");
    m.def("pixel_area", [](const py::object& sensor) { return pixel_area(sensor_from(sensor)); },
          py::arg("sensor"));
    m.def("simulate", &simulate, py::arg("config"), py::arg("plume") = py::none(),
          py::arg("seed") = py::none(), py::arg("solar_zenith_deg") = 30.0, py::arg("threads") = 1,
          "Render a synthetic scene. Returns (cube[bands, rows, cols], truth_ppmm[rows, cols], "
          "wavelengths_nm).");
    m.def("retrieve", &retrieve, py::arg("cube"), py::arg("sensor"), py::arg("mode") = "global",
          py::arg("delta") = 1e-3, py::arg("units") = "ppmm", py::arg("window") = py::none(),
          py::arg("exclude_plume") = true, py::arg("lut") = py::none(), py::arg("scene") = py::none(),
          py::arg("threads") = 1,
          "Matched-filter retrieval. Without a LUT the built-in synthetic absorber is used. "
          "Returns (map[rows, cols], noise[cols]).");
    m.def("quantify", &quantify, py::arg("enhancement"), py::arg("polygon"), py::arg("sensor"),
          py::arg("u10_ms"), py::arg("units") = "ppmm", py::arg("ueff_ms") = py::none(),
          py::arg("clamp_negative") = false, "IME flux report for a pixel-space polygon.");
    m.def("scaling_factor", [](double area) { return scaling_factor(AtmosphereParams{}, area); },
          py::arg("pixel_area_m2"));
    m.def("effective_wind",
          [](const py::object& sensor, double u10) {
              WindRecord w;
              w.u10_ms = u10;
              return effective_wind(sensor_from(sensor), w);
          },
          py::arg("sensor"), py::arg("u10_ms"));
    m.def("flux", &flux, py::arg("ime_kg"), py::arg("u_eff_ms"), py::arg("plume_length_m"));
    m.def("relative_difference", &relative_difference, py::arg("a"), py::arg("b"));
    m.def("compare", &compare, py::arg("records"), py::arg("dt_max_s") = 600.0,
          "One comparison report per site.");
    m.def("run_cli", &run_cli, py::arg("args"),
          "Run a ch4flux command in-process. Returns (exit_code, stdout, stderr).");
}
