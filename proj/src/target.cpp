#include "ch4flux/target.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ch4flux/error.hpp"
#include "ch4flux/io.hpp"

namespace ch4flux {

namespace fs = std::filesystem;

namespace {

constexpr double kFwhmToSigma = 2.0 * 1.1774100225154747;  // 2 sqrt(2 ln 2)

void require_strictly_increasing(const std::vector<double>& nodes, std::string_view name,
                                 std::size_t min_nodes) {
    if (nodes.size() < min_nodes) {
        throw ContractError("axis " + std::string(name) + " needs at least " +
                            std::to_string(min_nodes) + " nodes");
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!std::isfinite(nodes[i])) {
            throw ContractError("axis " + std::string(name) + " has a non-finite node");
        }
        if (i > 0 && !(nodes[i] > nodes[i - 1])) {
            throw ContractError("axis " + std::string(name) + " must be strictly increasing");
        }
    }
}

struct Bracket {
    std::size_t lower = 0;
    double weight = 0.0;  // weight of the upper node
};

Bracket bracket(const std::vector<double>& nodes, double value, std::string_view axis) {
    if (!std::isfinite(value) || value < nodes.front() || value > nodes.back()) {
        std::ostringstream msg;
        msg << "parameter " << axis << " = " << value << " outside LUT axis ["
            << nodes.front() << ", " << nodes.back() << "]";
        throw RangeError(std::string(axis), msg.str());
    }
    if (value == nodes.back()) {
        return {nodes.size() - 2, 1.0};
    }
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), value);
    const auto upper = static_cast<std::size_t>(it - nodes.begin());
    const std::size_t lower = upper - 1;
    const double w = (value - nodes[lower]) / (nodes[upper] - nodes[lower]);
    return {lower, w};
}

double scene_value(const SceneParams& p, std::size_t axis) {
    switch (axis) {
        case 0: return p.sensor_altitude_km;
        case 1: return p.water_vapor_gcm2;
        case 2: return p.ground_elevation_km;
        default: return p.solar_zenith_deg;
    }
}

double parse_double(std::string_view text, bool& ok) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) {
        text.remove_prefix(1);
    }
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
        text.remove_suffix(1);
    }
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    ok = res.ec == std::errc() && res.ptr == text.data() + text.size() && !text.empty();
    return value;
}

}  // namespace

void to_json(nlohmann::json& j, const SceneParams& p) {
    j = nlohmann::json{{"sensor_altitude_km", p.sensor_altitude_km},
                       {"water_vapor_gcm2", p.water_vapor_gcm2},
                       {"ground_elevation_km", p.ground_elevation_km},
                       {"solar_zenith_deg", p.solar_zenith_deg}};
}

void from_json(const nlohmann::json& j, SceneParams& p) {
    try {
        p.sensor_altitude_km = j.at("sensor_altitude_km").get<double>();
        p.water_vapor_gcm2 = j.at("water_vapor_gcm2").get<double>();
        p.ground_elevation_km = j.at("ground_elevation_km").get<double>();
        p.solar_zenith_deg = j.at("solar_zenith_deg").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ContractError(std::string("scene params JSON: ") + e.what());
    }
}

void LutAxes::validate() const {
    for (std::size_t a = 0; a < scene.size(); ++a) {
        require_strictly_increasing(scene[a], kSceneAxisNames[a], 2);
    }
    require_strictly_increasing(ch4_ppmm, kCh4AxisName, 2);
    if (ch4_ppmm.front() != 0.0) {
        throw ContractError("axis ch4_enhancement_ppmm must start at 0");
    }
}

std::size_t RadianceLUT::scene_node_count() const {
    std::size_t n = 1;
    for (const auto& axis : axes.scene) {
        n *= axis.size();
    }
    return n;
}

std::size_t RadianceLUT::offset(std::size_t ch4, const std::array<std::size_t, 4>& scene) const {
    std::size_t idx = ch4;
    for (std::size_t a = 0; a < 4; ++a) {
        idx = idx * axes.scene[a].size() + scene[a];
    }
    return idx * wavelengths_nm.size();
}

void RadianceLUT::validate() const {
    axes.validate();
    require_strictly_increasing(wavelengths_nm, "wavelengths_nm", 2);
    const std::size_t expected = axes.ch4_ppmm.size() * scene_node_count() * wavelengths_nm.size();
    if (radiance.size() != expected) {
        throw ContractError("LUT radiance holds " + std::to_string(radiance.size()) +
                            " values, expected " + std::to_string(expected));
    }
    for (double v : radiance) {
        if (!std::isfinite(v) || v < 0.0) {
            throw ContractError("LUT radiance must be finite and >= 0");
        }
    }
}

LutSlice interpolate_lut(const RadianceLUT& lut, const SceneParams& params) {
    std::array<Bracket, 4> br;
    for (std::size_t a = 0; a < 4; ++a) {
        br[a] = bracket(lut.axes.scene[a], scene_value(params, a), kSceneAxisNames[a]);
    }

    const std::size_t nw = lut.wavelengths_nm.size();
    const std::size_t nc = lut.axes.ch4_ppmm.size();
    LutSlice out;
    out.ch4_ppmm = lut.axes.ch4_ppmm;
    out.wavelengths_nm = lut.wavelengths_nm;
    out.radiance.assign(nc * nw, 0.0);

    for (unsigned corner = 0; corner < 16; ++corner) {
        double weight = 1.0;
        std::array<std::size_t, 4> node{};
        for (std::size_t a = 0; a < 4; ++a) {
            const bool upper = (corner >> a) & 1U;
            node[a] = br[a].lower + (upper ? 1 : 0);
            weight *= upper ? br[a].weight : 1.0 - br[a].weight;
        }
        if (weight == 0.0) {
            continue;
        }
        for (std::size_t c = 0; c < nc; ++c) {
            const double* src = lut.radiance.data() + lut.offset(c, node);
            double* dst = out.radiance.data() + c * nw;
            for (std::size_t w = 0; w < nw; ++w) {
                dst[w] += weight * src[w];
            }
        }
    }
    return out;
}

FineSlope regress_log_slope(const LutSlice& slice) {
    const std::size_t nc = slice.ch4_ppmm.size();
    const std::size_t nw = slice.wavelengths_nm.size();
    if (nc < 3) {
        throw ContractError("log-slope regression needs at least 3 methane levels, got " +
                            std::to_string(nc));
    }
    if (slice.radiance.size() != nc * nw) {
        throw ContractError("LUT slice size does not match its axes");
    }

    double x_mean = 0.0;
    for (double x : slice.ch4_ppmm) {
        x_mean += x;
    }
    x_mean /= static_cast<double>(nc);
    double sxx = 0.0;
    for (double x : slice.ch4_ppmm) {
        sxx += (x - x_mean) * (x - x_mean);
    }

    FineSlope out;
    out.wavelengths_nm = slice.wavelengths_nm;
    out.slope.assign(nw, 0.0);
    out.r2.assign(nw, 0.0);
    out.valid.assign(nw, 1);

    std::vector<double> y(nc);
    for (std::size_t w = 0; w < nw; ++w) {
        bool ok = true;
        double y_mean = 0.0;
        for (std::size_t c = 0; c < nc; ++c) {
            const double radiance = slice.at(c, w);
            if (!(radiance > 0.0) || !std::isfinite(radiance)) {
                ok = false;
                break;
            }
            y[c] = std::log(radiance);
            y_mean += y[c];
        }
        if (!ok) {
            out.valid[w] = 0;
            out.slope[w] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        y_mean /= static_cast<double>(nc);
        double sxy = 0.0;
        double syy = 0.0;
        for (std::size_t c = 0; c < nc; ++c) {
            const double dx = slice.ch4_ppmm[c] - x_mean;
            const double dy = y[c] - y_mean;
            sxy += dx * dy;
            syy += dy * dy;
        }
        if (syy == 0.0) {
            continue;  // flat: slope 0, r2 0 by convention
        }
        out.slope[w] = sxy / sxx;
        out.r2[w] = (sxy * sxy) / (sxx * syy);
    }
    return out;
}

void to_json(nlohmann::json& j, const TargetSpectrum& t) {
    j = nlohmann::json{{"band_centers_nm", t.band_centers_nm},
                       {"band_indices", t.band_indices},
                       {"log_slope", t.log_slope},
                       {"fit_r2", t.fit_r2},
                       {"window_nm", {t.window.low_nm, t.window.high_nm}}};
    if (t.column) {
        j["column"] = {{"index", t.column->index}, {"count", t.column->count}};
    } else {
        j["column"] = nullptr;
    }
}

TargetSpectrum convolve_to_bands(const FineSlope& fine, const SensorSpec& spec,
                                 std::optional<ColumnPosition> column) {
    const auto& grid = fine.wavelengths_nm;
    if (grid.size() < 2 || fine.slope.size() != grid.size() || fine.r2.size() != grid.size() ||
        fine.valid.size() != grid.size()) {
        throw ContractError("fine slope arrays are inconsistent");
    }
    const double shift = column ? smile_shift(spec, column->index, column->count) : 0.0;
    const std::size_t nb = spec.band_count();

    TargetSpectrum out;
    out.band_centers_nm = spec.band_centers_nm;
    out.band_indices.resize(nb);
    out.log_slope.assign(nb, 0.0);
    out.fit_r2.assign(nb, 0.0);
    out.window = {spec.band_centers_nm.front(), spec.band_centers_nm.back()};
    out.column = column;

    std::vector<std::size_t> uncovered;
    for (std::size_t b = 0; b < nb; ++b) {
        out.band_indices[b] = b;
        const double center = spec.band_centers_nm[b] + shift;
        const double fwhm = spec.fwhm_nm[b];
        const double lo = center - 3.0 * fwhm;
        const double hi = center + 3.0 * fwhm;
        if (grid.front() > lo || grid.back() < hi) {
            uncovered.push_back(b);
            continue;
        }
        const double sigma = fwhm / kFwhmToSigma;
        const auto first = static_cast<std::size_t>(
            std::lower_bound(grid.begin(), grid.end(), lo) - grid.begin());
        const auto last = static_cast<std::size_t>(
            std::upper_bound(grid.begin(), grid.end(), hi) - grid.begin());

        double wsum = 0.0;
        double slope_sum = 0.0;
        double r2_sum = 0.0;
        bool valid = true;
        for (std::size_t i = first; i < last; ++i) {
            // Trapezoid cell width keeps the average correct on non-uniform grids.
            const double left = i > 0 ? grid[i] - grid[i - 1] : grid[i + 1] - grid[i];
            const double right = i + 1 < grid.size() ? grid[i + 1] - grid[i] : left;
            const double z = (grid[i] - center) / sigma;
            const double w = std::exp(-0.5 * z * z) * 0.5 * (left + right);
            if (!fine.valid[i]) {
                valid = false;
                break;
            }
            wsum += w;
            slope_sum += w * fine.slope[i];
            r2_sum += w * fine.r2[i];
        }
        if (!valid || !(wsum > 0.0)) {
            out.log_slope[b] = std::numeric_limits<double>::quiet_NaN();
            out.fit_r2[b] = 0.0;
            continue;
        }
        out.log_slope[b] = slope_sum / wsum;
        out.fit_r2[b] = r2_sum / wsum;
    }

    if (!uncovered.empty()) {
        std::ostringstream msg;
        msg << "fine grid [" << grid.front() << ", " << grid.back()
            << "] nm does not cover +-3 FWHM of bands:";
        for (std::size_t b : uncovered) {
            msg << ' ' << b << " (" << spec.band_centers_nm[b] << " nm)";
        }
        throw CoverageError(msg.str());
    }
    return out;
}

TargetSpectrum select_informative(const TargetSpectrum& full, const SpectralWindow& window) {
    TargetSpectrum out;
    out.window = window;
    out.column = full.column;
    for (std::size_t b = 0; b < full.size(); ++b) {
        const double slope = full.log_slope[b];
        if (!window.contains(full.band_centers_nm[b])) {
            continue;
        }
        if (!(std::abs(slope) > kMinInformativeSlope) || !(full.fit_r2[b] > kMinInformativeR2)) {
            continue;
        }
        out.band_centers_nm.push_back(full.band_centers_nm[b]);
        out.band_indices.push_back(full.band_indices[b]);
        out.log_slope.push_back(slope);
        out.fit_r2.push_back(full.fit_r2[b]);
    }
    if (out.size() < kMinTargetBands) {
        std::ostringstream msg;
        msg << "degenerate target: " << out.size() << " informative bands in window ["
            << window.low_nm << ", " << window.high_nm << "] nm, need " << kMinTargetBands;
        if (full.column) {
            msg << " (column " << full.column->index << ")";
        }
        throw DegenerateTargetError(msg.str());
    }
    return out;
}

TargetSpectrum target_from_fine_slope(const FineSlope& fine, const SensorSpec& spec,
                                      const SpectralWindow& window,
                                      std::optional<ColumnPosition> column) {
    return select_informative(convolve_to_bands(fine, spec, column), window);
}

TargetSpectrum make_target(const RadianceLUT& lut, const SceneParams& params,
                           const SensorSpec& spec, const SpectralWindow& window,
                           std::optional<ColumnPosition> column) {
    const LutSlice slice = interpolate_lut(lut, params);
    const FineSlope fine = regress_log_slope(slice);
    return target_from_fine_slope(fine, spec, window, column);
}

// ---------------------------------------------------------------------------

CrossSectionTable read_cross_section_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ContractError("cannot open cross-section table: " + path.string());
    }
    CrossSectionTable table;
    std::string line;
    std::size_t line_no = 0;
    bool seen_data = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ContractError(path.string() + ":" + std::to_string(line_no) +
                                ": expected two comma-separated columns");
        }
        bool ok_w = false;
        bool ok_s = false;
        const double w = parse_double(std::string_view(line).substr(0, comma), ok_w);
        const double s = parse_double(std::string_view(line).substr(comma + 1), ok_s);
        if (!ok_w || !ok_s) {
            if (!seen_data) {
                seen_data = true;  // header row
                continue;
            }
            throw ContractError(path.string() + ":" + std::to_string(line_no) +
                                ": non-numeric value");
        }
        seen_data = true;
        if (!std::isfinite(s) || s < 0.0) {
            throw ContractError(path.string() + ":" + std::to_string(line_no) +
                                ": cross_section_per_ppmm must be finite and >= 0");
        }
        if (!table.wavelengths_nm.empty() && !(w > table.wavelengths_nm.back())) {
            throw ContractError(path.string() + ":" + std::to_string(line_no) +
                                ": wavelength_nm must be strictly increasing");
        }
        table.wavelengths_nm.push_back(w);
        table.cross_section_per_ppmm.push_back(s);
    }
    if (table.wavelengths_nm.size() < 2) {
        throw ContractError(path.string() + ": cross-section table needs at least 2 rows");
    }
    return table;
}

void write_cross_section_csv(const fs::path& path, const CrossSectionTable& table) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw ContractError("cannot write " + path.string());
    }
    out << "wavelength_nm,cross_section_per_ppmm\n";
    char buf[64];
    for (std::size_t i = 0; i < table.wavelengths_nm.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.6f,%.9e\n", table.wavelengths_nm[i],
                      table.cross_section_per_ppmm[i]);
        out << buf;
    }
}

CrossSectionTable synthetic_methane_cross_section(double start_nm, double stop_nm,
                                                  double step_nm) {
    if (!(step_nm > 0.0) || !(stop_nm > start_nm)) {
        throw ContractError("synthetic cross section: invalid grid");
    }
    struct Line {
        double center;
        double strength;
        double width;
    };
    std::vector<Line> lines;
    // 2.3 um manifold: strong Q branch with P/R wings.
    lines.push_back({2316.0, 2.4e-5, 1.2});
    for (int k = 1; k <= 14; ++k) {
        const double s = 1.4e-5 * std::exp(-0.5 * (k / 6.0) * (k / 6.0));
        lines.push_back({2316.0 - 9.6 * k, s, 0.9});
        lines.push_back({2316.0 + 9.6 * k, 0.8 * s, 0.9});
    }
    // 1.65 um manifold.
    lines.push_back({1666.0, 1.6e-5, 0.6});
    for (int k = 1; k <= 8; ++k) {
        lines.push_back({1666.0 - 5.2 * k, 1.2e-5 * std::exp(-0.5 * (k / 4.0) * (k / 4.0)), 0.5});
    }
    for (int k = 1; k <= 5; ++k) {
        lines.push_back({1666.0 + 5.6 * k, 6.0e-6 * std::exp(-0.5 * (k / 3.0) * (k / 3.0)), 0.5});
    }

    CrossSectionTable table;
    const auto n = static_cast<std::size_t>(std::floor((stop_nm - start_nm) / step_nm + 1e-9)) + 1;
    table.wavelengths_nm.reserve(n);
    table.cross_section_per_ppmm.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double wl = start_nm + step_nm * static_cast<double>(i);
        const double d1 = (wl - 2320.0) / 90.0;
        const double d2 = (wl - 1655.0) / 25.0;
        double sigma = 1.6e-6 * std::exp(-0.5 * d1 * d1) + 1.2e-6 * std::exp(-0.5 * d2 * d2);
        for (const Line& line : lines) {
            const double z = (wl - line.center) / line.width;
            if (std::abs(z) < 12.0) {
                sigma += line.strength * std::exp(-0.5 * z * z);
            }
        }
        table.wavelengths_nm.push_back(wl);
        table.cross_section_per_ppmm.push_back(sigma);
    }
    return table;
}

double ContinuumModel::radiance(const SceneParams& p, double wl) const {
    const double mu0 = std::cos(p.solar_zenith_deg * std::numbers::pi / 180.0);
    const double airmass = two_way_airmass(p.solar_zenith_deg);
    const double solar = solar_scale * (2000.0 / wl) * (2000.0 / wl);
    const double h1 = (wl - 1900.0) / 60.0;
    const double h2 = (wl - 2550.0) / 80.0;
    const double h2o_shape = 1.0 / (1.0 + h1 * h1) + 0.5 / (1.0 + h2 * h2) + 0.05;
    const double transmittance =
        std::exp(-water_vapor_coeff * p.water_vapor_gcm2 * airmass * h2o_shape);
    const double elevation = 1.0 + elevation_coeff * p.ground_elevation_km;
    const double altitude = 1.0 / (1.0 + altitude_coeff * p.sensor_altitude_km / 100.0);
    return solar * reflectance * mu0 / std::numbers::pi * transmittance * elevation * altitude;
}

double two_way_airmass(double solar_zenith_deg) {
    if (!std::isfinite(solar_zenith_deg) || solar_zenith_deg < 0.0 || solar_zenith_deg >= 90.0) {
        throw InvalidGeometryError("solar zenith angle must lie in [0, 90) degrees, got " +
                                   std::to_string(solar_zenith_deg));
    }
    return 1.0 / std::cos(solar_zenith_deg * std::numbers::pi / 180.0) + 1.0;
}

RadianceLUT build_synthetic_lut(const CrossSectionTable& absorption, const LutAxes& axes,
                                const ContinuumModel& continuum) {
    axes.validate();
    if (axes.ch4_ppmm.back() - axes.ch4_ppmm.front() < kMinLutCh4SpanPpmm) {
        throw ContractError("axis ch4_enhancement_ppmm must span at least [0, 64000] ppm m");
    }
    require_strictly_increasing(absorption.wavelengths_nm, "wavelength_nm", 2);
    if (absorption.cross_section_per_ppmm.size() != absorption.wavelengths_nm.size()) {
        throw ContractError("cross-section table columns differ in length");
    }
    for (double s : absorption.cross_section_per_ppmm) {
        if (!std::isfinite(s) || s < 0.0) {
            throw ContractError("cross_section_per_ppmm must be finite and >= 0");
        }
    }
    for (double sza : axes.scene[3]) {
        two_way_airmass(sza);
    }

    RadianceLUT lut;
    lut.axes = axes;
    lut.wavelengths_nm = absorption.wavelengths_nm;
    const std::size_t nw = lut.wavelengths_nm.size();
    lut.radiance.assign(axes.ch4_ppmm.size() * lut.scene_node_count() * nw, 0.0);

    const auto& sc = axes.scene;
    std::vector<double> base(nw);
    for (std::size_t i0 = 0; i0 < sc[0].size(); ++i0) {
        for (std::size_t i1 = 0; i1 < sc[1].size(); ++i1) {
            for (std::size_t i2 = 0; i2 < sc[2].size(); ++i2) {
                for (std::size_t i3 = 0; i3 < sc[3].size(); ++i3) {
                    const SceneParams p{sc[0][i0], sc[1][i1], sc[2][i2], sc[3][i3]};
                    const double airmass = two_way_airmass(p.solar_zenith_deg);
                    for (std::size_t w = 0; w < nw; ++w) {
                        base[w] = continuum.radiance(p, lut.wavelengths_nm[w]);
                    }
                    for (std::size_t c = 0; c < axes.ch4_ppmm.size(); ++c) {
                        double* dst = lut.radiance.data() + lut.offset(c, {i0, i1, i2, i3});
                        const double dx = axes.ch4_ppmm[c];
                        for (std::size_t w = 0; w < nw; ++w) {
                            dst[w] = base[w] *
                                     std::exp(-absorption.cross_section_per_ppmm[w] * dx * airmass);
                        }
                    }
                }
            }
        }
    }
    return lut;
}

void to_json(nlohmann::json& j, const LutAxes& axes) {
    j = nlohmann::json::object();
    for (std::size_t a = 0; a < 4; ++a) {
        j[std::string(kSceneAxisNames[a])] = axes.scene[a];
    }
    j[std::string(kCh4AxisName)] = axes.ch4_ppmm;
}

void from_json(const nlohmann::json& j, LutAxes& axes) {
    for (std::size_t a = 0; a < 4; ++a) {
        const std::string name(kSceneAxisNames[a]);
        if (!j.contains(name)) {
            throw ContractError("LUT axes: missing field " + name);
        }
        try {
            axes.scene[a] = j.at(name).get<std::vector<double>>();
        } catch (const nlohmann::json::exception&) {
            throw ContractError("LUT axes: field " + name + " must be a list of numbers");
        }
    }
    const std::string ch4(kCh4AxisName);
    if (!j.contains(ch4)) {
        throw ContractError("LUT axes: missing field " + ch4);
    }
    try {
        axes.ch4_ppmm = j.at(ch4).get<std::vector<double>>();
    } catch (const nlohmann::json::exception&) {
        throw ContractError("LUT axes: field " + ch4 + " must be a list of numbers");
    }
    axes.validate();
}

void write_lut(const fs::path& header_path, const RadianceLUT& lut) {
    lut.validate();
    const fs::path data_path = io::companion_data_path(header_path);
    nlohmann::json axes = nlohmann::json::array();
    axes.push_back({{"name", kCh4AxisName}, {"nodes", lut.axes.ch4_ppmm}});
    for (std::size_t a = 0; a < 4; ++a) {
        axes.push_back({{"name", kSceneAxisNames[a]}, {"nodes", lut.axes.scene[a]}});
    }
    nlohmann::json header{
        {"format", "ch4flux-radiance-lut"},
        {"axes", axes},
        {"wavelengths_nm", lut.wavelengths_nm},
        {"dtype", "float32-le"},
        {"layout", "row-major"},
        {"radiance_units", "W m-2 sr-1 nm-1"},
        {"provenance", lut.provenance},
        {"data_file", data_path.filename().string()},
        {"tool", {{"name", kToolName}, {"version", kToolVersion}}},
    };
    io::write_float32_le(data_path, lut.radiance);
    io::write_json_file(header_path, header);
}

RadianceLUT read_lut(const fs::path& header_path) {
    const nlohmann::json header = io::read_json_file(header_path);
    RadianceLUT lut;
    try {
        if (header.at("dtype").get<std::string>() != "float32-le") {
            throw ContractError("LUT dtype must be float32-le");
        }
        const auto& axes = header.at("axes");
        if (!axes.is_array() || axes.size() != 5) {
            throw ContractError("LUT header must list 5 axes");
        }
        if (axes[0].at("name").get<std::string>() != kCh4AxisName) {
            throw ContractError("LUT header: first axis must be ch4_enhancement_ppmm");
        }
        lut.axes.ch4_ppmm = axes[0].at("nodes").get<std::vector<double>>();
        for (std::size_t a = 0; a < 4; ++a) {
            if (axes[a + 1].at("name").get<std::string>() != kSceneAxisNames[a]) {
                throw ContractError("LUT header: axis " + std::to_string(a + 1) + " must be " +
                                    std::string(kSceneAxisNames[a]));
            }
            lut.axes.scene[a] = axes[a + 1].at("nodes").get<std::vector<double>>();
        }
        lut.wavelengths_nm = header.at("wavelengths_nm").get<std::vector<double>>();
        lut.provenance = header.value("provenance", nlohmann::json::object());
    } catch (const nlohmann::json::exception& e) {
        throw ContractError("LUT header " + header_path.string() + ": " + e.what());
    }
    lut.axes.validate();
    const fs::path data_path =
        header.contains("data_file")
            ? io::resolve_beside(header_path, header.at("data_file").get<std::string>())
            : io::companion_data_path(header_path);
    const std::size_t count =
        lut.axes.ch4_ppmm.size() * lut.scene_node_count() * lut.wavelengths_nm.size();
    lut.radiance = io::read_float32_le(data_path, count);
    lut.validate();
    return lut;
}

}  // namespace ch4flux
