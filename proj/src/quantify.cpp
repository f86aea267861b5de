#include "ch4flux/quantify.hpp"

#include <algorithm>
#include <cmath>

#include "ch4flux/error.hpp"
#include "ch4flux/io.hpp"

namespace ch4flux {

namespace {

constexpr double kPpbToFraction = 1e-9;
constexpr double kSecondsPerHour = 3600.0;

using Point = std::array<double, 2>;

double cross(const Point& o, const Point& a, const Point& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

bool on_segment(const Point& p, const Point& q, const Point& r) {
    return std::min(p[0], r[0]) <= q[0] && q[0] <= std::max(p[0], r[0]) &&
           std::min(p[1], r[1]) <= q[1] && q[1] <= std::max(p[1], r[1]);
}

bool segments_intersect(const Point& p1, const Point& p2, const Point& p3, const Point& p4) {
    const double d1 = cross(p3, p4, p1);
    const double d2 = cross(p3, p4, p2);
    const double d3 = cross(p1, p2, p3);
    const double d4 = cross(p1, p2, p4);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
        return true;
    }
    if (d1 == 0 && on_segment(p3, p1, p4)) return true;
    if (d2 == 0 && on_segment(p3, p2, p4)) return true;
    if (d3 == 0 && on_segment(p1, p3, p2)) return true;
    if (d4 == 0 && on_segment(p1, p4, p2)) return true;
    return false;
}

}  // namespace

double PlumePolygon::area() const {
    double twice = 0.0;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = vertices[i];
        const auto& b = vertices[(i + 1) % n];
        twice += a[0] * b[1] - b[0] * a[1];
    }
    return 0.5 * std::abs(twice);
}

void PlumePolygon::validate() const {
    const std::size_t n = vertices.size();
    if (n < 3) {
        throw InvalidGeometryError("plume polygon needs at least 3 vertices");
    }
    for (const auto& v : vertices) {
        if (!std::isfinite(v[0]) || !std::isfinite(v[1])) {
            throw InvalidGeometryError("plume polygon has a non-finite vertex");
        }
    }
    if (!(area() > 0.0)) {
        throw InvalidGeometryError("plume polygon has zero area");
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if (adjacent) {
                continue;
            }
            if (segments_intersect(vertices[i], vertices[(i + 1) % n], vertices[j],
                                   vertices[(j + 1) % n])) {
                throw InvalidGeometryError("plume polygon edges " + std::to_string(i) + " and " +
                                           std::to_string(j) + " intersect");
            }
        }
    }
}

bool PlumePolygon::contains(double x, double y) const {
    bool inside = false;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const auto& a = vertices[i];
        const auto& b = vertices[j];
        if ((a[1] > y) != (b[1] > y)) {
            const double x_cross = (b[0] - a[0]) * (y - a[1]) / (b[1] - a[1]) + a[0];
            if (x < x_cross) {
                inside = !inside;
            }
        }
    }
    return inside;
}

PlumeMask rasterize_mask(const PlumePolygon& poly, std::size_t rows, std::size_t cols,
                         double pixel_area_m2) {
    poly.validate();
    if (!(pixel_area_m2 > 0.0)) {
        throw ContractError("pixel area must be > 0");
    }
    PlumeMask mask;
    mask.rows = rows;
    mask.cols = cols;
    mask.pixel_area_m2 = pixel_area_m2;

    double min_c = poly.vertices[0][0], max_c = min_c;
    double min_r = poly.vertices[0][1], max_r = min_r;
    for (const auto& v : poly.vertices) {
        min_c = std::min(min_c, v[0]);
        max_c = std::max(max_c, v[0]);
        min_r = std::min(min_r, v[1]);
        max_r = std::max(max_r, v[1]);
    }
    // Pixel centers sit at (c + 0.5, r + 0.5); clip the bounding box to the map.
    const auto lo = [](double v) { return std::max(0.0, std::floor(v - 0.5)); };
    const std::size_t r0 = static_cast<std::size_t>(std::min(lo(min_r), static_cast<double>(rows)));
    const std::size_t c0 = static_cast<std::size_t>(std::min(lo(min_c), static_cast<double>(cols)));
    const double r1d = std::clamp(std::ceil(max_r), 0.0, static_cast<double>(rows));
    const double c1d = std::clamp(std::ceil(max_c), 0.0, static_cast<double>(cols));
    const auto r1 = static_cast<std::size_t>(r1d);
    const auto c1 = static_cast<std::size_t>(c1d);

    for (std::size_t r = r0; r < r1; ++r) {
        for (std::size_t c = c0; c < c1; ++c) {
            if (poly.contains(static_cast<double>(c) + 0.5, static_cast<double>(r) + 0.5)) {
                mask.pixels.push_back({r, c});
            }
        }
    }
    if (mask.pixels.empty()) {
        throw EmptyMaskError("plume polygon covers no pixel center of the " +
                             std::to_string(rows) + "x" + std::to_string(cols) + " map");
    }
    return mask;
}

void AtmosphereParams::validate() const {
    if (!(molar_mass_ch4_gmol > 0.0) || !(molar_mass_air_gmol > 0.0) ||
        !(surface_pressure_pa > 0.0) || !(gravity_ms2 > 0.0)) {
        throw ContractError("atmosphere parameters must all be > 0");
    }
}

void WindRecord::validate() const {
    if (!(u10_ms >= 0.0) || !std::isfinite(u10_ms)) {
        throw ContractError("wind record: u10_ms must be finite and >= 0");
    }
    if (!(direction_deg >= 0.0 && direction_deg < 360.0)) {
        throw ContractError("wind record: direction_deg must lie in [0, 360)");
    }
}

double scaling_factor(const AtmosphereParams& atm, double pixel_area_m2) {
    atm.validate();
    return (atm.molar_mass_ch4_gmol / atm.molar_mass_air_gmol) * atm.column_air_mass_kgm2() *
           pixel_area_m2 * kPpbToFraction;
}

double ime(const EnhancementMap& map, const PlumeMask& mask, double k,
           const ImeOptions& options) {
    if (map.units != EnhancementUnits::ppb) {
        throw UnitMismatchError("IME needs an enhancement map in ppb, got " +
                                to_string(map.units));
    }
    double sum = 0.0;
    for (const PixelIndex& px : mask.pixels) {
        if (px.row >= map.rows || px.col >= map.cols) {
            throw ContractError("plume mask pixel outside the map");
        }
        const double v = map.at(px.row, px.col);
        sum += options.clamp_negative ? std::max(v, 0.0) : v;
    }
    return k * sum;
}

double plume_length(const PlumeMask& mask) {
    if (mask.pixels.empty()) {
        throw EmptyMaskError("plume mask is empty");
    }
    return std::sqrt(static_cast<double>(mask.count()) * mask.pixel_area_m2);
}

double effective_wind(const SensorSpec& spec, const WindRecord& wind,
                      std::optional<double> override_ueff) {
    if (override_ueff) {
        return *override_ueff;
    }
    wind.validate();
    if (!spec.ueff_coeffs) {
        throw MissingCoefficientsError("sensor " + to_string(spec.name) +
                                       " has no effective-wind coefficients; supply U_eff "
                                       "explicitly");
    }
    return spec.ueff_coeffs->slope * wind.u10_ms + spec.ueff_coeffs->intercept_ms;
}

double flux(double ime_kg, double u_eff_ms, double plume_length_m) {
    if (!(plume_length_m > 0.0)) {
        throw ContractError("plume length must be > 0");
    }
    if (!(u_eff_ms > 0.0)) {
        throw ContractError("effective wind speed must be > 0");
    }
    if (!std::isfinite(ime_kg)) {
        throw ContractError("IME must be finite");
    }
    return ime_kg * u_eff_ms / plume_length_m * kSecondsPerHour;
}

FluxEstimate quantify_mask(const EnhancementMap& map, const PlumeMask& mask,
                           const SensorSpec& spec, const WindRecord& wind,
                           const AtmosphereParams& atm, std::optional<double> override_ueff,
                           const ImeOptions& options) {
    const EnhancementMap ppb = convert_units(map, EnhancementUnits::ppb);
    FluxEstimate est;
    est.pixel_area_m2 = mask.pixel_area_m2;
    est.plume_pixels = mask.count();
    est.scaling_factor_kg_per_ppb = scaling_factor(atm, mask.pixel_area_m2);
    est.ime_kg = ime(ppb, mask, est.scaling_factor_kg_per_ppb, options);
    est.plume_length_m = plume_length(mask);
    est.u_eff_ms = effective_wind(spec, wind, override_ueff);
    est.q_kg_per_h = flux(est.ime_kg, est.u_eff_ms, est.plume_length_m);

    nlohmann::json mask_doc = nlohmann::json::array();
    for (const auto& px : mask.pixels) {
        mask_doc.push_back({px.row, px.col});
    }
    std::string map_bytes(reinterpret_cast<const char*>(map.values.data()),
                          map.values.size() * sizeof(double));
    est.inputs = {
        {"map", io::sha256_hex(map_bytes)},
        {"mask", io::json_digest(mask_doc)},
        {"wind", io::json_digest(nlohmann::json(wind))},
        {"atmosphere", io::json_digest(nlohmann::json(atm))},
        {"sensor", io::json_digest(nlohmann::json(spec))},
    };
    if (override_ueff) {
        est.inputs["ueff_override_ms"] = *override_ueff;
    }
    return est;
}

FluxEstimate quantify_plume(const EnhancementMap& map, const PlumePolygon& poly,
                            const SensorSpec& spec, const WindRecord& wind,
                            const AtmosphereParams& atm, std::optional<double> override_ueff,
                            const ImeOptions& options) {
    const PlumeMask mask = rasterize_mask(poly, map.rows, map.cols, pixel_area(spec));
    return quantify_mask(map, mask, spec, wind, atm, override_ueff, options);
}

void to_json(nlohmann::json& j, const PlumePolygon& poly) {
    j = nlohmann::json{{"vertices", poly.vertices}, {"crs", "pixel"}};
}

void from_json(const nlohmann::json& j, PlumePolygon& poly) {
    try {
        if (j.contains("crs") && j.at("crs").get<std::string>() != "pixel") {
            throw ContractError("plume polygon crs must be \"pixel\"");
        }
        poly.vertices = j.at("vertices").get<std::vector<std::array<double, 2>>>();
    } catch (const nlohmann::json::exception& e) {
        throw ContractError(std::string("plume polygon JSON: ") + e.what());
    }
}

void to_json(nlohmann::json& j, const WindRecord& wind) {
    j = nlohmann::json{{"u10_ms", wind.u10_ms},
                       {"direction_deg", wind.direction_deg},
                       {"source", wind.source},
                       {"timestamp", wind.timestamp}};
}

void from_json(const nlohmann::json& j, WindRecord& wind) {
    try {
        wind.u10_ms = j.at("u10_ms").get<double>();
        wind.direction_deg = j.value("direction_deg", 0.0);
        wind.source = j.value("source", std::string());
        wind.timestamp = j.value("timestamp", std::string());
    } catch (const nlohmann::json::exception& e) {
        throw ContractError(std::string("wind record JSON: ") + e.what());
    }
    wind.validate();
}

void to_json(nlohmann::json& j, const AtmosphereParams& atm) {
    j = nlohmann::json{{"molar_mass_ch4_gmol", atm.molar_mass_ch4_gmol},
                       {"molar_mass_air_gmol", atm.molar_mass_air_gmol},
                       {"surface_pressure_pa", atm.surface_pressure_pa},
                       {"gravity_ms2", atm.gravity_ms2}};
}

void from_json(const nlohmann::json& j, AtmosphereParams& atm) {
    const AtmosphereParams defaults;
    try {
        atm.molar_mass_ch4_gmol = j.value("molar_mass_ch4_gmol", defaults.molar_mass_ch4_gmol);
        atm.molar_mass_air_gmol = j.value("molar_mass_air_gmol", defaults.molar_mass_air_gmol);
        atm.surface_pressure_pa = j.value("surface_pressure_pa", defaults.surface_pressure_pa);
        atm.gravity_ms2 = j.value("gravity_ms2", defaults.gravity_ms2);
    } catch (const nlohmann::json::exception& e) {
        throw ContractError(std::string("atmosphere JSON: ") + e.what());
    }
    atm.validate();
}

nlohmann::json flux_report(const FluxEstimate& est, const AtmosphereParams& atm) {
    return nlohmann::json{
        {"ime_kg", est.ime_kg},
        {"plume_length_m", est.plume_length_m},
        {"u_eff_ms", est.u_eff_ms},
        {"q_kg_per_h", est.q_kg_per_h},
        {"scaling_factor_kg_per_ppb", est.scaling_factor_kg_per_ppb},
        {"plume_pixels", est.plume_pixels},
        {"pixel_area_m2", est.pixel_area_m2},
        {"constants",
         {{"atmosphere", atm},
          {"column_air_mass_kgm2", atm.column_air_mass_kgm2()},
          {"ppmm_to_ppb", kPpmmToPpb},
          {"ppb_to_fraction", kPpbToFraction},
          {"seconds_per_hour", kSecondsPerHour}}},
        {"digest_algorithm", kDigestAlgorithm},
        {"inputs", est.inputs},
        {"tool", {{"name", kToolName}, {"version", kToolVersion}}},
    };
}

}  // namespace ch4flux
