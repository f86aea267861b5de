#pragma once

// Emission rate from an enhancement map: plume masking and the integrated
// mass enhancement (IME) model.

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ch4flux/retrieval.hpp"
#include "ch4flux/sensor.hpp"

namespace ch4flux {

/// Closed ring in pixel space; vertices are (col, row), pixel (r, c) spans
/// [c, c+1) x [r, r+1).
struct PlumePolygon {
    std::vector<std::array<double, 2>> vertices;

    double area() const;
    /// Throws InvalidGeometryError for < 3 vertices, zero area or self-intersection.
    void validate() const;
    /// Even-odd rule.
    bool contains(double col, double row) const;
};

struct PixelIndex {
    std::size_t row = 0;
    std::size_t col = 0;

    bool operator==(const PixelIndex&) const = default;
};

struct PlumeMask {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<PixelIndex> pixels;  // row-major order
    double pixel_area_m2 = 0.0;

    std::size_t count() const { return pixels.size(); }
};

PlumeMask rasterize_mask(const PlumePolygon& poly, std::size_t rows, std::size_t cols,
                         double pixel_area_m2);

struct AtmosphereParams {
    double molar_mass_ch4_gmol = 16.04;
    double molar_mass_air_gmol = 28.9644;
    double surface_pressure_pa = 101325.0;
    double gravity_ms2 = 9.80665;

    /// Column dry-air mass, kg m-2.
    double column_air_mass_kgm2() const { return surface_pressure_pa / gravity_ms2; }
    void validate() const;
};

struct WindRecord {
    double u10_ms = 0.0;
    double direction_deg = 0.0;
    std::string source;
    std::string timestamp;  // ISO-8601 UTC

    void validate() const;
};

/// kg per (ppb x pixel).
double scaling_factor(const AtmosphereParams& atm, double pixel_area_m2);

struct ImeOptions {
    bool clamp_negative = false;
};

double ime(const EnhancementMap& map_ppb, const PlumeMask& mask, double k,
           const ImeOptions& options = {});

double plume_length(const PlumeMask& mask);

double effective_wind(const SensorSpec& spec, const WindRecord& wind,
                      std::optional<double> override_ueff = std::nullopt);

/// kg/h from IME (kg), effective wind (m/s) and plume length (m).
double flux(double ime_kg, double u_eff_ms, double plume_length_m);

struct FluxEstimate {
    double ime_kg = 0.0;
    double plume_length_m = 0.0;
    double u_eff_ms = 0.0;
    double q_kg_per_h = 0.0;
    double scaling_factor_kg_per_ppb = 0.0;
    std::size_t plume_pixels = 0;
    double pixel_area_m2 = 0.0;
    nlohmann::json inputs = nlohmann::json::object();  // digests of every input

    /// Q re-derived from the stored IME, U_eff and L.
    double rederived_q() const { return flux(ime_kg, u_eff_ms, plume_length_m); }
};

FluxEstimate quantify_plume(const EnhancementMap& map, const PlumePolygon& poly,
                            const SensorSpec& spec, const WindRecord& wind,
                            const AtmosphereParams& atm = {},
                            std::optional<double> override_ueff = std::nullopt,
                            const ImeOptions& options = {});

/// Same chain with a precomputed mask.
FluxEstimate quantify_mask(const EnhancementMap& map, const PlumeMask& mask,
                           const SensorSpec& spec, const WindRecord& wind,
                           const AtmosphereParams& atm = {},
                           std::optional<double> override_ueff = std::nullopt,
                           const ImeOptions& options = {});

void to_json(nlohmann::json& j, const PlumePolygon& poly);
void from_json(const nlohmann::json& j, PlumePolygon& poly);
void to_json(nlohmann::json& j, const WindRecord& wind);
void from_json(const nlohmann::json& j, WindRecord& wind);
void to_json(nlohmann::json& j, const AtmosphereParams& atm);
void from_json(const nlohmann::json& j, AtmosphereParams& atm);

/// Full report: intermediates, constants and input digests.
nlohmann::json flux_report(const FluxEstimate& est, const AtmosphereParams& atm);

}  // namespace ch4flux
