#pragma once

// Scene-specific unit target generation: radiance lookup tables, per
// wavelength log-radiance regression against methane enhancement, and
// Gaussian SRF convolution onto a sensor band grid.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ch4flux/sensor.hpp"

namespace ch4flux {

/// Geometry/atmosphere state of one acquisition; each value must lie inside
/// the corresponding LUT axis.
struct SceneParams {
    double sensor_altitude_km = 0.0;
    double water_vapor_gcm2 = 0.0;
    double ground_elevation_km = 0.0;
    double solar_zenith_deg = 0.0;

    bool operator==(const SceneParams&) const = default;
};

void to_json(nlohmann::json& j, const SceneParams& p);
void from_json(const nlohmann::json& j, SceneParams& p);

/// Scene axes of a radiance LUT in storage order (after the methane axis).
inline constexpr std::array<std::string_view, 4> kSceneAxisNames = {
    "sensor_altitude_km", "water_vapor_gcm2", "ground_elevation_km", "solar_zenith_deg"};
inline constexpr std::string_view kCh4AxisName = "ch4_enhancement_ppmm";

struct LutAxes {
    std::array<std::vector<double>, 4> scene;  // ordered as kSceneAxisNames
    std::vector<double> ch4_ppmm;

    void validate() const;
};

/// At-sensor radiance over (ch4, altitude, water vapor, elevation, SZA,
/// wavelength), row-major with ch4 slowest and wavelength fastest.
struct RadianceLUT {
    LutAxes axes;
    std::vector<double> wavelengths_nm;
    std::vector<double> radiance;
    nlohmann::json provenance = nlohmann::json::object();

    std::size_t scene_node_count() const;
    std::size_t offset(std::size_t ch4, const std::array<std::size_t, 4>& scene) const;
    void validate() const;
};

/// Radiance at fixed scene parameters: ch4-major, wavelength-minor.
struct LutSlice {
    std::vector<double> ch4_ppmm;
    std::vector<double> wavelengths_nm;
    std::vector<double> radiance;

    double at(std::size_t ch4, std::size_t wavelength) const {
        return radiance[ch4 * wavelengths_nm.size() + wavelength];
    }
};

/// Multilinear interpolation over the four scene axes; the methane axis and
/// the wavelength grid pass through untouched. Throws RangeError naming the
/// offending axis when a parameter lies outside its axis.
LutSlice interpolate_lut(const RadianceLUT& lut, const SceneParams& params);

/// d ln(L) / d dX per fine wavelength. `valid` is zero where the fit was
/// skipped because of a non-positive or non-finite radiance.
struct FineSlope {
    std::vector<double> wavelengths_nm;
    std::vector<double> slope;  // (ppm m)^-1
    std::vector<double> r2;
    std::vector<std::uint8_t> valid;
};

FineSlope regress_log_slope(const LutSlice& slice);

/// Index of a column within an image of `count` columns, used to pick the
/// smile-shifted band centers.
struct ColumnPosition {
    std::size_t index = 0;
    std::size_t count = 1;

    bool operator==(const ColumnPosition&) const = default;
};

struct TargetSpectrum {
    std::vector<double> band_centers_nm;     // nominal centers
    std::vector<std::size_t> band_indices;   // positions in the sensor band grid
    std::vector<double> log_slope;           // (ppm m)^-1, <= 0 where CH4 absorbs
    std::vector<double> fit_r2;
    SpectralWindow window;
    std::optional<ColumnPosition> column;

    std::size_t size() const { return band_centers_nm.size(); }
};

void to_json(nlohmann::json& j, const TargetSpectrum& t);

/// Gaussian SRF (sigma = FWHM / 2.3548) weighted average of fine values for
/// every sensor band, weights normalized to one. Bands whose support touches
/// an invalid fine sample come back as NaN. Throws CoverageError when the
/// fine grid does not span +-3 FWHM around a band.
TargetSpectrum convolve_to_bands(const FineSlope& fine, const SensorSpec& spec,
                                 std::optional<ColumnPosition> column = std::nullopt);

/// Band screening thresholds for a target band to count as informative.
inline constexpr double kMinInformativeSlope = 1e-9;
inline constexpr double kMinInformativeR2 = 0.9;
inline constexpr std::size_t kMinTargetBands = 8;

/// Drops bands outside `window` and non-informative bands. Throws
/// DegenerateTargetError if fewer than kMinTargetBands survive.
TargetSpectrum select_informative(const TargetSpectrum& full, const SpectralWindow& window);

/// convolve_to_bands followed by select_informative.
TargetSpectrum target_from_fine_slope(const FineSlope& fine, const SensorSpec& spec,
                                      const SpectralWindow& window,
                                      std::optional<ColumnPosition> column = std::nullopt);

/// interpolate -> regress -> convolve -> window/screen.
TargetSpectrum make_target(const RadianceLUT& lut, const SceneParams& params,
                           const SensorSpec& spec, const SpectralWindow& window,
                           std::optional<ColumnPosition> column = std::nullopt);

// ---------------------------------------------------------------------------
// Synthetic LUT construction (Beer-Lambert stand-in for a radiative transfer
// code).

struct CrossSectionTable {
    std::vector<double> wavelengths_nm;
    std::vector<double> cross_section_per_ppmm;
};

CrossSectionTable read_cross_section_csv(const std::filesystem::path& path);
void write_cross_section_csv(const std::filesystem::path& path, const CrossSectionTable& table);

/// Deterministic methane-like absorption: rotational line manifolds around
/// 1650 nm and 2300 nm on the given fine grid.
CrossSectionTable synthetic_methane_cross_section(double start_nm, double stop_nm,
                                                  double step_nm);

/// Smooth methane-free radiance model used as the LUT baseline.
struct ContinuumModel {
    double solar_scale = 60.0;
    double reflectance = 0.3;
    double water_vapor_coeff = 0.05;
    double elevation_coeff = 0.02;
    double altitude_coeff = 0.01;

    double radiance(const SceneParams& params, double wavelength_nm) const;
};

/// Down-up path airmass 1/cos(SZA) + 1. Throws InvalidGeometryError for
/// SZA outside [0, 90).
double two_way_airmass(double solar_zenith_deg);

/// Minimum methane axis span required of the in-repo builder.
inline constexpr double kMinLutCh4SpanPpmm = 64000.0;

RadianceLUT build_synthetic_lut(const CrossSectionTable& absorption, const LutAxes& axes,
                                const ContinuumModel& continuum = {});

void to_json(nlohmann::json& j, const LutAxes& axes);
void from_json(const nlohmann::json& j, LutAxes& axes);

/// Writes `<header>.json` plus the float32-le companion named in the header.
void write_lut(const std::filesystem::path& header_path, const RadianceLUT& lut);
RadianceLUT read_lut(const std::filesystem::path& header_path);

}  // namespace ch4flux
