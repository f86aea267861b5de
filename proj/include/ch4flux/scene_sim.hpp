#pragma once

// Synthetic radiance cubes with embedded plumes: the ground-truth oracle for
// end-to-end retrieval and quantification checks.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "ch4flux/cube.hpp"
#include "ch4flux/quantify.hpp"
#include "ch4flux/retrieval.hpp"
#include "ch4flux/target.hpp"

namespace ch4flux {

/// True per-pixel enhancement, ppm m.
struct PlumeField {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
    double analytic_total = 0.0;  // continuum integral, ppm m x pixels
    nlohmann::json provenance = nlohmann::json::object();

    double at(std::size_t row, std::size_t col) const { return values[row * cols + col]; }
    double total() const;
    double peak() const;
};

/// peak * exp(-((r - r0)^2 / 2 sr^2 + (c - c0)^2 / 2 sc^2)) sampled at integer
/// pixel indices; center and sigmas are (row, col).
PlumeField gaussian_blob_field(std::size_t rows, std::size_t cols, std::array<double, 2> center,
                               std::array<double, 2> sigmas_px, double peak_ppmm);

PlumeField zero_field(std::size_t rows, std::size_t cols);

enum class BackgroundMode { gaussian, textured };

struct BackgroundModel {
    BackgroundMode mode = BackgroundMode::textured;
    // gaussian mode
    std::vector<double> mean;
    std::vector<std::vector<double>> covariance;
    // textured mode: K endmember spectra (generated around `base` when empty)
    std::vector<std::vector<double>> endmembers;
    std::vector<double> base;
    std::size_t endmember_count = 3;
    double contrast = 0.02;
    double correlation_length_px = 24.0;
};

/// 1.9 ppm over an 8 km scale height.
inline constexpr double kAmbientCh4Ppmm = 15200.0;

struct SimConfig {
    SensorSpec sensor;
    std::size_t rows = 64;
    std::size_t cols = 64;
    BackgroundModel background;
    std::optional<double> snr;  // defaults to sensor.snr_reference
    bool noise = true;
    bool smile = false;
    double striping = 0.0;        // std of per-(column, band) detector gain
    double ambient_ch4_ppmm = kAmbientCh4Ppmm;  // background column absorbed like the plume
    std::uint64_t seed = 0;       // sensor noise
    std::uint64_t scene_seed = 0; // background texture and striping pattern

    double effective_snr() const { return snr.value_or(sensor.snr_reference); }
    void validate() const;
};

void to_json(nlohmann::json& j, const SimConfig& cfg);
void from_json(const nlohmann::json& j, SimConfig& cfg);

/// Methane-free per-band radiance from the LUT continuum model.
std::vector<double> continuum_spectrum(const SensorSpec& spec, const SceneParams& scene,
                                       const ContinuumModel& continuum = {});

/// Geometry used by built-in fixtures.
SceneParams default_scene();

/// Fine-grid d ln(L) / d dX for a Beer-Lambert absorber at the given SZA.
FineSlope analytic_fine_slope(const CrossSectionTable& absorption, double solar_zenith_deg);

/// Either a fine-grid slope (convolved per column, smile aware) or a
/// band-level target (bands outside it carry no plume signal).
using PlumeSignature = std::variant<FineSlope, TargetSpectrum>;

/// Per-band slopes for one column, indexed like the sensor band grid.
std::vector<double> column_band_slopes(const PlumeSignature& signature, const SensorSpec& spec,
                                       std::size_t column, std::size_t cols, bool smile);

/// L = B * exp(slope * dX) * gain(col, band) + noise, where the background
/// B = S(col-shifted) * exp(slope * ambient) and slopes follow the column's
/// smile shift.
RadianceCube render_cube(const PlumeField& field, const PlumeSignature& signature,
                         const SimConfig& config, unsigned threads = 1);

/// Background B of every pixel without plume, noise or striping.
RadianceCube render_background(const PlumeSignature& signature, const SimConfig& config);

inline constexpr double kTruthMaskFraction = 0.01;

/// Pixels with true enhancement above 1% of the field's peak.
PlumeMask truth_mask(const PlumeField& field, double pixel_area_m2);

struct RoundTripSettings {
    RetrievalOptions retrieval;
    std::optional<SpectralWindow> window;  // sensor default when empty
    WindRecord wind{6.7, 90.0, "fixture", ""};
    AtmosphereParams atmosphere;
};

struct RoundTripReport {
    double true_ime_kg = 0.0;
    double retrieved_ime_kg = 0.0;
    double ime_relative_error = 0.0;
    double true_q_kg_per_h = 0.0;
    double retrieved_q_kg_per_h = 0.0;
    double q_relative_error = 0.0;
    std::size_t mask_pixels = 0;
    double background_std_ppmm = 0.0;
    double background_mean_abs_ppmm = 0.0;
    double plume_mean_true_ppmm = 0.0;
    double plume_mean_retrieved_ppmm = 0.0;
    double max_pixel_relative_error = 0.0;
    EnhancementMap map;
};

/// Renders, retrieves and quantifies with the truth footprint as mask.
RoundTripReport round_trip(const PlumeField& field, const PlumeSignature& signature,
                           const SimConfig& config, const RoundTripSettings& settings);

void write_plume_field(const std::filesystem::path& header_path, const PlumeField& field);
PlumeField read_plume_field(const std::filesystem::path& header_path);

}  // namespace ch4flux
