#pragma once

// Clutter-matched-filter estimation of per-pixel methane column enhancement.

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "ch4flux/cube.hpp"
#include "ch4flux/target.hpp"

namespace ch4flux {

/// ppm m -> ppb, assuming an 8 km scale height and a uniform vertical profile.
inline constexpr double kPpmmToPpb = 0.125;

enum class EnhancementUnits { ppmm, ppb };
enum class RetrievalMode { global, columnwise };

std::string to_string(EnhancementUnits units);
EnhancementUnits units_from_string(std::string_view text);
std::string to_string(RetrievalMode mode);
RetrievalMode mode_from_string(std::string_view text);

struct BackgroundStats {
    std::vector<double> band_centers_nm;
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;  // 1/n normalized, regularized
    std::size_t sample_count = 0;
    double regularization = 0.0;  // absolute ridge added to the diagonal
};

/// Sample mean and 1/n covariance over the pixels of a scope (whole image or
/// one column) minus `exclusion`, followed by the ridge
/// delta * trace(cov) / bands on the diagonal. `band_indices` restricts the
/// statistics to a subset of cube bands (all bands when empty).
///
/// Throws ContractError when fewer than two pixels remain and
/// DegenerateBackgroundError when the regularized covariance is not positive
/// definite.
BackgroundStats estimate_background(const RadianceCube& cube, std::optional<std::size_t> column,
                                    const PixelMask* exclusion, double delta,
                                    const std::vector<std::size_t>& band_indices = {});

/// t = log_slope * mu elementwise: the target in radiance per ppm m.
Eigen::VectorXd radiance_space_target(const TargetSpectrum& t_log, const BackgroundStats& stats);

struct EnhancementMap {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
    EnhancementUnits units = EnhancementUnits::ppmm;
    std::vector<double> noise_estimate;  // per column
    RetrievalMode mode = RetrievalMode::global;
    double delta = 0.0;
    PixelMask background_used;  // pixels feeding the final statistics
    nlohmann::json provenance = nlohmann::json::object();

    double at(std::size_t row, std::size_t col) const { return values[row * cols + col]; }
};

struct RetrievalOptions {
    RetrievalMode mode = RetrievalMode::global;
    double delta = 1e-3;
    // Re-estimate the statistics once, excluding pixels above the percentile
    // of the first-pass map.
    bool exclude_plume = true;
    double plume_percentile = 99.5;
    unsigned threads = 1;
};

/// Supplies the target for a column (or for the whole image when empty).
using TargetProvider = std::function<TargetSpectrum(std::optional<ColumnPosition>)>;

/// Applies dX = ((x - mu)' S^-1 t) / (t' S^-1 t) per pixel. In column-wise
/// mode each column has its own statistics and, if the sensor has a smile
/// model, its own target from `targets`. Output is in ppm m and bit-identical
/// for any thread count.
EnhancementMap matched_filter(const RadianceCube& cube, const TargetProvider& targets,
                              const RetrievalOptions& options,
                              const PixelMask* exclusion = nullptr);

EnhancementMap matched_filter(const RadianceCube& cube, const TargetSpectrum& target,
                              const RetrievalOptions& options,
                              const PixelMask* exclusion = nullptr);

EnhancementMap convert_units(const EnhancementMap& map, EnhancementUnits to);

void write_enhancement_map(const std::filesystem::path& header_path, const EnhancementMap& map);
EnhancementMap read_enhancement_map(const std::filesystem::path& header_path);

}  // namespace ch4flux
