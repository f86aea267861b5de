#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "ch4flux/sensor.hpp"

namespace ch4flux {

/// Band-sequential at-sensor radiance, W m-2 sr-1 nm-1, indexed
/// (band, row, col) with rows fastest-but-one and columns fastest.
struct RadianceCube {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t bands = 0;
    std::vector<double> wavelengths_nm;
    std::vector<double> fwhm_nm;
    std::vector<double> data;
    SensorSpec sensor;
    nlohmann::json provenance = nlohmann::json::object();

    RadianceCube() = default;
    RadianceCube(std::size_t rows, std::size_t cols, const SensorSpec& spec);

    std::size_t pixel_count() const { return rows * cols; }

    double& at(std::size_t band, std::size_t row, std::size_t col) {
        return data[(band * rows + row) * cols + col];
    }
    double at(std::size_t band, std::size_t row, std::size_t col) const {
        return data[(band * rows + row) * cols + col];
    }

    std::span<const double> band_plane(std::size_t band) const {
        return {data.data() + band * rows * cols, rows * cols};
    }

    /// Throws ContractError on inconsistent dimensions or non-finite data.
    void validate() const;

    /// Index of the band whose center is within 1e-3 nm of `wavelength_nm`.
    std::size_t band_index(double wavelength_nm) const;
};

/// Per-pixel flags, row-major, nonzero = set.
using PixelMask = std::vector<std::uint8_t>;

/// Throws ContractError unless every cube band is a band of `spec`.
void check_cube_matches_sensor(const RadianceCube& cube, const SensorSpec& spec);

void write_cube(const std::filesystem::path& header_path, const RadianceCube& cube);
RadianceCube read_cube(const std::filesystem::path& header_path);

}  // namespace ch4flux
