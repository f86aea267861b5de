#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace ch4flux {

enum class SensorName { PRISMA, EnMAP, EMIT, GHGSAT, CUSTOM };

std::string to_string(SensorName name);
SensorName sensor_name_from_string(std::string_view text);

/// Linear effective-wind model U_eff = slope * U10 + intercept.
struct WindCoefficients {
    double slope = 0.0;
    double intercept_ms = 0.0;

    bool operator==(const WindCoefficients&) const = default;
};

/// Lower/upper wavelength bound of a retrieval window, nanometers.
struct SpectralWindow {
    double low_nm = 0.0;
    double high_nm = 0.0;

    bool contains(double wavelength_nm) const {
        return wavelength_nm >= low_nm && wavelength_nm <= high_nm;
    }
    bool operator==(const SpectralWindow&) const = default;
};

/// Static description of an imaging spectrometer. Immutable once validated.
struct SensorSpec {
    SensorName name = SensorName::CUSTOM;
    double gsd_m = 0.0;
    std::vector<double> band_centers_nm;
    std::vector<double> fwhm_nm;
    double snr_reference = 0.0;
    double reference_radiance = 1.0;
    // Total across-track band-center variation. The shift ramps linearly
    // from -smile/2 at the first column to +smile/2 at the last.
    double smile_shift_nm = 0.0;
    std::optional<WindCoefficients> ueff_coeffs;

    std::size_t band_count() const { return band_centers_nm.size(); }

    // Throws ContractError naming the violated field.
    void validate() const;

    bool operator==(const SensorSpec&) const = default;
};

SensorSpec builtin_spec(SensorName name);
SensorSpec builtin_spec(std::string_view name);

/// Pixel footprint area, square meters.
double pixel_area(const SensorSpec& spec);

/// Across-track band-center shift for a column in a `column_count`-wide image.
double smile_shift(const SensorSpec& spec, std::size_t column, std::size_t column_count);

/// Default retrieval window: the 2300 nm band for SWIR-2 sensors and the
/// 1650 nm band for sensors whose grid lives there.
SpectralWindow default_window(const SensorSpec& spec);

void to_json(nlohmann::json& j, const SensorSpec& spec);
void from_json(const nlohmann::json& j, SensorSpec& spec);

}  // namespace ch4flux
