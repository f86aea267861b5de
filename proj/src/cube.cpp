#include "ch4flux/cube.hpp"

#include <cmath>
#include <sstream>

#include "ch4flux/error.hpp"
#include "ch4flux/io.hpp"

namespace ch4flux {

namespace fs = std::filesystem;

namespace {
constexpr double kBandMatchTolNm = 1e-3;
}

RadianceCube::RadianceCube(std::size_t rows_, std::size_t cols_, const SensorSpec& spec)
    : rows(rows_),
      cols(cols_),
      bands(spec.band_count()),
      wavelengths_nm(spec.band_centers_nm),
      fwhm_nm(spec.fwhm_nm),
      data(rows_ * cols_ * spec.band_count(), 0.0),
      sensor(spec) {}

void RadianceCube::validate() const {
    if (rows == 0 || cols == 0 || bands == 0) {
        throw ContractError("cube dimensions must be positive");
    }
    if (wavelengths_nm.size() != bands || fwhm_nm.size() != bands) {
        throw ContractError("cube wavelength/fwhm metadata length differs from band count");
    }
    if (data.size() != rows * cols * bands) {
        throw ContractError("cube data size does not match rows x cols x bands");
    }
    for (double v : data) {
        if (!std::isfinite(v)) {
            throw ContractError("cube contains non-finite radiance");
        }
    }
}

std::size_t RadianceCube::band_index(double wavelength_nm) const {
    for (std::size_t b = 0; b < wavelengths_nm.size(); ++b) {
        if (std::abs(wavelengths_nm[b] - wavelength_nm) <= kBandMatchTolNm) {
            return b;
        }
    }
    std::ostringstream msg;
    msg << "band-grid mismatch: no cube band at " << wavelength_nm << " nm";
    throw ContractError(msg.str());
}

void check_cube_matches_sensor(const RadianceCube& cube, const SensorSpec& spec) {
    for (double wl : cube.wavelengths_nm) {
        bool found = false;
        for (double c : spec.band_centers_nm) {
            if (std::abs(c - wl) <= kBandMatchTolNm) {
                found = true;
                break;
            }
        }
        if (!found) {
            std::ostringstream msg;
            msg << "cube/sensor band mismatch: cube band " << wl << " nm is not a "
                << to_string(spec.name) << " band";
            throw ContractError(msg.str());
        }
    }
}

void write_cube(const fs::path& header_path, const RadianceCube& cube) {
    cube.validate();
    const fs::path data_path = io::companion_data_path(header_path);
    nlohmann::json header{
        {"rows", cube.rows},
        {"cols", cube.cols},
        {"bands", cube.bands},
        {"wavelengths_nm", cube.wavelengths_nm},
        {"fwhm_nm", cube.fwhm_nm},
        {"interleave", "bsq"},
        {"dtype", "float32-le"},
        {"sensor", cube.sensor},
        {"provenance", cube.provenance},
        {"data_file", data_path.filename().string()},
        {"tool", {{"name", kToolName}, {"version", kToolVersion}}},
    };
    io::write_float32_le(data_path, cube.data);
    io::write_json_file(header_path, header);
}

RadianceCube read_cube(const fs::path& header_path) {
    const nlohmann::json header = io::read_json_file(header_path);
    RadianceCube cube;
    try {
        if (header.at("interleave").get<std::string>() != "bsq") {
            throw ContractError("cube interleave must be bsq");
        }
        if (header.at("dtype").get<std::string>() != "float32-le") {
            throw ContractError("cube dtype must be float32-le");
        }
        cube.rows = header.at("rows").get<std::size_t>();
        cube.cols = header.at("cols").get<std::size_t>();
        cube.bands = header.at("bands").get<std::size_t>();
        cube.wavelengths_nm = header.at("wavelengths_nm").get<std::vector<double>>();
        cube.fwhm_nm = header.at("fwhm_nm").get<std::vector<double>>();
        cube.sensor = header.at("sensor").get<SensorSpec>();
        cube.provenance = header.value("provenance", nlohmann::json::object());
    } catch (const nlohmann::json::exception& e) {
        throw ContractError("cube header " + header_path.string() + ": " + e.what());
    }
    const fs::path data_path =
        header.contains("data_file")
            ? io::resolve_beside(header_path, header.at("data_file").get<std::string>())
            : io::companion_data_path(header_path);
    cube.data = io::read_float32_le(data_path, cube.rows * cube.cols * cube.bands);
    cube.validate();
    return cube;
}

}  // namespace ch4flux
