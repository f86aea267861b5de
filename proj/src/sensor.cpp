#include "ch4flux/sensor.hpp"

#include <cctype>
#include <cmath>

#include "ch4flux/error.hpp"

namespace ch4flux {

namespace {

// Evenly spaced band grid anchored at `anchor_nm`, from index `first` to
// `last` inclusive. Anchoring at the window edge fixes the band count that
// falls inside the retrieval window.
std::vector<double> band_grid(double anchor_nm, double spacing_nm, int first, int last) {
    std::vector<double> centers;
    centers.reserve(static_cast<std::size_t>(last - first + 1));
    for (int k = first; k <= last; ++k) {
        centers.push_back(anchor_nm + spacing_nm * k);
    }
    return centers;
}

SensorSpec make_spec(SensorName name, double gsd, std::vector<double> centers, double fwhm,
                     double snr, double smile, std::optional<WindCoefficients> ueff) {
    SensorSpec spec;
    spec.name = name;
    spec.gsd_m = gsd;
    spec.fwhm_nm.assign(centers.size(), fwhm);
    spec.band_centers_nm = std::move(centers);
    spec.snr_reference = snr;
    spec.reference_radiance = 1.0;
    spec.smile_shift_nm = smile;
    spec.ueff_coeffs = ueff;
    return spec;
}

}  // namespace

std::string to_string(SensorName name) {
    switch (name) {
        case SensorName::PRISMA: return "PRISMA";
        case SensorName::EnMAP: return "EnMAP";
        case SensorName::EMIT: return "EMIT";
        case SensorName::GHGSAT: return "GHGSAT";
        case SensorName::CUSTOM: return "CUSTOM";
    }
    return "CUSTOM";
}

SensorName sensor_name_from_string(std::string_view text) {
    std::string upper(text);
    for (auto& c : upper) {
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    if (upper == "PRISMA") return SensorName::PRISMA;
    if (upper == "ENMAP") return SensorName::EnMAP;
    if (upper == "EMIT") return SensorName::EMIT;
    if (upper == "GHGSAT") return SensorName::GHGSAT;
    if (upper == "CUSTOM") return SensorName::CUSTOM;
    throw UnknownSensorError(std::string(text));
}

void SensorSpec::validate() const {
    if (!(gsd_m > 0.0) || !std::isfinite(gsd_m)) {
        throw ContractError("sensor spec: gsd_m must be > 0");
    }
    if (band_centers_nm.empty()) {
        throw ContractError("sensor spec: band_centers_nm is empty");
    }
    if (fwhm_nm.size() != band_centers_nm.size()) {
        throw ContractError("sensor spec: fwhm_nm length differs from band_centers_nm");
    }
    for (std::size_t b = 0; b < band_centers_nm.size(); ++b) {
        if (!std::isfinite(band_centers_nm[b])) {
            throw ContractError("sensor spec: band_centers_nm contains a non-finite value");
        }
        if (b > 0 && !(band_centers_nm[b] > band_centers_nm[b - 1])) {
            throw ContractError("sensor spec: band_centers_nm must be strictly increasing");
        }
        if (!(fwhm_nm[b] > 0.0) || !std::isfinite(fwhm_nm[b])) {
            throw ContractError("sensor spec: fwhm_nm must be > 0");
        }
    }
    if (!(snr_reference > 0.0)) {
        throw ContractError("sensor spec: snr_reference must be > 0");
    }
    if (!(reference_radiance > 0.0)) {
        throw ContractError("sensor spec: reference_radiance must be > 0");
    }
    if (!(smile_shift_nm >= 0.0) || !std::isfinite(smile_shift_nm)) {
        throw ContractError("sensor spec: smile_shift_nm must be >= 0");
    }
    if (ueff_coeffs) {
        if (!(ueff_coeffs->slope > 0.0)) {
            throw ContractError("sensor spec: ueff_coeffs.slope must be > 0");
        }
        if (!(ueff_coeffs->intercept_ms >= 0.0)) {
            throw ContractError("sensor spec: ueff_coeffs.intercept must be >= 0");
        }
    }
}

SensorSpec builtin_spec(SensorName name) {
    switch (name) {
        case SensorName::PRISMA:
            // 47 bands inside 2100-2450 nm, FWHM ~10 nm, 2.8 nm smile.
            return make_spec(name, 30.0, band_grid(2100.0, 7.5, -20, 53), 10.0, 100.0, 2.8,
                             WindCoefficients{0.37, 0.70});
        case SensorName::EnMAP:
            // 43 bands inside 2100-2450 nm, FWHM ~7.8 nm, 1.3 nm smile, twice PRISMA's SNR.
            return make_spec(name, 30.0, band_grid(2100.0, 8.2, -18, 48), 7.8, 200.0, 1.3,
                             WindCoefficients{0.37, 0.69});
        case SensorName::EMIT:
            return make_spec(name, 60.0, band_grid(2100.0, 7.4, -20, 54), 7.0, 200.0, 0.0,
                             WindCoefficients{0.45, 0.67});
        case SensorName::GHGSAT:
            return make_spec(name, 50.0, band_grid(1600.0, 2.0, 0, 50), 2.0, 150.0, 0.0,
                             std::nullopt);
        case SensorName::CUSTOM:
            break;
    }
    throw UnknownSensorError(to_string(name));
}

SensorSpec builtin_spec(std::string_view name) {
    return builtin_spec(sensor_name_from_string(name));
}

double pixel_area(const SensorSpec& spec) {
    return spec.gsd_m * spec.gsd_m;
}

double smile_shift(const SensorSpec& spec, std::size_t column, std::size_t column_count) {
    if (column_count <= 1 || spec.smile_shift_nm == 0.0) {
        return 0.0;
    }
    const double frac = static_cast<double>(column) / static_cast<double>(column_count - 1);
    return spec.smile_shift_nm * (frac - 0.5);
}

SpectralWindow default_window(const SensorSpec& spec) {
    if (spec.name == SensorName::GHGSAT) {
        return {1600.0, 1700.0};
    }
    if (!spec.band_centers_nm.empty() && spec.band_centers_nm.back() < 1900.0) {
        return {1600.0, 1700.0};
    }
    return {2100.0, 2450.0};
}

void to_json(nlohmann::json& j, const SensorSpec& spec) {
    j = nlohmann::json{
        {"name", to_string(spec.name)},
        {"gsd_m", spec.gsd_m},
        {"band_centers_nm", spec.band_centers_nm},
        {"fwhm_nm", spec.fwhm_nm},
        {"snr_reference", spec.snr_reference},
        {"reference_radiance", spec.reference_radiance},
        {"smile_shift_nm", spec.smile_shift_nm},
    };
    if (spec.ueff_coeffs) {
        j["ueff_coeffs"] = {{"slope", spec.ueff_coeffs->slope},
                            {"intercept", spec.ueff_coeffs->intercept_ms}};
    } else {
        j["ueff_coeffs"] = nullptr;
    }
}

void from_json(const nlohmann::json& j, SensorSpec& spec) {
    try {
        spec.name = sensor_name_from_string(j.at("name").get<std::string>());
        spec.gsd_m = j.at("gsd_m").get<double>();
        spec.band_centers_nm = j.at("band_centers_nm").get<std::vector<double>>();
        spec.fwhm_nm = j.at("fwhm_nm").get<std::vector<double>>();
        spec.snr_reference = j.at("snr_reference").get<double>();
        spec.reference_radiance = j.value("reference_radiance", 1.0);
        spec.smile_shift_nm = j.value("smile_shift_nm", 0.0);
        spec.ueff_coeffs.reset();
        if (j.contains("ueff_coeffs") && !j.at("ueff_coeffs").is_null()) {
            const auto& u = j.at("ueff_coeffs");
            spec.ueff_coeffs = WindCoefficients{u.at("slope").get<double>(),
                                                u.at("intercept").get<double>()};
        }
    } catch (const nlohmann::json::exception& e) {
        throw ContractError(std::string("sensor spec JSON: ") + e.what());
    }
    spec.validate();
}

}  // namespace ch4flux
