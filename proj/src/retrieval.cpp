#include "ch4flux/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>

#include "ch4flux/error.hpp"
#include "ch4flux/io.hpp"
#include "ch4flux/parallel.hpp"

namespace ch4flux {

namespace fs = std::filesystem;

std::string to_string(EnhancementUnits units) {
    return units == EnhancementUnits::ppb ? "ppb" : "ppmm";
}

EnhancementUnits units_from_string(std::string_view text) {
    if (text == "ppmm") return EnhancementUnits::ppmm;
    if (text == "ppb") return EnhancementUnits::ppb;
    throw ContractError("unknown units tag: " + std::string(text));
}

std::string to_string(RetrievalMode mode) {
    return mode == RetrievalMode::columnwise ? "columnwise" : "global";
}

RetrievalMode mode_from_string(std::string_view text) {
    if (text == "global") return RetrievalMode::global;
    if (text == "columnwise") return RetrievalMode::columnwise;
    throw ContractError("unknown retrieval mode: " + std::string(text));
}

namespace {

std::string scope_label(std::optional<std::size_t> column) {
    return column ? "column " + std::to_string(*column) : std::string("global");
}

std::vector<std::size_t> scope_pixels(const RadianceCube& cube, std::optional<std::size_t> column,
                                      const PixelMask* exclusion) {
    std::vector<std::size_t> pixels;
    auto keep = [&](std::size_t p) { return exclusion == nullptr || (*exclusion)[p] == 0; };
    if (column) {
        pixels.reserve(cube.rows);
        for (std::size_t r = 0; r < cube.rows; ++r) {
            const std::size_t p = r * cube.cols + *column;
            if (keep(p)) pixels.push_back(p);
        }
    } else {
        pixels.reserve(cube.pixel_count());
        for (std::size_t p = 0; p < cube.pixel_count(); ++p) {
            if (keep(p)) pixels.push_back(p);
        }
    }
    return pixels;
}

// Neumaier-compensated mean: scale-exact to within one rounding.
double compensated_mean(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
    double sum = 0.0;
    double carry = 0.0;
    for (Eigen::Index j = 0; j < row.size(); ++j) {
        const double v = row[j];
        const double t = sum + v;
        carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    return (sum + carry) / static_cast<double>(row.size());
}

// Linear filter for one scope: dX = (x[bands] - mean) . weights
struct ScopeFilter {
    std::vector<std::size_t> bands;
    Eigen::VectorXd mean;
    Eigen::VectorXd weights;
    double noise = 0.0;

    double apply(const RadianceCube& cube, std::size_t pixel) const {
        const std::size_t npix = cube.pixel_count();
        double acc = 0.0;
        for (std::size_t i = 0; i < bands.size(); ++i) {
            acc += (cube.data[bands[i] * npix + pixel] - mean[static_cast<Eigen::Index>(i)]) *
                   weights[static_cast<Eigen::Index>(i)];
        }
        return acc;
    }
};

ScopeFilter build_filter(const RadianceCube& cube, std::optional<std::size_t> column,
                         const TargetSpectrum& target, const PixelMask* exclusion, double delta) {
    if (target.size() < kMinTargetBands) {
        throw DegenerateTargetError("target has " + std::to_string(target.size()) +
                                    " bands, need " + std::to_string(kMinTargetBands));
    }
    ScopeFilter f;
    f.bands.reserve(target.size());
    for (double wl : target.band_centers_nm) {
        f.bands.push_back(cube.band_index(wl));
    }
    const BackgroundStats stats = estimate_background(cube, column, exclusion, delta, f.bands);
    const Eigen::VectorXd t = radiance_space_target(target, stats);
    if (t.isZero(0.0)) {
        throw DegenerateTargetError("radiance-space target is zero (" + scope_label(column) + ")");
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(stats.covariance);
    if (llt.info() != Eigen::Success) {
        throw DegenerateBackgroundError("background covariance is not positive definite (" +
                                        scope_label(column) + ")");
    }
    const Eigen::VectorXd s = llt.solve(t);
    const double denom = t.dot(s);
    if (!(denom > 0.0) || !std::isfinite(denom)) {
        throw DegenerateTargetError("t' S^-1 t is not positive (" + scope_label(column) + ")");
    }
    f.mean = stats.mean;
    f.weights = s / denom;
    f.noise = 1.0 / std::sqrt(denom);
    return f;
}

struct PassResult {
    std::vector<double> values;
    std::vector<double> noise;
};

PassResult run_pass(const RadianceCube& cube, const TargetProvider& targets,
                    const RetrievalOptions& options, const PixelMask* exclusion) {
    PassResult out;
    out.values.assign(cube.pixel_count(), 0.0);
    out.noise.assign(cube.cols, 0.0);

    if (options.mode == RetrievalMode::global) {
        const TargetSpectrum target = targets(std::nullopt);
        const ScopeFilter f = build_filter(cube, std::nullopt, target, exclusion, options.delta);
        parallel_for(cube.rows, options.threads, [&](std::size_t r) {
            for (std::size_t c = 0; c < cube.cols; ++c) {
                const std::size_t p = r * cube.cols + c;
                out.values[p] = f.apply(cube, p);
            }
        });
        std::fill(out.noise.begin(), out.noise.end(), f.noise);
        return out;
    }

    const bool per_column_target = cube.sensor.smile_shift_nm > 0.0;
    std::optional<TargetSpectrum> shared;
    if (!per_column_target) {
        shared = targets(std::nullopt);
    }
    parallel_for(cube.cols, options.threads, [&](std::size_t c) {
        const TargetSpectrum target =
            per_column_target ? targets(ColumnPosition{c, cube.cols}) : *shared;
        const ScopeFilter f = build_filter(cube, c, target, exclusion, options.delta);
        for (std::size_t r = 0; r < cube.rows; ++r) {
            const std::size_t p = r * cube.cols + c;
            out.values[p] = f.apply(cube, p);
        }
        out.noise[c] = f.noise;
    });
    return out;
}

}  // namespace

BackgroundStats estimate_background(const RadianceCube& cube, std::optional<std::size_t> column,
                                    const PixelMask* exclusion, double delta,
                                    const std::vector<std::size_t>& band_indices) {
    if (column && *column >= cube.cols) {
        throw ContractError("column " + std::to_string(*column) + " outside the cube");
    }
    if (exclusion != nullptr && exclusion->size() != cube.pixel_count()) {
        throw ContractError("exclusion mask size does not match the cube");
    }
    if (!(delta >= 0.0) || !std::isfinite(delta)) {
        throw ContractError("regularization delta must be finite and >= 0");
    }
    std::vector<std::size_t> bands = band_indices;
    if (bands.empty()) {
        bands.resize(cube.bands);
        for (std::size_t b = 0; b < cube.bands; ++b) bands[b] = b;
    }
    for (std::size_t b : bands) {
        if (b >= cube.bands) {
            throw ContractError("band index outside the cube");
        }
    }

    const std::vector<std::size_t> pixels = scope_pixels(cube, column, exclusion);
    if (pixels.size() < 2) {
        throw ContractError("too few background pixels (" + std::to_string(pixels.size()) +
                            ") in " + scope_label(column));
    }

    const auto nb = static_cast<Eigen::Index>(bands.size());
    const auto n = static_cast<Eigen::Index>(pixels.size());
    const std::size_t npix = cube.pixel_count();
    Eigen::MatrixXd x(nb, n);
    for (Eigen::Index i = 0; i < nb; ++i) {
        const double* plane = cube.data.data() + bands[static_cast<std::size_t>(i)] * npix;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double v = plane[pixels[static_cast<std::size_t>(j)]];
            if (!std::isfinite(v)) {
                throw ContractError("non-finite radiance in " + scope_label(column));
            }
            x(i, j) = v;
        }
    }

    BackgroundStats stats;
    stats.band_centers_nm.reserve(bands.size());
    for (std::size_t b : bands) {
        stats.band_centers_nm.push_back(cube.wavelengths_nm[b]);
    }
    stats.sample_count = pixels.size();
    stats.mean.resize(nb);
    for (Eigen::Index i = 0; i < nb; ++i) {
        stats.mean[i] = compensated_mean(x.row(i));
    }
    x.colwise() -= stats.mean;
    Eigen::MatrixXd cov = (x * x.transpose()) / static_cast<double>(n);
    cov = 0.5 * (cov + cov.transpose()).eval();
    stats.regularization = delta * cov.trace() / static_cast<double>(nb);
    cov.diagonal().array() += stats.regularization;
    stats.covariance = std::move(cov);

    const Eigen::LLT<Eigen::MatrixXd> llt(stats.covariance);
    if (llt.info() != Eigen::Success) {
        throw DegenerateBackgroundError("background covariance is not positive definite (" +
                                        scope_label(column) + ", " +
                                        std::to_string(pixels.size()) + " pixels)");
    }
    return stats;
}

Eigen::VectorXd radiance_space_target(const TargetSpectrum& t_log, const BackgroundStats& stats) {
    if (t_log.size() != stats.band_centers_nm.size() ||
        static_cast<std::size_t>(stats.mean.size()) != t_log.size()) {
        throw ContractError("band-grid mismatch between target (" + std::to_string(t_log.size()) +
                            " bands) and background (" +
                            std::to_string(stats.band_centers_nm.size()) + " bands)");
    }
    Eigen::VectorXd t(static_cast<Eigen::Index>(t_log.size()));
    for (std::size_t b = 0; b < t_log.size(); ++b) {
        if (std::abs(t_log.band_centers_nm[b] - stats.band_centers_nm[b]) > 1e-3) {
            throw ContractError("band-grid mismatch between target and background at band " +
                                std::to_string(b));
        }
        const auto i = static_cast<Eigen::Index>(b);
        t[i] = t_log.log_slope[b] * stats.mean[i];
    }
    return t;
}

EnhancementMap matched_filter(const RadianceCube& cube, const TargetProvider& targets,
                              const RetrievalOptions& options, const PixelMask* exclusion) {
    cube.validate();
    if (exclusion != nullptr && exclusion->size() != cube.pixel_count()) {
        throw ContractError("exclusion mask size does not match the cube");
    }

    PassResult pass = run_pass(cube, targets, options, exclusion);
    PixelMask used(cube.pixel_count(), 1);
    if (exclusion != nullptr) {
        for (std::size_t p = 0; p < used.size(); ++p) {
            used[p] = (*exclusion)[p] ? 0 : 1;
        }
    }

    if (options.exclude_plume) {
        std::vector<double> sorted = pass.values;
        const double frac = std::clamp(options.plume_percentile / 100.0, 0.0, 1.0);
        auto rank = static_cast<std::size_t>(std::ceil(frac * static_cast<double>(sorted.size())));
        rank = std::clamp<std::size_t>(rank, 1, sorted.size()) - 1;
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank),
                         sorted.end());
        const double threshold = sorted[rank];

        PixelMask second = exclusion != nullptr ? *exclusion : PixelMask(cube.pixel_count(), 0);
        for (std::size_t p = 0; p < second.size(); ++p) {
            if (pass.values[p] > threshold) {
                second[p] = 1;
            }
        }
        pass = run_pass(cube, targets, options, &second);
        for (std::size_t p = 0; p < used.size(); ++p) {
            used[p] = second[p] ? 0 : 1;
        }
    }

    EnhancementMap map;
    map.rows = cube.rows;
    map.cols = cube.cols;
    map.values = std::move(pass.values);
    map.noise_estimate = std::move(pass.noise);
    map.units = EnhancementUnits::ppmm;
    map.mode = options.mode;
    map.delta = options.delta;
    map.background_used = std::move(used);
    return map;
}

EnhancementMap matched_filter(const RadianceCube& cube, const TargetSpectrum& target,
                              const RetrievalOptions& options, const PixelMask* exclusion) {
    return matched_filter(
        cube, [&target](std::optional<ColumnPosition>) { return target; }, options, exclusion);
}

EnhancementMap convert_units(const EnhancementMap& map, EnhancementUnits to) {
    EnhancementMap out = map;
    if (map.units == to) {
        return out;
    }
    if (to == EnhancementUnits::ppb) {
        for (double& v : out.values) v *= kPpmmToPpb;
        for (double& v : out.noise_estimate) v *= kPpmmToPpb;
    } else {
        for (double& v : out.values) v /= kPpmmToPpb;
        for (double& v : out.noise_estimate) v /= kPpmmToPpb;
    }
    out.units = to;
    return out;
}

void write_enhancement_map(const fs::path& header_path, const EnhancementMap& map) {
    if (map.values.size() != map.rows * map.cols) {
        throw ContractError("enhancement map size does not match rows x cols");
    }
    const fs::path data_path = io::companion_data_path(header_path);
    nlohmann::json header{
        {"rows", map.rows},
        {"cols", map.cols},
        {"bands", 1},
        {"interleave", "bsq"},
        {"dtype", "float32-le"},
        {"units", to_string(map.units)},
        {"noise_estimate", map.noise_estimate},
        {"retrieval_mode", to_string(map.mode)},
        {"delta", map.delta},
        {"provenance", map.provenance},
        {"data_file", data_path.filename().string()},
        {"tool", {{"name", kToolName}, {"version", kToolVersion}}},
    };
    io::write_float32_le(data_path, map.values);
    io::write_json_file(header_path, header);
}

EnhancementMap read_enhancement_map(const fs::path& header_path) {
    const nlohmann::json header = io::read_json_file(header_path);
    EnhancementMap map;
    try {
        if (header.at("dtype").get<std::string>() != "float32-le") {
            throw ContractError("enhancement map dtype must be float32-le");
        }
        if (header.value("bands", 1) != 1) {
            throw ContractError("enhancement map must have a single band");
        }
        map.rows = header.at("rows").get<std::size_t>();
        map.cols = header.at("cols").get<std::size_t>();
        map.units = units_from_string(header.at("units").get<std::string>());
        map.noise_estimate = header.value("noise_estimate", std::vector<double>{});
        map.mode = mode_from_string(header.value("retrieval_mode", std::string("global")));
        map.delta = header.value("delta", 0.0);
        map.provenance = header.value("provenance", nlohmann::json::object());
    } catch (const nlohmann::json::exception& e) {
        throw ContractError("enhancement map header " + header_path.string() + ": " + e.what());
    }
    if (map.rows == 0 || map.cols == 0) {
        throw ContractError("enhancement map dimensions must be positive");
    }
    const fs::path data_path =
        header.contains("data_file")
            ? io::resolve_beside(header_path, header.at("data_file").get<std::string>())
            : io::companion_data_path(header_path);
    map.values = io::read_float32_le(data_path, map.rows * map.cols);
    for (double v : map.values) {
        if (!std::isfinite(v)) {
            throw ContractError("enhancement map contains non-finite values");
        }
    }
    map.background_used.assign(map.rows * map.cols, 1);
    return map;
}

}  // namespace ch4flux
