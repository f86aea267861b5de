#include "ch4flux/scene_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "ch4flux/error.hpp"
#include "ch4flux/io.hpp"
#include "ch4flux/parallel.hpp"
#include "ch4flux/random.hpp"

namespace ch4flux {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kTextureComponents = 6;
constexpr std::size_t kEndmemberHarmonics = 3;

// Linear interpolation of a band spectrum at shifted centers; the edge
// segments extrapolate.
struct ShiftedSampler {
    std::vector<std::size_t> lower;
    std::vector<double> weight;

    ShiftedSampler(const std::vector<double>& centers, double shift) {
        const std::size_t nb = centers.size();
        lower.resize(nb);
        weight.resize(nb);
        for (std::size_t b = 0; b < nb; ++b) {
            if (shift == 0.0 || nb < 2) {
                lower[b] = b;
                weight[b] = 0.0;
                continue;
            }
            const double x = centers[b] + shift;
            std::size_t i = static_cast<std::size_t>(
                std::upper_bound(centers.begin(), centers.end(), x) - centers.begin());
            i = std::clamp<std::size_t>(i, 1, nb - 1) - 1;
            lower[b] = i;
            weight[b] = (x - centers[i]) / (centers[i + 1] - centers[i]);
        }
    }

    double sample(const double* spectrum, std::size_t b) const {
        const std::size_t i = lower[b];
        const double w = weight[b];
        if (w == 0.0) {
            return spectrum[i];
        }
        return (1.0 - w) * spectrum[i] + w * spectrum[i + 1];
    }
};

std::vector<std::vector<double>> generated_endmembers(const BackgroundModel& bg,
                                                      const SensorSpec& spec,
                                                      std::uint64_t scene_seed) {
    const auto& centers = spec.band_centers_nm;
    const double span = std::max(centers.back() - centers.front(), 1.0);
    std::vector<std::vector<double>> out(bg.endmember_count,
                                         std::vector<double>(centers.size()));
    for (std::size_t k = 0; k < bg.endmember_count; ++k) {
        const double brightness = rng::normal(scene_seed, rng::Stream::endmember, k, 0, 0);
        std::array<double, kEndmemberHarmonics> amp{};
        std::array<double, kEndmemberHarmonics> phase{};
        for (std::size_t h = 0; h < kEndmemberHarmonics; ++h) {
            amp[h] = rng::normal(scene_seed, rng::Stream::endmember, k, h + 1, 0) /
                     std::sqrt(static_cast<double>(kEndmemberHarmonics));
            phase[h] = 2.0 * std::numbers::pi *
                       rng::uniform(scene_seed, rng::Stream::endmember, k, h + 1, 1);
        }
        for (std::size_t b = 0; b < centers.size(); ++b) {
            const double x = (centers[b] - centers.front()) / span;
            double shape = brightness;
            for (std::size_t h = 0; h < kEndmemberHarmonics; ++h) {
                shape += amp[h] * std::cos(2.0 * std::numbers::pi * static_cast<double>(h + 1) * x +
                                           phase[h]);
            }
            out[k][b] = bg.base[b] * (1.0 + bg.contrast * shape);
        }
    }
    return out;
}

struct TextureComponent {
    double freq_row;
    double freq_col;
    double phase;
};

// Spatially smooth unit-variance random fields, one per endmember.
std::vector<std::array<TextureComponent, kTextureComponents>> texture_fields(
    std::size_t count, double corr_length, std::uint64_t scene_seed) {
    std::vector<std::array<TextureComponent, kTextureComponents>> fields(count);
    for (std::size_t k = 0; k < count; ++k) {
        for (std::size_t m = 0; m < kTextureComponents; ++m) {
            const double theta =
                2.0 * std::numbers::pi * rng::uniform(scene_seed, rng::Stream::texture, k, m, 0);
            const double mag =
                (0.5 + rng::uniform(scene_seed, rng::Stream::texture, k, m, 1)) / corr_length;
            fields[k][m] = {mag * std::cos(theta), mag * std::sin(theta),
                            2.0 * std::numbers::pi *
                                rng::uniform(scene_seed, rng::Stream::texture, k, m, 2)};
        }
    }
    return fields;
}

Eigen::MatrixXd covariance_root(const BackgroundModel& bg, std::size_t nb) {
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nb),
                                                static_cast<Eigen::Index>(nb));
    if (bg.covariance.empty()) {
        return cov;
    }
    for (std::size_t i = 0; i < nb; ++i) {
        for (std::size_t j = 0; j < nb; ++j) {
            cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = bg.covariance[i][j];
        }
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    Eigen::VectorXd values = eig.eigenvalues();
    const double scale = std::max(values.cwiseAbs().maxCoeff(), 1e-300);
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (values[i] < -1e-10 * scale) {
            throw ContractError("background covariance is not positive semidefinite");
        }
        values[i] = std::sqrt(std::max(values[i], 0.0));
    }
    return eig.eigenvectors() * values.asDiagonal();
}

struct RenderPlan {
    bool with_plume = false;
    bool with_gain_and_noise = false;
};

RadianceCube render_impl(const PlumeField* field, const PlumeSignature* signature,
                         const SimConfig& config_in, RenderPlan plan, unsigned threads) {
    SimConfig config = config_in;
    config.validate();
    const SensorSpec& spec = config.sensor;
    const std::size_t nb = spec.band_count();
    const std::size_t rows = config.rows;
    const std::size_t cols = config.cols;

    BackgroundModel bg = config.background;
    if (bg.mode == BackgroundMode::textured && bg.endmembers.empty()) {
        if (bg.base.empty()) {
            bg.base = continuum_spectrum(spec, default_scene());
        }
        bg.endmembers = generated_endmembers(bg, spec, config.scene_seed);
    }
    const auto fields = bg.mode == BackgroundMode::textured
                            ? texture_fields(bg.endmembers.size(), bg.correlation_length_px,
                                             config.scene_seed)
                            : std::vector<std::array<TextureComponent, kTextureComponents>>{};
    const Eigen::MatrixXd root =
        bg.mode == BackgroundMode::gaussian ? covariance_root(bg, nb) : Eigen::MatrixXd{};
    const bool gaussian_has_cov = bg.mode == BackgroundMode::gaussian && !bg.covariance.empty();

    // Per-column smile samplers and plume slopes.
    std::vector<ShiftedSampler> samplers;
    std::vector<std::vector<double>> slopes(cols);
    samplers.reserve(cols);
    for (std::size_t c = 0; c < cols; ++c) {
        const double shift = config.smile ? smile_shift(spec, c, cols) : 0.0;
        samplers.emplace_back(spec.band_centers_nm, shift);
    }
    if (config.smile) {
        parallel_for(cols, threads, [&](std::size_t c) {
            slopes[c] = column_band_slopes(*signature, spec, c, cols, true);
        });
    } else {
        std::fill(slopes.begin(), slopes.end(),
                  column_band_slopes(*signature, spec, 0, cols, false));
    }
    std::vector<double> ambient(cols * nb, 1.0);
    if (config.ambient_ch4_ppmm != 0.0) {
        for (std::size_t c = 0; c < cols; ++c) {
            for (std::size_t b = 0; b < nb; ++b) {
                ambient[c * nb + b] = std::exp(slopes[c][b] * config.ambient_ch4_ppmm);
            }
        }
    }

    std::vector<double> gain;
    if (plan.with_gain_and_noise && config.striping > 0.0) {
        gain.resize(cols * nb);
        for (std::size_t c = 0; c < cols; ++c) {
            for (std::size_t b = 0; b < nb; ++b) {
                gain[c * nb + b] =
                    1.0 + config.striping * rng::normal(config.scene_seed, rng::Stream::stripe, c,
                                                        b, 0);
            }
        }
    }
    const bool add_noise = plan.with_gain_and_noise && config.noise;
    const double noise_std = spec.reference_radiance / config.effective_snr();

    RadianceCube cube(rows, cols, spec);
    if (!config.smile) {
        cube.sensor.smile_shift_nm = 0.0;
    }
    const std::size_t npix = rows * cols;

    parallel_for(rows, threads, [&](std::size_t r) {
        std::vector<double> pixel_bg(nb);
        std::vector<double> weights(bg.endmembers.size());
        Eigen::VectorXd z(static_cast<Eigen::Index>(nb));
        for (std::size_t c = 0; c < cols; ++c) {
            if (bg.mode == BackgroundMode::textured) {
                double norm = 0.0;
                for (std::size_t k = 0; k < weights.size(); ++k) {
                    double f = 0.0;
                    for (const auto& comp : fields[k]) {
                        f += std::cos(2.0 * std::numbers::pi *
                                          (comp.freq_row * static_cast<double>(r) +
                                           comp.freq_col * static_cast<double>(c)) +
                                      comp.phase);
                    }
                    f *= std::sqrt(2.0 / static_cast<double>(kTextureComponents));
                    weights[k] = std::exp(f);
                    norm += weights[k];
                }
                for (std::size_t b = 0; b < nb; ++b) {
                    double v = 0.0;
                    for (std::size_t k = 0; k < weights.size(); ++k) {
                        v += weights[k] * bg.endmembers[k][b];
                    }
                    pixel_bg[b] = v / norm;
                }
            } else {
                for (std::size_t b = 0; b < nb; ++b) {
                    pixel_bg[b] = bg.mean[b];
                }
                if (gaussian_has_cov) {
                    for (std::size_t b = 0; b < nb; ++b) {
                        z[static_cast<Eigen::Index>(b)] =
                            rng::normal(config.scene_seed, rng::Stream::background, r, c, b);
                    }
                    const Eigen::VectorXd dev = root * z;
                    for (std::size_t b = 0; b < nb; ++b) {
                        pixel_bg[b] += dev[static_cast<Eigen::Index>(b)];
                    }
                }
            }

            const std::size_t p = r * cols + c;
            const double dx = plan.with_plume ? field->values[p] : 0.0;
            for (std::size_t b = 0; b < nb; ++b) {
                double v = samplers[c].sample(pixel_bg.data(), b) * ambient[c * nb + b];
                if (plan.with_plume && dx != 0.0) {
                    v *= std::exp(slopes[c][b] * dx);
                }
                if (!gain.empty()) {
                    v *= gain[c * nb + b];
                }
                if (add_noise) {
                    v += noise_std * rng::normal(config.seed, rng::Stream::noise, b, r, c);
                }
                cube.data[b * npix + p] = v;
            }
        }
    });

    cube.provenance = {
        {"generator", {{"name", rng::kGeneratorName}, {"version", rng::kGeneratorVersion}}},
        {"seed", config.seed},
        {"scene_seed", config.scene_seed},
        {"sim_config_digest", io::json_digest(nlohmann::json(config_in))},
    };
    if (plan.with_plume) {
        cube.provenance["plume"] = field->provenance;
    }
    return cube;
}

}  // namespace

double PlumeField::total() const {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum;
}

double PlumeField::peak() const {
    double peak = 0.0;
    for (double v : values) peak = std::max(peak, v);
    return peak;
}

PlumeField gaussian_blob_field(std::size_t rows, std::size_t cols, std::array<double, 2> center,
                               std::array<double, 2> sigmas_px, double peak_ppmm) {
    if (!(sigmas_px[0] > 0.0) || !(sigmas_px[1] > 0.0)) {
        throw ContractError("blob sigmas must be > 0");
    }
    if (!(peak_ppmm >= 0.0) || !std::isfinite(peak_ppmm)) {
        throw ContractError("blob peak must be finite and >= 0");
    }
    PlumeField field;
    field.rows = rows;
    field.cols = cols;
    field.values.resize(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const double dr = (static_cast<double>(r) - center[0]) / sigmas_px[0];
        for (std::size_t c = 0; c < cols; ++c) {
            const double dc = (static_cast<double>(c) - center[1]) / sigmas_px[1];
            field.values[r * cols + c] = peak_ppmm * std::exp(-0.5 * (dr * dr + dc * dc));
        }
    }
    field.analytic_total = peak_ppmm * 2.0 * std::numbers::pi * sigmas_px[0] * sigmas_px[1];
    field.provenance = {{"kind", "gaussian_blob"},
                        {"center", center},
                        {"sigmas_px", sigmas_px},
                        {"peak_ppmm", peak_ppmm}};
    return field;
}

PlumeField zero_field(std::size_t rows, std::size_t cols) {
    PlumeField field;
    field.rows = rows;
    field.cols = cols;
    field.values.assign(rows * cols, 0.0);
    field.provenance = {{"kind", "zero"}};
    return field;
}

void SimConfig::validate() const {
    sensor.validate();
    const std::size_t nb = sensor.band_count();
    if (rows == 0 || cols == 0) {
        throw ContractError("sim config: rows and cols must be positive");
    }
    if (!(effective_snr() > 0.0)) {
        throw ContractError("sim config: snr must be > 0");
    }
    if (!(striping >= 0.0)) {
        throw ContractError("sim config: striping must be >= 0");
    }
    if (!(ambient_ch4_ppmm >= 0.0) || !std::isfinite(ambient_ch4_ppmm)) {
        throw ContractError("sim config: ambient_ch4_ppmm must be finite and >= 0");
    }
    if (background.mode == BackgroundMode::gaussian) {
        if (background.mean.size() != nb) {
            throw ContractError("sim config: background.mean must have one value per band");
        }
        if (!background.covariance.empty()) {
            if (background.covariance.size() != nb) {
                throw ContractError("sim config: background.covariance must be bands x bands");
            }
            for (std::size_t i = 0; i < nb; ++i) {
                if (background.covariance[i].size() != nb) {
                    throw ContractError("sim config: background.covariance must be bands x bands");
                }
                for (std::size_t j = 0; j < i; ++j) {
                    if (background.covariance[i][j] != background.covariance[j][i]) {
                        throw ContractError("sim config: background.covariance must be symmetric");
                    }
                }
            }
        }
    } else {
        if (!background.endmembers.empty()) {
            for (const auto& e : background.endmembers) {
                if (e.size() != nb) {
                    throw ContractError("sim config: endmember length differs from band count");
                }
            }
        } else if (!background.base.empty() && background.base.size() != nb) {
            throw ContractError("sim config: background.base must have one value per band");
        }
        if (background.endmembers.empty() && background.endmember_count == 0) {
            throw ContractError("sim config: endmember_count must be positive");
        }
        if (!(background.correlation_length_px > 0.0)) {
            throw ContractError("sim config: correlation_length_px must be > 0");
        }
    }
}

void to_json(nlohmann::json& j, const SimConfig& cfg) {
    nlohmann::json bg{{"mode", cfg.background.mode == BackgroundMode::gaussian ? "gaussian"
                                                                                : "textured"}};
    if (cfg.background.mode == BackgroundMode::gaussian) {
        bg["mean"] = cfg.background.mean;
        bg["covariance"] = cfg.background.covariance;
    } else {
        bg["endmembers"] = cfg.background.endmembers;
        bg["base"] = cfg.background.base;
        bg["endmember_count"] = cfg.background.endmember_count;
        bg["contrast"] = cfg.background.contrast;
        bg["correlation_length_px"] = cfg.background.correlation_length_px;
    }
    j = nlohmann::json{{"sensor", cfg.sensor},
                       {"rows", cfg.rows},
                       {"cols", cfg.cols},
                       {"background", bg},
                       {"noise", cfg.noise},
                       {"smile", cfg.smile},
                       {"striping", cfg.striping},
                       {"ambient_ch4_ppmm", cfg.ambient_ch4_ppmm},
                       {"seed", cfg.seed},
                       {"scene_seed", cfg.scene_seed}};
    if (cfg.snr) {
        j["snr"] = *cfg.snr;
    } else {
        j["snr"] = nullptr;
    }
}

void from_json(const nlohmann::json& j, SimConfig& cfg) {
    try {
        const auto& sensor = j.at("sensor");
        cfg.sensor = sensor.is_string() ? builtin_spec(sensor.get<std::string>())
                                        : sensor.get<SensorSpec>();
        cfg.rows = j.value("rows", std::size_t{64});
        cfg.cols = j.value("cols", std::size_t{64});
        cfg.noise = j.value("noise", true);
        cfg.smile = j.value("smile", false);
        cfg.striping = j.value("striping", 0.0);
        cfg.ambient_ch4_ppmm = j.value("ambient_ch4_ppmm", kAmbientCh4Ppmm);
        cfg.seed = j.value("seed", std::uint64_t{0});
        cfg.scene_seed = j.value("scene_seed", std::uint64_t{0});
        cfg.snr.reset();
        if (j.contains("snr") && !j.at("snr").is_null()) {
            cfg.snr = j.at("snr").get<double>();
        }
        cfg.background = BackgroundModel{};
        if (j.contains("background")) {
            const auto& bg = j.at("background");
            const std::string mode = bg.value("mode", std::string("textured"));
            if (mode == "gaussian") {
                cfg.background.mode = BackgroundMode::gaussian;
                cfg.background.mean = bg.at("mean").get<std::vector<double>>();
                cfg.background.covariance =
                    bg.value("covariance", std::vector<std::vector<double>>{});
            } else if (mode == "textured") {
                cfg.background.mode = BackgroundMode::textured;
                cfg.background.endmembers =
                    bg.value("endmembers", std::vector<std::vector<double>>{});
                cfg.background.base = bg.value("base", std::vector<double>{});
                cfg.background.endmember_count = bg.value("endmember_count", std::size_t{3});
                cfg.background.contrast = bg.value("contrast", 0.02);
                cfg.background.correlation_length_px = bg.value("correlation_length_px", 24.0);
            } else {
                throw ContractError("sim config: unknown background mode " + mode);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ContractError(std::string("sim config JSON: ") + e.what());
    }
    cfg.validate();
}

std::vector<double> continuum_spectrum(const SensorSpec& spec, const SceneParams& scene,
                                       const ContinuumModel& continuum) {
    std::vector<double> out(spec.band_count());
    for (std::size_t b = 0; b < out.size(); ++b) {
        out[b] = continuum.radiance(scene, spec.band_centers_nm[b]);
    }
    return out;
}

SceneParams default_scene() {
    return SceneParams{600.0, 1.5, 0.2, 30.0};
}

FineSlope analytic_fine_slope(const CrossSectionTable& absorption, double solar_zenith_deg) {
    const double airmass = two_way_airmass(solar_zenith_deg);
    FineSlope fine;
    fine.wavelengths_nm = absorption.wavelengths_nm;
    fine.slope.resize(absorption.wavelengths_nm.size());
    fine.r2.assign(absorption.wavelengths_nm.size(), 1.0);
    fine.valid.assign(absorption.wavelengths_nm.size(), 1);
    for (std::size_t i = 0; i < fine.slope.size(); ++i) {
        fine.slope[i] = -absorption.cross_section_per_ppmm[i] * airmass;
    }
    return fine;
}

std::vector<double> column_band_slopes(const PlumeSignature& signature, const SensorSpec& spec,
                                       std::size_t column, std::size_t cols, bool smile) {
    std::vector<double> out(spec.band_count(), 0.0);
    if (const auto* fine = std::get_if<FineSlope>(&signature)) {
        std::optional<ColumnPosition> pos;
        if (smile) {
            pos = ColumnPosition{column, cols};
        }
        const TargetSpectrum t = convolve_to_bands(*fine, spec, pos);
        for (std::size_t b = 0; b < out.size(); ++b) {
            out[b] = std::isfinite(t.log_slope[b]) ? t.log_slope[b] : 0.0;
        }
        return out;
    }
    const auto& target = std::get<TargetSpectrum>(signature);
    if (!smile || target.size() < 2) {
        for (std::size_t i = 0; i < target.size(); ++i) {
            out.at(target.band_indices[i]) = target.log_slope[i];
        }
        return out;
    }
    // Band-level signature under smile: interpolate across the target bands.
    const ShiftedSampler sampler(target.band_centers_nm, smile_shift(spec, column, cols));
    for (std::size_t i = 0; i < target.size(); ++i) {
        out.at(target.band_indices[i]) = sampler.sample(target.log_slope.data(), i);
    }
    return out;
}

RadianceCube render_cube(const PlumeField& field, const PlumeSignature& signature,
                         const SimConfig& config, unsigned threads) {
    if (field.rows != config.rows || field.cols != config.cols ||
        field.values.size() != field.rows * field.cols) {
        throw ContractError("plume field dimensions differ from the sim config");
    }
    return render_impl(&field, &signature, config, RenderPlan{true, true}, threads);
}

RadianceCube render_background(const PlumeSignature& signature, const SimConfig& config) {
    return render_impl(nullptr, &signature, config, RenderPlan{false, false}, 1);
}

PlumeMask truth_mask(const PlumeField& field, double pixel_area_m2) {
    const double threshold = kTruthMaskFraction * field.peak();
    PlumeMask mask;
    mask.rows = field.rows;
    mask.cols = field.cols;
    mask.pixel_area_m2 = pixel_area_m2;
    if (field.peak() > 0.0) {
        for (std::size_t r = 0; r < field.rows; ++r) {
            for (std::size_t c = 0; c < field.cols; ++c) {
                if (field.at(r, c) > threshold) {
                    mask.pixels.push_back({r, c});
                }
            }
        }
    }
    if (mask.pixels.empty()) {
        throw EmptyMaskError("plume field has no pixel above 1% of its peak");
    }
    return mask;
}

RoundTripReport round_trip(const PlumeField& field, const PlumeSignature& signature,
                           const SimConfig& config, const RoundTripSettings& settings) {
    const RadianceCube cube = render_cube(field, signature, config, settings.retrieval.threads);
    const SpectralWindow window = settings.window.value_or(default_window(config.sensor));
    const SensorSpec& spec = cube.sensor;

    TargetProvider provider;
    if (const auto* fine = std::get_if<FineSlope>(&signature)) {
        provider = [fine, &spec, window](std::optional<ColumnPosition> col) {
            return target_from_fine_slope(*fine, spec, window, col);
        };
    } else {
        const TargetSpectrum fixed = select_informative(std::get<TargetSpectrum>(signature), window);
        provider = [fixed](std::optional<ColumnPosition>) { return fixed; };
    }

    RoundTripReport report;
    report.map = matched_filter(cube, provider, settings.retrieval);

    const PlumeMask mask = truth_mask(field, pixel_area(spec));
    const FluxEstimate est =
        quantify_mask(report.map, mask, spec, settings.wind, settings.atmosphere);

    double true_sum = 0.0;
    double retrieved_sum = 0.0;
    PixelMask in_mask(field.rows * field.cols, 0);
    for (const auto& px : mask.pixels) {
        const std::size_t p = px.row * field.cols + px.col;
        in_mask[p] = 1;
        const double truth = field.values[p];
        const double got = report.map.values[p];
        true_sum += truth;
        retrieved_sum += got;
        report.max_pixel_relative_error =
            std::max(report.max_pixel_relative_error, std::abs(got - truth) / truth);
    }
    const auto n_mask = static_cast<double>(mask.count());
    report.mask_pixels = mask.count();
    report.plume_mean_true_ppmm = true_sum / n_mask;
    report.plume_mean_retrieved_ppmm = retrieved_sum / n_mask;

    report.true_ime_kg = est.scaling_factor_kg_per_ppb * kPpmmToPpb * true_sum;
    report.retrieved_ime_kg = est.ime_kg;
    report.ime_relative_error = (report.retrieved_ime_kg - report.true_ime_kg) / report.true_ime_kg;
    report.true_q_kg_per_h = flux(report.true_ime_kg, est.u_eff_ms, est.plume_length_m);
    report.retrieved_q_kg_per_h = est.q_kg_per_h;
    report.q_relative_error =
        (report.retrieved_q_kg_per_h - report.true_q_kg_per_h) / report.true_q_kg_per_h;

    double sum = 0.0;
    double sum_sq = 0.0;
    double sum_abs = 0.0;
    std::size_t n_bg = 0;
    for (std::size_t p = 0; p < in_mask.size(); ++p) {
        if (in_mask[p]) continue;
        const double v = report.map.values[p];
        sum += v;
        sum_sq += v * v;
        sum_abs += std::abs(v);
        ++n_bg;
    }
    if (n_bg > 0) {
        const double mean = sum / static_cast<double>(n_bg);
        report.background_std_ppmm =
            std::sqrt(std::max(sum_sq / static_cast<double>(n_bg) - mean * mean, 0.0));
        report.background_mean_abs_ppmm = sum_abs / static_cast<double>(n_bg);
    }
    return report;
}

void write_plume_field(const fs::path& header_path, const PlumeField& field) {
    const fs::path data_path = io::companion_data_path(header_path);
    nlohmann::json header{
        {"rows", field.rows},
        {"cols", field.cols},
        {"bands", 1},
        {"interleave", "bsq"},
        {"dtype", "float32-le"},
        {"units", "ppmm"},
        {"analytic_total", field.analytic_total},
        {"discrete_total", field.total()},
        {"provenance", field.provenance},
        {"data_file", data_path.filename().string()},
        {"tool", {{"name", kToolName}, {"version", kToolVersion}}},
    };
    io::write_float32_le(data_path, field.values);
    io::write_json_file(header_path, header);
}

PlumeField read_plume_field(const fs::path& header_path) {
    const nlohmann::json header = io::read_json_file(header_path);
    PlumeField field;
    try {
        field.rows = header.at("rows").get<std::size_t>();
        field.cols = header.at("cols").get<std::size_t>();
        field.analytic_total = header.value("analytic_total", 0.0);
        field.provenance = header.value("provenance", nlohmann::json::object());
    } catch (const nlohmann::json::exception& e) {
        throw ContractError("plume field header " + header_path.string() + ": " + e.what());
    }
    const fs::path data_path =
        header.contains("data_file")
            ? io::resolve_beside(header_path, header.at("data_file").get<std::string>())
            : io::companion_data_path(header_path);
    field.values = io::read_float32_le(data_path, field.rows * field.cols);
    return field;
}

}  // namespace ch4flux
