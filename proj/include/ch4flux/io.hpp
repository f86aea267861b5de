#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace ch4flux {

inline constexpr std::string_view kToolName = "ch4flux";
inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kDigestAlgorithm = "sha256";

namespace io {

nlohmann::json read_json_file(const std::filesystem::path& path);

// Pretty-printed with sorted keys and a trailing newline, so equal documents
// produce equal bytes.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

std::string read_text_file(const std::filesystem::path& path);

/// `scene.json` -> `scene.bin`.
std::filesystem::path companion_data_path(const std::filesystem::path& header_path);

std::vector<double> read_float32_le(const std::filesystem::path& path, std::size_t expected_count);
void write_float32_le(const std::filesystem::path& path, std::span<const double> values);

std::string sha256_hex(std::string_view bytes);
std::string file_digest(const std::filesystem::path& path);

/// Digest of a header/binary container: hashes the header bytes followed by
/// the companion data bytes.
std::string container_digest(const std::filesystem::path& header_path);

std::string json_digest(const nlohmann::json& doc);

/// Resolves `relative` against the directory holding `anchor_file`.
std::filesystem::path resolve_beside(const std::filesystem::path& anchor_file,
                                     const std::filesystem::path& relative);

}  // namespace io
}  // namespace ch4flux
