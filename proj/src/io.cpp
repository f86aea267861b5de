#include "ch4flux/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include <openssl/evp.h>

#include "ch4flux/error.hpp"

namespace ch4flux::io {

namespace fs = std::filesystem;

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ContractError("cannot open file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

nlohmann::json read_json_file(const fs::path& path) {
    const std::string text = read_text_file(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ContractError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_json_file(const fs::path& path, const nlohmann::json& doc) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ContractError("cannot write file: " + path.string());
    }
    out << doc.dump(2) << '\n';
    if (!out) {
        throw ContractError("write failed: " + path.string());
    }
}

fs::path companion_data_path(const fs::path& header_path) {
    fs::path data = header_path;
    data.replace_extension(".bin");
    if (data == header_path) {
        data += ".bin";
    }
    return data;
}

std::vector<double> read_float32_le(const fs::path& path, std::size_t expected_count) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ContractError("cannot open data file: " + path.string());
    }
    in.seekg(0, std::ios::end);
    const auto size = static_cast<std::size_t>(in.tellg());
    if (size != expected_count * 4) {
        throw ContractError("data file " + path.string() + " holds " + std::to_string(size) +
                            " bytes, expected " + std::to_string(expected_count * 4));
    }
    in.seekg(0);
    std::vector<std::uint32_t> raw(expected_count);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(size));
    std::vector<double> values(expected_count);
    for (std::size_t i = 0; i < expected_count; ++i) {
        std::uint32_t bits = raw[i];
        if constexpr (std::endian::native == std::endian::big) {
            bits = __builtin_bswap32(bits);
        }
        values[i] = static_cast<double>(std::bit_cast<float>(bits));
    }
    return values;
}

void write_float32_le(const fs::path& path, std::span<const double> values) {
    std::vector<std::uint32_t> raw(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(values[i]));
        if constexpr (std::endian::native == std::endian::big) {
            bits = __builtin_bswap32(bits);
        }
        raw[i] = bits;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ContractError("cannot write data file: " + path.string());
    }
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size() * sizeof(std::uint32_t)));
    if (!out) {
        throw ContractError("write failed: " + path.string());
    }
}

namespace {

struct MdCtxDeleter {
    void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new()) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
            throw std::runtime_error("sha256 init failed");
        }
    }
    void update(std::string_view bytes) {
        EVP_DigestUpdate(ctx_.get(), bytes.data(), bytes.size());
    }
    std::string hex() {
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_.get(), md, &len);
        std::ostringstream out;
        for (unsigned int i = 0; i < len; ++i) {
            out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
        }
        return out.str();
    }

private:
    std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx_;
};

}  // namespace

std::string sha256_hex(std::string_view bytes) {
    Sha256 h;
    h.update(bytes);
    return h.hex();
}

std::string file_digest(const fs::path& path) {
    return sha256_hex(read_text_file(path));
}

std::string container_digest(const fs::path& header_path) {
    Sha256 h;
    h.update(read_text_file(header_path));
    const fs::path data = companion_data_path(header_path);
    if (fs::exists(data)) {
        h.update(read_text_file(data));
    }
    return h.hex();
}

std::string json_digest(const nlohmann::json& doc) {
    return sha256_hex(doc.dump());
}

fs::path resolve_beside(const fs::path& anchor_file, const fs::path& relative) {
    if (relative.is_absolute()) {
        return relative;
    }
    return anchor_file.parent_path() / relative;
}

}  // namespace ch4flux::io
