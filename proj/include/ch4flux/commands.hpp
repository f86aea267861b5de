#pragma once

// Batch commands behind the `ch4flux` executable. Each command reads its
// inputs from files, writes its outputs, and reports failures by throwing
// ContractError (exit 2) or NumericalError (exit 3).

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ch4flux/retrieval.hpp"
#include "ch4flux/sensor.hpp"

namespace ch4flux::commands {

namespace fs = std::filesystem;

/// Built-in name or JSON spec file; when both are empty `fallback` is used.
struct SensorChoice {
    std::optional<std::string> name;
    std::optional<fs::path> file;

    SensorSpec resolve(const SensorSpec* fallback = nullptr) const;
};

/// "low,high" in nanometers.
SpectralWindow parse_window(const std::string& text);

struct LutBuildArgs {
    fs::path cross_section_csv;
    fs::path axes_json;
    fs::path out;
};
void lut_build(const LutBuildArgs& args, std::ostream& log);

struct SynthXsecArgs {
    double start_nm = 1550.0;
    double stop_nm = 2600.0;
    double step_nm = 0.1;
    fs::path out;
};
void synth_xsec(const SynthXsecArgs& args, std::ostream& log);

struct TargetArgs {
    fs::path lut;
    fs::path scene;
    SensorChoice sensor;
    std::optional<SpectralWindow> window;
    std::optional<std::size_t> column;
    std::size_t columns = 1;
    fs::path out;
};
void target(const TargetArgs& args, std::ostream& log);

struct RetrieveArgs {
    fs::path cube;
    fs::path lut;
    fs::path scene;
    SensorChoice sensor;  // defaults to the cube's sensor
    RetrievalMode mode = RetrievalMode::global;
    double delta = 1e-3;
    std::optional<SpectralWindow> window;
    EnhancementUnits units = EnhancementUnits::ppmm;
    bool exclude_plume = true;
    unsigned threads = 1;
    fs::path out;
};
void retrieve(const RetrieveArgs& args, std::ostream& log);

struct QuantifyArgs {
    fs::path map;
    fs::path polygon;
    fs::path wind;
    SensorChoice sensor;  // defaults to the sensor recorded in the map
    std::optional<fs::path> atmosphere;
    std::optional<double> ueff_ms;
    bool clamp_negative = false;
    fs::path out;
};
void quantify(const QuantifyArgs& args, std::ostream& log);

struct SimulateArgs {
    fs::path config;
    fs::path out;
    std::optional<fs::path> truth;  // defaults to <out stem>_truth.json
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
};
void simulate(const SimulateArgs& args, std::ostream& log);

/// Truth file written next to `cube_header` when none is requested.
fs::path default_truth_path(const fs::path& cube_header);

struct CompareArgs {
    fs::path records;
    double dt_max_s = 600.0;
    fs::path out;
    std::optional<fs::path> table;
};
void compare(const CompareArgs& args, std::ostream& log);

struct SensorArgs {
    std::string name;
    std::optional<fs::path> out;
};
void sensor(const SensorArgs& args, std::ostream& log);

struct FetchWindArgs {
    std::string base_url;
    std::string path = "/data/3.0/onecall/timemachine";
    double lat = 0.0;
    double lon = 0.0;
    std::string timestamp;
    std::string api_key;
    fs::path out;
};
void fetch_wind(const FetchWindArgs& args, std::ostream& log);

}  // namespace ch4flux::commands

namespace ch4flux::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitContract = 2;
inline constexpr int kExitNumerical = 3;

/// Parses `args` (without the program name), runs the subcommand and
/// returns the process exit code. Diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ch4flux::cli
