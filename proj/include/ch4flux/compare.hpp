#pragma once

// Cross-sensor comparison of near-simultaneous flux estimates.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ch4flux {

struct AcquisitionRecord {
    std::string sensor;
    std::string timestamp;      // ISO-8601 UTC as given
    std::int64_t epoch_s = 0;   // parsed from timestamp
    std::string site_id;
    double flux = 0.0;
    std::string flux_unit = "t/h";  // "t/h" or "kg/h"
    std::optional<std::string> unit_flag;
    std::vector<double> sub_fluxes;
    std::optional<std::string> map_ref;

    double flux_t_per_h() const;
    void validate() const;
};

/// Seconds since the Unix epoch for "YYYY-MM-DDTHH:MM:SS[.fff][Z|+00:00]".
std::int64_t parse_utc_timestamp(const std::string& text);

void to_json(nlohmann::json& j, const AcquisitionRecord& r);
void from_json(const nlohmann::json& j, AcquisitionRecord& r);

/// One record per line; blank lines are skipped. Errors name the line.
std::vector<AcquisitionRecord> read_records_jsonl(const std::filesystem::path& path);
std::vector<AcquisitionRecord> parse_records_jsonl(const std::string& text);

/// 2 |a - b| / (a + b), 0 when both are 0.
double relative_difference(double a, double b);

struct AcquisitionPair {
    std::string site_id;
    std::string first_sensor;   // earlier acquisition
    std::string second_sensor;
    std::string first_timestamp;
    std::string second_timestamp;
    std::int64_t dt_s = 0;
    double first_flux_t_per_h = 0.0;
    double second_flux_t_per_h = 0.0;
    double relative_difference = 0.0;
    bool exceeds_dt_max = false;
};

/// All same-site pairs with |dt| <= dt_max_s, sorted by dt then sensor names.
std::vector<AcquisitionPair> pair_acquisitions(const std::vector<AcquisitionRecord>& records,
                                               double dt_max_s);

struct ComparisonReport {
    std::string site_id;
    double dt_max_s = 0.0;
    std::vector<AcquisitionRecord> records;  // by timestamp
    std::vector<AcquisitionPair> pairs;      // every pair, by record order
    std::string max_flux_sensor;
    std::string min_flux_sensor;
    std::vector<std::string> flags;
};

ComparisonReport build_report(const std::string& site_id,
                              const std::vector<AcquisitionRecord>& records, double dt_max_s);

nlohmann::json report_json(const ComparisonReport& report);
std::string report_table(const ComparisonReport& report);

/// Case-study records: a landfill observed by GHGSat, EnMAP and EMIT on
/// 2024-01-12 and a compressor station observed by GHGSat, PRISMA and EnMAP
/// on 2024-09-11.
std::vector<AcquisitionRecord> buenos_aires_fixture();
std::vector<AcquisitionRecord> kamishlidza_fixture();

}  // namespace ch4flux
