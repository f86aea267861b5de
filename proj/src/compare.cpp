#include "ch4flux/compare.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <tuple>

#include "ch4flux/error.hpp"
#include "ch4flux/io.hpp"

namespace ch4flux {

namespace {

bool record_less(const AcquisitionRecord& a, const AcquisitionRecord& b) {
    return std::tie(a.epoch_s, a.sensor, a.site_id, a.flux) <
           std::tie(b.epoch_s, b.sensor, b.site_id, b.flux);
}

AcquisitionPair make_pair(const AcquisitionRecord& a, const AcquisitionRecord& b,
                          double dt_max_s) {
    const AcquisitionRecord& first = record_less(b, a) ? b : a;
    const AcquisitionRecord& second = &first == &a ? b : a;
    AcquisitionPair p;
    p.site_id = first.site_id;
    p.first_sensor = first.sensor;
    p.second_sensor = second.sensor;
    p.first_timestamp = first.timestamp;
    p.second_timestamp = second.timestamp;
    p.dt_s = second.epoch_s - first.epoch_s;
    p.first_flux_t_per_h = first.flux_t_per_h();
    p.second_flux_t_per_h = second.flux_t_per_h();
    p.relative_difference = relative_difference(p.first_flux_t_per_h, p.second_flux_t_per_h);
    p.exceeds_dt_max = static_cast<double>(p.dt_s) > dt_max_s;
    return p;
}

AcquisitionRecord fixture_record(std::string sensor, std::string timestamp, std::string site,
                                 double flux) {
    AcquisitionRecord r;
    r.sensor = std::move(sensor);
    r.timestamp = std::move(timestamp);
    r.epoch_s = parse_utc_timestamp(r.timestamp);
    r.site_id = std::move(site);
    r.flux = flux;
    r.flux_unit = "t/h";
    return r;
}

}  // namespace

double AcquisitionRecord::flux_t_per_h() const {
    return flux_unit == "kg/h" ? flux / 1000.0 : flux;
}

void AcquisitionRecord::validate() const {
    if (sensor.empty()) {
        throw ContractError("acquisition record: sensor is empty");
    }
    if (site_id.empty()) {
        throw ContractError("acquisition record: site_id is empty");
    }
    if (!std::isfinite(flux) || flux < 0.0) {
        throw ContractError("acquisition record: flux must be finite and >= 0");
    }
    if (flux_unit != "t/h" && flux_unit != "kg/h") {
        throw ContractError("acquisition record: flux_unit must be \"t/h\" or \"kg/h\"");
    }
}

std::int64_t parse_utc_timestamp(const std::string& text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    int consumed = 0;
    if (std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &y, &mo, &d, &h, &mi, &s,
                    &consumed) != 6) {
        throw ContractError("timestamp is not ISO-8601: " + text);
    }
    std::string rest = text.substr(static_cast<std::size_t>(consumed));
    if (!rest.empty() && rest.front() == '.') {
        std::size_t i = 1;
        while (i < rest.size() && std::isdigit(static_cast<unsigned char>(rest[i]))) ++i;
        rest = rest.substr(i);  // fractional seconds are truncated
    }
    if (!(rest.empty() || rest == "Z" || rest == "+00:00")) {
        throw ContractError("timestamp must be UTC: " + text);
    }
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                             day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 60) {
        throw ContractError("timestamp out of range: " + text);
    }
    const auto days = sys_days{ymd}.time_since_epoch().count();
    return static_cast<std::int64_t>(days) * 86400 + h * 3600 + mi * 60 + s;
}

void to_json(nlohmann::json& j, const AcquisitionRecord& r) {
    j = nlohmann::json{{"sensor", r.sensor},      {"timestamp", r.timestamp},
                       {"site_id", r.site_id},    {"flux", r.flux},
                       {"flux_unit", r.flux_unit}};
    if (r.unit_flag) j["unit_flag"] = *r.unit_flag;
    if (!r.sub_fluxes.empty()) j["sub_fluxes"] = r.sub_fluxes;
    if (r.map_ref) j["map_ref"] = *r.map_ref;
}

void from_json(const nlohmann::json& j, AcquisitionRecord& r) {
    try {
        r.sensor = j.at("sensor").get<std::string>();
        r.timestamp = j.at("timestamp").get<std::string>();
        r.site_id = j.at("site_id").get<std::string>();
        if (j.contains("flux")) {
            r.flux = j.at("flux").get<double>();
            r.flux_unit = j.value("flux_unit", std::string("t/h"));
        } else {
            // A FluxEstimate report embedded as "estimate".
            r.flux = j.at("estimate").at("q_kg_per_h").get<double>();
            r.flux_unit = "kg/h";
        }
        r.unit_flag.reset();
        if (j.contains("unit_flag")) r.unit_flag = j.at("unit_flag").get<std::string>();
        r.sub_fluxes = j.value("sub_fluxes", std::vector<double>{});
        r.map_ref.reset();
        if (j.contains("map_ref")) r.map_ref = j.at("map_ref").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ContractError(std::string("acquisition record: ") + e.what());
    }
    r.epoch_s = parse_utc_timestamp(r.timestamp);
    r.validate();
}

std::vector<AcquisitionRecord> parse_records_jsonl(const std::string& text) {
    std::vector<AcquisitionRecord> records;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            records.push_back(nlohmann::json::parse(line).get<AcquisitionRecord>());
        } catch (const nlohmann::json::exception& e) {
            throw ContractError("line " + std::to_string(line_no) + ": " + e.what());
        } catch (const ContractError& e) {
            throw ContractError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

std::vector<AcquisitionRecord> read_records_jsonl(const std::filesystem::path& path) {
    try {
        return parse_records_jsonl(io::read_text_file(path));
    } catch (const ContractError& e) {
        throw ContractError(path.string() + ": " + e.what());
    }
}

double relative_difference(double a, double b) {
    const double sum = a + b;
    if (sum == 0.0) {
        return 0.0;
    }
    return 2.0 * std::abs(a - b) / sum;
}

std::vector<AcquisitionPair> pair_acquisitions(const std::vector<AcquisitionRecord>& records,
                                               double dt_max_s) {
    std::vector<AcquisitionRecord> sorted = records;
    std::sort(sorted.begin(), sorted.end(), record_less);
    std::vector<AcquisitionPair> pairs;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        for (std::size_t j = i + 1; j < sorted.size(); ++j) {
            if (sorted[i].site_id != sorted[j].site_id) {
                continue;
            }
            AcquisitionPair p = make_pair(sorted[i], sorted[j], dt_max_s);
            if (!p.exceeds_dt_max) {
                pairs.push_back(std::move(p));
            }
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const AcquisitionPair& a, const AcquisitionPair& b) {
        return std::tie(a.dt_s, a.first_sensor, a.second_sensor, a.site_id, a.first_timestamp) <
               std::tie(b.dt_s, b.first_sensor, b.second_sensor, b.site_id, b.first_timestamp);
    });
    return pairs;
}

ComparisonReport build_report(const std::string& site_id,
                              const std::vector<AcquisitionRecord>& records, double dt_max_s) {
    ComparisonReport report;
    report.site_id = site_id;
    report.dt_max_s = dt_max_s;
    for (const auto& r : records) {
        if (r.site_id != site_id) {
            throw ContractError("mixed site ids in comparison: expected " + site_id + ", got " +
                                r.site_id);
        }
        r.validate();
    }
    report.records = records;
    std::sort(report.records.begin(), report.records.end(), record_less);

    for (std::size_t i = 0; i < report.records.size(); ++i) {
        for (std::size_t j = i + 1; j < report.records.size(); ++j) {
            AcquisitionPair p = make_pair(report.records[i], report.records[j], dt_max_s);
            if (p.exceeds_dt_max) {
                report.flags.push_back(p.first_sensor + "-" + p.second_sensor + ": dt " +
                                       std::to_string(p.dt_s) + " s exceeds threshold");
            }
            report.pairs.push_back(std::move(p));
        }
    }
    if (!report.records.empty()) {
        const auto by_flux = [](const AcquisitionRecord& a, const AcquisitionRecord& b) {
            return a.flux_t_per_h() < b.flux_t_per_h();
        };
        report.max_flux_sensor =
            std::max_element(report.records.begin(), report.records.end(), by_flux)->sensor;
        report.min_flux_sensor =
            std::min_element(report.records.begin(), report.records.end(), by_flux)->sensor;
    }
    for (const auto& r : report.records) {
        if (r.unit_flag) {
            report.flags.push_back(r.sensor + ": flux unit " + *r.unit_flag);
        }
    }
    return report;
}

nlohmann::json report_json(const ComparisonReport& report) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : report.pairs) {
        pairs.push_back({{"first_sensor", p.first_sensor},
                         {"second_sensor", p.second_sensor},
                         {"first_timestamp", p.first_timestamp},
                         {"second_timestamp", p.second_timestamp},
                         {"dt_s", p.dt_s},
                         {"first_flux_t_per_h", p.first_flux_t_per_h},
                         {"second_flux_t_per_h", p.second_flux_t_per_h},
                         {"relative_difference", p.relative_difference},
                         {"exceeds_dt_max", p.exceeds_dt_max}});
    }
    return nlohmann::json{{"site_id", report.site_id},
                          {"dt_max_s", report.dt_max_s},
                          {"records", report.records},
                          {"pairs", pairs},
                          {"max_flux_sensor", report.max_flux_sensor},
                          {"min_flux_sensor", report.min_flux_sensor},
                          {"flags", report.flags}};
}

std::string report_table(const ComparisonReport& report) {
    std::ostringstream out;
    char line[256];
    out << "site: " << report.site_id << "  (dt_max " << report.dt_max_s << " s)\n";
    std::snprintf(line, sizeof line, "%-8s  %-24s  %12s  %s\n", "sensor", "timestamp",
                  "flux [t/h]", "note");
    out << line;
    for (const auto& r : report.records) {
        std::snprintf(line, sizeof line, "%-8s  %-24s  %12.3f  %s\n", r.sensor.c_str(),
                      r.timestamp.c_str(), r.flux_t_per_h(),
                      r.unit_flag ? r.unit_flag->c_str() : "");
        out << line;
    }
    out << '\n';
    std::snprintf(line, sizeof line, "%-8s  %-8s  %10s  %10s  %s\n", "first", "second", "dt [s]",
                  "rel.diff", "within dt_max");
    out << line;
    for (const auto& p : report.pairs) {
        std::snprintf(line, sizeof line, "%-8s  %-8s  %10lld  %10.4f  %s\n",
                      p.first_sensor.c_str(), p.second_sensor.c_str(),
                      static_cast<long long>(p.dt_s), p.relative_difference,
                      p.exceeds_dt_max ? "no" : "yes");
        out << line;
    }
    return out.str();
}

std::vector<AcquisitionRecord> buenos_aires_fixture() {
    const std::string site = "buenos_aires_landfill";
    AcquisitionRecord ghgsat = fixture_record("GHGSAT", "2024-01-12T14:45:16Z", site, 20.637);
    ghgsat.unit_flag = "as-printed-ambiguous";
    ghgsat.sub_fluxes = {14.958, 5.679};
    return {ghgsat, fixture_record("EnMAP", "2024-01-12T14:46:53Z", site, 18.55),
            fixture_record("EMIT", "2024-01-12T18:59:17Z", site, 13.57)};
}

std::vector<AcquisitionRecord> kamishlidza_fixture() {
    const std::string site = "kamishlidza_compressor";
    return {fixture_record("GHGSAT", "2024-09-11T06:36:16Z", site, 18.54),
            fixture_record("PRISMA", "2024-09-11T07:11:43Z", site, 12.29),
            fixture_record("EnMAP", "2024-09-11T07:55:47Z", site, 37.72)};
}

}  // namespace ch4flux
