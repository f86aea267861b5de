#include "ch4flux/wind_fetch.hpp"

#include <cmath>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ch4flux/compare.hpp"
#include "ch4flux/error.hpp"

namespace ch4flux {

WindRecord parse_wind_response(const std::string& body, const std::string& source,
                               const std::string& timestamp) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ContractError(std::string("wind provider returned malformed JSON: ") + e.what());
    }
    WindRecord wind;
    wind.source = source;
    wind.timestamp = timestamp;
    try {
        if (doc.contains("data") && doc.at("data").is_array() && !doc.at("data").empty()) {
            const auto& d = doc.at("data").front();
            wind.u10_ms = d.at("wind_speed").get<double>();
            wind.direction_deg = d.value("wind_deg", 0.0);
        } else if (doc.contains("wind")) {
            wind.u10_ms = doc.at("wind").at("speed").get<double>();
            wind.direction_deg = doc.at("wind").value("deg", 0.0);
        } else {
            throw ContractError("wind provider response has no wind field");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ContractError(std::string("wind provider response: ") + e.what());
    }
    wind.direction_deg = std::fmod(wind.direction_deg, 360.0);
    if (wind.direction_deg < 0.0) {
        wind.direction_deg += 360.0;
    }
    wind.validate();
    return wind;
}

WindRecord fetch_wind(const WindQuery& query) {
    const std::int64_t dt = parse_utc_timestamp(query.timestamp);
    httplib::Client client(query.base_url);
    client.set_connection_timeout(query.timeout_s, 0);
    client.set_read_timeout(query.timeout_s, 0);
    httplib::Params params{{"lat", std::to_string(query.lat)},
                           {"lon", std::to_string(query.lon)},
                           {"dt", std::to_string(dt)},
                           {"units", "metric"}};
    if (!query.api_key.empty()) {
        params.emplace("appid", query.api_key);
    }
    const auto res = client.Get(query.path, params, httplib::Headers{});
    if (!res) {
        throw ContractError("wind provider request failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw ContractError("wind provider returned HTTP " + std::to_string(res->status));
    }
    return parse_wind_response(res->body, query.base_url, query.timestamp);
}

}  // namespace ch4flux
