#pragma once

// Optional weather-provider adapter. Never used by the scientific commands;
// it only produces a WindRecord file for later offline use.

#include <string>

#include "ch4flux/quantify.hpp"

namespace ch4flux {

struct WindQuery {
    std::string base_url;  // scheme://host[:port]
    std::string path = "/data/3.0/onecall/timemachine";
    double lat = 0.0;
    double lon = 0.0;
    std::string timestamp;  // ISO-8601 UTC
    std::string api_key;
    int timeout_s = 10;
};

/// Accepts either {"data": [{"wind_speed", "wind_deg"}]} or
/// {"wind": {"speed", "deg"}} response bodies.
WindRecord parse_wind_response(const std::string& body, const std::string& source,
                               const std::string& timestamp);

/// Throws ContractError on transport failures or non-200 responses.
WindRecord fetch_wind(const WindQuery& query);

}  // namespace ch4flux
