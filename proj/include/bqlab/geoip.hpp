// Victim-geolocation client with the three-provider fallback chain. Transports
// are injected; tests script them, the CLI binds scenario-configured responses.

#pragma once

#include <functional>

#include "bqlab/virtualhost.hpp"

#include <json.hpp>

namespace bqlab::geoip {

using wire::GeoResult;

struct Provider {
    std::string name;      // key used by scenario geoBehavior
    std::string hostname;  // what the network-connect event reports
    std::string url;
};

/// Query order is fixed: Telize first, then freeGeoIP, then ipify.
inline const std::vector<Provider>& providers() {
    static const std::vector<Provider> chain = {
        {"telize", "telize.com", "https://telize.com/geoip"},
        {"freegeoip", "freegeoip.net", "http://freegeoip.net/json/"},
        {"ipify", "api.ipify.org", "https://api.ipify.org?format=json"},
    };
    return chain;
}

/// Returns the provider's response document, or nothing on transport failure.
using Transport = std::function<std::optional<std::string>(const Provider&)>;

inline constexpr const char* kUnknownCountry = "unknown";
inline constexpr const char* kPlaceholderFlag = "flag_unknown.png";

/// Country name (lowercased) to flag image name. Editable fixture; the sample
/// resolves the victim's flag the same way, name lookup only.
inline const std::map<std::string, std::string>& defaultFlagTable() {
    static const std::map<std::string, std::string> table = {
        {"argentina", "flag_argentina.png"}, {"brazil", "flag_brazil.png"},
        {"chile", "flag_chile.png"},         {"colombia", "flag_colombia.png"},
        {"costa rica", "flag_costa_rica.png"}, {"ecuador", "flag_ecuador.png"},
        {"italy", "flag_italy.png"},         {"mexico", "flag_mexico.png"},
        {"panama", "flag_panama.png"},       {"peru", "flag_peru.png"},
        {"uruguay", "flag_uruguay.png"},     {"venezuela", "flag_venezuela.png"},
    };
    return table;
}

inline std::string flagFor(const std::string& country,
                           const std::map<std::string, std::string>& table = defaultFlagTable()) {
    std::string key;
    for (char c : country) key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    auto it = table.find(key);
    return it == table.end() ? kPlaceholderFlag : it->second;
}

namespace detail {

inline std::optional<GeoResult> parseResponse(const Provider& provider, const std::string& doc) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(doc);
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
    auto field = [&](const char* name) -> std::string {
        return j.contains(name) && j[name].is_string() ? j[name].get<std::string>() : "";
    };

    GeoResult geo;
    if (provider.name == "telize") {
        geo.ip = field("ip");
        geo.country = field("country");
        geo.countryCode = field("country_code");
    } else if (provider.name == "freegeoip") {
        geo.ip = field("ip");
        geo.country = field("country_name");
        geo.countryCode = field("country_code");
    } else { // ipify only ever returns the address
        geo.ip = field("ip");
        geo.country = kUnknownCountry;
        geo.countryCode = kUnknownCountry;
    }
    if (geo.ip.empty()) return std::nullopt;
    if (geo.country.empty()) geo.country = kUnknownCountry;
    if (geo.countryCode.empty()) geo.countryCode = kUnknownCountry;
    return geo;
}

} // namespace detail

/// Walks the provider chain in order, emitting one network-connect event per
/// attempt, and stops at the first provider that answers. The chain defaults
/// to the sample's three services; endpoints are plain configuration values.
inline GeoResult locate(host::VirtualHost& host, const Transport& transport,
                        const std::map<std::string, std::string>& flagTable = defaultFlagTable(),
                        const std::vector<Provider>& chain = providers()) {
    for (const auto& provider : chain) {
        host.pushEvent(host::events::kNetworkConnect,
                       {{"DestinationHostname", provider.hostname}, {"Details", "443"}});
        auto doc = transport(provider);
        if (!doc) continue;
        auto geo = detail::parseResponse(provider, *doc);
        if (!geo) continue;
        geo->flagName = flagFor(geo->country, flagTable);
        return *geo;
    }
    throw AllProvidersFailed("telize, freegeoip and ipify all unreachable");
}

} // namespace bqlab::geoip
