#include "hcr/worldbank.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include "hcr/csv.hpp"
#include "hcr/format.hpp"
#include "hcr/records.hpp"

namespace hcr {

namespace {

constexpr const char* kPopulationIndicator = "SP.POP.TOTL";
constexpr const char* kGdpIndicator = "NY.GDP.MKTP.CD";

std::string join_codes(const std::vector<std::string>& countries) {
    std::string out;
    for (const auto& c : countries) {
        if (!out.empty()) out += ';';
        out += c;
    }
    return out;
}

// Splits "https://host[:port]/base/path" into client target and path prefix.
struct ParsedBase {
    std::string host_port;  // scheme://host:port
    std::string prefix;     // /v2 or empty
};

ParsedBase parse_base(const std::string& base) {
    auto scheme_end = base.find("://");
    if (scheme_end == std::string::npos)
        throw std::runtime_error("indicator API base must include a scheme: " + base);
    auto path_start = base.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {base, ""};
    return {base.substr(0, path_start), base.substr(path_start)};
}

// Fetches one indicator for all countries; returns code -> value.
// Throws on transport errors or malformed payloads.
std::map<std::string, double> fetch_indicator(const std::string& api_base,
                                              const std::string& indicator,
                                              const std::string& codes, int year,
                                              int timeout_seconds) {
    ParsedBase base = parse_base(api_base);
    httplib::Client client(base.host_port);
    client.set_connection_timeout(timeout_seconds);
    client.set_read_timeout(timeout_seconds);
    client.set_follow_location(true);

    std::string path = base.prefix + "/country/" + codes + "/indicator/" + indicator +
                       "?date=" + std::to_string(year) + "&format=json&per_page=500";
    auto res = client.Get(path);
    if (!res)
        throw std::runtime_error("indicator API unreachable: " +
                                 httplib::to_string(res.error()));
    if (res->status != 200)
        throw std::runtime_error("indicator API returned HTTP " +
                                 std::to_string(res->status));

    nlohmann::json payload = nlohmann::json::parse(res->body);
    if (!payload.is_array() || payload.size() < 2 || !payload[1].is_array())
        throw std::runtime_error("unexpected indicator API payload shape");

    std::map<std::string, double> values;
    for (const auto& row : payload[1]) {
        if (!row.contains("value") || row["value"].is_null()) continue;
        std::string code = row.value("countryiso3code", "");
        std::string date = row.value("date", "");
        if (code.empty() || date != std::to_string(year)) continue;
        double value = row["value"].get<double>();
        if (value > 0) values[to_upper_ascii(code)] = value;
    }
    return values;
}

void merge_overrides(IndicatorSnapshot& snapshot, const std::string& override_path,
                     int year) {
    if (override_path.empty()) return;
    IndicatorSnapshot overrides =
        read_snapshot_csv(override_path, year, SnapshotSource::OVERRIDE);
    for (const auto& [code, entry] : overrides.entries)
        snapshot.entries[code] = entry;  // absolute precedence
}

}  // namespace

const char* to_string(SnapshotSource s) {
    switch (s) {
        case SnapshotSource::LIVE: return "LIVE";
        case SnapshotSource::CACHE: return "CACHE";
        default: return "OVERRIDE";
    }
}

std::optional<double> IndicatorSnapshot::population(const std::string& code) const {
    auto it = entries.find(code);
    if (it == entries.end()) return std::nullopt;
    return it->second.population;
}

std::optional<double> IndicatorSnapshot::gdp_usd(const std::string& code) const {
    auto it = entries.find(code);
    if (it == entries.end()) return std::nullopt;
    return it->second.gdp_usd;
}

IndicatorSnapshot read_snapshot_csv(const std::string& path, int year,
                                    SnapshotSource source) {
    csv::Table t = csv::read_file(path);
    std::vector<std::string> expected = {"country_code", "year", "population",
                                         "gdp_usd"};
    if (t.header != expected)
        throw std::runtime_error("header mismatch in " + path);

    IndicatorSnapshot snapshot;
    snapshot.year = year;
    snapshot.fetched_at = std::chrono::system_clock::now();
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        const std::size_t line = t.line_numbers[i];
        auto fail = [&](const std::string& what) {
            throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
        };
        if (row.size() != 4) fail("wrong field count");
        auto row_year = parse_int(trim(row[1]));
        if (!row_year) fail("bad year");
        if (*row_year != year) continue;
        std::string code = to_upper_ascii(trim(row[0]));
        if (!is_valid_country_code(code)) fail("invalid country code '" + row[0] + "'");
        auto pop = parse_double(trim(row[2]));
        auto gdp = parse_double(trim(row[3]));
        if (!pop || !gdp) fail("bad numeric field");
        if (!(*pop > 0) || !(*gdp > 0)) fail("degenerate indicator value (must be > 0)");
        snapshot.entries[code] = {*pop, *gdp, source};
    }
    return snapshot;
}

void write_snapshot_csv(const std::string& path, const IndicatorSnapshot& snapshot) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    // indicator values are integral in practice; keep them plain for diffing
    auto plain = [](double v) {
        if (v == std::floor(v) && std::fabs(v) < 9.2e18) return format_fixed(v, 0);
        return format_double(v);
    };
    out << "country_code,year,population,gdp_usd\n";
    for (const auto& [code, entry] : snapshot.entries) {
        csv::write_row(out, {code, std::to_string(snapshot.year),
                             plain(entry.population), plain(entry.gdp_usd)});
    }
}

FetchResult fetch_indicators(const std::vector<std::string>& countries, int year,
                             FetchMode mode, const FetchOptions& options) {
    FetchResult result;
    result.snapshot.year = year;
    result.snapshot.fetched_at = std::chrono::system_clock::now();

    std::string api_base = options.api_base;
    if (const char* env = std::getenv("HCR_WORLDBANK_API"); env && *env)
        api_base = env;

    bool live_ok = false;
    if (mode == FetchMode::LIVE) {
        try {
            std::string codes = join_codes(countries);
            auto pop = fetch_indicator(api_base, kPopulationIndicator, codes, year,
                                       options.timeout_seconds);
            auto gdp = fetch_indicator(api_base, kGdpIndicator, codes, year,
                                       options.timeout_seconds);
            for (const auto& [code, value] : pop) {
                auto g = gdp.find(code);
                if (g == gdp.end()) continue;  // need both denominators
                result.snapshot.entries[code] = {value, g->second,
                                                 SnapshotSource::LIVE};
            }
            live_ok = true;
            if (!options.cache_path.empty())
                write_snapshot_csv(options.cache_path, result.snapshot);
        } catch (const std::exception& e) {
            result.warnings.push_back(std::string("live fetch failed (") + e.what() +
                                      "), falling back to cache");
        }
    }

    if (!live_ok) {
        if (options.cache_path.empty())
            throw std::runtime_error("offline mode requires a snapshot cache file");
        result.snapshot = read_snapshot_csv(options.cache_path, year);
    }

    merge_overrides(result.snapshot, options.override_path, year);

    // the snapshot covers exactly the requested countries that were found
    std::map<std::string, IndicatorEntry> requested;
    for (const auto& code : countries) {
        auto it = result.snapshot.entries.find(code);
        if (it == result.snapshot.entries.end())
            result.missing.push_back(code);
        else
            requested[code] = it->second;
    }
    result.snapshot.entries = std::move(requested);
    return result;
}

}  // namespace hcr
