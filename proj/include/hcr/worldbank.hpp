#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hcr {

enum class SnapshotSource { LIVE, CACHE, OVERRIDE };

const char* to_string(SnapshotSource s);

struct IndicatorEntry {
    double population = 0;  // SP.POP.TOTL
    double gdp_usd = 0;     // NY.GDP.MKTP.CD, current US$
    SnapshotSource source = SnapshotSource::CACHE;
};

/// Per-country denominators for one year. All stored values are positive.
struct IndicatorSnapshot {
    int year = 0;
    std::map<std::string, IndicatorEntry> entries;
    std::chrono::system_clock::time_point fetched_at{};  // never serialized

    std::optional<double> population(const std::string& code) const;
    std::optional<double> gdp_usd(const std::string& code) const;
};

enum class FetchMode { LIVE, OFFLINE };

struct FetchOptions {
    std::string cache_path;     // CSV: country_code,year,population,gdp_usd
    std::string override_path;  // same schema; rows take absolute precedence
    // World Bank API base; the HCR_WORLDBANK_API env var overrides this,
    // which is how tests point the client at a local stub.
    std::string api_base = "https://api.worldbank.org/v2";
    int timeout_seconds = 10;
};

struct FetchResult {
    IndicatorSnapshot snapshot;
    std::vector<std::string> missing;   // requested but found nowhere
    std::vector<std::string> warnings;  // e.g. live fetch fell back to cache
};

/// LIVE: query the indicator API, validate (positive values, matching
/// year), persist to the cache file, then apply overrides. On HTTP failure
/// falls back to the cache with a warning. OFFLINE: read the cache, apply
/// overrides. Countries absent everywhere are listed in `missing`.
FetchResult fetch_indicators(const std::vector<std::string>& countries, int year,
                             FetchMode mode, const FetchOptions& options);

/// Reads a snapshot CSV, keeping rows for `year` only. Non-positive values
/// are rejected with an error. Throws if the file cannot be opened.
IndicatorSnapshot read_snapshot_csv(const std::string& path, int year,
                                    SnapshotSource source = SnapshotSource::CACHE);

/// Writes the cache CSV (sorted by country code; fetched_at is not stored).
void write_snapshot_csv(const std::string& path, const IndicatorSnapshot& snapshot);

}  // namespace hcr
