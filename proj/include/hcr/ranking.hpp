#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hcr/extrapolation.hpp"
#include "hcr/records.hpp"
#include "hcr/registry.hpp"
#include "hcr/worldbank.hpp"

namespace hcr {

struct RankingEntry {
    std::string country_code;
    double value = 0;
    int rank = 0;  // 1..n, dense; ties broken by ascending country code
    std::optional<double> per_million;
    std::optional<double> per_billion_gdp;
    double cumulative_share = 0;  // running value sum / global total
};

enum class RankMetric { IBB_HCR, WOS_HCR, PREDICTED_WOS };

/// Default global roster size used for cumulative shares of IBB counts.
inline constexpr double kGlobalIbbTotal = 159684.0;

/// Ranks countries by `metric` descending, dropping those below
/// `threshold`. Cumulative shares are computed against `global_total`,
/// not the filtered sum. PREDICTED_WOS derives per-country values from
/// P and p_top10 with levels (x, y); countries lacking those fields are
/// skipped (returned in `skipped` when non-null).
std::vector<RankingEntry> rank_countries(
    const std::vector<CountryAggregate>& aggregates, RankMetric metric,
    long long threshold, double global_total = kGlobalIbbTotal,
    PercentileLevel x = PercentileLevel(5.0),
    PercentileLevel y = PercentileLevel(0.05),
    std::vector<std::string>* skipped = nullptr);

enum class NormalizationBasis { POPULATION, GDP };

/// Adds per_million (value / population * 1e6) or per_billion_gdp
/// (value / (GDP / 1e9)) in place. Values and ranks are untouched.
/// Countries absent from the snapshot keep an empty field and are
/// returned. Throws "degenerate indicator" on a non-positive denominator.
std::vector<std::string> normalize(std::vector<RankingEntry>& entries,
                                   const IndicatorSnapshot& snapshot,
                                   NormalizationBasis basis);

/// Re-orders by the normalized field (descending, country-code ties) and
/// reassigns dense ranks and cumulative shares. Entries lacking the field
/// are dropped.
std::vector<RankingEntry> rerank_by_normalized(const std::vector<RankingEntry>& entries,
                                               NormalizationBasis basis,
                                               double global_total);

/// Comparison filter: keep countries with wos_hcr >= min_wos that are
/// not excluded. Idempotent.
std::vector<CountryAggregate> comparison_filter(
    const std::vector<CountryAggregate>& aggregates, long long min_wos = 3,
    const std::vector<std::string>& exclusions = {"CHN"});

struct ScatterRow {
    std::string country;
    double rank_left = 0;
    double rank_right = 0;
    double deviation = 0;  // rank_left - rank_right
};

/// Pairs two (country, value) lists into rank space (descending, average
/// ties), sorted by rank_left. Throws when the country sets differ, listing
/// the symmetric difference.
std::vector<ScatterRow> rank_scatter(
    const std::vector<std::pair<std::string, double>>& left,
    const std::vector<std::pair<std::string, double>>& right);

/// First-publication-year histogram over the observed year span.
struct OnsetDistribution {
    std::vector<int> years;             // consecutive, min..max
    std::vector<long long> counts;      // per year
    std::vector<long long> cumulative;  // prefix sums of counts
    int median_year = 0;  // smallest year with cumulative >= half the total
};

struct OnsetResult {
    OnsetDistribution dist;
    std::size_t skipped = 0;  // records lacking first_pub_year
};

/// Throws when no record carries a usable year.
OnsetResult career_onset_distribution(const std::vector<ResearcherRecord>& records);

}  // namespace hcr
