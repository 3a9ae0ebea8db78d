#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hcr/registry.hpp"

namespace hcr {

// Country-aggregate CSV: the output of `aggregate` and the direct input of
// the analysis commands. Empty numeric cells mean "absent"; empty counts
// mean zero.
inline constexpr const char* kAggregatesHeader =
    "country_code,period,ibb_hcr,wos_hcr,P,p_top1,p_top5,p_top10,p_top50,"
    "matched_institutions";

/// Validates country codes, percentile nesting over present fields, and
/// uniqueness of countries. Throws on any violation (these files are
/// curated inputs, not bulk feeds).
std::vector<CountryAggregate> read_aggregates_csv(const std::string& path);

void write_aggregates_csv(std::ostream& out,
                          const std::vector<CountryAggregate>& aggregates);

}  // namespace hcr
