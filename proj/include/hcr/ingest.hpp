#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hcr/records.hpp"

namespace hcr {

// Canonical CSV schemas. A header row is mandatory and must match exactly.
inline constexpr const char* kRosterHeader =
    "researcher_id,full_name,raw_affiliation,country_code,first_pub_year,"
    "list_source,list_year";
inline constexpr const char* kMetricsHeader =
    "institution_raw_name,country_code,period,counting_mode,field_label,"
    "P,p_top1,p_top5,p_top10,p_top50";

struct RosterResult {
    std::vector<ResearcherRecord> records;
    IngestReport report;
};

struct MetricsResult {
    std::vector<InstitutionMetrics> metrics;
    IngestReport report;
};

/// Reads an HCR roster. `source` and `list_year` declare what the file is
/// expected to contain; rows disagreeing with them are rejected. Row order
/// is preserved. Missing file or header mismatch throws; per-row invariant
/// violations go to the report's reject list.
RosterResult read_roster(const std::string& path, ListSource source, int list_year);

/// Reads an institution metrics table. Rows violating the percentile
/// nesting 0 <= p_top1 <= p_top5 <= p_top10 <= p_top50 <= P or whose period
/// is not a 4-year window are rejected.
MetricsResult read_metrics(const std::string& path);

// Canonical writers; write(read(x)) round-trips to identical records.
void write_roster(std::ostream& out, const std::vector<ResearcherRecord>& records);
void write_metrics(std::ostream& out, const std::vector<InstitutionMetrics>& metrics);

}  // namespace hcr
