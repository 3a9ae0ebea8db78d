#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hcr/records.hpp"

namespace hcr {

enum class InstitutionKind { UNIVERSITY, HOSPITAL, OTHER };

struct CanonicalInstitution {
    std::string institution_id;
    std::string canonical_name;
    std::string country_code;
    InstitutionKind kind = InstitutionKind::UNIVERSITY;
};

enum class RuleKind { EXACT, DEPARTMENT_OF, FUZZY };

struct AliasRule {
    std::string pattern;  // stored normalized
    std::string target_institution_id;
    RuleKind kind = RuleKind::EXACT;
    double fuzzy_budget = 0.1;  // normalized edit distance, [0, 0.2]
};

const char* to_string(InstitutionKind k);
const char* to_string(RuleKind k);
std::optional<InstitutionKind> parse_institution_kind(std::string_view s);
std::optional<RuleKind> parse_rule_kind(std::string_view s);

/// Lowercases, strips diacritics from Latin letters, replaces punctuation
/// with single spaces, collapses whitespace and trims. Total function.
std::string normalize_name(std::string_view raw);

/// Levenshtein distance divided by the longer length; 0 for two empties.
double normalized_edit_distance(std::string_view a, std::string_view b);

enum class MatchOutcome { MATCHED, UNMATCHED, AMBIGUOUS };

const char* to_string(MatchOutcome o);

struct MatchResult {
    MatchOutcome outcome = MatchOutcome::UNMATCHED;
    std::string institution_id;  // set when MATCHED
    RuleKind rule = RuleKind::EXACT;
    double distance = 0.0;  // fuzzy distance; 0 for exact/department hits
    std::vector<std::string> candidates;  // set when AMBIGUOUS
};

/// Immutable registry of canonical institutions and alias rules.
/// Resolution precedence: EXACT (alias patterns and canonical names),
/// then DEPARTMENT_OF containment, then FUZZY by smallest distance.
/// Ties between distinct institutions are reported as AMBIGUOUS.
class Registry {
  public:
    static Registry load(const std::string& registry_csv_path,
                         const std::string& alias_csv_path);
    static Registry from_rows(std::vector<CanonicalInstitution> institutions,
                              std::vector<AliasRule> rules);

    MatchResult resolve(std::string_view raw_affiliation) const;
    const CanonicalInstitution* find(std::string_view institution_id) const;
    std::size_t size() const { return institutions_.size(); }

  private:
    std::vector<CanonicalInstitution> institutions_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::unordered_map<std::string, std::string> exact_;  // normalized -> id
    std::vector<AliasRule> department_rules_;
    std::vector<AliasRule> fuzzy_rules_;
};

struct AggregationPolicy {
    // Country-level fallback: an unmatched researcher still counts for
    // the country on their record (unless it is "UNK").
    bool use_record_country_on_unmatched = true;
    // When false, any AMBIGUOUS resolution aborts the aggregation.
    bool allow_ambiguous_as_unmatched = false;
    // Metrics rows must match these unless relax_metrics_filter is set.
    CountingMode counting_mode = CountingMode::FRACTIONAL;
    std::string field_label = "All sciences";
    bool relax_metrics_filter = false;
    // e.g. {"HKG" -> "CHN"} to fold Hong Kong into China.
    std::map<std::string, std::string> country_remap;
};

/// Per-country totals over matched institutions. Percentile sums are absent
/// when no metrics row contributed (distinct from an explicit zero).
struct CountryAggregate {
    std::string country_code;
    long long ibb_hcr = 0;
    long long wos_hcr = 0;
    std::optional<double> P, p_top1, p_top5, p_top10, p_top50;
    std::string period;
    int matched_institutions = 0;
};

struct AuditRow {
    std::string raw_affiliation;
    MatchOutcome outcome = MatchOutcome::UNMATCHED;
    std::string institution_id;
    double distance = 0.0;
};

struct AggregationResult {
    std::vector<CountryAggregate> aggregates;  // sorted by country_code
    std::vector<AuditRow> audit;               // one row per roster record
    // matched + hospital + fallback + no-country partition the roster;
    // ambiguous_downgraded counts AMBIGUOUS resolutions folded into the
    // unmatched buckets when the policy allows that.
    std::size_t matched_counted = 0;
    std::size_t hospital_excluded = 0;
    std::size_t fallback_counted = 0;
    std::size_t unmatched_no_country = 0;
    std::size_t ambiguous_downgraded = 0;
    std::size_t metrics_rows_used = 0;
    std::size_t metrics_rows_unmatched = 0;
};

/// Raised when an AMBIGUOUS match is found and the policy does not allow
/// downgrading it to UNMATCHED.
class AmbiguousMatchError : public std::runtime_error {
  public:
    explicit AmbiguousMatchError(const std::string& what)
        : std::runtime_error(what) {}
};

/// Aggregates rosters and institution metrics to country level for one
/// period. Researchers resolving to HOSPITAL institutions are excluded
/// from the HCR counts. Metrics are restricted to (period, FRACTIONAL,
/// "All sciences") unless the policy relaxes that. Throws when the period
/// is absent from the metrics, or when both inputs are nonempty but share
/// no country.
AggregationResult aggregate_country(const std::vector<ResearcherRecord>& records,
                                    const std::vector<InstitutionMetrics>& metrics,
                                    const Registry& registry,
                                    const std::string& period,
                                    const AggregationPolicy& policy = {});

}  // namespace hcr
