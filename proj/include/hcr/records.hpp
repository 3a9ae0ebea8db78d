#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hcr {

enum class ListSource { IBB, WOS };
enum class CountingMode { FRACTIONAL, FULL };

/// One row of an HCR roster.
struct ResearcherRecord {
    std::string researcher_id;
    std::string full_name;
    std::string raw_affiliation;
    std::string country_code;  // ISO-3166 alpha-3, or "UNK"
    std::optional<int> first_pub_year;
    ListSource list_source = ListSource::IBB;
    int list_year = 0;

    bool operator==(const ResearcherRecord&) const = default;
};

/// One institution's publication counts for a 4-year period.
/// Fractional counting yields non-integer values.
struct InstitutionMetrics {
    std::string institution_raw_name;
    std::string country_code;
    std::string period;  // "Y1-Y2" with Y2 = Y1 + 3
    CountingMode counting_mode = CountingMode::FRACTIONAL;
    std::string field_label = "All sciences";
    double P = 0;
    double p_top1 = 0;
    double p_top5 = 0;
    double p_top10 = 0;
    double p_top50 = 0;

    bool operator==(const InstitutionMetrics&) const = default;
};

struct Reject {
    std::size_t line = 0;
    std::string reason;
};

/// Accounting for one ingestion pass: rows_read = rows_accepted + rejects.
struct IngestReport {
    std::size_t rows_read = 0;
    std::size_t rows_accepted = 0;
    std::vector<Reject> rejects;
    std::vector<std::string> notes;  // non-fatal normalizations, e.g. case folds
};

const char* to_string(ListSource s);
const char* to_string(CountingMode m);
std::optional<ListSource> parse_list_source(std::string_view s);
std::optional<CountingMode> parse_counting_mode(std::string_view s);

/// True for exactly three ASCII uppercase letters ("UNK" included).
bool is_valid_country_code(std::string_view code);

std::string to_upper_ascii(std::string_view s);

/// Parses "Y1-Y2"; returns the pair only when both parse as integers.
std::optional<std::pair<int, int>> parse_period(std::string_view period);

/// True when the period parses and spans exactly four years (Y2 = Y1 + 3).
bool is_four_year_period(std::string_view period);

}  // namespace hcr
