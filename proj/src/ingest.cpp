#include "hcr/ingest.hpp"

#include <ostream>
#include <sstream>
#include <stdexcept>

#include "hcr/csv.hpp"
#include "hcr/format.hpp"

namespace hcr {

namespace {

std::vector<std::string> split_header(std::string_view header) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto comma = header.find(',', start);
        if (comma == std::string_view::npos) {
            out.emplace_back(header.substr(start));
            return out;
        }
        out.emplace_back(header.substr(start, comma - start));
        start = comma + 1;
    }
}

void require_header(const csv::Table& table, const char* expected,
                    const std::string& path) {
    if (table.header != split_header(expected))
        throw std::runtime_error("header mismatch in " + path + " (expected: " +
                                 expected + ")");
}

// Normalizes a country field in place; returns a reject reason on failure
// and a note when something non-fatal was fixed up.
std::optional<std::string> normalize_country(std::string& code,
                                             std::vector<std::string>& notes,
                                             std::size_t line) {
    std::string upper = to_upper_ascii(trim(code));
    if (!is_valid_country_code(upper)) return "invalid country code";
    if (upper != code) {
        notes.push_back("line " + std::to_string(line) + ": country code '" + code +
                        "' normalized to '" + upper + "'");
    }
    code = upper;
    return std::nullopt;
}

}  // namespace

RosterResult read_roster(const std::string& path, ListSource source, int list_year) {
    csv::Table table = csv::read_file(path);
    require_header(table, kRosterHeader, path);

    RosterResult result;
    result.report.rows_read = table.rows.size();
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const std::size_t line = table.line_numbers[i];
        auto reject = [&](std::string reason) {
            result.report.rejects.push_back({line, std::move(reason)});
        };
        if (row.size() != 7) {
            reject("wrong field count");
            continue;
        }
        ResearcherRecord rec;
        rec.researcher_id = row[0];
        rec.full_name = row[1];
        rec.raw_affiliation = row[2];
        rec.country_code = row[3];
        if (auto why = normalize_country(rec.country_code, result.report.notes, line)) {
            reject(*why);
            continue;
        }
        std::string year_field = trim(row[4]);
        if (!year_field.empty()) {
            auto year = parse_int(year_field);
            if (!year) {
                reject("invalid first_pub_year");
                continue;
            }
            if (*year < 1900 || *year > list_year) {
                reject("year out of range");
                continue;
            }
            rec.first_pub_year = static_cast<int>(*year);
        }
        auto src = parse_list_source(trim(row[5]));
        if (!src) {
            reject("invalid list_source");
            continue;
        }
        if (*src != source) {
            reject("list_source mismatch");
            continue;
        }
        rec.list_source = *src;
        auto ly = parse_int(trim(row[6]));
        if (!ly) {
            reject("invalid list_year");
            continue;
        }
        if (*ly != list_year) {
            reject("list_year mismatch");
            continue;
        }
        rec.list_year = static_cast<int>(*ly);
        result.records.push_back(std::move(rec));
    }
    result.report.rows_accepted = result.records.size();
    return result;
}

MetricsResult read_metrics(const std::string& path) {
    csv::Table table = csv::read_file(path);
    require_header(table, kMetricsHeader, path);

    MetricsResult result;
    result.report.rows_read = table.rows.size();
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const std::size_t line = table.line_numbers[i];
        auto reject = [&](std::string reason) {
            result.report.rejects.push_back({line, std::move(reason)});
        };
        if (row.size() != 10) {
            reject("wrong field count");
            continue;
        }
        InstitutionMetrics m;
        m.institution_raw_name = row[0];
        m.country_code = row[1];
        if (auto why = normalize_country(m.country_code, result.report.notes, line)) {
            reject(*why);
            continue;
        }
        m.period = trim(row[2]);
        if (!is_four_year_period(m.period)) {
            reject("period is not a 4-year window");
            continue;
        }
        auto mode = parse_counting_mode(trim(row[3]));
        if (!mode) {
            reject("invalid counting_mode");
            continue;
        }
        m.counting_mode = *mode;
        m.field_label = trim(row[4]).empty() ? "All sciences" : row[4];

        double* numbers[5] = {&m.P, &m.p_top1, &m.p_top5, &m.p_top10, &m.p_top50};
        bool ok = true;
        for (int k = 0; k < 5; ++k) {
            auto v = parse_double(trim(row[5 + k]));
            if (!v || *v < 0) {
                reject(!v ? "invalid numeric field" : "negative value");
                ok = false;
                break;
            }
            *numbers[k] = *v;
        }
        if (!ok) continue;
        if (!(m.p_top1 <= m.p_top5 && m.p_top5 <= m.p_top10 &&
              m.p_top10 <= m.p_top50 && m.p_top50 <= m.P)) {
            reject("percentile nesting violated");
            continue;
        }
        result.metrics.push_back(std::move(m));
    }
    result.report.rows_accepted = result.metrics.size();
    return result;
}

void write_roster(std::ostream& out, const std::vector<ResearcherRecord>& records) {
    out << kRosterHeader << '\n';
    for (const auto& r : records) {
        csv::write_row(out, {r.researcher_id, r.full_name, r.raw_affiliation,
                             r.country_code,
                             r.first_pub_year ? std::to_string(*r.first_pub_year) : "",
                             to_string(r.list_source), std::to_string(r.list_year)});
    }
}

void write_metrics(std::ostream& out, const std::vector<InstitutionMetrics>& metrics) {
    out << kMetricsHeader << '\n';
    for (const auto& m : metrics) {
        csv::write_row(out, {m.institution_raw_name, m.country_code, m.period,
                             to_string(m.counting_mode), m.field_label,
                             format_double(m.P), format_double(m.p_top1),
                             format_double(m.p_top5), format_double(m.p_top10),
                             format_double(m.p_top50)});
    }
}

}  // namespace hcr
