#include "hcr/aggregates.hpp"

#include <ostream>
#include <set>
#include <stdexcept>

#include "hcr/csv.hpp"
#include "hcr/format.hpp"

namespace hcr {

namespace {

std::optional<double> optional_field(const std::string& raw, const std::string& path,
                                     std::size_t line, const char* name) {
    std::string s = trim(raw);
    if (s.empty()) return std::nullopt;
    auto v = parse_double(s);
    if (!v || *v < 0)
        throw std::runtime_error(path + ":" + std::to_string(line) + ": bad " +
                                 name + " '" + raw + "'");
    return v;
}

long long count_field(const std::string& raw, const std::string& path,
                      std::size_t line, const char* name) {
    std::string s = trim(raw);
    if (s.empty()) return 0;
    auto v = parse_int(s);
    if (!v || *v < 0)
        throw std::runtime_error(path + ":" + std::to_string(line) + ": bad " +
                                 name + " '" + raw + "'");
    return *v;
}

// Nesting must hold over whichever percentile fields are present.
bool nesting_ok(const CountryAggregate& a) {
    double lower = 0.0;
    for (const auto& field : {a.p_top1, a.p_top5, a.p_top10, a.p_top50, a.P}) {
        if (!field) continue;
        if (*field < lower) return false;
        lower = *field;
    }
    return true;
}

std::string opt_str(const std::optional<double>& v) {
    return v ? format_double(*v) : "";
}

}  // namespace

std::vector<CountryAggregate> read_aggregates_csv(const std::string& path) {
    csv::Table t = csv::read_file(path);
    std::vector<std::string> expected = {
        "country_code", "period",  "ibb_hcr", "wos_hcr",  "P",
        "p_top1",       "p_top5",  "p_top10", "p_top50",  "matched_institutions"};
    if (t.header != expected)
        throw std::runtime_error("header mismatch in " + path + " (expected: " +
                                 std::string(kAggregatesHeader) + ")");

    std::vector<CountryAggregate> out;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        const std::size_t line = t.line_numbers[i];
        auto fail = [&](const std::string& what) {
            throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
        };
        if (row.size() != 10) fail("wrong field count");
        CountryAggregate a;
        a.country_code = to_upper_ascii(trim(row[0]));
        if (!is_valid_country_code(a.country_code))
            fail("invalid country code '" + row[0] + "'");
        if (!seen.insert(a.country_code).second)
            fail("duplicate country " + a.country_code);
        a.period = trim(row[1]);
        a.ibb_hcr = count_field(row[2], path, line, "ibb_hcr");
        a.wos_hcr = count_field(row[3], path, line, "wos_hcr");
        a.P = optional_field(row[4], path, line, "P");
        a.p_top1 = optional_field(row[5], path, line, "p_top1");
        a.p_top5 = optional_field(row[6], path, line, "p_top5");
        a.p_top10 = optional_field(row[7], path, line, "p_top10");
        a.p_top50 = optional_field(row[8], path, line, "p_top50");
        a.matched_institutions =
            static_cast<int>(count_field(row[9], path, line, "matched_institutions"));
        if (!nesting_ok(a)) fail("percentile nesting violated");
        out.push_back(std::move(a));
    }
    return out;
}

void write_aggregates_csv(std::ostream& out,
                          const std::vector<CountryAggregate>& aggregates) {
    out << kAggregatesHeader << '\n';
    for (const auto& a : aggregates) {
        csv::write_row(out, {a.country_code, a.period, std::to_string(a.ibb_hcr),
                             std::to_string(a.wos_hcr), opt_str(a.P), opt_str(a.p_top1),
                             opt_str(a.p_top5), opt_str(a.p_top10), opt_str(a.p_top50),
                             std::to_string(a.matched_institutions)});
    }
}

}  // namespace hcr
