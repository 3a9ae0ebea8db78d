#include "hcr/records.hpp"

#include "hcr/format.hpp"

namespace hcr {

const char* to_string(ListSource s) {
    return s == ListSource::IBB ? "IBB" : "WOS";
}

const char* to_string(CountingMode m) {
    return m == CountingMode::FRACTIONAL ? "FRACTIONAL" : "FULL";
}

std::optional<ListSource> parse_list_source(std::string_view s) {
    if (s == "IBB") return ListSource::IBB;
    if (s == "WOS") return ListSource::WOS;
    return std::nullopt;
}

std::optional<CountingMode> parse_counting_mode(std::string_view s) {
    if (s == "FRACTIONAL") return CountingMode::FRACTIONAL;
    if (s == "FULL") return CountingMode::FULL;
    return std::nullopt;
}

bool is_valid_country_code(std::string_view code) {
    if (code.size() != 3) return false;
    for (char c : code)
        if (c < 'A' || c > 'Z') return false;
    return true;
}

std::string to_upper_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    return out;
}

std::optional<std::pair<int, int>> parse_period(std::string_view period) {
    auto dash = period.find('-');
    if (dash == std::string_view::npos) return std::nullopt;
    auto y1 = parse_int(period.substr(0, dash));
    auto y2 = parse_int(period.substr(dash + 1));
    if (!y1 || !y2) return std::nullopt;
    return std::make_pair(static_cast<int>(*y1), static_cast<int>(*y2));
}

bool is_four_year_period(std::string_view period) {
    auto p = parse_period(period);
    return p && p->second == p->first + 3;
}

}  // namespace hcr
