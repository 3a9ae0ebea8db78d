#include "hcr/registry.hpp"

#include <algorithm>
#include <cstdint>
#include <set>

#include "hcr/csv.hpp"
#include "hcr/format.hpp"

namespace hcr {

namespace {

// Latin-1 Supplement and Latin Extended-A letters folded to lowercase
// ASCII (NFD base letter, plus the usual special cases: ss, ae, oe, th).
struct Fold {
    std::uint32_t cp;
    const char* out;
};
constexpr Fold kLatinFolds[] = {
    {0x00C0, "a"}, {0x00C1, "a"}, {0x00C2, "a"}, {0x00C3, "a"}, {0x00C4, "a"}, {0x00C5, "a"},
    {0x00C6, "ae"}, {0x00C7, "c"}, {0x00C8, "e"}, {0x00C9, "e"}, {0x00CA, "e"}, {0x00CB, "e"},
    {0x00CC, "i"}, {0x00CD, "i"}, {0x00CE, "i"}, {0x00CF, "i"}, {0x00D0, "d"}, {0x00D1, "n"},
    {0x00D2, "o"}, {0x00D3, "o"}, {0x00D4, "o"}, {0x00D5, "o"}, {0x00D6, "o"}, {0x00D8, "o"},
    {0x00D9, "u"}, {0x00DA, "u"}, {0x00DB, "u"}, {0x00DC, "u"}, {0x00DD, "y"}, {0x00DE, "th"},
    {0x00DF, "ss"}, {0x00E0, "a"}, {0x00E1, "a"}, {0x00E2, "a"}, {0x00E3, "a"}, {0x00E4, "a"},
    {0x00E5, "a"}, {0x00E6, "ae"}, {0x00E7, "c"}, {0x00E8, "e"}, {0x00E9, "e"}, {0x00EA, "e"},
    {0x00EB, "e"}, {0x00EC, "i"}, {0x00ED, "i"}, {0x00EE, "i"}, {0x00EF, "i"}, {0x00F0, "d"},
    {0x00F1, "n"}, {0x00F2, "o"}, {0x00F3, "o"}, {0x00F4, "o"}, {0x00F5, "o"}, {0x00F6, "o"},
    {0x00F8, "o"}, {0x00F9, "u"}, {0x00FA, "u"}, {0x00FB, "u"}, {0x00FC, "u"}, {0x00FD, "y"},
    {0x00FE, "th"}, {0x00FF, "y"}, {0x0100, "a"}, {0x0101, "a"}, {0x0102, "a"}, {0x0103, "a"},
    {0x0104, "a"}, {0x0105, "a"}, {0x0106, "c"}, {0x0107, "c"}, {0x0108, "c"}, {0x0109, "c"},
    {0x010A, "c"}, {0x010B, "c"}, {0x010C, "c"}, {0x010D, "c"}, {0x010E, "d"}, {0x010F, "d"},
    {0x0110, "d"}, {0x0111, "d"}, {0x0112, "e"}, {0x0113, "e"}, {0x0114, "e"}, {0x0115, "e"},
    {0x0116, "e"}, {0x0117, "e"}, {0x0118, "e"}, {0x0119, "e"}, {0x011A, "e"}, {0x011B, "e"},
    {0x011C, "g"}, {0x011D, "g"}, {0x011E, "g"}, {0x011F, "g"}, {0x0120, "g"}, {0x0121, "g"},
    {0x0122, "g"}, {0x0123, "g"}, {0x0124, "h"}, {0x0125, "h"}, {0x0126, "h"}, {0x0127, "h"},
    {0x0128, "i"}, {0x0129, "i"}, {0x012A, "i"}, {0x012B, "i"}, {0x012C, "i"}, {0x012D, "i"},
    {0x012E, "i"}, {0x012F, "i"}, {0x0130, "i"}, {0x0131, "i"}, {0x0132, "ij"}, {0x0133, "ij"},
    {0x0134, "j"}, {0x0135, "j"}, {0x0136, "k"}, {0x0137, "k"}, {0x0138, "k"}, {0x0139, "l"},
    {0x013A, "l"}, {0x013B, "l"}, {0x013C, "l"}, {0x013D, "l"}, {0x013E, "l"}, {0x013F, "l"},
    {0x0140, "l"}, {0x0141, "l"}, {0x0142, "l"}, {0x0143, "n"}, {0x0144, "n"}, {0x0145, "n"},
    {0x0146, "n"}, {0x0147, "n"}, {0x0148, "n"}, {0x0149, "n"}, {0x014A, "ng"}, {0x014B, "ng"},
    {0x014C, "o"}, {0x014D, "o"}, {0x014E, "o"}, {0x014F, "o"}, {0x0150, "o"}, {0x0151, "o"},
    {0x0152, "oe"}, {0x0153, "oe"}, {0x0154, "r"}, {0x0155, "r"}, {0x0156, "r"}, {0x0157, "r"},
    {0x0158, "r"}, {0x0159, "r"}, {0x015A, "s"}, {0x015B, "s"}, {0x015C, "s"}, {0x015D, "s"},
    {0x015E, "s"}, {0x015F, "s"}, {0x0160, "s"}, {0x0161, "s"}, {0x0162, "t"}, {0x0163, "t"},
    {0x0164, "t"}, {0x0165, "t"}, {0x0166, "t"}, {0x0167, "t"}, {0x0168, "u"}, {0x0169, "u"},
    {0x016A, "u"}, {0x016B, "u"}, {0x016C, "u"}, {0x016D, "u"}, {0x016E, "u"}, {0x016F, "u"},
    {0x0170, "u"}, {0x0171, "u"}, {0x0172, "u"}, {0x0173, "u"}, {0x0174, "w"}, {0x0175, "w"},
    {0x0176, "y"}, {0x0177, "y"}, {0x0178, "y"}, {0x0179, "z"}, {0x017A, "z"}, {0x017B, "z"},
    {0x017C, "z"}, {0x017D, "z"}, {0x017E, "z"}, {0x017F, "s"},
};

const char* latin_fold(std::uint32_t cp) {
    if (cp < 0x00C0 || cp > 0x017F) return nullptr;
    for (const auto& f : kLatinFolds)
        if (f.cp == cp) return f.out;
    return nullptr;  // × and ÷ land here and are treated as punctuation
}

// Decodes one UTF-8 codepoint; ill-formed bytes decode as U+FFFD and
// advance one byte, so normalization stays total.
std::uint32_t decode_utf8(std::string_view s, std::size_t& i) {
    unsigned char b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len = (b0 >= 0xF0) ? 4 : (b0 >= 0xE0) ? 3 : (b0 >= 0xC0) ? 2 : 0;
    if (len == 0 || i + len > s.size()) {
        ++i;
        return 0xFFFD;
    }
    std::uint32_t cp = b0 & (0xFF >> (len + 1));
    for (int k = 1; k < len; ++k) {
        unsigned char bk = static_cast<unsigned char>(s[i + k]);
        if ((bk & 0xC0) != 0x80) {
            ++i;
            return 0xFFFD;
        }
        cp = (cp << 6) | (bk & 0x3F);
    }
    i += len;
    return cp;
}

void encode_utf8(std::uint32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_space_like(std::uint32_t cp) {
    if (cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v')
        return true;
    return cp == 0x00A0 || cp == 0x2007 || cp == 0x202F || cp == 0x3000;
}

bool is_punct_like(std::uint32_t cp) {
    if (cp < 0x80)
        return !((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') ||
                 (cp >= '0' && cp <= '9'));
    if (cp >= 0x00A1 && cp <= 0x00BF) return true;  // ¡ « · ¿ ...
    if (cp == 0x00D7 || cp == 0x00F7) return true;
    if (cp >= 0x2000 && cp <= 0x206F) return true;  // dashes, quotes, ellipsis
    return false;
}

// Tokenized containment: does `hay` contain all of `needle` as a
// contiguous run of whole tokens? Both already normalized.
bool contains_tokens(const std::string& hay, const std::string& needle) {
    if (needle.empty()) return false;
    if (hay == needle) return true;
    std::string padded_hay = " " + hay + " ";
    std::string padded_needle = " " + needle + " ";
    return padded_hay.find(padded_needle) != std::string::npos;
}

std::runtime_error load_error(const std::string& path, std::size_t line,
                              const std::string& what) {
    return std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

const char* to_string(InstitutionKind k) {
    switch (k) {
        case InstitutionKind::UNIVERSITY: return "UNIVERSITY";
        case InstitutionKind::HOSPITAL: return "HOSPITAL";
        default: return "OTHER";
    }
}

const char* to_string(RuleKind k) {
    switch (k) {
        case RuleKind::EXACT: return "EXACT";
        case RuleKind::DEPARTMENT_OF: return "DEPARTMENT_OF";
        default: return "FUZZY";
    }
}

const char* to_string(MatchOutcome o) {
    switch (o) {
        case MatchOutcome::MATCHED: return "MATCHED";
        case MatchOutcome::UNMATCHED: return "UNMATCHED";
        default: return "AMBIGUOUS";
    }
}

std::optional<InstitutionKind> parse_institution_kind(std::string_view s) {
    if (s == "UNIVERSITY") return InstitutionKind::UNIVERSITY;
    if (s == "HOSPITAL") return InstitutionKind::HOSPITAL;
    if (s == "OTHER") return InstitutionKind::OTHER;
    return std::nullopt;
}

std::optional<RuleKind> parse_rule_kind(std::string_view s) {
    if (s == "EXACT") return RuleKind::EXACT;
    if (s == "DEPARTMENT_OF") return RuleKind::DEPARTMENT_OF;
    if (s == "FUZZY") return RuleKind::FUZZY;
    return std::nullopt;
}

std::string normalize_name(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    std::size_t i = 0;
    while (i < raw.size()) {
        std::uint32_t cp = decode_utf8(raw, i);
        if (cp >= 0x0300 && cp <= 0x036F) continue;  // combining marks
        if (is_space_like(cp) || is_punct_like(cp) || cp == 0xFFFD) {
            pending_space = true;
            continue;
        }
        const char* folded = latin_fold(cp);
        if (pending_space && !out.empty()) out.push_back(' ');
        pending_space = false;
        if (folded) {
            out += folded;
        } else if (cp < 0x80) {
            char c = static_cast<char>(cp);
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
            out.push_back(c);
        } else {
            encode_utf8(cp, out);  // non-Latin scripts pass through
        }
    }
    return out;
}

double normalized_edit_distance(std::string_view a, std::string_view b) {
    const std::size_t n = a.size(), m = b.size();
    if (n == 0 && m == 0) return 0.0;
    if (n == 0 || m == 0) return 1.0;
    std::vector<std::size_t> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return static_cast<double>(prev[m]) / static_cast<double>(std::max(n, m));
}

Registry Registry::from_rows(std::vector<CanonicalInstitution> institutions,
                             std::vector<AliasRule> rules) {
    Registry reg;
    reg.institutions_ = std::move(institutions);
    for (std::size_t i = 0; i < reg.institutions_.size(); ++i) {
        auto& inst = reg.institutions_[i];
        if (inst.institution_id.empty())
            throw std::runtime_error("registry: empty institution_id");
        if (inst.canonical_name.empty())
            throw std::runtime_error("registry: empty canonical_name for " +
                                     inst.institution_id);
        if (!is_valid_country_code(inst.country_code))
            throw std::runtime_error("registry: bad country code for " +
                                     inst.institution_id);
        if (!reg.by_id_.emplace(inst.institution_id, i).second)
            throw std::runtime_error("registry: duplicate institution_id " +
                                     inst.institution_id);
        std::string norm = normalize_name(inst.canonical_name);
        auto [it, fresh] = reg.exact_.emplace(norm, inst.institution_id);
        if (!fresh && it->second != inst.institution_id)
            throw std::runtime_error("registry: canonical names collide after "
                                     "normalization: " + norm);
    }
    for (auto& rule : rules) {
        if (!reg.by_id_.count(rule.target_institution_id))
            throw std::runtime_error("alias rule targets unknown institution: " +
                                     rule.target_institution_id);
        rule.pattern = normalize_name(rule.pattern);
        if (rule.pattern.empty())
            throw std::runtime_error("alias rule with empty pattern for " +
                                     rule.target_institution_id);
        switch (rule.kind) {
            case RuleKind::EXACT: {
                auto [it, fresh] = reg.exact_.emplace(rule.pattern,
                                                      rule.target_institution_id);
                if (!fresh && it->second != rule.target_institution_id)
                    throw std::runtime_error("conflicting EXACT patterns: " +
                                             rule.pattern);
                break;
            }
            case RuleKind::DEPARTMENT_OF:
                reg.department_rules_.push_back(rule);
                break;
            case RuleKind::FUZZY:
                if (!(rule.fuzzy_budget >= 0.0 && rule.fuzzy_budget <= 0.2))
                    throw std::runtime_error("fuzzy budget outside [0, 0.2] for " +
                                             rule.target_institution_id);
                reg.fuzzy_rules_.push_back(rule);
                break;
        }
    }
    return reg;
}

Registry Registry::load(const std::string& registry_csv_path,
                        const std::string& alias_csv_path) {
    std::vector<CanonicalInstitution> institutions;
    {
        csv::Table t = csv::read_file(registry_csv_path);
        std::vector<std::string> expected = {"institution_id", "canonical_name",
                                             "country_code", "kind"};
        if (t.header != expected)
            throw std::runtime_error("header mismatch in " + registry_csv_path);
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            const auto& row = t.rows[i];
            if (row.size() != 4)
                throw load_error(registry_csv_path, t.line_numbers[i],
                                 "wrong field count");
            auto kind = parse_institution_kind(trim(row[3]));
            if (!kind)
                throw load_error(registry_csv_path, t.line_numbers[i],
                                 "unknown kind '" + row[3] + "'");
            institutions.push_back({row[0], row[1], to_upper_ascii(trim(row[2])),
                                    *kind});
        }
    }
    std::vector<AliasRule> rules;
    if (!alias_csv_path.empty()) {
        csv::Table t = csv::read_file(alias_csv_path);
        std::vector<std::string> expected = {"pattern", "target_institution_id",
                                             "rule_kind", "fuzzy_budget"};
        if (t.header != expected)
            throw std::runtime_error("header mismatch in " + alias_csv_path);
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            const auto& row = t.rows[i];
            if (row.size() != 4)
                throw load_error(alias_csv_path, t.line_numbers[i],
                                 "wrong field count");
            AliasRule rule;
            rule.pattern = row[0];
            rule.target_institution_id = row[1];
            auto kind = parse_rule_kind(trim(row[2]));
            if (!kind)
                throw load_error(alias_csv_path, t.line_numbers[i],
                                 "unknown rule_kind '" + row[2] + "'");
            rule.kind = *kind;
            std::string budget = trim(row[3]);
            if (!budget.empty()) {
                auto v = parse_double(budget);
                if (!v)
                    throw load_error(alias_csv_path, t.line_numbers[i],
                                     "bad fuzzy_budget");
                rule.fuzzy_budget = *v;
            }
            rules.push_back(std::move(rule));
        }
    }
    return from_rows(std::move(institutions), std::move(rules));
}

const CanonicalInstitution* Registry::find(std::string_view institution_id) const {
    auto it = by_id_.find(std::string(institution_id));
    return it == by_id_.end() ? nullptr : &institutions_[it->second];
}

MatchResult Registry::resolve(std::string_view raw_affiliation) const {
    MatchResult result;
    std::string norm = normalize_name(raw_affiliation);
    if (norm.empty()) return result;  // UNMATCHED

    if (auto it = exact_.find(norm); it != exact_.end()) {
        result.outcome = MatchOutcome::MATCHED;
        result.institution_id = it->second;
        result.rule = RuleKind::EXACT;
        return result;
    }

    std::set<std::string> department_hits;
    for (const auto& rule : department_rules_)
        if (contains_tokens(norm, rule.pattern))
            department_hits.insert(rule.target_institution_id);
    if (department_hits.size() == 1) {
        result.outcome = MatchOutcome::MATCHED;
        result.institution_id = *department_hits.begin();
        result.rule = RuleKind::DEPARTMENT_OF;
        return result;
    }
    if (department_hits.size() > 1) {
        result.outcome = MatchOutcome::AMBIGUOUS;
        result.candidates.assign(department_hits.begin(), department_hits.end());
        return result;
    }

    double best = 1.0;
    std::set<std::string> best_ids;
    for (const auto& rule : fuzzy_rules_) {
        double d = normalized_edit_distance(norm, rule.pattern);
        if (d > rule.fuzzy_budget) continue;
        if (d < best - 1e-12) {
            best = d;
            best_ids = {rule.target_institution_id};
        } else if (d <= best + 1e-12) {
            best_ids.insert(rule.target_institution_id);
        }
    }
    if (best_ids.size() == 1) {
        result.outcome = MatchOutcome::MATCHED;
        result.institution_id = *best_ids.begin();
        result.rule = RuleKind::FUZZY;
        result.distance = best;
        return result;
    }
    if (best_ids.size() > 1) {
        result.outcome = MatchOutcome::AMBIGUOUS;
        result.candidates.assign(best_ids.begin(), best_ids.end());
        result.distance = best;
        return result;
    }
    return result;  // UNMATCHED
}

AggregationResult aggregate_country(const std::vector<ResearcherRecord>& records,
                                    const std::vector<InstitutionMetrics>& metrics,
                                    const Registry& registry,
                                    const std::string& period,
                                    const AggregationPolicy& policy) {
    auto remap = [&](const std::string& code) {
        auto it = policy.country_remap.find(code);
        return it == policy.country_remap.end() ? code : it->second;
    };

    std::map<std::string, CountryAggregate> by_country;
    auto country_slot = [&](const std::string& code) -> CountryAggregate& {
        auto& agg = by_country[code];
        if (agg.country_code.empty()) {
            agg.country_code = code;
            agg.period = period;
        }
        return agg;
    };

    AggregationResult result;
    std::set<std::string> roster_countries, metrics_countries;

    for (const auto& rec : records) {
        MatchResult match = registry.resolve(rec.raw_affiliation);
        result.audit.push_back({rec.raw_affiliation, match.outcome,
                                match.institution_id, match.distance});
        if (match.outcome == MatchOutcome::AMBIGUOUS) {
            if (!policy.allow_ambiguous_as_unmatched)
                throw AmbiguousMatchError("ambiguous affiliation: '" +
                                          rec.raw_affiliation + "'");
            match.outcome = MatchOutcome::UNMATCHED;
            ++result.ambiguous_downgraded;
        }
        std::string country;
        if (match.outcome == MatchOutcome::MATCHED) {
            const CanonicalInstitution* inst = registry.find(match.institution_id);
            if (inst->kind == InstitutionKind::HOSPITAL) {
                ++result.hospital_excluded;
                continue;
            }
            country = remap(inst->country_code);
            ++result.matched_counted;
        } else if (policy.use_record_country_on_unmatched &&
                   rec.country_code != "UNK") {
            country = remap(rec.country_code);
            ++result.fallback_counted;
        } else {
            ++result.unmatched_no_country;
            continue;
        }
        roster_countries.insert(country);
        auto& agg = country_slot(country);
        if (rec.list_source == ListSource::IBB)
            ++agg.ibb_hcr;
        else
            ++agg.wos_hcr;
    }

    bool period_seen = false;
    std::map<std::string, std::set<std::string>> institutions_per_country;
    for (const auto& m : metrics) {
        if (m.period != period) continue;
        period_seen = true;
        if (!policy.relax_metrics_filter &&
            (m.counting_mode != policy.counting_mode ||
             m.field_label != policy.field_label))
            continue;
        MatchResult match = registry.resolve(m.institution_raw_name);
        if (match.outcome != MatchOutcome::MATCHED) {
            ++result.metrics_rows_unmatched;
            continue;
        }
        const CanonicalInstitution* inst = registry.find(match.institution_id);
        std::string country = remap(inst->country_code);
        metrics_countries.insert(country);
        auto& agg = country_slot(country);
        agg.P = agg.P.value_or(0.0) + m.P;
        agg.p_top1 = agg.p_top1.value_or(0.0) + m.p_top1;
        agg.p_top5 = agg.p_top5.value_or(0.0) + m.p_top5;
        agg.p_top10 = agg.p_top10.value_or(0.0) + m.p_top10;
        agg.p_top50 = agg.p_top50.value_or(0.0) + m.p_top50;
        institutions_per_country[country].insert(match.institution_id);
        ++result.metrics_rows_used;
    }
    if (!metrics.empty() && !period_seen)
        throw std::runtime_error("period '" + period + "' absent from metrics");

    for (auto& [country, ids] : institutions_per_country)
        by_country[country].matched_institutions = static_cast<int>(ids.size());

    if (!records.empty() && !metrics.empty()) {
        bool any_common = std::any_of(
            roster_countries.begin(), roster_countries.end(),
            [&](const std::string& c) { return metrics_countries.count(c) > 0; });
        if (!any_common)
            throw std::runtime_error("no country appears in both roster and metrics");
    }

    result.aggregates.reserve(by_country.size());
    for (auto& [code, agg] : by_country) result.aggregates.push_back(std::move(agg));
    return result;
}

}  // namespace hcr
