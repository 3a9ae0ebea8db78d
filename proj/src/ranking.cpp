#include "hcr/ranking.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "hcr/stats.hpp"

namespace hcr {

namespace {

struct Valued {
    std::string country;
    double value;
};

std::vector<RankingEntry> build_entries(std::vector<Valued> rows, long long threshold,
                                        double global_total) {
    std::erase_if(rows, [&](const Valued& v) {
        return v.value < static_cast<double>(threshold);
    });
    std::sort(rows.begin(), rows.end(), [](const Valued& a, const Valued& b) {
        if (a.value != b.value) return a.value > b.value;
        return a.country < b.country;
    });
    std::vector<RankingEntry> entries;
    entries.reserve(rows.size());
    double running = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        running += rows[i].value;
        RankingEntry e;
        e.country_code = rows[i].country;
        e.value = rows[i].value;
        e.rank = static_cast<int>(i + 1);
        e.cumulative_share = global_total > 0 ? running / global_total : 0.0;
        entries.push_back(std::move(e));
    }
    return entries;
}

}  // namespace

std::vector<RankingEntry> rank_countries(const std::vector<CountryAggregate>& aggregates,
                                         RankMetric metric, long long threshold,
                                         double global_total, PercentileLevel x,
                                         PercentileLevel y,
                                         std::vector<std::string>* skipped) {
    if (aggregates.empty())
        throw std::invalid_argument("rank_countries: no aggregates");
    std::vector<Valued> rows;
    rows.reserve(aggregates.size());
    for (const auto& agg : aggregates) {
        double value = 0;
        switch (metric) {
            case RankMetric::IBB_HCR:
                value = static_cast<double>(agg.ibb_hcr);
                break;
            case RankMetric::WOS_HCR:
                value = static_cast<double>(agg.wos_hcr);
                break;
            case RankMetric::PREDICTED_WOS: {
                if (!agg.P || !agg.p_top10 || !(*agg.P > 0)) {
                    if (skipped) skipped->push_back(agg.country_code);
                    continue;
                }
                EpModel model = ep_from_metrics(*agg.P, *agg.p_top10);
                if (model.degenerate()) {
                    if (skipped) skipped->push_back(agg.country_code);
                    continue;
                }
                value = predict_wos(static_cast<double>(agg.ibb_hcr), model, x, y);
                break;
            }
        }
        rows.push_back({agg.country_code, value});
    }
    return build_entries(std::move(rows), threshold, global_total);
}

std::vector<std::string> normalize(std::vector<RankingEntry>& entries,
                                   const IndicatorSnapshot& snapshot,
                                   NormalizationBasis basis) {
    std::vector<std::string> missing;
    for (auto& e : entries) {
        auto it = snapshot.entries.find(e.country_code);
        if (it == snapshot.entries.end()) {
            missing.push_back(e.country_code);
            continue;
        }
        if (basis == NormalizationBasis::POPULATION) {
            if (!(it->second.population > 0))
                throw std::runtime_error("degenerate indicator: population for " +
                                         e.country_code);
            e.per_million = e.value / it->second.population * 1e6;
        } else {
            if (!(it->second.gdp_usd > 0))
                throw std::runtime_error("degenerate indicator: GDP for " +
                                         e.country_code);
            e.per_billion_gdp = e.value / (it->second.gdp_usd / 1e9);
        }
    }
    return missing;
}

std::vector<RankingEntry> rerank_by_normalized(const std::vector<RankingEntry>& entries,
                                               NormalizationBasis basis,
                                               double global_total) {
    std::vector<RankingEntry> kept;
    for (const auto& e : entries) {
        const auto& field = basis == NormalizationBasis::POPULATION
                                ? e.per_million
                                : e.per_billion_gdp;
        if (field) kept.push_back(e);
    }
    auto key = [&](const RankingEntry& e) {
        return basis == NormalizationBasis::POPULATION ? *e.per_million
                                                       : *e.per_billion_gdp;
    };
    std::sort(kept.begin(), kept.end(), [&](const RankingEntry& a, const RankingEntry& b) {
        if (key(a) != key(b)) return key(a) > key(b);
        return a.country_code < b.country_code;
    });
    double running = 0;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        kept[i].rank = static_cast<int>(i + 1);
        running += kept[i].value;
        kept[i].cumulative_share = global_total > 0 ? running / global_total : 0.0;
    }
    return kept;
}

std::vector<CountryAggregate> comparison_filter(
    const std::vector<CountryAggregate>& aggregates, long long min_wos,
    const std::vector<std::string>& exclusions) {
    std::set<std::string> drop(exclusions.begin(), exclusions.end());
    std::vector<CountryAggregate> kept;
    for (const auto& agg : aggregates)
        if (agg.wos_hcr >= min_wos && !drop.count(agg.country_code))
            kept.push_back(agg);
    return kept;
}

std::vector<ScatterRow> rank_scatter(
    const std::vector<std::pair<std::string, double>>& left,
    const std::vector<std::pair<std::string, double>>& right) {
    std::map<std::string, double> right_by_country(right.begin(), right.end());
    std::set<std::string> left_set, right_set;
    for (const auto& [c, v] : left) left_set.insert(c);
    for (const auto& [c, v] : right) right_set.insert(c);
    if (left_set != right_set || left_set.size() != left.size()) {
        std::string diff;
        for (const auto& c : left_set)
            if (!right_set.count(c)) diff += " -" + c;
        for (const auto& c : right_set)
            if (!left_set.count(c)) diff += " +" + c;
        if (diff.empty()) diff = " (duplicate countries)";
        throw std::invalid_argument("rank_scatter: country sets differ:" + diff);
    }

    std::vector<double> lv, rv;
    lv.reserve(left.size());
    rv.reserve(left.size());
    for (const auto& [c, v] : left) {
        lv.push_back(v);
        rv.push_back(right_by_country.at(c));
    }
    std::vector<double> lr = rank_vector(lv), rr = rank_vector(rv);

    std::vector<ScatterRow> rows;
    rows.reserve(left.size());
    for (std::size_t i = 0; i < left.size(); ++i)
        rows.push_back({left[i].first, lr[i], rr[i], lr[i] - rr[i]});
    std::sort(rows.begin(), rows.end(), [](const ScatterRow& a, const ScatterRow& b) {
        if (a.rank_left != b.rank_left) return a.rank_left < b.rank_left;
        return a.country < b.country;
    });
    return rows;
}

OnsetResult career_onset_distribution(const std::vector<ResearcherRecord>& records) {
    std::map<int, long long> per_year;
    std::size_t skipped = 0;
    for (const auto& rec : records) {
        if (rec.first_pub_year)
            ++per_year[*rec.first_pub_year];
        else
            ++skipped;
    }
    if (per_year.empty())
        throw std::runtime_error("no records carry a first publication year");

    OnsetResult result;
    result.skipped = skipped;
    int first = per_year.begin()->first;
    int last = per_year.rbegin()->first;
    long long total = 0;
    for (const auto& [year, count] : per_year) total += count;

    long long running = 0;
    for (int year = first; year <= last; ++year) {
        long long count = 0;
        if (auto it = per_year.find(year); it != per_year.end()) count = it->second;
        running += count;
        result.dist.years.push_back(year);
        result.dist.counts.push_back(count);
        result.dist.cumulative.push_back(running);
        // smallest year whose cumulative reaches half of the total
        if (result.dist.median_year == 0 && 2 * running >= total)
            result.dist.median_year = year;
    }
    return result;
}

}  // namespace hcr
