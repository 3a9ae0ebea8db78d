// Acceptance harness: runs every release gate offline against the bundled
// fixtures and prints one PASS/FAIL line per criterion. Exit code is the
// number of failed criteria.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hcr/aggregates.hpp"
#include "hcr/commands.hpp"
#include "hcr/csv.hpp"
#include "hcr/extrapolation.hpp"
#include "hcr/ranking.hpp"
#include "hcr/stats.hpp"
#include "hcr/worldbank.hpp"
#include "test_util.hpp"

using namespace hcr;
using nlohmann::json;

namespace {

const std::string kData = HCR_DATA_DIR;

struct Harness {
    int failures = 0;
    int index = 0;

    void run(const std::string& what, const std::function<bool(std::string&)>& check) {
        ++index;
        std::string detail;
        bool ok = false;
        try {
            ok = check(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("[%s] criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", index,
                    what.c_str(), detail.empty() ? "" : " -- ", detail.c_str());
        if (!ok) ++failures;
    }
};

bool close_abs(double got, double want, double tol) {
    return std::fabs(got - want) <= tol;
}

bool close_rel(double got, double want, double rel) {
    return std::fabs(got - want) <= rel * std::fabs(want);
}

bool within_order_of_magnitude(double p, double reference) {
    if (!(p > 0) || !(reference > 0)) return false;
    double ratio = std::log10(p) - std::log10(reference);
    return std::fabs(ratio) <= 1.0;
}

std::map<std::string, std::vector<std::string>> rows_by_key(const std::string& path,
                                                            std::size_t col = 0) {
    csv::Table t = csv::read_file(path);
    std::map<std::string, std::vector<std::string>> rows;
    for (const auto& row : t.rows) rows[row[col]] = row;
    return rows;
}

PairedSeries series_from_table3(const std::string& left, const std::string& right) {
    auto aggregates = read_aggregates_csv(kData + "/table3_aggregates.csv");
    std::vector<std::string> labels;
    std::vector<double> xs, ys;
    for (const auto& a : aggregates) {
        EpModel m = ep_from_metrics(*a.P, *a.p_top10);
        double calc = static_cast<double>(
            round_half_away(predict_wos(static_cast<double>(a.ibb_hcr), m)));
        labels.push_back(a.country_code);
        xs.push_back(left == "calculated" ? calc : static_cast<double>(a.wos_hcr));
        ys.push_back(right == "reported" ? static_cast<double>(a.wos_hcr) : calc);
    }
    return PairedSeries::make(labels, xs, ys);
}

// --- criteria ---------------------------------------------------------

bool criterion_table3(std::string& detail) {
    // Reference predictions for the bundled strict-tier fixture.
    const std::map<std::string, long long> expected = {
        {"AUS", 62},  {"AUT", 11}, {"BEL", 18},  {"BRA", 1},  {"CAN", 89},
        {"DNK", 24},  {"FIN", 9},  {"FRA", 64},  {"DEU", 112}, {"GRC", 4},
        {"IND", 7},   {"IRN", 1},  {"IRL", 6},   {"ISR", 14}, {"ITA", 28},
        {"JPN", 26},  {"NLD", 59}, {"NZL", 8},   {"NOR", 10}, {"POL", 1},
        {"SAU", 1},   {"SGP", 9},  {"ZAF", 3},   {"KOR", 5},  {"ESP", 17},
        {"SWE", 29},  {"CHE", 58}, {"TWN", 5},   {"TUR", 2},  {"GBR", 271},
        {"USA", 1434}};
    testfs::TempDir out("acc1");
    RunConfig c;
    c.aggregates_path = kData + "/table3_aggregates.csv";
    c.out_dir = out.str();
    std::ostringstream log;
    if (cmd_predict_wos(c, log) != kExitOk) {
        detail = "predict-wos failed";
        return false;
    }
    auto rows = rows_by_key(out.file("predict_wos.csv"));
    if (rows.size() != 31) {
        detail = "expected 31 countries, got " + std::to_string(rows.size());
        return false;
    }
    int exact = 0;
    for (const auto& [code, want] : expected) {
        long long got = std::stoll(rows.at(code)[7]);
        if (std::llabs(got - want) > 1) {
            detail = code + ": calculated " + std::to_string(got) + " vs " +
                     std::to_string(want);
            return false;
        }
        if (got == want) ++exact;
    }
    detail = "31/31 within 1, " + std::to_string(exact) + "/31 exact";
    return true;
}

bool criterion_54_correlations(std::string& detail) {
    PairedSeries series = series_from_table3("calculated", "reported");
    CorrelationResult sp = spearman(series);
    CorrelationResult pe = pearson(series, {"USA"});
    char buf[160];
    std::snprintf(buf, sizeof(buf), "spearman %.4f (p %.2e), pearson %.4f (p %.2e)",
                  sp.r, sp.p_two_sided, pe.r, pe.p_two_sided);
    detail = buf;
    if (!close_abs(sp.r, 0.83, 0.01)) return false;
    if (!within_order_of_magnitude(sp.p_two_sided, 7.6e-9)) return false;
    if (!close_abs(pe.r, 0.97, 0.01)) return false;
    if (pe.n != 30) return false;
    return within_order_of_magnitude(pe.p_two_sided, 5.1e-18);
}

bool criterion_53_correlations(std::string& detail) {
    auto aggregates = read_aggregates_csv(kData + "/table2_aggregates.csv");
    std::vector<std::string> labels;
    std::vector<double> wos, ibb;
    for (const auto& a : aggregates) {
        labels.push_back(a.country_code);
        wos.push_back(static_cast<double>(a.wos_hcr));
        ibb.push_back(static_cast<double>(a.ibb_hcr));
    }
    if (labels.size() != 33) {
        detail = "fixture has " + std::to_string(labels.size()) + " countries";
        return false;
    }
    PairedSeries series = PairedSeries::make(labels, wos, ibb);
    CorrelationResult sp = spearman(series);
    CorrelationResult pe = pearson(series, {"USA"});
    char buf[160];
    std::snprintf(buf, sizeof(buf), "spearman %.4f (p %.2e), pearson %.4f (p %.2e)",
                  sp.r, sp.p_two_sided, pe.r, pe.p_two_sided);
    detail = buf;
    if (!close_abs(sp.r, 0.80, 0.01)) return false;
    if (!within_order_of_magnitude(sp.p_two_sided, 2.1e-8)) return false;
    return close_abs(pe.r, 0.97, 0.005);
}

bool criterion_global_shares(std::string& detail) {
    auto aggregates = read_aggregates_csv(kData + "/table1_aggregates.csv");
    auto entries = rank_countries(aggregates, RankMetric::IBB_HCR, 30, 159684);
    double usa = 0, gbr = 0, top10 = 0;
    for (const auto& e : entries) {
        if (e.country_code == "USA" && e.rank == 1) usa = e.value / 159684;
        if (e.country_code == "GBR") gbr = e.value / 159684;
        if (e.rank == 10) top10 = e.cumulative_share;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "USA %.2f%%, UK %.2f%%, top-10 %.2f%%",
                  100 * usa, 100 * gbr, 100 * top10);
    detail = buf;
    // percentage-point tolerances
    return close_abs(100 * usa, 42.6, 0.05) && close_abs(100 * gbr, 9.4, 0.05) &&
           close_abs(100 * top10, 80.4, 0.1);
}

bool criterion_table1_normalization(std::string& detail) {
    testfs::TempDir out("acc5");
    RunConfig c;
    c.aggregates_path = kData + "/table1_aggregates.csv";
    c.cache_path = kData + "/worldbank_2019.csv";
    c.override_path = kData + "/overrides_2019.csv";
    c.offline = true;
    c.out_dir = out.str();
    std::ostringstream log;
    if (cmd_rank(c, log) != kExitOk) {
        detail = "rank failed";
        return false;
    }
    auto rows = rows_by_key(out.file("rank_raw.csv"), 1);
    auto field = [&](const std::string& code, std::size_t col) {
        return std::stod(rows.at(code)[col]);
    };
    struct Check {
        const char* code;
        std::size_t col;
        double want;
    };
    // col 3 = per-million, col 5 = per-billion-GDP (full precision columns)
    const Check checks[] = {{"CHE", 3, 296.90}, {"DNK", 3, 257.12},
                            {"SWE", 3, 247.69}, {"GBR", 5, 5.30},
                            {"SWE", 5, 4.79}};
    std::string parts;
    for (const auto& chk : checks) {
        double got = field(chk.code, chk.col);
        if (!close_rel(got, chk.want, 0.01)) {
            detail = std::string(chk.code) + " got " + std::to_string(got) +
                     " want " + std::to_string(chk.want);
            return false;
        }
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%s %.2f ", chk.code, got);
        parts += buf;
    }
    detail = parts + "(all within 1%)";
    return true;
}

// The full-scale validation corpus is not redistributable, so this gate
// is property-based plus a small end-to-end pipeline run checked against
// brute-force statistics.
bool criterion_validation_substitute(std::string& detail) {
    std::mt19937 rng(20200821);
    // heavy-tailed counts: exponent of a normal, rounded
    std::lognormal_distribution<double> heavy(4.0, 2.0);
    for (int round = 0; round < 200; ++round) {
        std::size_t n = 5 + rng() % 60;
        std::vector<std::string> labels;
        std::vector<double> counts, transformed;
        for (std::size_t i = 0; i < n; ++i) {
            labels.push_back("c" + std::to_string(i));
            double v = std::floor(heavy(rng));
            counts.push_back(v);
            // strictly increasing noise-free transform
            transformed.push_back(3.0 * std::log1p(v) + v / 7.0);
        }
        CorrelationResult sp;
        try {
            sp = spearman(PairedSeries::make(labels, counts, transformed));
        } catch (const StatError&) {
            continue;  // constant draw, vanishingly rare
        }
        if (sp.r != 1.0) {
            detail = "round " + std::to_string(round) + ": rho " +
                     std::to_string(sp.r);
            return false;
        }
    }

    // 10-country synthetic fixture through the whole pipeline
    testfs::TempDir dir("acc6");
    std::ostringstream reg, alias, roster, metrics;
    reg << "institution_id,canonical_name,country_code,kind\n";
    alias << "pattern,target_institution_id,rule_kind,fuzzy_budget\n";
    roster << "researcher_id,full_name,raw_affiliation,country_code,"
              "first_pub_year,list_source,list_year\n";
    metrics << "institution_raw_name,country_code,period,counting_mode,"
               "field_label,P,p_top1,p_top5,p_top10,p_top50\n";
    std::vector<std::string> codes = {"AAA", "BBB", "CCC", "DDD", "EEE",
                                      "FFF", "GGG", "HHH", "III", "JJJ"};
    std::vector<double> ibb_counts, ptop5;
    int rid = 0;
    for (std::size_t i = 0; i < codes.size(); ++i) {
        std::string uni = "University of " + codes[i];
        reg << "u" << i << "," << uni << "," << codes[i] << ",UNIVERSITY\n";
        long long researchers = 2 + static_cast<long long>(rng() % 40);
        ibb_counts.push_back(static_cast<double>(researchers));
        for (long long k = 0; k < researchers; ++k)
            roster << "r" << rid++ << ",Name,Dept " << (k % 3) << ". " << uni << ","
                   << codes[i] << ",19" << 60 + (k % 40) << ",IBB,2020\n";
        alias << "dept 0 university of " << codes[i] << ",u" << i
              << ",DEPARTMENT_OF,\n";
        // noise wide enough to flip some rank pairs
        double p5 = 50.0 * researchers + (rng() % 300);
        ptop5.push_back(p5);
        // P large enough that 4*p5 <= P holds for every draw
        metrics << uni << "," << codes[i] << ",2006-2009,FRACTIONAL,All sciences,"
                << 500.0 * researchers + 4000 << "," << p5 / 5 << "," << p5 << ","
                << p5 * 1.8 << "," << p5 * 4 << "\n";
    }
    testfs::write_file(dir.file("reg.csv"), reg.str());
    testfs::write_file(dir.file("alias.csv"), alias.str());
    testfs::write_file(dir.file("roster.csv"), roster.str());
    testfs::write_file(dir.file("metrics.csv"), metrics.str());

    RunConfig c;
    c.roster_path = dir.file("roster.csv");
    c.metrics_path = dir.file("metrics.csv");
    c.registry_path = dir.file("reg.csv");
    c.alias_path = dir.file("alias.csv");
    c.out_dir = dir.file("out");
    std::ostringstream log;
    if (cmd_validate(c, log) != kExitOk) {
        detail = "validate pipeline failed: " + log.str();
        return false;
    }
    std::ifstream in(dir.file("out/validate_correlations.json"));
    json j = json::parse(in);
    if (j["spearman"]["n"] != 10) {
        detail = "pipeline dropped countries; n = " +
                 j["spearman"]["n"].dump();
        return false;
    }

    // brute-force coefficients from the known fixture values
    double want_sp = oracle::reference_pearson(oracle::reference_ranks(ibb_counts),
                                               oracle::reference_ranks(ptop5));
    double got_sp = j["spearman"]["r"].get<double>();
    if (!close_rel(got_sp, want_sp, 1e-12)) {
        detail = "spearman " + std::to_string(got_sp) + " vs brute force " +
                 std::to_string(want_sp);
        return false;
    }
    double want_pe = oracle::reference_pearson(ibb_counts, ptop5);
    // the pipeline excludes USA by default; USA is not in this fixture
    double got_pe = j["pearson"]["r"].get<double>();
    if (!close_rel(got_pe, want_pe, 1e-12)) {
        detail = "pearson " + std::to_string(got_pe) + " vs brute force " +
                 std::to_string(want_pe);
        return false;
    }
    char buf[120];
    std::snprintf(buf, sizeof(buf),
                  "200 monotone sets exact; pipeline rho %.4f matches brute force",
                  got_sp);
    detail = buf;
    return true;
}

bool criterion_extrapolation_properties(std::string& detail) {
    const double levels[] = {0.01, 0.1, 1.0, 10.0, 100.0};
    for (double ep : {0.04, 0.107, 0.145, 0.3, 0.8}) {
        EpModel m{ep, 0, 0};
        // identity at x = 100, bit-exact
        for (double P : {1.0, 71777.0, 0.125, 9.9e12}) {
            if (ptop_from_total(P, m, PercentileLevel(100)) != P) {
                detail = "identity broke at ep " + std::to_string(ep);
                return false;
            }
        }
        // composition over the 5x5x5 grid at 1e-12 relative
        for (double x : levels)
            for (double y : levels)
                for (double z : levels) {
                    double chained = ptop_convert(
                        ptop_convert(500, m, PercentileLevel(x), PercentileLevel(y)),
                        m, PercentileLevel(y), PercentileLevel(z));
                    double direct =
                        ptop_convert(500, m, PercentileLevel(x), PercentileLevel(z));
                    if (!close_rel(chained, direct, 1e-12)) {
                        detail = "composition broke at ep " + std::to_string(ep);
                        return false;
                    }
                }
        // exponent exactness for (5, 0.05) at 1e-15 relative
        for (double ibb : {43.0, 5441.0, 68016.0}) {
            double got = predict_wos(ibb, m);
            if (!close_rel(got, ibb * ep * ep, 1e-15)) {
                detail = "exponent exactness broke at ep " + std::to_string(ep);
                return false;
            }
        }
    }
    detail = "identity bit-exact, composition 1e-12, exponent 1e-15";
    return true;
}

bool criterion_stats_oracles(std::string& detail) {
    // Spearman == Pearson over average ranks, exactly, with ties
    std::mt19937 rng(31337);
    std::uniform_int_distribution<int> value(0, 9);
    for (int round = 0; round < 1000; ++round) {
        std::size_t n = 4 + rng() % 12;
        std::vector<std::string> labels;
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < n; ++i) {
            labels.push_back("c" + std::to_string(i));
            xs.push_back(value(rng));
            ys.push_back(value(rng));
        }
        auto series = PairedSeries::make(labels, xs, ys);
        CorrelationResult sp;
        try {
            sp = spearman(series);
        } catch (const StatError&) {
            continue;
        }
        CorrelationResult pe =
            pearson(PairedSeries::make(labels, rank_vector(xs), rank_vector(ys)));
        if (sp.r != pe.r) {
            detail = "rank identity broke in round " + std::to_string(round);
            return false;
        }
    }
    // Pearson affine invariance at 1e-12
    std::normal_distribution<double> gauss(0, 5);
    for (int round = 0; round < 200; ++round) {
        std::vector<std::string> labels;
        std::vector<double> xs, ys, sx;
        for (int i = 0; i < 12; ++i) {
            labels.push_back("c" + std::to_string(i));
            xs.push_back(gauss(rng));
            ys.push_back(gauss(rng));
        }
        for (double x : xs) sx.push_back(0.37 * x + 42.0);
        double a = pearson(PairedSeries::make(labels, xs, ys)).r;
        double b = pearson(PairedSeries::make(labels, sx, ys)).r;
        if (!close_abs(a, b, 1e-12)) {
            detail = "affine invariance broke";
            return false;
        }
    }
    // t tail against the quadrature oracle, 1e-8 relative, |t| <= 100
    for (int df : {1, 5, 30, 53}) {
        for (double t : {0.3, 1.0, 2.5, 7.42, 20.0, 55.0, 100.0}) {
            double got = t_sf_two_sided(t, df);
            double want = oracle::t_sf_two_sided_by_quadrature(t, df);
            if (!close_rel(got, want, 1e-8)) {
                detail = "t oracle broke at df " + std::to_string(df) + " t " +
                         std::to_string(t);
                return false;
            }
        }
    }
    // log-space stays finite down to p = 1e-300 and beyond
    double deep = log_t_sf_two_sided(4.5e150, 2);  // p ~ 1e-301
    double p_deep = t_sf_two_sided(4.5e150, 2);
    if (!std::isfinite(deep) || deep > std::log(1e-295)) {
        detail = "log tail not deep enough";
        return false;
    }
    if (!(p_deep > 0)) {
        detail = "linear tail underflowed to zero too early";
        return false;
    }
    char buf[120];
    std::snprintf(buf, sizeof(buf), "rank identity, affine, quadrature ok; log10 p reaches %.1f",
                  deep / std::log(10.0));
    detail = buf;
    return true;
}

bool criterion_comparison_filter(std::string& detail) {
    // The 33 retained countries plus nine one-WoS countries, eight
    // two-WoS countries and China; the filter must remove exactly those
    // 18 and keep the rest.
    auto aggregates = read_aggregates_csv(kData + "/table2_aggregates.csv");
    std::size_t retained_input = aggregates.size();
    auto make = [](const std::string& code, long long wos) {
        CountryAggregate a;
        a.country_code = code;
        a.period = "2006-2009";
        a.ibb_hcr = 100;
        a.wos_hcr = wos;
        return a;
    };
    for (int i = 0; i < 9; ++i)
        aggregates.push_back(make("Q" + std::string(1, char('A' + i)) + "X", 1));
    for (int i = 0; i < 8; ++i)
        aggregates.push_back(make("R" + std::string(1, char('A' + i)) + "X", 2));
    aggregates.push_back(make("CHN", 140));

    auto filtered = comparison_filter(aggregates, 3, {"CHN"});
    char buf[120];
    std::snprintf(buf, sizeof(buf), "%zu -> %zu countries", aggregates.size(),
                  filtered.size());
    detail = buf;
    if (filtered.size() != 33 || retained_input != 33) return false;
    for (const auto& a : filtered) {
        if (a.country_code == "CHN") return false;
        if (a.wos_hcr < 3) return false;
    }
    // idempotent
    return comparison_filter(filtered, 3, {"CHN"}).size() == 33;
}

bool criterion_determinism(std::string& detail) {
    // Re-run each analysis command with identical inputs into the same
    // directory and demand byte-identical tables and manifests.
    struct Step {
        const char* name;
        std::function<int(const RunConfig&, std::ostream&)> fn;
        std::function<void(RunConfig&)> setup;
    };
    const std::vector<Step> steps = {
        {"predict-wos", cmd_predict_wos,
         [](RunConfig& c) { c.aggregates_path = kData + "/table3_aggregates.csv"; }},
        {"validate", cmd_validate,
         [](RunConfig& c) {
             c.aggregates_path = kData + "/table2_aggregates.csv";
             c.validate_left = "wos";
             c.validate_right = "ibb";
         }},
        {"rank", cmd_rank,
         [](RunConfig& c) {
             c.aggregates_path = kData + "/table1_aggregates.csv";
             c.cache_path = kData + "/worldbank_2019.csv";
             c.override_path = kData + "/overrides_2019.csv";
             c.offline = true;
         }},
        {"sweep-y", cmd_sweep_y,
         [](RunConfig& c) {
             c.aggregates_path = kData + "/table3_aggregates.csv";
             c.y_grid = {0.5, 0.1, 0.05, 0.01};
         }},
        {"ingest", cmd_ingest,
         [](RunConfig& c) {
             c.roster_path = kData + "/demo/roster_ibb.csv";
             c.metrics_path = kData + "/demo/metrics.csv";
         }},
        {"aggregate", cmd_aggregate,
         [](RunConfig& c) {
             c.roster_path = kData + "/demo/roster_ibb.csv";
             c.metrics_path = kData + "/demo/metrics.csv";
             c.registry_path = kData + "/registry_starter.csv";
             c.alias_path = kData + "/aliases_starter.csv";
         }},
        {"plotdata", cmd_plotdata,
         [](RunConfig& c) {
             c.aggregates_path = kData + "/table3_aggregates.csv";
             c.plot_what = "fig5";
         }},
        {"fetch-indicators", cmd_fetch_indicators,
         [](RunConfig& c) {
             c.countries = {"CHE", "GBR", "TWN"};
             c.cache_path = kData + "/worldbank_2019.csv";
             c.override_path = kData + "/overrides_2019.csv";
             c.offline = true;
         }},
    };
    for (const auto& step : steps) {
        testfs::TempDir out(std::string("acc10_") + step.name);
        RunConfig c;
        step.setup(c);
        c.out_dir = out.str();
        std::ostringstream log;
        if (step.fn(c, log) != kExitOk) {
            detail = std::string(step.name) + " failed";
            return false;
        }
        std::map<std::string, std::string> first;
        for (const auto& e : std::filesystem::directory_iterator(out.str()))
            first[e.path().filename().string()] = testfs::read_file(e.path().string());
        std::ostringstream log2;
        if (step.fn(c, log2) != kExitOk) {
            detail = std::string(step.name) + " re-run failed";
            return false;
        }
        for (const auto& e : std::filesystem::directory_iterator(out.str())) {
            std::string name = e.path().filename().string();
            if (testfs::read_file(e.path().string()) != first.at(name)) {
                detail = std::string(step.name) + ": " + name + " differs on re-run";
                return false;
            }
        }
    }
    detail = "all 8 commands re-run byte-identically (manifests included)";
    return true;
}

}  // namespace

int main() {
    Harness h;
    h.run("strict-tier table reproduced (round half away, within 1)",
          criterion_table3);
    h.run("calculated-vs-reported correlations (0.83 spearman, 0.97 pearson)",
          criterion_54_correlations);
    h.run("33-country WoS/IBB correlations (0.80 spearman, 0.97 pearson)",
          criterion_53_correlations);
    h.run("global shares (USA 42.6%, UK 9.4%, top-10 80.4%)",
          criterion_global_shares);
    h.run("per-capita and per-GDP normalization within 1% of the reference",
          criterion_table1_normalization);
    h.run("validation substitute: monotone-transform property + pipeline vs "
          "brute force",
          criterion_validation_substitute);
    h.run("extrapolation identities (x=100 bit-exact, composition, exponent)",
          criterion_extrapolation_properties);
    h.run("statistics oracles (rank identity, affine, quadrature, log tail)",
          criterion_stats_oracles);
    h.run("comparison filter removes 9+8 low-count countries plus China, "
          "keeping 33",
          criterion_comparison_filter);
    h.run("byte-identical re-runs (tables and manifests)", criterion_determinism);

    std::printf("%d/%d criteria passed\n", h.index - h.failures, h.index);
    return h.failures;
}
