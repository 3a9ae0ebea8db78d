#include "hcr/commands.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hcr/aggregates.hpp"
#include "hcr/csv.hpp"
#include "hcr/extrapolation.hpp"
#include "hcr/format.hpp"
#include "hcr/ingest.hpp"
#include "hcr/manifest.hpp"
#include "hcr/ranking.hpp"
#include "hcr/registry.hpp"
#include "hcr/stats.hpp"
#include "hcr/worldbank.hpp"

namespace hcr {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir + "/" + name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + dir + "/" + name);
    return out;
}

json config_json(const RunConfig& c) {
    json j;
    j["aggregates_path"] = c.aggregates_path;
    j["alias_path"] = c.alias_path;
    j["allow_unmatched"] = c.allow_unmatched;
    j["apply_comparison_filter"] = c.apply_comparison_filter;
    j["cache_path"] = c.cache_path;
    j["counting_mode"] = to_string(c.counting_mode);
    j["countries"] = c.countries;
    j["country_remap"] = c.country_remap;
    j["field_label"] = c.field_label;
    j["filter_exclusions"] = c.filter_exclusions;
    j["global_total"] = c.global_total;
    j["ibb_list_year"] = c.ibb_list_year;
    j["indicator_year"] = c.indicator_year;
    j["ingest_list_year"] = c.ingest_list_year;
    j["ingest_source"] = to_string(c.ingest_source);
    j["metrics_path"] = c.metrics_path;
    j["min_wos"] = c.min_wos;
    j["offline"] = c.offline;
    j["out_dir"] = c.out_dir;
    j["override_path"] = c.override_path;
    j["pearson_exclusions"] = c.pearson_exclusions;
    j["period"] = c.period;
    j["rank_metric"] = c.rank_metric;
    j["plot_what"] = c.plot_what;
    j["registry_path"] = c.registry_path;
    j["roster_path"] = c.roster_path;
    j["threshold"] = c.threshold;
    j["validate_left"] = c.validate_left;
    j["validate_right"] = c.validate_right;
    j["wos_list_year"] = c.wos_list_year;
    j["wos_roster_path"] = c.wos_roster_path;
    j["x"] = c.x;
    j["y"] = c.y;
    j["y_grid"] = c.y_grid;
    return j;
}

json report_json(const IngestReport& report) {
    json rejects = json::array();
    for (const auto& r : report.rejects)
        rejects.push_back({{"line", r.line}, {"reason", r.reason}});
    return json{{"rows_read", report.rows_read},
                {"rows_accepted", report.rows_accepted},
                {"rejects", rejects},
                {"notes", report.notes}};
}

// Dispatcher shared by every command: translates exceptions to exit codes.
int run_guarded(std::ostream& log, const std::function<int()>& body) {
    try {
        return body();
    } catch (const AmbiguousMatchError& e) {
        log << "error: " << e.what() << " (rerun with --allow-unmatched to count "
            << "ambiguous affiliations as unmatched)\n";
        return kExitAmbiguous;
    } catch (const StatError& e) {
        log << "error: " << e.what() << '\n';
        return kExitStatPrecondition;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return kExitIoError;
    }
}

AggregationPolicy policy_from(const RunConfig& c) {
    AggregationPolicy p;
    p.allow_ambiguous_as_unmatched = c.allow_unmatched;
    p.counting_mode = c.counting_mode;
    p.field_label = c.field_label;
    p.country_remap = c.country_remap;
    return p;
}

// Aggregates either come precomputed or are built from the full pipeline.
std::vector<CountryAggregate> load_aggregates(const RunConfig& c,
                                              ManifestBuilder& manifest,
                                              std::ostream& log) {
    if (!c.aggregates_path.empty()) {
        manifest.add_input(c.aggregates_path);
        return read_aggregates_csv(c.aggregates_path);
    }
    if (c.roster_path.empty() || c.registry_path.empty())
        throw std::runtime_error(
            "need either --aggregates or --roster plus --registry");

    manifest.add_input(c.roster_path);
    manifest.add_input(c.wos_roster_path);
    manifest.add_input(c.metrics_path);
    manifest.add_input(c.registry_path);
    manifest.add_input(c.alias_path);

    RosterResult ibb = read_roster(c.roster_path, ListSource::IBB, c.ibb_list_year);
    std::vector<ResearcherRecord> records = std::move(ibb.records);
    if (!ibb.report.rejects.empty())
        log << "note: " << ibb.report.rejects.size() << " roster rows rejected\n";
    if (!c.wos_roster_path.empty()) {
        RosterResult wos =
            read_roster(c.wos_roster_path, ListSource::WOS, c.wos_list_year);
        if (!wos.report.rejects.empty())
            log << "note: " << wos.report.rejects.size() << " WoS roster rows rejected\n";
        records.insert(records.end(), wos.records.begin(), wos.records.end());
    }
    std::vector<InstitutionMetrics> metrics;
    if (!c.metrics_path.empty()) {
        MetricsResult m = read_metrics(c.metrics_path);
        if (!m.report.rejects.empty())
            log << "note: " << m.report.rejects.size() << " metrics rows rejected\n";
        metrics = std::move(m.metrics);
    }
    Registry registry = Registry::load(c.registry_path, c.alias_path);
    AggregationResult agg =
        aggregate_country(records, metrics, registry, c.period, policy_from(c));
    return std::move(agg.aggregates);
}

std::optional<double> metric_value(const CountryAggregate& a, const std::string& name,
                                   double x, double y) {
    if (name == "ibb") return static_cast<double>(a.ibb_hcr);
    if (name == "wos") return static_cast<double>(a.wos_hcr);
    if (name == "P") return a.P;
    if (name == "ptop1") return a.p_top1;
    if (name == "ptop5") return a.p_top5;
    if (name == "ptop10") return a.p_top10;
    if (name == "ptop50") return a.p_top50;
    if (name == "predicted") {
        if (!a.P || !a.p_top10 || !(*a.P > 0)) return std::nullopt;
        EpModel model = ep_from_metrics(*a.P, *a.p_top10);
        if (model.degenerate()) return std::nullopt;
        return predict_wos(static_cast<double>(a.ibb_hcr), model, PercentileLevel(x),
                           PercentileLevel(y));
    }
    throw std::runtime_error("unknown metric '" + name +
                             "' (expected ibb, wos, predicted, P, ptop1, ptop5, "
                             "ptop10 or ptop50)");
}

std::string format_scientific(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1e", v);
    return buf;
}

void write_correlations_csv(std::ostream& out,
                            const std::vector<CorrelationResult>& results) {
    out << "method,r,r_display,n,p_two_sided,p_display,log10_p,excluded\n";
    for (const auto& r : results) {
        std::string excluded;
        for (const auto& label : r.excluded) {
            if (!excluded.empty()) excluded += ';';
            excluded += label;
        }
        csv::write_row(out, {to_string(r.method), format_double(r.r),
                             format_fixed(r.r, 3), std::to_string(r.n),
                             format_double(r.p_two_sided),
                             format_scientific(r.p_two_sided),
                             format_double(r.log10_p), excluded});
    }
}

json correlation_json(const CorrelationResult& r) {
    std::vector<std::string> excluded = r.excluded;
    return json{{"method", to_string(r.method)}, {"r", r.r},       {"n", r.n},
                {"p_two_sided", r.p_two_sided},  {"log10_p", r.log10_p},
                {"excluded", excluded}};
}

void write_scatter_tables(const RunConfig& c, const std::string& stem,
                          const std::vector<std::pair<std::string, double>>& left,
                          const std::vector<std::pair<std::string, double>>& right,
                          const std::string& left_name, const std::string& right_name,
                          ManifestBuilder& manifest) {
    {
        auto out = open_out(c.out_dir, stem + "_data.csv");
        out << "country_code," << left_name << ',' << right_name << '\n';
        std::map<std::string, double> right_map(right.begin(), right.end());
        auto sorted = left;
        std::sort(sorted.begin(), sorted.end());
        for (const auto& [country, value] : sorted)
            csv::write_row(out, {country, format_double(value),
                                 format_double(right_map.at(country))});
        manifest.add_output(stem + "_data.csv");
    }
    {
        auto rows = rank_scatter(left, right);
        auto out = open_out(c.out_dir, stem + "_ranks.csv");
        out << "country_code,rank_" << left_name << ",rank_" << right_name
            << ",deviation\n";
        for (const auto& row : rows)
            csv::write_row(out, {row.country, format_double(row.rank_left),
                                 format_double(row.rank_right),
                                 format_double(row.deviation)});
        manifest.add_output(stem + "_ranks.csv");
    }
}

struct PredictRow {
    std::string country;
    long long ibb = 0;
    double P = 0, p_top10 = 0, ep = 0, calculated = 0;
    long long rounded = 0;
    long long reported = 0;
};

std::vector<PredictRow> predict_rows(const std::vector<CountryAggregate>& aggregates,
                                     double x, double y, std::ostream& log) {
    std::vector<PredictRow> rows;
    for (const auto& a : aggregates) {
        if (!a.P || !a.p_top10 || !(*a.P > 0)) {
            log << "warning: skipping " << a.country_code
                << " (missing P or p_top10)\n";
            continue;
        }
        EpModel model = ep_from_metrics(*a.P, *a.p_top10);
        if (model.degenerate()) {
            log << "warning: skipping " << a.country_code << " (degenerate ratio)\n";
            continue;
        }
        PredictRow r;
        r.country = a.country_code;
        r.ibb = a.ibb_hcr;
        r.P = *a.P;
        r.p_top10 = *a.p_top10;
        r.ep = model.ep;
        r.calculated = predict_wos(static_cast<double>(a.ibb_hcr), model,
                                   PercentileLevel(x), PercentileLevel(y));
        r.rounded = round_half_away(r.calculated);
        r.reported = a.wos_hcr;
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace

void apply_config_file(RunConfig& config, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json j = json::parse(in);
    for (const auto& [key, value] : j.items()) {
        if (key == "roster_path") config.roster_path = value.get<std::string>();
        else if (key == "wos_roster_path") config.wos_roster_path = value.get<std::string>();
        else if (key == "metrics_path") config.metrics_path = value.get<std::string>();
        else if (key == "registry_path") config.registry_path = value.get<std::string>();
        else if (key == "alias_path") config.alias_path = value.get<std::string>();
        else if (key == "aggregates_path") config.aggregates_path = value.get<std::string>();
        else if (key == "cache_path") config.cache_path = value.get<std::string>();
        else if (key == "override_path") config.override_path = value.get<std::string>();
        else if (key == "out_dir") config.out_dir = value.get<std::string>();
        else if (key == "period") config.period = value.get<std::string>();
        else if (key == "counting_mode") {
            auto m = parse_counting_mode(value.get<std::string>());
            if (!m) throw std::runtime_error("bad counting_mode in config");
            config.counting_mode = *m;
        } else if (key == "field_label") config.field_label = value.get<std::string>();
        else if (key == "x") config.x = value.get<double>();
        else if (key == "y") config.y = value.get<double>();
        else if (key == "threshold") config.threshold = value.get<long long>();
        else if (key == "min_wos") config.min_wos = value.get<long long>();
        else if (key == "pearson_exclusions")
            config.pearson_exclusions = value.get<std::vector<std::string>>();
        else if (key == "filter_exclusions")
            config.filter_exclusions = value.get<std::vector<std::string>>();
        else if (key == "rank_metric") config.rank_metric = value.get<std::string>();
        else if (key == "indicator_year") config.indicator_year = value.get<int>();
        else if (key == "offline") config.offline = value.get<bool>();
        else if (key == "allow_unmatched") config.allow_unmatched = value.get<bool>();
        else if (key == "apply_comparison_filter")
            config.apply_comparison_filter = value.get<bool>();
        else if (key == "global_total") config.global_total = value.get<double>();
        else if (key == "ibb_list_year") config.ibb_list_year = value.get<int>();
        else if (key == "wos_list_year") config.wos_list_year = value.get<int>();
        else if (key == "country_remap")
            config.country_remap = value.get<std::map<std::string, std::string>>();
        else if (key == "validate_left") config.validate_left = value.get<std::string>();
        else if (key == "validate_right") config.validate_right = value.get<std::string>();
        else if (key == "y_grid") config.y_grid = value.get<std::vector<double>>();
        else if (key == "plot_what") config.plot_what = value.get<std::string>();
        else if (key == "countries")
            config.countries = value.get<std::vector<std::string>>();
        else throw std::runtime_error("unknown config key: " + key);
    }
}

int cmd_ingest(const RunConfig& c, std::ostream& log) {
    return run_guarded(log, [&] {
        if (c.roster_path.empty() && c.metrics_path.empty())
            throw std::runtime_error("ingest needs --roster and/or --metrics");
        ManifestBuilder manifest("ingest");
        manifest.set_config(config_json(c));
        json reports;
        if (!c.roster_path.empty()) {
            manifest.add_input(c.roster_path);
            RosterResult r =
                read_roster(c.roster_path, c.ingest_source, c.ingest_list_year);
            auto out = open_out(c.out_dir, "roster_canonical.csv");
            write_roster(out, r.records);
            manifest.add_output("roster_canonical.csv");
            reports["roster"] = report_json(r.report);
            log << "roster: " << r.report.rows_accepted << '/' << r.report.rows_read
                << " rows accepted\n";
        }
        if (!c.metrics_path.empty()) {
            manifest.add_input(c.metrics_path);
            MetricsResult m = read_metrics(c.metrics_path);
            auto out = open_out(c.out_dir, "metrics_canonical.csv");
            write_metrics(out, m.metrics);
            manifest.add_output("metrics_canonical.csv");
            reports["metrics"] = report_json(m.report);
            log << "metrics: " << m.report.rows_accepted << '/' << m.report.rows_read
                << " rows accepted\n";
        }
        auto out = open_out(c.out_dir, "ingest_report.json");
        out << reports.dump(2) << '\n';
        manifest.add_output("ingest_report.json");
        manifest.write(c.out_dir);
        return kExitOk;
    });
}

int cmd_aggregate(const RunConfig& c, std::ostream& log) {
    return run_guarded(log, [&] {
        if (c.roster_path.empty() || c.registry_path.empty())
            throw std::runtime_error("aggregate needs --roster and --registry");
        ManifestBuilder manifest("aggregate");
        manifest.set_config(config_json(c));
        manifest.add_input(c.roster_path);
        manifest.add_input(c.wos_roster_path);
        manifest.add_input(c.metrics_path);
        manifest.add_input(c.registry_path);
        manifest.add_input(c.alias_path);

        RosterResult ibb = read_roster(c.roster_path, ListSource::IBB, c.ibb_list_year);
        std::vector<ResearcherRecord> records = std::move(ibb.records);
        if (!c.wos_roster_path.empty()) {
            RosterResult wos =
                read_roster(c.wos_roster_path, ListSource::WOS, c.wos_list_year);
            records.insert(records.end(), wos.records.begin(), wos.records.end());
        }
        std::vector<InstitutionMetrics> metrics;
        if (!c.metrics_path.empty()) metrics = read_metrics(c.metrics_path).metrics;
        Registry registry = Registry::load(c.registry_path, c.alias_path);

        AggregationResult agg =
            aggregate_country(records, metrics, registry, c.period, policy_from(c));

        {
            auto out = open_out(c.out_dir, "aggregates.csv");
            write_aggregates_csv(out, agg.aggregates);
            manifest.add_output("aggregates.csv");
        }
        {
            auto out = open_out(c.out_dir, "match_audit.csv");
            out << "raw_affiliation,outcome,institution_id,distance\n";
            for (const auto& row : agg.audit)
                csv::write_row(out, {row.raw_affiliation, to_string(row.outcome),
                                     row.institution_id, format_double(row.distance)});
            manifest.add_output("match_audit.csv");
        }
        {
            json j{{"countries", agg.aggregates.size()},
                   {"matched_counted", agg.matched_counted},
                   {"hospital_excluded", agg.hospital_excluded},
                   {"fallback_counted", agg.fallback_counted},
                   {"unmatched_no_country", agg.unmatched_no_country},
                   {"ambiguous_downgraded", agg.ambiguous_downgraded},
                   {"metrics_rows_used", agg.metrics_rows_used},
                   {"metrics_rows_unmatched", agg.metrics_rows_unmatched}};
            auto out = open_out(c.out_dir, "aggregate_report.json");
            out << j.dump(2) << '\n';
            manifest.add_output("aggregate_report.json");
        }
        manifest.write(c.out_dir);
        log << "aggregated " << records.size() << " researchers into "
            << agg.aggregates.size() << " countries\n";
        return kExitOk;
    });
}

int cmd_validate(const RunConfig& c, std::ostream& log) {
    return run_guarded(log, [&] {
        ManifestBuilder manifest("validate");
        manifest.set_config(config_json(c));
        std::vector<CountryAggregate> aggregates = load_aggregates(c, manifest, log);
        if (c.apply_comparison_filter)
            aggregates = comparison_filter(aggregates, c.min_wos, c.filter_exclusions);

        std::vector<std::string> labels;
        std::vector<double> xs, ys;
        std::vector<std::pair<std::string, double>> left, right;
        for (const auto& a : aggregates) {
            auto lv = metric_value(a, c.validate_left, c.x, c.y);
            auto rv = metric_value(a, c.validate_right, c.x, c.y);
            if (!lv || !rv) {
                log << "warning: skipping " << a.country_code << " (missing "
                    << (!lv ? c.validate_left : c.validate_right) << ")\n";
                continue;
            }
            labels.push_back(a.country_code);
            xs.push_back(*lv);
            ys.push_back(*rv);
            left.emplace_back(a.country_code, *lv);
            right.emplace_back(a.country_code, *rv);
        }
        if (labels.size() < 3)
            throw StatError("fewer than 3 countries with both metrics");

        PairedSeries series = PairedSeries::make(labels, xs, ys);
        CorrelationResult sp = spearman(series);
        CorrelationResult pe = pearson(series, c.pearson_exclusions);

        {
            auto out = open_out(c.out_dir, "validate_correlations.csv");
            write_correlations_csv(out, {sp, pe});
            manifest.add_output("validate_correlations.csv");
        }
        {
            json j{{"left", c.validate_left},
                   {"right", c.validate_right},
                   {"spearman", correlation_json(sp)},
                   {"pearson", correlation_json(pe)}};
            auto out = open_out(c.out_dir, "validate_correlations.json");
            out << j.dump(2) << '\n';
            manifest.add_output("validate_correlations.json");
        }
        write_scatter_tables(c, "validate_scatter", left, right, c.validate_left,
                             c.validate_right, manifest);
        manifest.write(c.out_dir);

        log << "spearman r=" << format_fixed(sp.r, 3) << " n=" << sp.n
            << " p=" << format_double(sp.p_two_sided) << '\n';
        log << "pearson r=" << format_fixed(pe.r, 3) << " n=" << pe.n
            << " p=" << format_double(pe.p_two_sided);
        if (!pe.excluded.empty()) {
            log << " (excluded:";
            for (const auto& e : pe.excluded) log << ' ' << e;
            log << ')';
        }
        log << '\n';
        return kExitOk;
    });
}

int cmd_predict_wos(const RunConfig& c, std::ostream& log) {
    return run_guarded(log, [&] {
        ManifestBuilder manifest("predict-wos");
        manifest.set_config(config_json(c));
        std::vector<CountryAggregate> aggregates = load_aggregates(c, manifest, log);
        std::vector<PredictRow> rows = predict_rows(aggregates, c.x, c.y, log);
        if (rows.empty()) throw std::runtime_error("no country has P and p_top10");

        {
            auto out = open_out(c.out_dir, "predict_wos.csv");
            out << "country_code,ibb_hcr,P,p_top10,ep,ep_display,calculated,"
                   "calculated_rounded,reported,deviation\n";
            for (const auto& r : rows)
                csv::write_row(out,
                               {r.country, std::to_string(r.ibb), format_double(r.P),
                                format_double(r.p_top10), format_double(r.ep),
                                format_fixed(r.ep, 3), format_double(r.calculated),
                                std::to_string(r.rounded), std::to_string(r.reported),
                                std::to_string(r.rounded - r.reported)});
            manifest.add_output("predict_wos.csv");
        }

        bool have_reported = false;
        for (const auto& r : rows)
            if (r.reported > 0) have_reported = true;
        if (have_reported && rows.size() >= 3) {
            std::vector<std::string> labels;
            std::vector<double> calc, rep;
            std::vector<std::pair<std::string, double>> left, right;
            for (const auto& r : rows) {
                labels.push_back(r.country);
                // correlate the rounded (displayed) predictions
                calc.push_back(static_cast<double>(r.rounded));
                rep.push_back(static_cast<double>(r.reported));
                left.emplace_back(r.country, static_cast<double>(r.rounded));
                right.emplace_back(r.country, static_cast<double>(r.reported));
            }
            PairedSeries series = PairedSeries::make(labels, calc, rep);
            CorrelationResult sp = spearman(series);
            CorrelationResult pe = pearson(series, c.pearson_exclusions);
            auto out = open_out(c.out_dir, "predict_wos_correlations.csv");
            write_correlations_csv(out, {sp, pe});
            manifest.add_output("predict_wos_correlations.csv");
            write_scatter_tables(c, "predict_scatter", left, right, "calculated",
                                 "reported", manifest);
            log << "spearman(calculated, reported) r=" << format_fixed(sp.r, 3)
                << " p=" << format_double(sp.p_two_sided) << '\n';
            log << "pearson (excl";
            for (const auto& e : pe.excluded) log << ' ' << e;
            log << ") r=" << format_fixed(pe.r, 3)
                << " p=" << format_double(pe.p_two_sided) << '\n';
        } else if (!have_reported) {
            log << "note: no reported counts; correlation block skipped\n";
        }
        manifest.write(c.out_dir);
        log << "predicted strict-tier counts for " << rows.size() << " countries\n";
        return kExitOk;
    });
}

int cmd_rank(const RunConfig& c, std::ostream& log) {
    return run_guarded(log, [&] {
        ManifestBuilder manifest("rank");
        manifest.set_config(config_json(c));
        std::vector<CountryAggregate> aggregates = load_aggregates(c, manifest, log);

        RankMetric metric;
        if (c.rank_metric == "ibb") metric = RankMetric::IBB_HCR;
        else if (c.rank_metric == "wos") metric = RankMetric::WOS_HCR;
        else if (c.rank_metric == "predicted") metric = RankMetric::PREDICTED_WOS;
        else throw std::runtime_error("unknown rank metric '" + c.rank_metric +
                                      "' (expected ibb, wos or predicted)");
        std::vector<std::string> skipped;
        std::vector<RankingEntry> entries =
            rank_countries(aggregates, metric, c.threshold, c.global_total,
                           PercentileLevel(c.x), PercentileLevel(c.y), &skipped);
        for (const auto& s : skipped)
            log << "warning: skipping " << s << " (missing P or p_top10)\n";

        IndicatorSnapshot snapshot;
        bool have_snapshot = !c.cache_path.empty() || !c.override_path.empty();
        if (have_snapshot) {
            std::vector<std::string> countries;
            for (const auto& e : entries) countries.push_back(e.country_code);
            FetchOptions opts;
            opts.cache_path = c.cache_path;
            opts.override_path = c.override_path;
            FetchResult fetched =
                fetch_indicators(countries, c.indicator_year,
                                 c.offline ? FetchMode::OFFLINE : FetchMode::LIVE, opts);
            snapshot = std::move(fetched.snapshot);
            for (const auto& w : fetched.warnings) log << "warning: " << w << '\n';
            for (const auto& m : fetched.missing)
                log << "warning: no indicator data for " << m << '\n';
            manifest.add_input(c.cache_path);
            manifest.add_input(c.override_path);
            normalize(entries, snapshot, NormalizationBasis::POPULATION);
            normalize(entries, snapshot, NormalizationBasis::GDP);
        }

        auto write_entries = [&](const std::string& name,
                                 const std::vector<RankingEntry>& list) {
            auto out = open_out(c.out_dir, name);
            out << "rank,country_code,value,per_million,per_million_display,"
                   "per_billion_gdp,per_billion_gdp_display,cumulative_share\n";
            for (const auto& e : list) {
                csv::write_row(
                    out,
                    {std::to_string(e.rank), e.country_code, format_double(e.value),
                     e.per_million ? format_double(*e.per_million) : "",
                     e.per_million ? format_fixed(*e.per_million, 2) : "",
                     e.per_billion_gdp ? format_double(*e.per_billion_gdp) : "",
                     e.per_billion_gdp ? format_fixed(*e.per_billion_gdp, 2) : "",
                     format_double(e.cumulative_share)});
            }
            manifest.add_output(name);
        };

        write_entries("rank_raw.csv", entries);
        if (have_snapshot) {
            write_entries("rank_per_million.csv",
                          rerank_by_normalized(entries, NormalizationBasis::POPULATION,
                                               c.global_total));
            write_entries("rank_per_gdp.csv",
                          rerank_by_normalized(entries, NormalizationBasis::GDP,
                                               c.global_total));
        }
        {
            auto out = open_out(c.out_dir, "cumulative_share.csv");
            out << "rank,country_code,value,cumulative_share\n";
            for (const auto& e : entries)
                csv::write_row(out, {std::to_string(e.rank), e.country_code,
                                     format_double(e.value),
                                     format_double(e.cumulative_share)});
            manifest.add_output("cumulative_share.csv");
        }
        manifest.write(c.out_dir);
        log << "ranked " << entries.size() << " countries (threshold "
            << c.threshold << ")\n";
        return kExitOk;
    });
}

int cmd_sweep_y(const RunConfig& c, std::ostream& log) {
    return run_guarded(log, [&] {
        if (c.y_grid.empty())
            throw std::runtime_error("usage: sweep-y needs a nonempty --grid");
        ManifestBuilder manifest("sweep-y");
        manifest.set_config(config_json(c));
        std::vector<CountryAggregate> aggregates = load_aggregates(c, manifest, log);

        bool any_reported = false;
        for (const auto& a : aggregates)
            if (a.wos_hcr > 0) any_reported = true;
        if (!any_reported)
            throw std::runtime_error("sweep-y needs reported WoS counts");

        std::vector<double> grid = c.y_grid;
        std::sort(grid.begin(), grid.end());

        struct SweepRow {
            double y, count_dev, rank_dev;
        };
        std::vector<SweepRow> table;
        for (double y : grid) {
            std::vector<PredictRow> rows = predict_rows(aggregates, c.x, y, log);
            double count_dev = 0;
            std::vector<std::pair<std::string, double>> left, right;
            for (const auto& r : rows) {
                count_dev += std::abs(r.calculated - static_cast<double>(r.reported));
                left.emplace_back(r.country, r.calculated);
                right.emplace_back(r.country, static_cast<double>(r.reported));
            }
            double rank_dev = 0;
            for (const auto& s : rank_scatter(left, right))
                rank_dev += std::abs(s.deviation);
            table.push_back({y, count_dev, rank_dev});
        }
        // The sweep criterion: smallest total |calculated - reported|.
        std::size_t best = 0;
        for (std::size_t i = 1; i < table.size(); ++i)
            if (table[i].count_dev < table[best].count_dev) best = i;

        {
            auto out = open_out(c.out_dir, "sweep_y.csv");
            out << "y,sum_abs_count_deviation,sum_abs_rank_deviation,is_minimizer\n";
            for (std::size_t i = 0; i < table.size(); ++i)
                csv::write_row(out, {format_double(table[i].y),
                                     format_double(table[i].count_dev),
                                     format_double(table[i].rank_dev),
                                     i == best ? "1" : "0"});
            manifest.add_output("sweep_y.csv");
        }
        manifest.write(c.out_dir);
        log << "best y = " << format_double(table[best].y)
            << " (total |calculated - reported| = "
            << format_fixed(table[best].count_dev, 2) << ")\n";
        return kExitOk;
    });
}

int cmd_plotdata(const RunConfig& c, std::ostream& log) {
    return run_guarded(log, [&] {
        ManifestBuilder manifest("plotdata");
        manifest.set_config(config_json(c));
        const std::string& what = c.plot_what;

        if (what == "fig1") {
            if (c.roster_path.empty())
                throw std::runtime_error("fig1 needs --roster");
            manifest.add_input(c.roster_path);
            RosterResult roster =
                read_roster(c.roster_path, ListSource::IBB, c.ibb_list_year);
            OnsetResult onset = career_onset_distribution(roster.records);
            {
                auto out = open_out(c.out_dir, "onset.csv");
                out << "year,count,cumulative\n";
                for (std::size_t i = 0; i < onset.dist.years.size(); ++i)
                    csv::write_row(out, {std::to_string(onset.dist.years[i]),
                                         std::to_string(onset.dist.counts[i]),
                                         std::to_string(onset.dist.cumulative[i])});
                manifest.add_output("onset.csv");
            }
            {
                json j{{"years", onset.dist.years},
                       {"counts", onset.dist.counts},
                       {"cumulative", onset.dist.cumulative},
                       {"median_year", onset.dist.median_year},
                       {"skipped", onset.skipped}};
                auto out = open_out(c.out_dir, "onset.json");
                out << j.dump(2) << '\n';
                manifest.add_output("onset.json");
            }
            log << "median first-publication year: " << onset.dist.median_year
                << " (" << onset.skipped << " records without a year)\n";
            manifest.write(c.out_dir);
            return kExitOk;
        }

        // fig2..fig5 are country scatter pairings over the aggregates.
        std::string left_name, right_name;
        if (what == "fig2") {
            left_name = "ibb";
            right_name = "ptop5";
        } else if (what == "fig4") {
            left_name = "wos";
            right_name = "ibb";
        } else if (what == "fig5") {
            left_name = "predicted";
            right_name = "wos";
        } else if (what == "fig3") {
            left_name = "ibb";
        } else {
            throw std::runtime_error("unknown plot '" + what +
                                     "' (expected fig1..fig5)");
        }

        std::vector<CountryAggregate> aggregates = load_aggregates(c, manifest, log);
        if (c.apply_comparison_filter)
            aggregates = comparison_filter(aggregates, c.min_wos, c.filter_exclusions);

        if (what == "fig3") {
            std::vector<RankingEntry> entries = rank_countries(
                aggregates, RankMetric::IBB_HCR, c.threshold, c.global_total);
            auto out = open_out(c.out_dir, "cumulative_share.csv");
            out << "rank,country_code,value,cumulative_share\n";
            json series = json::array();
            for (const auto& e : entries) {
                csv::write_row(out, {std::to_string(e.rank), e.country_code,
                                     format_double(e.value),
                                     format_double(e.cumulative_share)});
                series.push_back({{"rank", e.rank},
                                  {"country_code", e.country_code},
                                  {"value", e.value},
                                  {"cumulative_share", e.cumulative_share}});
            }
            manifest.add_output("cumulative_share.csv");
            auto jout = open_out(c.out_dir, "cumulative_share.json");
            jout << series.dump(2) << '\n';
            manifest.add_output("cumulative_share.json");
            manifest.write(c.out_dir);
            log << "cumulative share series over " << entries.size() << " countries\n";
            return kExitOk;
        }

        std::vector<std::pair<std::string, double>> left, right;
        for (const auto& a : aggregates) {
            auto lv = metric_value(a, left_name, c.x, c.y);
            auto rv = metric_value(a, right_name, c.x, c.y);
            if (!lv || !rv) continue;
            left.emplace_back(a.country_code, *lv);
            right.emplace_back(a.country_code, *rv);
        }
        if (left.empty()) throw std::runtime_error("no countries carry both metrics");
        write_scatter_tables(c, what, left, right, left_name, right_name, manifest);
        {
            json series = json::array();
            std::map<std::string, double> right_map(right.begin(), right.end());
            auto sorted = left;
            std::sort(sorted.begin(), sorted.end());
            for (const auto& [country, value] : sorted)
                series.push_back({{"country_code", country},
                                  {left_name, value},
                                  {right_name, right_map.at(country)}});
            auto out = open_out(c.out_dir, what + "_data.json");
            out << series.dump(2) << '\n';
            manifest.add_output(what + "_data.json");
        }
        manifest.write(c.out_dir);
        log << what << " data for " << left.size() << " countries\n";
        return kExitOk;
    });
}

int cmd_fetch_indicators(const RunConfig& c, std::ostream& log) {
    return run_guarded(log, [&] {
        ManifestBuilder manifest("fetch-indicators");
        manifest.set_config(config_json(c));

        std::vector<std::string> countries = c.countries;
        if (countries.empty() && !c.aggregates_path.empty()) {
            manifest.add_input(c.aggregates_path);
            for (const auto& a : read_aggregates_csv(c.aggregates_path))
                countries.push_back(a.country_code);
        }
        if (countries.empty())
            throw std::runtime_error("fetch-indicators needs --countries or "
                                     "--aggregates");

        FetchOptions opts;
        opts.cache_path = c.cache_path;
        opts.override_path = c.override_path;
        FetchResult fetched =
            fetch_indicators(countries, c.indicator_year,
                             c.offline ? FetchMode::OFFLINE : FetchMode::LIVE, opts);
        for (const auto& w : fetched.warnings) log << "warning: " << w << '\n';

        manifest.add_input(c.cache_path);
        manifest.add_input(c.override_path);
        {
            std::filesystem::create_directories(c.out_dir);
            write_snapshot_csv(c.out_dir + "/snapshot.csv", fetched.snapshot);
            manifest.add_output("snapshot.csv");
        }
        {
            auto out = open_out(c.out_dir, "missing.csv");
            out << "country_code\n";
            for (const auto& m : fetched.missing) csv::write_row(out, {m});
            manifest.add_output("missing.csv");
        }
        manifest.write(c.out_dir);
        log << "snapshot covers " << fetched.snapshot.entries.size() << " countries; "
            << fetched.missing.size() << " missing\n";
        return kExitOk;
    });
}

}  // namespace hcr
