#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hcr/commands.hpp"
#include "hcr/version.hpp"

namespace {

// Flags shared by the analysis subcommands.
void add_common_inputs(CLI::App* cmd, hcr::RunConfig& config) {
    cmd->add_option("--aggregates", config.aggregates_path,
                    "Precomputed country aggregates CSV");
    cmd->add_option("--roster", config.roster_path, "IBB roster CSV");
    cmd->add_option("--wos-roster", config.wos_roster_path, "WoS roster CSV");
    cmd->add_option("--metrics", config.metrics_path, "Institution metrics CSV");
    cmd->add_option("--registry", config.registry_path, "Canonical institutions CSV");
    cmd->add_option("--aliases", config.alias_path, "Alias rules CSV");
    cmd->add_option("--period", config.period, "4-year window, e.g. 2006-2009");
    cmd->add_flag("--allow-unmatched", config.allow_unmatched,
                  "Count ambiguous affiliations as unmatched instead of aborting");
    cmd->add_option("--remap", config.country_remap,
                    "Country remaps, e.g. HKG=CHN (repeatable)");
}

void add_levels(CLI::App* cmd, hcr::RunConfig& config) {
    cmd->add_option("-x", config.x, "Lenient percentile level (default 5)");
    cmd->add_option("-y", config.y, "Strict percentile level (default 0.05)");
}

}  // namespace

int main(int argc, char** argv) {
    hcr::RunConfig config;
    CLI::App app{"Country-level research assessment from highly cited researcher "
                 "rosters and top-percentile paper counts"};
    app.set_version_flag("--version", std::string("hcrank ") + hcr::kVersion);
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_file;
    app.add_option("--config", config_file, "JSON config file")
        ->check(CLI::ExistingFile);
    app.add_option("--out-dir", config.out_dir, "Output directory (default .)");
    app.add_flag("--offline", config.offline,
                 "Never touch the network; use the snapshot cache");

    auto* ingest = app.add_subcommand("ingest", "Validate input CSVs and emit "
                                                "canonical copies plus a report");
    ingest->add_option("--roster", config.roster_path, "Roster CSV to ingest");
    ingest->add_option("--metrics", config.metrics_path, "Metrics CSV to ingest");
    std::string source = "IBB";
    ingest->add_option("--source", source, "Roster source: IBB or WOS");
    ingest->add_option("--list-year", config.ingest_list_year,
                       "Edition year of the roster");

    auto* aggregate = app.add_subcommand(
        "aggregate", "Resolve affiliations and aggregate to country level");
    add_common_inputs(aggregate, config);

    auto* validate = app.add_subcommand(
        "validate", "Correlate two country metrics (Spearman; Pearson with "
                    "exclusions) and emit scatter tables");
    add_common_inputs(validate, config);
    add_levels(validate, config);
    validate->add_option("--left", config.validate_left,
                         "Left metric (ibb, wos, predicted, P, ptop1..ptop50)");
    validate->add_option("--right", config.validate_right, "Right metric");
    validate->add_option("--pearson-exclude", config.pearson_exclusions,
                         "Countries excluded from the Pearson coefficient");
    validate->add_flag("--filter", config.apply_comparison_filter,
                       "Apply the min-WoS comparison filter first");
    validate->add_option("--min-wos", config.min_wos,
                         "Comparison filter threshold (default 3)");
    validate->add_option("--exclude", config.filter_exclusions,
                         "Countries dropped by the comparison filter");

    auto* predict = app.add_subcommand(
        "predict-wos", "Predict strict-tier HCR counts from lenient-tier counts");
    add_common_inputs(predict, config);
    add_levels(predict, config);
    predict->add_option("--pearson-exclude", config.pearson_exclusions,
                        "Countries excluded from the Pearson coefficient");

    auto* rank = app.add_subcommand(
        "rank", "Country ranking with population/GDP normalization and "
                "cumulative shares");
    add_common_inputs(rank, config);
    rank->add_option("--metric", config.rank_metric,
                     "Ranking metric: ibb, wos or predicted (default ibb)");
    rank->add_option("--threshold", config.threshold,
                     "Minimum HCR count to be listed (default 30)");
    rank->add_option("--global-total", config.global_total,
                     "Global roster size for cumulative shares");
    rank->add_option("--snapshot", config.cache_path, "Indicator snapshot CSV");
    rank->add_option("--overrides", config.override_path,
                     "Indicator overrides CSV (e.g. Taiwan)");
    rank->add_option("--year", config.indicator_year, "Indicator year (default 2019)");

    auto* sweep = app.add_subcommand(
        "sweep-y", "Sweep the strict percentile level and report deviations "
                   "from reported counts");
    add_common_inputs(sweep, config);
    add_levels(sweep, config);
    sweep->add_option("--grid", config.y_grid, "Candidate y levels (repeatable)");

    auto* plot = app.add_subcommand("plotdata", "Emit plot-ready CSV/JSON series");
    add_common_inputs(plot, config);
    add_levels(plot, config);
    plot->add_option("--what", config.plot_what, "fig1..fig5")->required();
    plot->add_option("--threshold", config.threshold, "Threshold for fig3");
    plot->add_option("--global-total", config.global_total,
                     "Global roster size for fig3 shares");
    plot->add_flag("--filter", config.apply_comparison_filter,
                   "Apply the min-WoS comparison filter first");

    auto* fetch = app.add_subcommand("fetch-indicators",
                                     "Fetch population and GDP denominators");
    fetch->add_option("--countries", config.countries, "Country codes (repeatable)");
    fetch->add_option("--aggregates", config.aggregates_path,
                      "Take the country list from an aggregates CSV");
    fetch->add_option("--year", config.indicator_year, "Indicator year");
    fetch->add_option("--cache", config.cache_path, "Snapshot cache CSV");
    fetch->add_option("--overrides", config.override_path, "Overrides CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : hcr::kExitIoError;
    }

    try {
        if (!config_file.empty()) hcr::apply_config_file(config, config_file);
        if (ingest->parsed()) {
            auto s = hcr::parse_list_source(source);
            if (!s) {
                std::cerr << "error: --source must be IBB or WOS\n";
                return hcr::kExitIoError;
            }
            config.ingest_source = *s;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return hcr::kExitIoError;
    }

    if (ingest->parsed()) return hcr::cmd_ingest(config, std::cout);
    if (aggregate->parsed()) return hcr::cmd_aggregate(config, std::cout);
    if (validate->parsed()) return hcr::cmd_validate(config, std::cout);
    if (predict->parsed()) return hcr::cmd_predict_wos(config, std::cout);
    if (rank->parsed()) return hcr::cmd_rank(config, std::cout);
    if (sweep->parsed()) return hcr::cmd_sweep_y(config, std::cout);
    if (plot->parsed()) return hcr::cmd_plotdata(config, std::cout);
    if (fetch->parsed()) return hcr::cmd_fetch_indicators(config, std::cout);
    return hcr::kExitIoError;
}
