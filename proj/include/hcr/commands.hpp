#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "hcr/records.hpp"

namespace hcr {

// Process exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIoError = 1;          // I/O or schema problems
inline constexpr int kExitStatPrecondition = 2; // too few points, constant series
inline constexpr int kExitAmbiguous = 3;        // unresolved AMBIGUOUS matches

/// Everything a run needs. The analysis parameters default to the
/// bundled reference workflow but are all overridable per run; every
/// value is echoed into the run manifest.
struct RunConfig {
    // Input files.
    std::string roster_path;          // IBB roster CSV
    std::string wos_roster_path;      // WoS roster CSV (optional)
    std::string metrics_path;         // institution metrics CSV
    std::string registry_path;        // canonical institutions CSV
    std::string alias_path;           // alias rules CSV
    std::string aggregates_path;      // precomputed country aggregates CSV
    std::string cache_path;           // indicator snapshot cache CSV
    std::string override_path;        // indicator overrides CSV (e.g. TWN)
    std::string out_dir = ".";

    // Analysis parameters.
    std::string period = "2006-2009";
    CountingMode counting_mode = CountingMode::FRACTIONAL;
    std::string field_label = "All sciences";
    double x = 5.0;
    double y = 0.05;
    long long threshold = 30;
    long long min_wos = 3;
    std::vector<std::string> pearson_exclusions = {"USA"};
    std::vector<std::string> filter_exclusions = {"CHN"};
    std::string rank_metric = "ibb";  // ibb | wos | predicted
    int indicator_year = 2019;
    bool offline = false;
    bool allow_unmatched = false;
    bool apply_comparison_filter = false;
    double global_total = 159684;
    int ibb_list_year = 2020;
    int wos_list_year = 2014;
    std::map<std::string, std::string> country_remap;

    // Command-specific knobs.
    std::string validate_left = "ibb";
    std::string validate_right = "ptop5";
    std::vector<double> y_grid;
    std::string plot_what;                  // fig1..fig5
    std::vector<std::string> countries;     // fetch-indicators
    ListSource ingest_source = ListSource::IBB;
    int ingest_list_year = 2020;
};

/// Loads a JSON config file into `config`. Unknown keys are an error.
void apply_config_file(RunConfig& config, const std::string& path);

// Each command writes its tables and a run manifest into config.out_dir,
// logs a human-readable summary to `log`, and returns an exit code.
int cmd_ingest(const RunConfig& config, std::ostream& log);
int cmd_aggregate(const RunConfig& config, std::ostream& log);
int cmd_validate(const RunConfig& config, std::ostream& log);
int cmd_predict_wos(const RunConfig& config, std::ostream& log);
int cmd_rank(const RunConfig& config, std::ostream& log);
int cmd_sweep_y(const RunConfig& config, std::ostream& log);
int cmd_plotdata(const RunConfig& config, std::ostream& log);
int cmd_fetch_indicators(const RunConfig& config, std::ostream& log);

}  // namespace hcr
