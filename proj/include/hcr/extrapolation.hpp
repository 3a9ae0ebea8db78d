#pragma once

namespace hcr {

/// Tail model constant e_p, approximated by the P_top10%/P ratio of the
/// same unit (institution or country).
struct EpModel {
    double ep = 0;
    double source_P = 0;
    double source_p_top10 = 0;

    /// A tail model only makes sense for 0 < ep < 1.
    bool degenerate() const { return !(ep > 0.0 && ep < 1.0); }
};

/// Percentile level in percent, (0, 100].
class PercentileLevel {
  public:
    explicit PercentileLevel(double x);  // throws std::domain_error outside (0, 100]
    double value() const { return x_; }

  private:
    double x_;
};

/// ep = p_top10 / P at full precision. Throws "degenerate system" for
/// P = 0 and "nesting violated" for p_top10 > P. Boundary ratios (0 or 1)
/// are returned but flagged via EpModel::degenerate().
EpModel ep_from_metrics(double P, double p_top10);

/// P_top x% = P * ep^(2 - lg x). Exact identity at x = 100.
double ptop_from_total(double P, const EpModel& model, PercentileLevel level);

/// P_top y% = P_top x% * ep^(lg x - lg y). Defined for y > x as well.
double ptop_convert(double p_top_x, const EpModel& model,
                    PercentileLevel from, PercentileLevel to);

/// Predicted strict-tier count: ibb_hcr * ep^(lg x - lg y). With the
/// defaults x = 5, y = 0.05 the exponent is exactly 2.
double predict_wos(double ibb_hcr, const EpModel& model,
                   PercentileLevel x = PercentileLevel(5.0),
                   PercentileLevel y = PercentileLevel(0.05));

/// Display rounding for predicted counts: half away from zero.
long long round_half_away(double v);

}  // namespace hcr
