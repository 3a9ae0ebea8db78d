#include "hcr/extrapolation.hpp"

#include <cmath>
#include <stdexcept>

namespace hcr {

namespace {

void require_usable(const EpModel& model) {
    if (model.degenerate())
        throw std::domain_error("degenerate ep ratio: " + std::to_string(model.ep));
}

}  // namespace

PercentileLevel::PercentileLevel(double x) : x_(x) {
    if (!(x > 0.0 && x <= 100.0))
        throw std::domain_error("percentile level must lie in (0, 100]");
}

EpModel ep_from_metrics(double P, double p_top10) {
    if (!(P > 0.0)) throw std::domain_error("degenerate system: P must be positive");
    if (p_top10 < 0.0) throw std::domain_error("p_top10 must be nonnegative");
    if (p_top10 > P) throw std::domain_error("nesting violated: p_top10 > P");
    return EpModel{p_top10 / P, P, p_top10};
}

double ptop_from_total(double P, const EpModel& model, PercentileLevel level) {
    require_usable(model);
    if (P < 0.0) throw std::domain_error("P must be nonnegative");
    // glibc log10 is exact at powers of ten, so x = 100 yields exponent 0
    // and the identity P * ep^0 == P holds bit for bit.
    double exponent = 2.0 - std::log10(level.value());
    return P * std::pow(model.ep, exponent);
}

double ptop_convert(double p_top_x, const EpModel& model, PercentileLevel from,
                    PercentileLevel to) {
    require_usable(model);
    if (p_top_x < 0.0) throw std::domain_error("p_top_x must be nonnegative");
    double exponent = std::log10(from.value()) - std::log10(to.value());
    return p_top_x * std::pow(model.ep, exponent);
}

double predict_wos(double ibb_hcr, const EpModel& model, PercentileLevel x,
                   PercentileLevel y) {
    require_usable(model);
    if (ibb_hcr < 0.0) throw std::domain_error("ibb_hcr must be nonnegative");
    double exponent = std::log10(x.value()) - std::log10(y.value());
    return ibb_hcr * std::pow(model.ep, exponent);
}

long long round_half_away(double v) {
    return std::llround(v);  // llround rounds halves away from zero
}

}  // namespace hcr
