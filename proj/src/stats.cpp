#include "hcr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

namespace hcr {

namespace {

constexpr double kLn10 = 2.302585092994045684;

double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Continued fraction for the incomplete beta function (modified Lentz).
double ibeta_cf(double a, double b, double x) {
    constexpr double kTiny = 1e-300;
    constexpr double kEps = 1e-15;
    constexpr int kMaxIter = 500;

    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw std::runtime_error("incomplete beta continued fraction did not converge");
}

// log of the regularized incomplete beta I_x(a,b), accurate for small x
// where the linear value can underflow. Requires the CF-convergent branch
// x < (a+1)/(a+b+2); callers arrange that.
double log_ibeta_lower(double a, double b, double x) {
    if (x <= 0.0) return -std::numeric_limits<double>::infinity();
    double log_bt = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
    return log_bt + std::log(ibeta_cf(a, b, x) / a);
}

double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Centered sums in one pass over pre-computed means.
struct Moments {
    double sxx = 0, syy = 0, sxy = 0;
};

Moments centered_moments(const std::vector<double>& xs, const std::vector<double>& ys) {
    Moments m;
    double mx = mean(xs), my = mean(ys);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double dx = xs[i] - mx, dy = ys[i] - my;
        m.sxx += dx * dx;
        m.syy += dy * dy;
        m.sxy += dx * dy;
    }
    return m;
}

double pearson_r(const std::vector<double>& xs, const std::vector<double>& ys) {
    Moments m = centered_moments(xs, ys);
    if (m.sxx == 0.0 || m.syy == 0.0)
        throw StatError("constant series");
    double r = m.sxy / std::sqrt(m.sxx * m.syy);
    return std::clamp(r, -1.0, 1.0);
}

// t statistic for H0: rho = 0. (1-r)(1+r) avoids cancellation near |r|=1.
double t_from_r(double r, int df) {
    double denom = (1.0 - r) * (1.0 + r);
    if (denom <= 0.0) return std::numeric_limits<double>::infinity();
    return r * std::sqrt(static_cast<double>(df) / denom);
}

struct FilteredSeries {
    std::vector<std::string> labels;
    std::vector<double> xs, ys;
    std::vector<std::string> excluded;
};

FilteredSeries apply_exclusions(const PairedSeries& series,
                                const std::vector<std::string>& exclude) {
    std::set<std::string> drop(exclude.begin(), exclude.end());
    FilteredSeries out;
    for (std::size_t i = 0; i < series.labels.size(); ++i) {
        if (drop.count(series.labels[i])) {
            out.excluded.push_back(series.labels[i]);
        } else {
            out.labels.push_back(series.labels[i]);
            out.xs.push_back(series.xs[i]);
            out.ys.push_back(series.ys[i]);
        }
    }
    if (out.xs.size() < 3)
        throw StatError("fewer than 3 points after exclusion");
    return out;
}

CorrelationResult result_from_r(CorrelationMethod method, double r, int n,
                                std::vector<std::string> excluded) {
    CorrelationResult res;
    res.method = method;
    res.r = r;
    res.n = n;
    res.excluded = std::move(excluded);
    int df = n - 2;
    double t = t_from_r(r, df);
    if (std::isinf(t)) {
        res.p_two_sided = 0.0;
        res.log10_p = -std::numeric_limits<double>::infinity();
    } else {
        res.log10_p = log_t_sf_two_sided(t, df) / kLn10;
        res.p_two_sided = t_sf_two_sided(t, df);
    }
    return res;
}

}  // namespace

const char* to_string(CorrelationMethod m) {
    return m == CorrelationMethod::PEARSON ? "PEARSON" : "SPEARMAN";
}

PairedSeries PairedSeries::make(std::vector<std::string> labels,
                                std::vector<double> xs, std::vector<double> ys) {
    if (labels.size() != xs.size() || xs.size() != ys.size())
        throw std::invalid_argument("paired series lengths differ");
    if (labels.size() < 3)
        throw std::invalid_argument("paired series needs at least 3 points");
    std::set<std::string> seen;
    for (const auto& l : labels)
        if (!seen.insert(l).second)
            throw std::invalid_argument("duplicate label: " + l);
    return PairedSeries{std::move(labels), std::move(xs), std::move(ys)};
}

std::vector<double> rank_vector(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("rank_vector: empty input");
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return values[a] > values[b];
    });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        // items i..j (0-based positions) share ranks i+1..j+1: average them
        double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double t_sf_two_sided(double t, int df) {
    if (df < 1) throw std::invalid_argument("t_sf_two_sided: df must be >= 1");
    if (t == 0.0) return 1.0;
    if (std::isinf(t)) return 0.0;
    double a = df / 2.0, b = 0.5;
    double x = df / (df + t * t);
    // 2 P(T >= |t|) = I_x(df/2, 1/2)
    if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(log_ibeta_lower(a, b, x));
    return 1.0 - std::exp(log_ibeta_lower(b, a, 1.0 - x));
}

double log_t_sf_two_sided(double t, int df) {
    if (df < 1) throw std::invalid_argument("log_t_sf_two_sided: df must be >= 1");
    if (t == 0.0) return 0.0;
    if (std::isinf(t)) return -std::numeric_limits<double>::infinity();
    double a = df / 2.0, b = 0.5;
    double x = df / (df + t * t);
    if (x < (a + 1.0) / (a + b + 2.0)) return log_ibeta_lower(a, b, x);
    return std::log1p(-std::exp(log_ibeta_lower(b, a, 1.0 - x)));
}

CorrelationResult pearson(const PairedSeries& series,
                          const std::vector<std::string>& exclude) {
    FilteredSeries f = apply_exclusions(series, exclude);
    double r = pearson_r(f.xs, f.ys);
    return result_from_r(CorrelationMethod::PEARSON, r,
                         static_cast<int>(f.xs.size()), std::move(f.excluded));
}

CorrelationResult spearman(const PairedSeries& series,
                           const std::vector<std::string>& exclude,
                           PValueMode pmode) {
    FilteredSeries f = apply_exclusions(series, exclude);
    std::vector<double> rx = rank_vector(f.xs);
    std::vector<double> ry = rank_vector(f.ys);
    double rho = pearson_r(rx, ry);
    CorrelationResult res = result_from_r(CorrelationMethod::SPEARMAN, rho,
                                          static_cast<int>(rx.size()),
                                          std::move(f.excluded));
    if (pmode == PValueMode::EXACT_PERMUTATION) {
        const std::size_t n = rx.size();
        if (n > 10)
            throw std::invalid_argument("exact permutation p-value limited to n <= 10");
        // Count permutations of y-ranks with |rho| at least as extreme.
        Moments base = centered_moments(rx, ry);
        double denom = std::sqrt(base.sxx * base.syy);
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::uint64_t total = 0, extreme = 0;
        const double threshold = std::fabs(rho) - 1e-12;
        std::vector<double> py(n);
        do {
            for (std::size_t i = 0; i < n; ++i) py[i] = ry[perm[i]];
            Moments m = centered_moments(rx, py);
            if (std::fabs(m.sxy / denom) >= threshold) ++extreme;
            ++total;
        } while (std::next_permutation(perm.begin(), perm.end()));
        res.p_two_sided = static_cast<double>(extreme) / static_cast<double>(total);
        res.log10_p = std::log10(res.p_two_sided);
    }
    return res;
}

}  // namespace hcr
