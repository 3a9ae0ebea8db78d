#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hcr {

/// Statistical preconditions (too few points, constant series). Kept
/// separate from I/O failures so callers can exit with a distinct code.
class StatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Labeled paired observations. Lengths must match, be at least 3, and
/// labels must be unique; `make` enforces that.
struct PairedSeries {
    std::vector<std::string> labels;
    std::vector<double> xs;
    std::vector<double> ys;

    static PairedSeries make(std::vector<std::string> labels,
                             std::vector<double> xs, std::vector<double> ys);
};

enum class CorrelationMethod { PEARSON, SPEARMAN };

const char* to_string(CorrelationMethod m);

struct CorrelationResult {
    CorrelationMethod method = CorrelationMethod::PEARSON;
    double r = 0;
    int n = 0;
    double p_two_sided = 1;  // underflows to 0 below ~1e-308; see log10_p
    double log10_p = 0;      // kept finite far beyond double range
    std::vector<std::string> excluded;
};

enum class PValueMode { STUDENT_T, EXACT_PERMUTATION };

/// Ranks 1..n descending by value (rank 1 = largest); ties get the average
/// of the ranks they span.
std::vector<double> rank_vector(const std::vector<double>& values);

/// Two-sided tail 2*P(T >= |t|) for Student's t with df degrees of
/// freedom, via the regularized incomplete beta I_{df/(df+t^2)}(df/2, 1/2)
/// evaluated with a Lentz continued fraction.
double t_sf_two_sided(double t, int df);

/// Natural log of the same quantity; stays finite where the linear value
/// underflows.
double log_t_sf_two_sided(double t, int df);

/// Sample product-moment correlation. Labels in `exclude` are dropped
/// before anything is computed and recorded in the result. Throws on a
/// constant series or fewer than 3 points after exclusion.
CorrelationResult pearson(const PairedSeries& series,
                          const std::vector<std::string>& exclude = {});

/// Pearson over average-rank vectors. STUDENT_T uses the same t
/// approximation as pearson; EXACT_PERMUTATION enumerates all n!
/// permutations (n <= 10 only).
CorrelationResult spearman(const PairedSeries& series,
                           const std::vector<std::string>& exclude = {},
                           PValueMode pmode = PValueMode::STUDENT_T);

}  // namespace hcr
