#ifndef FAIRLENS_CLASSIFICATION_HPP
#define FAIRLENS_CLASSIFICATION_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairlens/dataset.hpp"
#include "fairlens/report.hpp"
#include "fairlens/types.hpp"

namespace fairlens {

/// Interpolation weights for the two-condition confusion-matrix family:
///   condition a: (TP + lambda1*FP) / (TP + lambda2*FN) constant across groups
///   condition b: (TN + lambda1*FN) / (TN + lambda2*FP) constant across groups
/// (1,0) is the PPV/NPV pair, (0,1) the TPR/TNR pair, (1,1) applies the
/// constant-ratio idea to both classes.
struct ThorndikianParams {
    double lambda1 = 1.0;
    double lambda2 = 1.0;
};

/// num/den on non-negative inputs, extended to the projective edge cases:
/// den > 0 -> ordinary quotient; den = 0 with num > 0 -> +infinity;
/// 0/0 -> empty (undefined). Infinities of the same sign compare equal in
/// disparity aggregation.
std::optional<double> extended_ratio(double num, double den);

/// Counts per group with the closed prediction rule R >= r_a* and
/// ground-truth positive Y >= y*. Every group needs a cutoff entry.
std::map<std::string, ConfusionMatrix> confusion_by_group(const Dataset& dataset,
                                                          const ThresholdMap& thresholds);

/// Matrix-level criteria; dataset-level overloads below derive the matrices
/// from thresholds first. Matrix-level entry points exist so enumeration
/// oracles can drive the exact same verdict logic.
CriterionReport thorndike_ratio(const std::map<std::string, ConfusionMatrix>& by_group,
                                double tolerance = kDefaultTolerance);
CriterionReport cole_tpr(const std::map<std::string, ConfusionMatrix>& by_group,
                         double tolerance = kDefaultTolerance);
CriterionReport linn_ppv(const std::map<std::string, ConfusionMatrix>& by_group,
                         double tolerance = kDefaultTolerance);
CriterionReport peterson_novick_separation(
    const std::map<std::string, ConfusionMatrix>& by_group,
    double tolerance = kDefaultTolerance);
CriterionReport peterson_novick_sufficiency(
    const std::map<std::string, ConfusionMatrix>& by_group,
    double tolerance = kDefaultTolerance);
CriterionReport thorndikian(const std::map<std::string, ConfusionMatrix>& by_group,
                            ThorndikianParams params,
                            double tolerance = kDefaultTolerance);

CriterionReport thorndike_ratio(const Dataset& dataset, const ThresholdMap& thresholds,
                                double tolerance = kDefaultTolerance);
CriterionReport cole_tpr(const Dataset& dataset, const ThresholdMap& thresholds,
                         double tolerance = kDefaultTolerance);
CriterionReport linn_ppv(const Dataset& dataset, const ThresholdMap& thresholds,
                         double tolerance = kDefaultTolerance);
CriterionReport peterson_novick_separation(const Dataset& dataset,
                                           const ThresholdMap& thresholds,
                                           double tolerance = kDefaultTolerance);
CriterionReport peterson_novick_sufficiency(const Dataset& dataset,
                                            const ThresholdMap& thresholds,
                                            double tolerance = kDefaultTolerance);
CriterionReport thorndikian(const Dataset& dataset, const ThresholdMap& thresholds,
                            ThorndikianParams params,
                            double tolerance = kDefaultTolerance);

/// Record indices sorted descending by score and by target; ties broken by
/// ascending row index, making every ranking deterministic.
struct RankTable {
    std::vector<std::size_t> by_score;
    std::vector<std::size_t> by_target;

    static RankTable build(const Dataset& dataset);
};

/// How many of the group's members sit in the top n% of each ranking.
struct JonesAtN {
    std::size_t score_count = 0;
    std::size_t target_count = 0;
    bool equal = false;
};

JonesAtN jones_at_n(const Dataset& dataset, const std::string& group, double n_percent);

/// Sweep of integer top-k counts, k = 1..N; fair iff the group's presence
/// matches in both rankings at every k.
struct JonesSweep {
    bool fair = true;
    std::size_t worst_n = 0;
    std::size_t worst_gap = 0;
};

JonesSweep jones_general_standard(const Dataset& dataset, const std::string& group);

constexpr BinSpec guion_default_bins() {
    return BinSpec{.mode = BinSpec::Mode::EqualCount, .bin_count = 10,
                   .min_per_cell = kDefaultMinPerCell};
}

/// Per score-bin comparison of group hire rates against the bin's pooled
/// hire rate. The success-probability proxy is the pooled within-bin mean of
/// Y given R (stated in the report notes); requires a decision column.
CriterionReport guion_individual(const Dataset& dataset, BinSpec bins = guion_default_bins(),
                                 double tolerance = kDefaultTolerance);

/// Fresh dataset whose scores are each record's within-group percentile rank
/// (midrank ties), mapped into (0,1) as (midrank - 0.5) / group size.
Dataset within_group_percentile(const Dataset& dataset);

/// Per-group cutoffs equalizing a confusion-matrix criterion. The reference
/// group (largest; ties -> lexicographically first) keeps the cutoff that
/// maximizes pooled accuracy; every other group's cutoff is chosen by
/// exhaustive scan of its distinct scores plus +infinity, minimizing its
/// pairwise criterion disparity against the reference. Ties pick the lower
/// cutoff. feasible=false (with a diagnostic) when a group's best disparity
/// still exceeds the tolerance or the criterion is undefined everywhere.
struct SolveResult {
    ThresholdMap thresholds;
    std::string reference_group;
    double achieved_disparity = 0.0; // max pairwise over all groups at the solution
    bool feasible = true;
    std::string diagnostic;
};

SolveResult solve_fair_thresholds(const Dataset& dataset, const std::string& criterion,
                                  double y_star, double tolerance = kDefaultTolerance,
                                  ThorndikianParams params = {});

/// Names solve_fair_thresholds accepts.
const std::vector<std::string>& solvable_criteria();

/// Exhaustive (1,1) sweep over ordered matrix pairs with cells <= max_count:
/// how many pairs pass at tolerance 0, how many of those have equal
/// constant-ratio values (the proportional-prediction property), and how
/// many additionally have equal base rates.
struct ThorndikianCensus {
    std::uint64_t pairs = 0;
    std::uint64_t passing = 0;
    std::uint64_t ratio_equal = 0;
    std::uint64_t base_rates_equal = 0;
};

ThorndikianCensus thorndikian_census(int max_count);

} // namespace fairlens

#endif
