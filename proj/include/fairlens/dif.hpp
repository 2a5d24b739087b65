#ifndef FAIRLENS_DIF_HPP
#define FAIRLENS_DIF_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "fairlens/dataset.hpp"
#include "fairlens/types.hpp"

namespace fairlens {

/// What stands in for ability when stratifying item responses. RestScore is
/// the mean of every *other* item, so the studied item never influences its
/// own matching; Target uses the outcome column directly.
enum class AbilityMeasure { RestScore, Target };

constexpr BinSpec dif_default_strata() {
    return BinSpec{.mode = BinSpec::Mode::EqualCount, .bin_count = 5,
                   .min_per_cell = kDefaultMinPerCell};
}

/// One item's stratified comparison. A stratum enters the analysis only when
/// every group has at least min_per_cell records in it; gaps are the largest
/// pairwise difference in the item's correct rate between groups, and the
/// weighted gap averages them by stratum size. With no usable stratum the
/// item is undiagnosable (and never flagged).
struct ItemReport {
    std::string item_id;
    std::vector<double> per_stratum_gap;      // included strata, ability order
    std::vector<std::size_t> stratum_sizes;   // parallel to per_stratum_gap
    std::size_t excluded_strata = 0;
    double weighted_gap = 0.0;
    bool flagged = false;
    bool undiagnosable = false;
};

struct DifReport {
    AbilityMeasure ability = AbilityMeasure::RestScore;
    double flag_threshold = 0.05;
    std::vector<ItemReport> items; // dataset item order
};

/// Flags items whose correct rates differ between groups at matched ability.
DifReport dif_analyze(const Dataset& dataset,
                      AbilityMeasure ability = AbilityMeasure::RestScore,
                      BinSpec strata = dif_default_strata(),
                      double flag_threshold = 0.05);

/// The same stratified comparison for an arbitrary column (an extra column,
/// the decision, or an item), matched on the score instead of an ability
/// estimate. The per-stratum statistic is the largest pairwise total
/// variation distance between the groups' value distributions, which for a
/// 0/1 column is just the rate gap.
struct FeatureReport {
    std::string feature;
    std::vector<double> per_stratum_tv;
    std::vector<std::size_t> stratum_sizes;
    std::size_t excluded_strata = 0;
    double weighted_tv = 0.0;
    bool flagged = false;
    bool undiagnosable = false;
};

FeatureReport feature_dif(const Dataset& dataset, const std::string& feature,
                          BinSpec score_bins = dif_default_strata(),
                          double flag_threshold = 0.05);

} // namespace fairlens

#endif
