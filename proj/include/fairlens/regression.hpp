#ifndef FAIRLENS_REGRESSION_HPP
#define FAIRLENS_REGRESSION_HPP

#include <optional>
#include <string>

#include "fairlens/dataset.hpp"
#include "fairlens/report.hpp"
#include "fairlens/types.hpp"

namespace fairlens {

/// Which deviations of a group's mean residual count against it. BothSigns
/// treats systematic over- and under-prediction alike; UnderpredictionOnly
/// flags only groups whose outcomes exceed their predictions (positive mean
/// residual), the direction that shortchanges the group.
enum class SignPolicy { BothSigns, UnderpredictionOnly };

/// Mean residual of the target~score line, per group. The line is fit on the
/// pooled records, or on a single named group when `fit_on` is non-empty;
/// residuals are evaluated for everyone either way. residual = actual
/// outcome minus predicted outcome, so positive means under-prediction.
CriterionReport cleary_bias(const Dataset& dataset, const std::string& fit_on = "",
                            SignPolicy policy = SignPolicy::BothSigns,
                            double tolerance = kDefaultTolerance);

/// Mean residual of the score~target line, per group: does the score sit
/// where the outcome predicts it should? Positive means the group scores
/// higher than its outcomes predict. Disagrees with cleary_bias whenever
/// group score means differ, because the two lines have different slopes.
CriterionReport converse_cleary(const Dataset& dataset, const std::string& fit_on = "",
                                SignPolicy policy = SignPolicy::BothSigns,
                                double tolerance = kDefaultTolerance);

/// Per-group gap between mean predicted and mean actual outcome under the
/// pooled target~score line; numerically the negated group mean residual.
CriterionReport jones_mean_fair(const Dataset& dataset, double tolerance = kDefaultTolerance);

constexpr BinSpec calibration_default_bins() {
    return BinSpec{.mode = BinSpec::Mode::EqualWidth, .bin_count = 10,
                   .min_per_cell = kDefaultMinPerCell};
}

/// Within each group and score bin, |mean outcome - mean score|; a group's
/// value is its worst adequately filled bin. Requires a binary 0/1 target
/// and scores in [0,1]; equal-width bins span the fixed [0,1] range. Bins
/// holding fewer than min_per_cell of a group's records are excluded (noted);
/// a group with no usable bin leaves the criterion undefined.
CriterionReport calibration_check(const Dataset& dataset,
                                  BinSpec bins = calibration_default_bins(),
                                  double tolerance = kDefaultTolerance);

/// Mirror image: bins are cut on the observed outcome range and the gap per
/// group-cell is |mean(score - outcome)|, asking whether scores track the
/// outcome level. Needs score and target on a shared scale.
CriterionReport converse_calibration_check(const Dataset& dataset,
                                           BinSpec bins = calibration_default_bins(),
                                           double tolerance = kDefaultTolerance);

/// Designated risk: among a group's records whose scores land within
/// `halfwidth` of the group's own cutoff, the fraction with outcome strictly
/// above the target cutoff. Defaults to a tenth of the pooled score standard
/// deviation. Empty or sparse windows leave that group undefined, with a
/// note. Groups are compared pairwise.
CriterionReport einhorn_bass(const Dataset& dataset, const ThresholdMap& thresholds,
                             std::optional<double> halfwidth = std::nullopt,
                             int min_per_cell = kDefaultMinPerCell,
                             double tolerance = kDefaultTolerance);

} // namespace fairlens

#endif
