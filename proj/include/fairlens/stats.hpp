#ifndef FAIRLENS_STATS_HPP
#define FAIRLENS_STATS_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairlens/dataset.hpp"
#include "fairlens/types.hpp"

namespace fairlens {

double mean(std::span<const double> values);

/// Sample Pearson correlation; empty when either variable has zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// rho_XY.Z from the three pairwise correlations; empty when a radicand
/// in the denominator is not strictly positive.
std::optional<double> partial_correlation(double rho_xy, double rho_xz, double rho_yz);

double skewness(std::span<const double> values);
double excess_kurtosis(std::span<const double> values);

/// 1 for records of `group_as_one`, 0 otherwise. Requires exactly two groups;
/// callers with more groups must binarize first.
std::vector<double> group_indicator(const Dataset& dataset, const std::string& group_as_one);

/// Pearson correlation between the group indicator and the score.
/// Empty when either variable is constant.
std::optional<double> point_biserial(const Dataset& dataset, const std::string& group_as_one);

/// All three pairwise correlations plus both partials. Requires non-constant
/// score and target.
CorrelationTriple correlations(const Dataset& dataset, const std::string& group_as_one);

struct RegressionFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::vector<double> residuals;

    double predict(double x) const { return intercept + slope * x; }
};

enum class Predictor { Score, Target };

/// Least-squares line on (x, y); residual[i] = y[i] - fit(x[i]).
RegressionFit ols(std::span<const double> x, std::span<const double> y);

/// Least-squares fit on the pooled records. Predictor::Score fits
/// target ~ score; Predictor::Target fits score ~ target.
RegressionFit pooled_ols(const Dataset& dataset, Predictor predictor);

/// As pooled_ols but the line is fit on `fit_rows` only; residuals are still
/// produced for every record.
RegressionFit ols_fit_on(const Dataset& dataset, Predictor predictor,
                         std::span<const std::size_t> fit_rows);

} // namespace fairlens

#endif
