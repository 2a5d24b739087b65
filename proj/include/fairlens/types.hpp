#ifndef FAIRLENS_TYPES_HPP
#define FAIRLENS_TYPES_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fairlens {

/// Absolute disparity below which a criterion is considered satisfied when the
/// caller gives no tolerance. Exact equality is unattainable on samples.
inline constexpr double kDefaultTolerance = 0.01;

/// Minimum records per cell before a binned statistic is trusted.
inline constexpr int kDefaultMinPerCell = 5;

/// Binary classification counts for one subgroup at fixed thresholds.
/// Rates whose denominator is zero are reported as empty optionals, never NaN.
struct ConfusionMatrix {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;

    std::int64_t total() const { return tp + fp + fn + tn; }

    std::optional<double> tpr() const { return rate(tp, tp + fn); }
    std::optional<double> tnr() const { return rate(tn, tn + fp); }
    std::optional<double> ppv() const { return rate(tp, tp + fp); }
    std::optional<double> npv() const { return rate(tn, tn + fn); }

    bool operator==(const ConfusionMatrix&) const = default;

private:
    static std::optional<double> rate(std::int64_t num, std::int64_t den) {
        if (den <= 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    }
};

/// Pairwise correlations between the group indicator A, the score R and the
/// target Y, plus the two partial correlations the correlation criteria use.
/// Partials are empty when a denominator radicand is not strictly positive.
struct CorrelationTriple {
    double rho_ar = 0.0;
    double rho_ay = 0.0;
    double rho_ry = 0.0;
    std::optional<double> rho_ar_given_y;
    std::optional<double> rho_ay_given_r;
};

/// Per-group score cutoffs plus the shared target cutoff y*.
/// Text form (one line per entry): "group,cutoff" and "__target__,y*".
struct ThresholdMap {
    std::map<std::string, double> per_group_cutoff;
    double target_cutoff = 0.5;

    /// Same cutoff for every group of `groups`.
    static ThresholdMap uniform(const std::vector<std::string>& groups, double cutoff,
                                double y_star);

    std::string to_text() const;
    static ThresholdMap from_text(const std::string& text);
};

/// How a real-valued variable is cut into strata.
struct BinSpec {
    enum class Mode { EqualWidth, EqualCount };
    Mode mode = Mode::EqualWidth;
    int bin_count = 10;
    int min_per_cell = kDefaultMinPerCell;
};

} // namespace fairlens

#endif
