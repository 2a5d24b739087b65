#ifndef FAIRLENS_REPORT_HPP
#define FAIRLENS_REPORT_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairlens/types.hpp"

namespace fairlens {

enum class Verdict { Pass, Fail, Undefined };

std::string to_string(Verdict verdict);

/// One named statistic of a criterion: a value per group and the disparity
/// across them. Values may be +inf (a ratio with zero denominator but nonzero
/// numerator); an empty optional means undefined (0/0 or an empty cell) and
/// forces the undefined verdict.
struct Component {
    std::string name;
    std::map<std::string, std::optional<double>> per_group;

    /// How the component's disparity is aggregated from per-group values.
    enum class Aggregate {
        MaxPairwiseGap,   // parity criteria: max |v_g - v_h| over group pairs
        MaxAbsValue,      // deviation criteria: values are already gaps from ideal
        MaxPositiveValue, // one-sided deviation criteria
    };
    Aggregate aggregate = Aggregate::MaxPairwiseGap;

    bool any_undefined() const;
    /// Disparity under the aggregate rule. Two infinities of the same sign
    /// count as equal; an infinity against a finite value is an infinite gap.
    double disparity() const;
};

struct CriterionReport {
    std::string criterion;
    double tolerance = kDefaultTolerance;
    std::vector<Component> components;
    double max_disparity = 0.0;
    Verdict verdict = Verdict::Undefined;
    std::vector<std::string> notes;

    /// First component's values; the common case of single-statistic criteria.
    const std::map<std::string, std::optional<double>>& per_group_value() const;
};

/// Computes max_disparity and the verdict from the components:
/// undefined if any component value is undefined, else pass iff
/// max_disparity <= tolerance.
CriterionReport finalize_report(std::string criterion, double tolerance,
                                std::vector<Component> components,
                                std::vector<std::string> notes = {});

} // namespace fairlens

#endif
