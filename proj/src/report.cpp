#include "fairlens/report.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "fairlens/error.hpp"

namespace fairlens {

std::string to_string(Verdict verdict) {
    switch (verdict) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Undefined: return "undefined";
    }
    return "undefined";
}

bool Component::any_undefined() const {
    for (const auto& [group, value] : per_group) {
        if (!value.has_value()) return true;
    }
    return per_group.empty();
}

namespace {

double pairwise_gap(double a, double b) {
    if (std::isinf(a) && std::isinf(b)) {
        return (std::signbit(a) == std::signbit(b))
                   ? 0.0
                   : std::numeric_limits<double>::infinity();
    }
    if (std::isinf(a) || std::isinf(b)) {
        return std::numeric_limits<double>::infinity();
    }
    return std::abs(a - b);
}

} // namespace

double Component::disparity() const {
    double worst = 0.0;
    switch (aggregate) {
    case Aggregate::MaxPairwiseGap: {
        std::vector<double> values;
        values.reserve(per_group.size());
        for (const auto& [group, value] : per_group) {
            if (value.has_value()) values.push_back(*value);
        }
        for (size_t i = 0; i < values.size(); ++i) {
            for (size_t j = i + 1; j < values.size(); ++j) {
                worst = std::max(worst, pairwise_gap(values[i], values[j]));
            }
        }
        break;
    }
    case Aggregate::MaxAbsValue:
        for (const auto& [group, value] : per_group) {
            if (value.has_value()) worst = std::max(worst, std::abs(*value));
        }
        break;
    case Aggregate::MaxPositiveValue:
        for (const auto& [group, value] : per_group) {
            if (value.has_value()) worst = std::max(worst, *value);
        }
        break;
    }
    return worst;
}

const std::map<std::string, std::optional<double>>&
CriterionReport::per_group_value() const {
    if (components.empty()) {
        throw InvalidArgument("report for " + criterion + " has no components");
    }
    return components.front().per_group;
}

CriterionReport finalize_report(std::string criterion, double tolerance,
                                std::vector<Component> components,
                                std::vector<std::string> notes) {
    CriterionReport report;
    report.criterion = std::move(criterion);
    report.tolerance = tolerance;
    report.components = std::move(components);
    report.notes = std::move(notes);

    bool undefined = report.components.empty();
    double worst = 0.0;
    for (const auto& component : report.components) {
        if (component.any_undefined()) undefined = true;
        worst = std::max(worst, component.disparity());
    }
    report.max_disparity = worst;
    report.verdict = undefined ? Verdict::Undefined
                   : (worst <= tolerance ? Verdict::Pass : Verdict::Fail);
    return report;
}

} // namespace fairlens
