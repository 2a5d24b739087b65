#include "fairlens/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "fairlens/dataset.hpp"
#include "fairlens/error.hpp"
#include "fairlens/stats.hpp"

namespace fairlens {

namespace {

std::vector<std::size_t> rows_of_group(const Dataset& dataset, const std::string& group) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (dataset.records[i].group == group) rows.push_back(i);
    }
    if (rows.empty()) throw InvalidArgument("unknown group label: " + group);
    return rows;
}

/// Group mean residuals of a line fit pooled or on one group.
CriterionReport mean_residual_report(const Dataset& dataset, Predictor predictor,
                                     const std::string& criterion,
                                     const std::string& component_name,
                                     const std::string& fit_on, SignPolicy policy,
                                     double tolerance, bool negate) {
    const RegressionFit fit =
        fit_on.empty() ? pooled_ols(dataset, predictor)
                       : ols_fit_on(dataset, predictor, rows_of_group(dataset, fit_on));

    std::map<std::string, double> sums;
    std::map<std::string, std::size_t> counts;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        sums[dataset.records[i].group] += fit.residuals[i];
        counts[dataset.records[i].group] += 1;
    }

    Component component;
    component.name = component_name;
    component.aggregate = policy == SignPolicy::UnderpredictionOnly
                              ? Component::Aggregate::MaxPositiveValue
                              : Component::Aggregate::MaxAbsValue;
    for (const auto& [group, sum] : sums) {
        double value = sum / static_cast<double>(counts.at(group));
        if (negate) value = -value;
        component.per_group[group] = value;
    }

    std::vector<std::string> notes;
    const char* response = predictor == Predictor::Score ? "target~score" : "score~target";
    notes.push_back(fit_on.empty()
                        ? std::string("fit: pooled least squares ") + response
                        : std::string("fit: least squares ") + response + " on group " +
                              fit_on + " only");
    if (policy == SignPolicy::UnderpredictionOnly) {
        notes.push_back("sign policy: only positive deviations count");
    }
    return finalize_report(criterion, tolerance, {std::move(component)}, std::move(notes));
}

struct GroupCell {
    std::size_t n = 0;
    double sum_gap = 0.0; // per-record gap contributions
};

/// Occupied bin -> group -> cell, for a caller-supplied bin index and
/// per-record gap term.
template <typename BinOf, typename GapOf>
std::map<int, std::map<std::string, GroupCell>> fill_cells(const Dataset& dataset,
                                                           BinOf bin_of, GapOf gap_of) {
    std::map<int, std::map<std::string, GroupCell>> cells;
    for (const auto& record : dataset.records) {
        GroupCell& cell = cells[bin_of(record)][record.group];
        cell.n += 1;
        cell.sum_gap += gap_of(record);
    }
    return cells;
}

/// Worst adequately filled |cell mean gap| per group, with sparse-bin notes.
CriterionReport worst_cell_report(const Dataset& dataset, const std::string& criterion,
                                  const std::string& component_name,
                                  const std::map<int, std::map<std::string, GroupCell>>& cells,
                                  int min_per_cell, double tolerance,
                                  std::vector<std::string> notes) {
    Component component;
    component.name = component_name;
    component.aggregate = Component::Aggregate::MaxAbsValue;

    std::map<std::string, std::optional<double>> worst;
    std::map<std::string, int> sparse_bins;
    std::map<std::string, int> occupied_bins;
    for (const std::string& group : dataset.groups()) worst[group] = std::nullopt;
    for (const auto& [bin, by_group] : cells) {
        for (const auto& [group, cell] : by_group) {
            occupied_bins[group] += 1;
            if (cell.n < static_cast<std::size_t>(min_per_cell)) {
                sparse_bins[group] += 1;
                continue;
            }
            const double gap = std::abs(cell.sum_gap / static_cast<double>(cell.n));
            auto& slot = worst[group];
            if (!slot || gap > *slot) slot = gap;
        }
    }
    for (const auto& [group, count] : sparse_bins) {
        notes.push_back("group " + group + ": " + std::to_string(count) + " of " +
                        std::to_string(occupied_bins[group]) +
                        " occupied bins below min_per_cell=" + std::to_string(min_per_cell) +
                        (worst.at(group) ? ", excluded" : "; no usable bin"));
    }
    component.per_group = std::move(worst);
    return finalize_report(criterion, tolerance, {std::move(component)}, std::move(notes));
}

/// Equal-width index over [lo, hi]; the top edge closes the last bin.
int equal_width_bin(double value, double lo, double hi, int bin_count) {
    if (!(hi > lo)) return 0;
    const double scaled = (value - lo) / (hi - lo) * bin_count;
    return std::clamp(static_cast<int>(scaled), 0, bin_count - 1);
}

/// Equal-count bin edges from the pooled values: bin k spans
/// sorted[k*n/bins] .. sorted[(k+1)*n/bins); lookup by upper_bound keeps
/// tied values in one bin.
std::vector<double> equal_count_edges(std::vector<double> values, int bin_count) {
    std::sort(values.begin(), values.end());
    std::vector<double> edges;
    const std::size_t n = values.size();
    for (int k = 1; k < bin_count; ++k) {
        edges.push_back(values[k * n / bin_count]);
    }
    return edges;
}

int edge_bin(double value, const std::vector<double>& edges) {
    return static_cast<int>(std::upper_bound(edges.begin(), edges.end(), value) -
                            edges.begin());
}

} // namespace

CriterionReport cleary_bias(const Dataset& dataset, const std::string& fit_on,
                            SignPolicy policy, double tolerance) {
    return mean_residual_report(dataset, Predictor::Score, "cleary", "mean_residual",
                                fit_on, policy, tolerance, /*negate=*/false);
}

CriterionReport converse_cleary(const Dataset& dataset, const std::string& fit_on,
                                SignPolicy policy, double tolerance) {
    return mean_residual_report(dataset, Predictor::Target, "converse_cleary",
                                "mean_residual", fit_on, policy, tolerance,
                                /*negate=*/false);
}

CriterionReport jones_mean_fair(const Dataset& dataset, double tolerance) {
    return mean_residual_report(dataset, Predictor::Score, "jones_mean_fair",
                                "prediction_gap", "", SignPolicy::BothSigns, tolerance,
                                /*negate=*/true);
}

CriterionReport calibration_check(const Dataset& dataset, BinSpec bins, double tolerance) {
    if (bins.bin_count < 1) throw InvalidArgument("calibration: bin_count must be >= 1");
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const Record& record = dataset.records[i];
        if (record.target != 0.0 && record.target != 1.0) {
            throw InvalidArgument("calibration requires a binary 0/1 target (row " +
                                  std::to_string(i + 1) + ")");
        }
        if (record.score < 0.0 || record.score > 1.0) {
            throw InvalidArgument("calibration requires scores in [0,1] (row " +
                                  std::to_string(i + 1) + ")");
        }
    }

    std::vector<std::string> notes;
    std::map<int, std::map<std::string, GroupCell>> cells;
    const auto gap_of = [](const Record& r) { return r.target - r.score; };
    if (bins.mode == BinSpec::Mode::EqualWidth) {
        notes.push_back("bins: " + std::to_string(bins.bin_count) +
                        " equal-width on [0,1]");
        cells = fill_cells(dataset,
                           [&](const Record& r) {
                               return equal_width_bin(r.score, 0.0, 1.0, bins.bin_count);
                           },
                           gap_of);
    } else {
        notes.push_back("bins: " + std::to_string(bins.bin_count) +
                        " equal-count on pooled scores");
        std::vector<double> scores;
        for (const auto& record : dataset.records) scores.push_back(record.score);
        const std::vector<double> edges = equal_count_edges(std::move(scores),
                                                            bins.bin_count);
        cells = fill_cells(dataset,
                           [&](const Record& r) { return edge_bin(r.score, edges); },
                           gap_of);
    }
    return worst_cell_report(dataset, "calibration", "calibration_gap", cells,
                             bins.min_per_cell, tolerance, std::move(notes));
}

CriterionReport converse_calibration_check(const Dataset& dataset, BinSpec bins,
                                           double tolerance) {
    if (bins.bin_count < 1)
        throw InvalidArgument("converse_calibration: bin_count must be >= 1");
    if (dataset.records.empty())
        throw InvalidArgument("converse_calibration: empty dataset");

    std::vector<std::string> notes;
    std::map<int, std::map<std::string, GroupCell>> cells;
    const auto gap_of = [](const Record& r) { return r.score - r.target; };
    if (bins.mode == BinSpec::Mode::EqualWidth) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const auto& record : dataset.records) {
            lo = std::min(lo, record.target);
            hi = std::max(hi, record.target);
        }
        notes.push_back("bins: " + std::to_string(bins.bin_count) +
                        " equal-width on the observed outcome range [" +
                        format_double(lo) + "," + format_double(hi) + "]");
        cells = fill_cells(dataset,
                           [&](const Record& r) {
                               return equal_width_bin(r.target, lo, hi, bins.bin_count);
                           },
                           gap_of);
    } else {
        notes.push_back("bins: " + std::to_string(bins.bin_count) +
                        " equal-count on pooled outcomes");
        std::vector<double> targets;
        for (const auto& record : dataset.records) targets.push_back(record.target);
        const std::vector<double> edges = equal_count_edges(std::move(targets),
                                                            bins.bin_count);
        cells = fill_cells(dataset,
                           [&](const Record& r) { return edge_bin(r.target, edges); },
                           gap_of);
    }
    return worst_cell_report(dataset, "converse_calibration", "converse_calibration_gap",
                             cells, bins.min_per_cell, tolerance, std::move(notes));
}

CriterionReport einhorn_bass(const Dataset& dataset, const ThresholdMap& thresholds,
                             std::optional<double> halfwidth, int min_per_cell,
                             double tolerance) {
    if (halfwidth && !(*halfwidth > 0.0))
        throw InvalidArgument("einhorn_bass: halfwidth must be positive");
    if (dataset.size() < 2) throw InvalidArgument("einhorn_bass: need at least 2 records");

    double width;
    std::vector<std::string> notes;
    if (halfwidth) {
        width = *halfwidth;
        notes.push_back("halfwidth: " + format_double(width));
    } else {
        double sum = 0.0;
        for (const auto& record : dataset.records) sum += record.score;
        const double avg = sum / static_cast<double>(dataset.size());
        double ss = 0.0;
        for (const auto& record : dataset.records) {
            ss += (record.score - avg) * (record.score - avg);
        }
        const double sd = std::sqrt(ss / static_cast<double>(dataset.size() - 1));
        width = 0.1 * sd;
        notes.push_back("halfwidth: " + format_double(width) +
                        " (0.1 x pooled score standard deviation)");
    }

    Component component;
    component.name = "designated_risk";
    component.aggregate = Component::Aggregate::MaxPairwiseGap;
    for (const std::string& group : dataset.groups()) {
        const auto cutoff_it = thresholds.per_group_cutoff.find(group);
        if (cutoff_it == thresholds.per_group_cutoff.end()) {
            throw InvalidArgument("no cutoff for group " + group);
        }
        std::size_t in_window = 0;
        std::size_t above = 0;
        for (const auto& record : dataset.records) {
            if (record.group != group) continue;
            if (std::abs(record.score - cutoff_it->second) > width) continue;
            in_window += 1;
            if (record.target > thresholds.target_cutoff) above += 1;
        }
        if (in_window == 0) {
            component.per_group[group] = std::nullopt;
            notes.push_back("group " + group + ": no scores within the window around " +
                            format_double(cutoff_it->second));
        } else if (in_window < static_cast<std::size_t>(min_per_cell)) {
            component.per_group[group] = std::nullopt;
            notes.push_back("group " + group + ": only " + std::to_string(in_window) +
                            " scores in the window, below min_per_cell=" +
                            std::to_string(min_per_cell));
        } else {
            component.per_group[group] =
                static_cast<double>(above) / static_cast<double>(in_window);
            notes.push_back("group " + group + ": window holds " +
                            std::to_string(in_window) + " records");
        }
    }
    return finalize_report("einhorn_bass", tolerance, {std::move(component)},
                           std::move(notes));
}

} // namespace fairlens
