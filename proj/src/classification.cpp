#include "fairlens/classification.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "fairlens/error.hpp"
#include "fairlens/stats.hpp"
#include "fairlens/synth.hpp"

namespace fairlens {

namespace {

using MatrixMap = std::map<std::string, ConfusionMatrix>;

Component rate_component(const char* name, const MatrixMap& by_group,
                         std::optional<double> (ConfusionMatrix::*rate)() const) {
    Component component;
    component.name = name;
    for (const auto& [group, matrix] : by_group) {
        component.per_group[group] = (matrix.*rate)();
    }
    return component;
}

CriterionReport paired_rate_report(std::string criterion, const MatrixMap& by_group,
                                   const char* first_name,
                                   std::optional<double> (ConfusionMatrix::*first)() const,
                                   const char* second_name,
                                   std::optional<double> (ConfusionMatrix::*second)() const,
                                   double tolerance) {
    return finalize_report(std::move(criterion), tolerance,
                           {rate_component(first_name, by_group, first),
                            rate_component(second_name, by_group, second)});
}

void validate_params(const ThorndikianParams& params) {
    if (!(params.lambda1 >= 0.0 && params.lambda1 <= 1.0 && params.lambda2 >= 0.0 &&
          params.lambda2 <= 1.0)) {
        throw InvalidArgument("lambda weights must lie in [0,1]");
    }
}

std::optional<double> thorndikian_condition_a(const ConfusionMatrix& m,
                                              const ThorndikianParams& params) {
    return extended_ratio(static_cast<double>(m.tp) + params.lambda1 * static_cast<double>(m.fp),
                          static_cast<double>(m.tp) + params.lambda2 * static_cast<double>(m.fn));
}

std::optional<double> thorndikian_condition_b(const ConfusionMatrix& m,
                                              const ThorndikianParams& params) {
    return extended_ratio(static_cast<double>(m.tn) + params.lambda1 * static_cast<double>(m.fn),
                          static_cast<double>(m.tn) + params.lambda2 * static_cast<double>(m.fp));
}

/// Two optionals holding equal values; +inf equals +inf.
bool same_value(const std::optional<double>& a, const std::optional<double>& b) {
    if (a.has_value() != b.has_value()) return false;
    if (!a.has_value()) return false; // undefined never counts as equal
    if (std::isinf(*a) || std::isinf(*b)) {
        return std::isinf(*a) && std::isinf(*b) && std::signbit(*a) == std::signbit(*b);
    }
    return *a == *b;
}

} // namespace

std::optional<double> extended_ratio(double num, double den) {
    if (den > 0.0) return num / den;
    if (num > 0.0) return std::numeric_limits<double>::infinity();
    return std::nullopt;
}

std::map<std::string, ConfusionMatrix> confusion_by_group(const Dataset& dataset,
                                                          const ThresholdMap& thresholds) {
    MatrixMap by_group;
    for (const auto& group : dataset.groups()) {
        if (!thresholds.per_group_cutoff.count(group)) {
            throw InvalidArgument("threshold map has no cutoff for group " + group);
        }
        by_group[group] = ConfusionMatrix{};
    }
    for (const auto& record : dataset.records) {
        const double cutoff = thresholds.per_group_cutoff.at(record.group);
        const bool predicted = record.score >= cutoff;
        const bool positive = record.target >= thresholds.target_cutoff;
        ConfusionMatrix& m = by_group[record.group];
        if (predicted && positive) m.tp += 1;
        else if (predicted && !positive) m.fp += 1;
        else if (!predicted && positive) m.fn += 1;
        else m.tn += 1;
    }
    return by_group;
}

CriterionReport thorndike_ratio(const MatrixMap& by_group, double tolerance) {
    Component component;
    component.name = "prediction_to_truth_ratio";
    for (const auto& [group, m] : by_group) {
        const double truth_positives = static_cast<double>(m.tp + m.fn);
        component.per_group[group] =
            truth_positives > 0.0
                ? std::optional<double>(static_cast<double>(m.tp + m.fp) / truth_positives)
                : std::nullopt;
    }
    return finalize_report("thorndike_ratio", tolerance, {std::move(component)});
}

CriterionReport cole_tpr(const MatrixMap& by_group, double tolerance) {
    return finalize_report("cole_tpr", tolerance,
                           {rate_component("tpr", by_group, &ConfusionMatrix::tpr)});
}

CriterionReport linn_ppv(const MatrixMap& by_group, double tolerance) {
    return finalize_report("linn_ppv", tolerance,
                           {rate_component("ppv", by_group, &ConfusionMatrix::ppv)});
}

CriterionReport peterson_novick_separation(const MatrixMap& by_group, double tolerance) {
    return paired_rate_report("peterson_novick_separation", by_group, "tpr",
                              &ConfusionMatrix::tpr, "tnr", &ConfusionMatrix::tnr,
                              tolerance);
}

CriterionReport peterson_novick_sufficiency(const MatrixMap& by_group, double tolerance) {
    return paired_rate_report("peterson_novick_sufficiency", by_group, "ppv",
                              &ConfusionMatrix::ppv, "npv", &ConfusionMatrix::npv,
                              tolerance);
}

CriterionReport thorndikian(const MatrixMap& by_group, ThorndikianParams params,
                            double tolerance) {
    validate_params(params);
    Component condition_a;
    condition_a.name = "condition_a";
    Component condition_b;
    condition_b.name = "condition_b";
    for (const auto& [group, m] : by_group) {
        condition_a.per_group[group] = thorndikian_condition_a(m, params);
        condition_b.per_group[group] = thorndikian_condition_b(m, params);
    }
    std::vector<std::string> notes{"lambda1=" + format_double(params.lambda1) +
                                   " lambda2=" + format_double(params.lambda2)};
    return finalize_report("thorndikian", tolerance,
                           {std::move(condition_a), std::move(condition_b)},
                           std::move(notes));
}

CriterionReport thorndike_ratio(const Dataset& dataset, const ThresholdMap& thresholds,
                                double tolerance) {
    return thorndike_ratio(confusion_by_group(dataset, thresholds), tolerance);
}

CriterionReport cole_tpr(const Dataset& dataset, const ThresholdMap& thresholds,
                         double tolerance) {
    return cole_tpr(confusion_by_group(dataset, thresholds), tolerance);
}

CriterionReport linn_ppv(const Dataset& dataset, const ThresholdMap& thresholds,
                         double tolerance) {
    return linn_ppv(confusion_by_group(dataset, thresholds), tolerance);
}

CriterionReport peterson_novick_separation(const Dataset& dataset,
                                           const ThresholdMap& thresholds,
                                           double tolerance) {
    return peterson_novick_separation(confusion_by_group(dataset, thresholds), tolerance);
}

CriterionReport peterson_novick_sufficiency(const Dataset& dataset,
                                            const ThresholdMap& thresholds,
                                            double tolerance) {
    return peterson_novick_sufficiency(confusion_by_group(dataset, thresholds), tolerance);
}

CriterionReport thorndikian(const Dataset& dataset, const ThresholdMap& thresholds,
                            ThorndikianParams params, double tolerance) {
    return thorndikian(confusion_by_group(dataset, thresholds), params, tolerance);
}

RankTable RankTable::build(const Dataset& dataset) {
    RankTable table;
    table.by_score.resize(dataset.size());
    std::iota(table.by_score.begin(), table.by_score.end(), std::size_t{0});
    table.by_target = table.by_score;
    std::stable_sort(table.by_score.begin(), table.by_score.end(),
                     [&](std::size_t a, std::size_t b) {
                         return dataset.records[a].score > dataset.records[b].score;
                     });
    std::stable_sort(table.by_target.begin(), table.by_target.end(),
                     [&](std::size_t a, std::size_t b) {
                         return dataset.records[a].target > dataset.records[b].target;
                     });
    return table;
}

namespace {

/// prefix[k] = how many of the group's members occupy the first k slots.
std::vector<std::size_t> group_prefix(const Dataset& dataset,
                                      const std::vector<std::size_t>& order,
                                      const std::string& group) {
    std::vector<std::size_t> prefix(order.size() + 1, 0);
    for (std::size_t k = 0; k < order.size(); ++k) {
        prefix[k + 1] = prefix[k] + (dataset.records[order[k]].group == group ? 1 : 0);
    }
    return prefix;
}

} // namespace

JonesAtN jones_at_n(const Dataset& dataset, const std::string& group, double n_percent) {
    if (!(n_percent > 0.0 && n_percent <= 100.0)) {
        throw InvalidArgument("n_percent must lie in (0,100]");
    }
    const RankTable table = RankTable::build(dataset);
    const auto n = static_cast<double>(dataset.size());
    const auto k = static_cast<std::size_t>(std::floor(n_percent / 100.0 * n + 1e-9));
    const auto score_prefix = group_prefix(dataset, table.by_score, group);
    const auto target_prefix = group_prefix(dataset, table.by_target, group);
    JonesAtN result;
    result.score_count = score_prefix[k];
    result.target_count = target_prefix[k];
    result.equal = result.score_count == result.target_count;
    return result;
}

JonesSweep jones_general_standard(const Dataset& dataset, const std::string& group) {
    const RankTable table = RankTable::build(dataset);
    const auto score_prefix = group_prefix(dataset, table.by_score, group);
    const auto target_prefix = group_prefix(dataset, table.by_target, group);
    JonesSweep sweep;
    for (std::size_t k = 1; k <= dataset.size(); ++k) {
        const std::size_t gap = score_prefix[k] > target_prefix[k]
                                    ? score_prefix[k] - target_prefix[k]
                                    : target_prefix[k] - score_prefix[k];
        if (gap > sweep.worst_gap) {
            sweep.worst_gap = gap;
            sweep.worst_n = k;
        }
    }
    sweep.fair = sweep.worst_gap == 0;
    return sweep;
}

namespace {

/// Bin index per record under the BinSpec, over the given values. Returns -1
/// free bins; equal-count edges come from sorted order so tied values always
/// share a bin.
std::vector<int> assign_bins(const std::vector<double>& values, const BinSpec& bins) {
    if (bins.bin_count < 2) throw InvalidArgument("bin_count must be at least 2");
    const std::size_t n = values.size();
    std::vector<int> assignment(n, 0);
    if (bins.mode == BinSpec::Mode::EqualWidth) {
        const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
        const double lo = *lo_it;
        const double width = (*hi_it - lo) / bins.bin_count;
        for (std::size_t i = 0; i < n; ++i) {
            int bin = width > 0.0 ? static_cast<int>((values[i] - lo) / width)
                                  : 0;
            if (bin >= bins.bin_count) bin = bins.bin_count - 1;
            if (bin < 0) bin = 0;
            assignment[i] = bin;
        }
        return assignment;
    }
    // Equal-count: edges at the k*n/bins order statistics; assignment by how
    // many edges a value has passed keeps tied values together.
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> edges;
    for (int k = 1; k < bins.bin_count; ++k) {
        edges.push_back(sorted[k * n / bins.bin_count]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const int bin = static_cast<int>(
            std::upper_bound(edges.begin(), edges.end(), values[i]) - edges.begin());
        assignment[i] = std::min(bin, bins.bin_count - 1);
    }
    return assignment;
}

} // namespace

CriterionReport guion_individual(const Dataset& dataset, BinSpec bins, double tolerance) {
    if (!dataset.has_decision()) {
        throw InvalidArgument("guion_individual needs a decision column");
    }
    const auto groups = dataset.groups();
    const auto scores = dataset.column("score");
    const std::vector<int> bin_of = assign_bins(scores, bins);

    // Pooled and per-group decision tallies per bin.
    struct Cell {
        std::size_t n = 0;
        std::size_t hired = 0;
    };
    std::vector<Cell> pooled(bins.bin_count);
    std::map<std::string, std::vector<Cell>> per_group;
    for (const auto& group : groups) per_group[group].resize(bins.bin_count);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const Record& record = dataset.records[i];
        Cell& pool = pooled[bin_of[i]];
        Cell& cell = per_group[record.group][bin_of[i]];
        pool.n += 1;
        cell.n += 1;
        const std::size_t hired = static_cast<std::size_t>(*record.decision);
        pool.hired += hired;
        cell.hired += hired;
    }

    Component component;
    component.name = "hire_rate_deviation";
    component.aggregate = Component::Aggregate::MaxAbsValue;
    std::vector<std::string> notes{
        "success proxy: pooled mean target within " + std::to_string(bins.bin_count) +
        " equal-count score bins"};
    for (const auto& group : groups) {
        std::optional<double> worst;
        int usable = 0;
        for (int b = 0; b < bins.bin_count; ++b) {
            const Cell& cell = per_group[group][b];
            if (cell.n < static_cast<std::size_t>(bins.min_per_cell)) continue;
            ++usable;
            const double group_rate =
                static_cast<double>(cell.hired) / static_cast<double>(cell.n);
            const double pooled_rate =
                static_cast<double>(pooled[b].hired) / static_cast<double>(pooled[b].n);
            const double deviation = std::abs(group_rate - pooled_rate);
            if (!worst.has_value() || deviation > *worst) worst = deviation;
        }
        if (usable == 0) {
            notes.push_back("group " + group + ": every score bin is below " +
                            std::to_string(bins.min_per_cell) + " records");
        }
        component.per_group[group] = worst;
    }
    return finalize_report("guion_individual", tolerance, {std::move(component)},
                           std::move(notes));
}

Dataset within_group_percentile(const Dataset& dataset) {
    Dataset adjusted = dataset;
    std::map<std::string, std::vector<std::size_t>> rows_by_group;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        rows_by_group[dataset.records[i].group].push_back(i);
    }
    for (const auto& [group, rows] : rows_by_group) {
        std::vector<std::size_t> order = rows;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return dataset.records[a].score < dataset.records[b].score;
        });
        const double n = static_cast<double>(order.size());
        std::size_t start = 0;
        while (start < order.size()) {
            std::size_t stop = start + 1;
            while (stop < order.size() &&
                   dataset.records[order[stop]].score ==
                       dataset.records[order[start]].score) {
                ++stop;
            }
            // Midrank of the tie block: average of ranks start+1 .. stop.
            const double midrank =
                (static_cast<double>(start + 1) + static_cast<double>(stop)) / 2.0;
            const double percentile = (midrank - 0.5) / n;
            for (std::size_t j = start; j < stop; ++j) {
                adjusted.records[order[j]].score = percentile;
            }
            start = stop;
        }
    }
    return adjusted;
}

namespace {

using MatrixCriterion =
    std::function<CriterionReport(const MatrixMap&, double)>;

MatrixCriterion criterion_by_name(const std::string& criterion,
                                  const ThorndikianParams& params) {
    if (criterion == "cole_tpr")
        return [](const MatrixMap& m, double tol) { return cole_tpr(m, tol); };
    if (criterion == "linn_ppv")
        return [](const MatrixMap& m, double tol) { return linn_ppv(m, tol); };
    if (criterion == "thorndike_ratio")
        return [](const MatrixMap& m, double tol) { return thorndike_ratio(m, tol); };
    if (criterion == "peterson_novick_separation")
        return [](const MatrixMap& m, double tol) {
            return peterson_novick_separation(m, tol);
        };
    if (criterion == "peterson_novick_sufficiency")
        return [](const MatrixMap& m, double tol) {
            return peterson_novick_sufficiency(m, tol);
        };
    if (criterion == "thorndikian")
        return [params](const MatrixMap& m, double tol) {
            return thorndikian(m, params, tol);
        };
    throw InvalidArgument("criterion " + criterion + " is not solvable; expected one of "
                          "cole_tpr, linn_ppv, thorndike_ratio, thorndikian, "
                          "peterson_novick_separation, peterson_novick_sufficiency");
}

ConfusionMatrix count_group(const Dataset& dataset, const std::string& group,
                            double cutoff, double y_star) {
    ConfusionMatrix m;
    for (const auto& record : dataset.records) {
        if (record.group != group) continue;
        const bool predicted = record.score >= cutoff;
        const bool positive = record.target >= y_star;
        if (predicted && positive) m.tp += 1;
        else if (predicted && !positive) m.fp += 1;
        else if (!predicted && positive) m.fn += 1;
        else m.tn += 1;
    }
    return m;
}

std::vector<double> candidate_cutoffs(const Dataset& dataset, const std::string& group) {
    std::vector<double> cutoffs;
    for (const auto& record : dataset.records) {
        if (group.empty() || record.group == group) cutoffs.push_back(record.score);
    }
    std::sort(cutoffs.begin(), cutoffs.end());
    cutoffs.erase(std::unique(cutoffs.begin(), cutoffs.end()), cutoffs.end());
    cutoffs.push_back(std::numeric_limits<double>::infinity());
    return cutoffs;
}

} // namespace

const std::vector<std::string>& solvable_criteria() {
    static const std::vector<std::string> names{
        "cole_tpr",
        "linn_ppv",
        "thorndike_ratio",
        "thorndikian",
        "peterson_novick_separation",
        "peterson_novick_sufficiency",
    };
    return names;
}

SolveResult solve_fair_thresholds(const Dataset& dataset, const std::string& criterion,
                                  double y_star, double tolerance,
                                  ThorndikianParams params) {
    const MatrixCriterion evaluate = criterion_by_name(criterion, params);
    const auto sizes = dataset.group_sizes();

    // Largest group; ties resolved towards the lexicographically first label
    // (map iteration order is ascending, > keeps the earlier maximum).
    std::string reference;
    std::size_t reference_size = 0;
    for (const auto& [group, size] : sizes) {
        if (size > reference_size) {
            reference = group;
            reference_size = size;
        }
    }

    // Reference cutoff: maximize pooled accuracy; ties -> lowest cutoff.
    double reference_cutoff = std::numeric_limits<double>::infinity();
    std::int64_t best_correct = -1;
    for (const double cutoff : candidate_cutoffs(dataset, "")) {
        std::int64_t correct = 0;
        for (const auto& record : dataset.records) {
            const bool predicted = record.score >= cutoff;
            const bool positive = record.target >= y_star;
            if (predicted == positive) ++correct;
        }
        if (correct > best_correct) {
            best_correct = correct;
            reference_cutoff = cutoff;
        }
    }

    SolveResult result;
    result.reference_group = reference;
    result.thresholds.target_cutoff = y_star;
    result.thresholds.per_group_cutoff[reference] = reference_cutoff;

    const ConfusionMatrix reference_matrix =
        count_group(dataset, reference, reference_cutoff, y_star);

    for (const auto& [group, size] : sizes) {
        if (group == reference) continue;
        double best_cutoff = std::numeric_limits<double>::quiet_NaN();
        double best_disparity = std::numeric_limits<double>::infinity();
        bool any_defined = false;
        for (const double cutoff : candidate_cutoffs(dataset, group)) {
            MatrixMap pair;
            pair[reference] = reference_matrix;
            pair[group] = count_group(dataset, group, cutoff, y_star);
            const CriterionReport report = evaluate(pair, tolerance);
            if (report.verdict == Verdict::Undefined) continue;
            any_defined = true;
            if (report.max_disparity < best_disparity) {
                best_disparity = report.max_disparity;
                best_cutoff = cutoff;
            }
        }
        if (!any_defined) {
            result.feasible = false;
            result.diagnostic = "criterion " + criterion + " is undefined for group " +
                                group + " at every cutoff (reference " + reference + ")";
            return result;
        }
        result.thresholds.per_group_cutoff[group] = best_cutoff;
        if (best_disparity > tolerance) {
            result.feasible = false;
            result.diagnostic =
                "group " + group + " cannot match reference " + reference + " within " +
                format_double(tolerance) + "; best achievable disparity is " +
                format_double(best_disparity);
            return result;
        }
    }

    const CriterionReport full =
        evaluate(confusion_by_group(dataset, result.thresholds), tolerance);
    result.achieved_disparity = full.max_disparity;
    return result;
}

ThorndikianCensus thorndikian_census(int max_count) {
    ThorndikianCensus census;
    const ThorndikianParams both_ones{1.0, 1.0};
    const std::vector<ConfusionMatrix> matrices = enumerate_confusion_matrices(max_count);

    // Precompute per-matrix values once; the pair loop is the hot path.
    struct Row {
        std::optional<double> condition_a, condition_b, ratio, base_rate;
    };
    std::vector<Row> rows(matrices.size());
    for (std::size_t i = 0; i < matrices.size(); ++i) {
        const ConfusionMatrix& m = matrices[i];
        rows[i].condition_a = thorndikian_condition_a(m, both_ones);
        rows[i].condition_b = thorndikian_condition_b(m, both_ones);
        rows[i].ratio = extended_ratio(static_cast<double>(m.tp + m.fp),
                                       static_cast<double>(m.tp + m.fn));
        rows[i].base_rate = extended_ratio(static_cast<double>(m.tp + m.fn),
                                           static_cast<double>(m.total()));
    }

    for (const Row& first : rows) {
        for (const Row& second : rows) {
            census.pairs += 1;
            if (!same_value(first.condition_a, second.condition_a) ||
                !same_value(first.condition_b, second.condition_b)) {
                continue;
            }
            census.passing += 1;
            if (same_value(first.ratio, second.ratio)) census.ratio_equal += 1;
            if (same_value(first.base_rate, second.base_rate))
                census.base_rates_equal += 1;
        }
    }
    return census;
}

} // namespace fairlens
