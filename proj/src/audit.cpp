#include "fairlens/audit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fairlens/correlation.hpp"
#include "fairlens/error.hpp"

namespace fairlens {

using ordered_json = nlohmann::ordered_json;

namespace {

/// null for undefined, "inf"/"-inf" for infinities, a number otherwise.
ordered_json encode_value(const std::optional<double>& value) {
    if (!value) return nullptr;
    if (std::isinf(*value)) return std::signbit(*value) ? "-inf" : "inf";
    return *value;
}

std::string csv_value(const std::optional<double>& value) {
    if (!value) return "";
    if (std::isinf(*value)) return std::signbit(*value) ? "-inf" : "inf";
    return format_double(*value);
}

const char* aggregate_name(Component::Aggregate aggregate) {
    switch (aggregate) {
    case Component::Aggregate::MaxPairwiseGap: return "max_pairwise_gap";
    case Component::Aggregate::MaxAbsValue: return "max_abs_value";
    case Component::Aggregate::MaxPositiveValue: return "max_positive_value";
    }
    return "max_pairwise_gap";
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(
        std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
}

/// One resolved criterion evaluation: either a standard report or one of the
/// special shapes (dif, jones, optimum) already rendered to JSON + CSV rows.
struct Evaluation {
    ordered_json entry;
    std::vector<std::string> csv_rows;
    Verdict verdict = Verdict::Pass;
};

void append_report_rows(const CriterionReport& report, std::vector<std::string>& rows) {
    for (const Component& component : report.components) {
        for (const auto& [group, value] : component.per_group) {
            rows.push_back(report.criterion + "," + component.name + "," + group + "," +
                           csv_value(value) + "," + format_double(component.disparity()) +
                           "," + format_double(report.tolerance) + "," +
                           to_string(report.verdict));
        }
    }
}

Evaluation evaluate_report(const CriterionReport& report) {
    Evaluation evaluation;
    evaluation.verdict = report.verdict;

    ordered_json entry;
    entry["criterion"] = report.criterion;
    entry["verdict"] = to_string(report.verdict);
    entry["tolerance"] = report.tolerance;
    entry["max_disparity"] = encode_value(report.max_disparity);
    ordered_json components = ordered_json::array();
    for (const Component& component : report.components) {
        ordered_json block;
        block["name"] = component.name;
        block["aggregate"] = aggregate_name(component.aggregate);
        ordered_json per_group;
        for (const auto& [group, value] : component.per_group) {
            per_group[group] = encode_value(value);
        }
        block["per_group"] = std::move(per_group);
        block["disparity"] = encode_value(component.disparity());
        components.push_back(std::move(block));
    }
    entry["components"] = std::move(components);
    entry["notes"] = report.notes;
    evaluation.entry = std::move(entry);
    append_report_rows(report, evaluation.csv_rows);
    return evaluation;
}

Evaluation evaluate_dif(const Dataset& dataset, const AuditOptions& options) {
    const DifReport dif = dif_analyze(dataset, options.dif_ability, options.dif_strata,
                                      options.dif_flag_threshold);
    bool any_flagged = false;
    bool any_undiagnosable = false;
    ordered_json items = ordered_json::array();
    Evaluation evaluation;
    for (const ItemReport& item : dif.items) {
        any_flagged = any_flagged || item.flagged;
        any_undiagnosable = any_undiagnosable || item.undiagnosable;
        ordered_json block;
        block["item_id"] = item.item_id;
        block["flagged"] = item.flagged;
        block["undiagnosable"] = item.undiagnosable;
        block["weighted_gap"] =
            item.undiagnosable ? ordered_json(nullptr) : ordered_json(item.weighted_gap);
        block["per_stratum_gap"] = item.per_stratum_gap;
        block["stratum_sizes"] = item.stratum_sizes;
        block["excluded_strata"] = item.excluded_strata;
        items.push_back(std::move(block));

        const char* verdict = item.flagged ? "fail"
                             : item.undiagnosable ? "undefined"
                                                  : "pass";
        const std::string gap =
            item.undiagnosable ? "" : format_double(item.weighted_gap);
        evaluation.csv_rows.push_back("dif," + item.item_id + ",," + gap + "," + gap +
                                      "," + format_double(options.dif_flag_threshold) +
                                      "," + verdict);
    }
    evaluation.verdict = any_flagged ? Verdict::Fail
                        : any_undiagnosable ? Verdict::Undefined
                                            : Verdict::Pass;

    ordered_json entry;
    entry["criterion"] = "dif";
    entry["verdict"] = to_string(evaluation.verdict);
    entry["flag_threshold"] = options.dif_flag_threshold;
    entry["ability"] =
        options.dif_ability == AbilityMeasure::RestScore ? "rest_score" : "target";
    entry["items"] = std::move(items);
    evaluation.entry = std::move(entry);
    return evaluation;
}

Evaluation evaluate_jones_at_n(const Dataset& dataset, const std::string& group,
                               double percent) {
    const JonesAtN result = jones_at_n(dataset, group, percent);
    Evaluation evaluation;
    evaluation.verdict = result.equal ? Verdict::Pass : Verdict::Fail;
    ordered_json entry;
    entry["criterion"] = "jones_at_n";
    entry["verdict"] = to_string(evaluation.verdict);
    entry["group"] = group;
    entry["n_percent"] = percent;
    entry["count_by_score"] = result.score_count;
    entry["count_by_target"] = result.target_count;
    evaluation.entry = std::move(entry);
    const std::string verdict = to_string(evaluation.verdict);
    evaluation.csv_rows.push_back("jones_at_n,count_by_score," + group + "," +
                                  std::to_string(result.score_count) + ",,," + verdict);
    evaluation.csv_rows.push_back("jones_at_n,count_by_target," + group + "," +
                                  std::to_string(result.target_count) + ",,," + verdict);
    return evaluation;
}

Evaluation evaluate_jones_sweep(const Dataset& dataset, const std::string& group) {
    const JonesSweep sweep = jones_general_standard(dataset, group);
    Evaluation evaluation;
    evaluation.verdict = sweep.fair ? Verdict::Pass : Verdict::Fail;
    ordered_json entry;
    entry["criterion"] = "jones_general_standard";
    entry["verdict"] = to_string(evaluation.verdict);
    entry["group"] = group;
    if (!sweep.fair) {
        entry["worst_n"] = sweep.worst_n;
        entry["worst_gap"] = sweep.worst_gap;
    }
    evaluation.entry = std::move(entry);
    evaluation.csv_rows.push_back("jones_general_standard,worst_gap," + group + "," +
                                  std::to_string(sweep.fair ? 0 : sweep.worst_gap) +
                                  ",,," + to_string(evaluation.verdict));
    return evaluation;
}

Evaluation evaluate_optimum(const Dataset& dataset, const AuditOptions& options,
                            const std::string& group) {
    std::vector<std::string> candidates = options.optimum_candidates;
    if (candidates.empty()) candidates = dataset.extra_columns;
    const OptimumResult result = culturally_optimum(dataset, candidates,
                                                    options.optimum_k, group);
    Evaluation evaluation;
    evaluation.verdict = Verdict::Pass; // constructive: reports a composite
    ordered_json entry;
    entry["criterion"] = "culturally_optimum";
    entry["verdict"] = to_string(evaluation.verdict);
    entry["k"] = options.optimum_k;
    entry["group_as_one"] = group;
    ordered_json weights;
    for (std::size_t i = 0; i < result.candidates.size(); ++i) {
        weights[result.candidates[i]] = result.weights[i];
        evaluation.csv_rows.push_back("culturally_optimum,weight," +
                                      result.candidates[i] + "," +
                                      format_double(result.weights[i]) + ",,,pass");
    }
    entry["weights"] = std::move(weights);
    entry["achieved_correlation"] = result.achieved;
    entry["collinear"] = result.collinear;
    entry["notes"] = result.notes;
    evaluation.entry = std::move(entry);
    evaluation.csv_rows.push_back("culturally_optimum,achieved_correlation,," +
                                  format_double(result.achieved) + ",,,pass");
    return evaluation;
}

bool binary_targets(const Dataset& dataset) {
    for (const auto& record : dataset.records) {
        if (record.target != 0.0 && record.target != 1.0) return false;
    }
    return true;
}

bool unit_scores(const Dataset& dataset) {
    for (const auto& record : dataset.records) {
        if (record.score < 0.0 || record.score > 1.0) return false;
    }
    return true;
}

const std::set<std::string>& matrix_criteria() {
    static const std::set<std::string> names = {
        "thorndike_ratio", "cole_tpr", "linn_ppv", "peterson_novick_separation",
        "peterson_novick_sufficiency", "thorndikian", "einhorn_bass"};
    return names;
}

} // namespace

ThresholdSource parse_threshold_source(const std::string& text) {
    const auto first = text.find(':');
    const std::string head = text.substr(0, first);
    const std::string rest = first == std::string::npos ? "" : text.substr(first + 1);

    const auto parse_number = [&](const std::string& piece, const char* what) {
        try {
            std::size_t used = 0;
            const double value = std::stod(piece, &used);
            if (used != piece.size()) throw std::invalid_argument(piece);
            return value;
        } catch (const std::exception&) {
            throw InvalidArgument(std::string("thresholds: bad ") + what + " '" + piece +
                                  "' in '" + text + "'");
        }
    };

    ThresholdSource source;
    if (head == "fixed") {
        source.kind = ThresholdSource::Kind::Fixed;
        if (rest.empty()) throw InvalidArgument("thresholds: fixed needs a cutoff");
        const auto second = rest.find(':');
        source.cutoff = parse_number(rest.substr(0, second), "cutoff");
        if (second != std::string::npos) {
            source.y_star = parse_number(rest.substr(second + 1), "y*");
        }
    } else if (head == "file") {
        source.kind = ThresholdSource::Kind::File;
        if (rest.empty()) throw InvalidArgument("thresholds: file needs a path");
        source.path = rest;
    } else if (head == "solver") {
        source.kind = ThresholdSource::Kind::Solver;
        const auto second = rest.find(':');
        source.criterion = rest.substr(0, second);
        if (source.criterion.empty())
            throw InvalidArgument("thresholds: solver needs a criterion name");
        if (second != std::string::npos) {
            source.y_star = parse_number(rest.substr(second + 1), "y*");
        }
    } else {
        throw InvalidArgument("thresholds: unknown source '" + text +
                              "' (expected fixed:, file:, or solver:)");
    }
    return source;
}

const std::vector<std::string>& default_criteria() {
    static const std::vector<std::string> names = {
        "darlington1", "darlington2", "darlington3", "darlington4",
        "cleary", "converse_cleary", "jones_mean_fair",
        "calibration", "converse_calibration",
        "thorndike_ratio", "cole_tpr", "linn_ppv",
        "peterson_novick_separation", "peterson_novick_sufficiency", "thorndikian",
        "einhorn_bass", "guion", "dif"};
    return names;
}

const std::vector<std::string>& explicit_only_criteria() {
    static const std::vector<std::string> names = {
        "compromise", "jones_at_n", "jones_general_standard", "culturally_optimum"};
    return names;
}

AuditOutcome run_audit(const Dataset& dataset, const AuditOptions& options) {
    dataset.validate();
    if (options.tolerance < 0.0) throw InvalidArgument("audit: negative tolerance");

    const std::vector<std::string> groups = dataset.groups();
    std::string group_one = options.group_as_one;
    if (group_one.empty()) {
        group_one = groups.back(); // sorted: lexicographically greatest
    } else if (std::find(groups.begin(), groups.end(), group_one) == groups.end()) {
        throw InvalidArgument("unknown group label: " + group_one);
    }

    const bool battery = options.criteria.empty();
    std::vector<std::string> requested = battery ? default_criteria() : options.criteria;
    { // validate names, drop duplicates, keep order
        std::set<std::string> known(default_criteria().begin(), default_criteria().end());
        known.insert(explicit_only_criteria().begin(), explicit_only_criteria().end());
        std::set<std::string> seen;
        std::vector<std::string> cleaned;
        for (const std::string& name : requested) {
            if (!known.count(name)) throw InvalidArgument("unknown criterion: " + name);
            if (seen.insert(name).second) cleaned.push_back(name);
        }
        requested = std::move(cleaned);
    }

    // Resolve thresholds up front; solver infeasibility is a reportable
    // outcome, not an error.
    std::optional<ThresholdMap> threshold_map;
    ordered_json thresholds_json = nullptr;
    bool infeasible = false;
    if (options.thresholds) {
        const ThresholdSource& source = *options.thresholds;
        switch (source.kind) {
        case ThresholdSource::Kind::Fixed:
            threshold_map = ThresholdMap::uniform(groups, source.cutoff, source.y_star);
            thresholds_json["source"] = "fixed";
            break;
        case ThresholdSource::Kind::File: {
            std::ifstream in(source.path);
            if (!in) throw ParseError("cannot open threshold file: " + source.path);
            std::ostringstream text;
            text << in.rdbuf();
            threshold_map = ThresholdMap::from_text(text.str());
            thresholds_json["source"] = "file";
            thresholds_json["path"] = source.path;
            break;
        }
        case ThresholdSource::Kind::Solver: {
            const SolveResult solved = solve_fair_thresholds(
                dataset, source.criterion, source.y_star, options.tolerance,
                options.thorndikian_params);
            thresholds_json["source"] = "solver";
            thresholds_json["criterion"] = source.criterion;
            thresholds_json["reference_group"] = solved.reference_group;
            if (solved.feasible) {
                threshold_map = solved.thresholds;
                thresholds_json["achieved_disparity"] = solved.achieved_disparity;
            } else {
                infeasible = true;
                thresholds_json["infeasible"] = true;
                thresholds_json["diagnostic"] = solved.diagnostic;
            }
            break;
        }
        }
        if (threshold_map) {
            ordered_json cutoffs;
            for (const auto& [group, cutoff] : threshold_map->per_group_cutoff) {
                cutoffs[group] = encode_value(cutoff);
            }
            thresholds_json["cutoffs"] = std::move(cutoffs);
            thresholds_json["y_star"] = threshold_map->target_cutoff;
        }
    }

    ordered_json criteria_json = ordered_json::array();
    ordered_json skipped_json = ordered_json::array();
    std::vector<std::string> csv_rows;
    bool any_fail = false;
    bool any_undefined = infeasible;

    const auto skip = [&](const std::string& name, const std::string& reason) {
        ordered_json entry;
        entry["criterion"] = name;
        entry["reason"] = reason;
        skipped_json.push_back(std::move(entry));
    };

    for (const std::string& name : requested) {
        // Battery mode skips criteria whose inputs are absent.
        if (battery) {
            std::string reason;
            if ((name.rfind("darlington", 0) == 0 || name == "compromise") &&
                groups.size() != 2) {
                reason = "needs exactly 2 groups";
            } else if (name == "calibration" &&
                       !(binary_targets(dataset) && unit_scores(dataset))) {
                reason = "needs a binary 0/1 target and scores in [0,1]";
            } else if (name == "guion" && !dataset.has_decision()) {
                reason = "no decision column";
            } else if (name == "dif" && !dataset.has_items()) {
                reason = "no item columns";
            } else if (name == "dif" && options.dif_ability == AbilityMeasure::RestScore &&
                       dataset.item_ids.size() < 2) {
                reason = "rest-score matching needs at least 2 items";
            } else if (matrix_criteria().count(name) && !options.thresholds) {
                reason = "no thresholds configured";
            } else if (matrix_criteria().count(name) && !threshold_map) {
                reason = "threshold solve infeasible";
            }
            if (!reason.empty()) {
                skip(name, reason);
                continue;
            }
        } else if (matrix_criteria().count(name)) {
            if (!options.thresholds) {
                throw InvalidArgument("criterion " + name + " needs a threshold source");
            }
            if (!threshold_map) {
                // Solver failed; surface it as a skip with undefined outcome.
                skip(name, "threshold solve infeasible");
                any_undefined = true;
                continue;
            }
        }

        Evaluation evaluation;
        if (name.rfind("darlington", 0) == 0) {
            const int which = name.back() - '0';
            evaluation = evaluate_report(
                darlington_check(dataset, group_one, which, options.tolerance));
        } else if (name == "cleary") {
            evaluation = evaluate_report(cleary_bias(dataset, options.fit_on,
                                                     options.sign_policy,
                                                     options.tolerance));
        } else if (name == "converse_cleary") {
            evaluation = evaluate_report(converse_cleary(dataset, options.fit_on,
                                                         options.sign_policy,
                                                         options.tolerance));
        } else if (name == "jones_mean_fair") {
            evaluation = evaluate_report(jones_mean_fair(dataset, options.tolerance));
        } else if (name == "calibration") {
            evaluation = evaluate_report(
                calibration_check(dataset, options.calibration_bins, options.tolerance));
        } else if (name == "converse_calibration") {
            evaluation = evaluate_report(converse_calibration_check(
                dataset, options.calibration_bins, options.tolerance));
        } else if (name == "thorndike_ratio") {
            evaluation = evaluate_report(
                thorndike_ratio(dataset, *threshold_map, options.tolerance));
        } else if (name == "cole_tpr") {
            evaluation =
                evaluate_report(cole_tpr(dataset, *threshold_map, options.tolerance));
        } else if (name == "linn_ppv") {
            evaluation =
                evaluate_report(linn_ppv(dataset, *threshold_map, options.tolerance));
        } else if (name == "peterson_novick_separation") {
            evaluation = evaluate_report(peterson_novick_separation(
                dataset, *threshold_map, options.tolerance));
        } else if (name == "peterson_novick_sufficiency") {
            evaluation = evaluate_report(peterson_novick_sufficiency(
                dataset, *threshold_map, options.tolerance));
        } else if (name == "thorndikian") {
            evaluation = evaluate_report(thorndikian(dataset, *threshold_map,
                                                     options.thorndikian_params,
                                                     options.tolerance));
        } else if (name == "einhorn_bass") {
            evaluation = evaluate_report(einhorn_bass(dataset, *threshold_map,
                                                      options.einhorn_halfwidth,
                                                      kDefaultMinPerCell,
                                                      options.tolerance));
        } else if (name == "guion") {
            evaluation = evaluate_report(
                guion_individual(dataset, options.guion_bins, options.tolerance));
        } else if (name == "dif") {
            evaluation = evaluate_dif(dataset, options);
        } else if (name == "compromise") {
            evaluation = evaluate_report(compromise_check(
                dataset, group_one, options.compromise_lambda, options.tolerance));
        } else if (name == "jones_at_n") {
            evaluation = evaluate_jones_at_n(dataset, group_one, options.jones_percent);
        } else if (name == "jones_general_standard") {
            evaluation = evaluate_jones_sweep(dataset, group_one);
        } else if (name == "culturally_optimum") {
            evaluation = evaluate_optimum(dataset, options, group_one);
        }

        any_fail = any_fail || evaluation.verdict == Verdict::Fail;
        any_undefined = any_undefined || evaluation.verdict == Verdict::Undefined;
        criteria_json.push_back(std::move(evaluation.entry));
        for (std::string& row : evaluation.csv_rows) csv_rows.push_back(std::move(row));
    }

    AuditOutcome outcome;
    outcome.exit_code = any_fail ? 1 : any_undefined ? 2 : 0;

    ordered_json report;
    report["schema_version"] = 1;
    report["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
    if (options.include_timestamp) report["generated_at"] = utc_timestamp();

    ordered_json dataset_json;
    dataset_json["records"] = dataset.size();
    ordered_json groups_json;
    const auto sizes = dataset.group_sizes();
    for (const std::string& group : groups) {
        ordered_json block;
        block["n"] = sizes.at(group);
        double target_sum = 0.0;
        std::size_t positives = 0;
        for (const auto& record : dataset.records) {
            if (record.group != group) continue;
            target_sum += record.target;
            if (threshold_map && record.target >= threshold_map->target_cutoff) {
                positives += 1;
            }
        }
        block["mean_target"] = target_sum / static_cast<double>(sizes.at(group));
        if (threshold_map) {
            block["base_rate"] = static_cast<double>(positives) /
                                 static_cast<double>(sizes.at(group));
        }
        groups_json[group] = std::move(block);
    }
    dataset_json["groups"] = std::move(groups_json);
    dataset_json["items"] = dataset.item_ids.size();
    dataset_json["extra_columns"] = dataset.extra_columns;
    dataset_json["has_decision"] = dataset.has_decision();
    report["dataset"] = std::move(dataset_json);

    ordered_json options_json;
    options_json["tolerance"] = options.tolerance;
    options_json["group_as_one"] = group_one;
    if (!options.fit_on.empty()) options_json["fit_on"] = options.fit_on;
    options_json["sign_policy"] = options.sign_policy == SignPolicy::BothSigns
                                      ? "both_signs"
                                      : "underprediction_only";
    options_json["criteria"] = requested;
    options_json["thresholds"] = std::move(thresholds_json);
    report["options"] = std::move(options_json);

    report["criteria"] = std::move(criteria_json);
    report["skipped"] = std::move(skipped_json);
    report["exit_code"] = outcome.exit_code;

    outcome.report_json = report.dump(2) + "\n";

    std::string csv = "criterion,component,group,value,disparity,tolerance,verdict\n";
    for (const std::string& row : csv_rows) csv += row + "\n";
    outcome.report_csv = std::move(csv);
    return outcome;
}

} // namespace fairlens
