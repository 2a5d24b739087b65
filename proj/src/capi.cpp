#include "fairlens/fairlens.h"

#include <cmath>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fairlens/audit.hpp"
#include "fairlens/classification.hpp"
#include "fairlens/correlation.hpp"
#include "fairlens/dataset.hpp"
#include "fairlens/dif.hpp"
#include "fairlens/error.hpp"
#include "fairlens/synth.hpp"

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

struct fairlens_dataset {
    fairlens::Dataset data;
};

namespace {

thread_local std::string g_last_error;

/// Caller-owned copy released by fairlens_string_free.
char* alloc_string(const std::string& text) {
    char* out = new char[text.size() + 1];
    std::memcpy(out, text.c_str(), text.size() + 1);
    return out;
}

/// Runs `body`, translating exceptions into status codes and the
/// thread-local message. Out parameters are written only on FAIRLENS_OK.
template <typename F>
fairlens_rc guarded(F&& body) {
    g_last_error.clear();
    try {
        return body();
    } catch (const json::parse_error& e) {
        g_last_error = e.what();
        return FAIRLENS_E_PARSE;
    } catch (const fairlens::ParseError& e) {
        g_last_error = e.what();
        return FAIRLENS_E_PARSE;
    } catch (const fairlens::Infeasible& e) {
        g_last_error = e.what();
        return FAIRLENS_E_INFEASIBLE;
    } catch (const json::exception& e) {
        g_last_error = e.what();
        return FAIRLENS_E_INVALID;
    } catch (const std::invalid_argument& e) {
        g_last_error = e.what();
        return FAIRLENS_E_INVALID;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return FAIRLENS_E_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return FAIRLENS_E_INTERNAL;
    }
}

fairlens_rc fail_invalid(const std::string& message) {
    g_last_error = message;
    return FAIRLENS_E_INVALID;
}

json parse_object(const char* text, const char* what) {
    if (text == nullptr) return json::object();
    json parsed = json::parse(text);
    if (!parsed.is_object())
        throw fairlens::InvalidArgument(std::string(what) + ": expected a JSON object");
    return parsed;
}

void reject_unknown_keys(const json& object, std::initializer_list<const char*> known,
                         const char* what) {
    for (const auto& [key, value] : object.items()) {
        bool ok = false;
        for (const char* name : known) ok = ok || key == name;
        if (!ok)
            throw fairlens::InvalidArgument(std::string(what) + ": unknown key '" + key +
                                            "'");
    }
}

fairlens::CsvSchema parse_schema(const char* schema_json) {
    const json object = parse_object(schema_json, "schema");
    reject_unknown_keys(object, {"group", "score", "target", "decision"}, "schema");
    fairlens::CsvSchema schema;
    if (object.contains("group")) schema.group = object.at("group").get<std::string>();
    if (object.contains("score")) schema.score = object.at("score").get<std::string>();
    if (object.contains("target")) schema.target = object.at("target").get<std::string>();
    if (object.contains("decision"))
        schema.decision = object.at("decision").get<std::string>();
    return schema;
}

fairlens::BinSpec parse_bin_spec(const json& object, fairlens::BinSpec base,
                                 const char* what) {
    reject_unknown_keys(object, {"mode", "count", "min_per_cell"}, what);
    if (object.contains("mode")) {
        const auto mode = object.at("mode").get<std::string>();
        if (mode == "equal_width")
            base.mode = fairlens::BinSpec::Mode::EqualWidth;
        else if (mode == "equal_count")
            base.mode = fairlens::BinSpec::Mode::EqualCount;
        else
            throw fairlens::InvalidArgument(std::string(what) + ": unknown mode '" +
                                            mode + "'");
    }
    if (object.contains("count")) base.bin_count = object.at("count").get<int>();
    if (object.contains("min_per_cell"))
        base.min_per_cell = object.at("min_per_cell").get<int>();
    return base;
}

fairlens::AbilityMeasure parse_ability(const std::string& name) {
    if (name == "rest_score") return fairlens::AbilityMeasure::RestScore;
    if (name == "target") return fairlens::AbilityMeasure::Target;
    throw fairlens::InvalidArgument("unknown ability measure '" + name + "'");
}

fairlens::AuditOptions parse_audit_options(const char* options_json) {
    const json object = parse_object(options_json, "audit options");
    reject_unknown_keys(object,
                        {"criteria", "tolerance", "group_as_one", "thresholds", "fit_on",
                         "sign_policy", "calibration_bins", "guion_bins", "dif_strata",
                         "dif_ability", "dif_flag_threshold", "einhorn_halfwidth",
                         "thorndikian", "compromise_lambda", "jones_percent",
                         "optimum_candidates", "optimum_k", "include_timestamp"},
                        "audit options");
    fairlens::AuditOptions options;
    if (object.contains("criteria"))
        options.criteria = object.at("criteria").get<std::vector<std::string>>();
    if (object.contains("tolerance"))
        options.tolerance = object.at("tolerance").get<double>();
    if (object.contains("group_as_one"))
        options.group_as_one = object.at("group_as_one").get<std::string>();
    if (object.contains("thresholds"))
        options.thresholds =
            fairlens::parse_threshold_source(object.at("thresholds").get<std::string>());
    if (object.contains("fit_on")) options.fit_on = object.at("fit_on").get<std::string>();
    if (object.contains("sign_policy")) {
        const auto policy = object.at("sign_policy").get<std::string>();
        if (policy == "both_signs")
            options.sign_policy = fairlens::SignPolicy::BothSigns;
        else if (policy == "underprediction_only")
            options.sign_policy = fairlens::SignPolicy::UnderpredictionOnly;
        else
            throw fairlens::InvalidArgument("unknown sign policy '" + policy + "'");
    }
    if (object.contains("calibration_bins"))
        options.calibration_bins = parse_bin_spec(
            object.at("calibration_bins"), options.calibration_bins, "calibration_bins");
    if (object.contains("guion_bins"))
        options.guion_bins =
            parse_bin_spec(object.at("guion_bins"), options.guion_bins, "guion_bins");
    if (object.contains("dif_strata"))
        options.dif_strata =
            parse_bin_spec(object.at("dif_strata"), options.dif_strata, "dif_strata");
    if (object.contains("dif_ability"))
        options.dif_ability = parse_ability(object.at("dif_ability").get<std::string>());
    if (object.contains("dif_flag_threshold"))
        options.dif_flag_threshold = object.at("dif_flag_threshold").get<double>();
    if (object.contains("einhorn_halfwidth"))
        options.einhorn_halfwidth = object.at("einhorn_halfwidth").get<double>();
    if (object.contains("thorndikian")) {
        const json& params = object.at("thorndikian");
        reject_unknown_keys(params, {"lambda1", "lambda2"}, "thorndikian");
        if (params.contains("lambda1"))
            options.thorndikian_params.lambda1 = params.at("lambda1").get<double>();
        if (params.contains("lambda2"))
            options.thorndikian_params.lambda2 = params.at("lambda2").get<double>();
    }
    if (object.contains("compromise_lambda"))
        options.compromise_lambda = object.at("compromise_lambda").get<double>();
    if (object.contains("jones_percent"))
        options.jones_percent = object.at("jones_percent").get<double>();
    if (object.contains("optimum_candidates"))
        options.optimum_candidates =
            object.at("optimum_candidates").get<std::vector<std::string>>();
    if (object.contains("optimum_k"))
        options.optimum_k = object.at("optimum_k").get<double>();
    if (object.contains("include_timestamp"))
        options.include_timestamp = object.at("include_timestamp").get<bool>();
    return options;
}

ordered_json encode_cutoff(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    return value;
}

fairlens::GaussianGroupSpec parse_group_spec(const json& object) {
    reject_unknown_keys(
        object, {"label", "weight", "mean_r", "mean_y", "sd_r", "sd_y", "rho_ry"},
        "synth group");
    fairlens::GaussianGroupSpec spec;
    if (!object.contains("label"))
        throw fairlens::InvalidArgument("synth group: missing label");
    spec.label = object.at("label").get<std::string>();
    if (object.contains("weight")) spec.weight = object.at("weight").get<double>();
    if (object.contains("mean_r")) spec.mean_r = object.at("mean_r").get<double>();
    if (object.contains("mean_y")) spec.mean_y = object.at("mean_y").get<double>();
    if (object.contains("sd_r")) spec.sd_r = object.at("sd_r").get<double>();
    if (object.contains("sd_y")) spec.sd_y = object.at("sd_y").get<double>();
    if (object.contains("rho_ry")) spec.rho_ry = object.at("rho_ry").get<double>();
    return spec;
}

} // namespace

extern "C" {

const char* fairlens_version(void) { return fairlens::kToolVersion; }

const char* fairlens_last_error(void) { return g_last_error.c_str(); }

void fairlens_string_free(char* text) { delete[] text; }

fairlens_rc fairlens_dataset_parse(const char* csv_text, const char* schema_json,
                                   fairlens_dataset** out) {
    if (csv_text == nullptr) return fail_invalid("csv_text is NULL");
    if (out == nullptr) return fail_invalid("out is NULL");
    return guarded([&] {
        const auto schema = parse_schema(schema_json);
        auto handle = std::make_unique<fairlens_dataset>();
        handle->data = fairlens::load_dataset_string(csv_text, schema);
        *out = handle.release();
        return FAIRLENS_OK;
    });
}

fairlens_rc fairlens_dataset_load(const char* path, const char* schema_json,
                                  fairlens_dataset** out) {
    if (path == nullptr) return fail_invalid("path is NULL");
    if (out == nullptr) return fail_invalid("out is NULL");
    return guarded([&] {
        const auto schema = parse_schema(schema_json);
        auto handle = std::make_unique<fairlens_dataset>();
        handle->data = fairlens::load_dataset_file(path, schema);
        *out = handle.release();
        return FAIRLENS_OK;
    });
}

void fairlens_dataset_free(fairlens_dataset* dataset) { delete dataset; }

size_t fairlens_dataset_size(const fairlens_dataset* dataset) {
    return dataset == nullptr ? 0 : dataset->data.size();
}

fairlens_rc fairlens_dataset_info(const fairlens_dataset* dataset, char** out_json) {
    if (dataset == nullptr) return fail_invalid("dataset is NULL");
    if (out_json == nullptr) return fail_invalid("out_json is NULL");
    return guarded([&] {
        ordered_json info;
        info["records"] = dataset->data.size();
        ordered_json groups = ordered_json::object();
        for (const auto& [label, count] : dataset->data.group_sizes())
            groups[label] = count;
        info["groups"] = groups;
        info["items"] = dataset->data.item_ids;
        info["extra_columns"] = dataset->data.extra_columns;
        info["has_decision"] = dataset->data.has_decision();
        *out_json = alloc_string(info.dump(2) + "\n");
        return FAIRLENS_OK;
    });
}

fairlens_rc fairlens_dataset_to_csv(const fairlens_dataset* dataset, char** out_csv) {
    if (dataset == nullptr) return fail_invalid("dataset is NULL");
    if (out_csv == nullptr) return fail_invalid("out_csv is NULL");
    return guarded([&] {
        *out_csv = alloc_string(fairlens::to_csv(dataset->data));
        return FAIRLENS_OK;
    });
}

fairlens_rc fairlens_percentile_adjust(const fairlens_dataset* dataset,
                                       fairlens_dataset** out) {
    if (dataset == nullptr) return fail_invalid("dataset is NULL");
    if (out == nullptr) return fail_invalid("out is NULL");
    return guarded([&] {
        auto handle = std::make_unique<fairlens_dataset>();
        handle->data = fairlens::within_group_percentile(dataset->data);
        *out = handle.release();
        return FAIRLENS_OK;
    });
}

fairlens_rc fairlens_audit_run(const fairlens_dataset* dataset, const char* options_json,
                               char** out_report_json, char** out_report_csv,
                               int* out_exit_code) {
    if (dataset == nullptr) return fail_invalid("dataset is NULL");
    if (out_report_json == nullptr) return fail_invalid("out_report_json is NULL");
    if (out_exit_code == nullptr) return fail_invalid("out_exit_code is NULL");
    return guarded([&] {
        const auto options = parse_audit_options(options_json);
        const auto outcome = fairlens::run_audit(dataset->data, options);
        char* report_json = alloc_string(outcome.report_json);
        if (out_report_csv != nullptr) *out_report_csv = alloc_string(outcome.report_csv);
        *out_report_json = report_json;
        *out_exit_code = outcome.exit_code;
        return FAIRLENS_OK;
    });
}

fairlens_rc fairlens_solve_thresholds(const fairlens_dataset* dataset,
                                      const char* criterion, double y_star,
                                      double tolerance, const char* params_json,
                                      char** out_json) {
    if (dataset == nullptr) return fail_invalid("dataset is NULL");
    if (criterion == nullptr) return fail_invalid("criterion is NULL");
    if (out_json == nullptr) return fail_invalid("out_json is NULL");
    return guarded([&] {
        fairlens::ThorndikianParams params;
        const json object = parse_object(params_json, "solver params");
        reject_unknown_keys(object, {"lambda1", "lambda2"}, "solver params");
        if (object.contains("lambda1")) params.lambda1 = object.at("lambda1").get<double>();
        if (object.contains("lambda2")) params.lambda2 = object.at("lambda2").get<double>();
        const auto solved = fairlens::solve_fair_thresholds(dataset->data, criterion,
                                                            y_star, tolerance, params);
        ordered_json result;
        result["criterion"] = criterion;
        result["y_star"] = y_star;
        result["tolerance"] = tolerance;
        result["feasible"] = solved.feasible;
        result["reference_group"] = solved.reference_group;
        result["achieved_disparity"] = solved.achieved_disparity;
        result["diagnostic"] = solved.diagnostic;
        ordered_json cutoffs = ordered_json::object();
        for (const auto& [label, cutoff] : solved.thresholds.per_group_cutoff)
            cutoffs[label] = encode_cutoff(cutoff);
        result["cutoffs"] = cutoffs;
        result["thresholds_text"] = solved.thresholds.to_text();
        *out_json = alloc_string(result.dump(2) + "\n");
        return FAIRLENS_OK;
    });
}

fairlens_rc fairlens_dif_run(const fairlens_dataset* dataset, const char* options_json,
                             char** out_json, int* out_exit_code) {
    if (dataset == nullptr) return fail_invalid("dataset is NULL");
    if (out_json == nullptr) return fail_invalid("out_json is NULL");
    if (out_exit_code == nullptr) return fail_invalid("out_exit_code is NULL");
    return guarded([&] {
        const json object = parse_object(options_json, "dif options");
        reject_unknown_keys(object, {"ability", "strata", "flag_threshold", "feature"},
                            "dif options");
        auto strata = fairlens::dif_default_strata();
        if (object.contains("strata"))
            strata = parse_bin_spec(object.at("strata"), strata, "strata");
        double flag_threshold = 0.05;
        if (object.contains("flag_threshold"))
            flag_threshold = object.at("flag_threshold").get<double>();

        ordered_json result;
        result["tool"] = {{"name", fairlens::kToolName},
                          {"version", fairlens::kToolVersion}};
        result["flag_threshold"] = flag_threshold;
        bool any_flagged = false;
        bool any_undiagnosable = false;
        if (object.contains("feature")) {
            if (object.contains("ability"))
                throw fairlens::InvalidArgument(
                    "dif options: 'ability' does not apply to feature mode");
            const auto report = fairlens::feature_dif(
                dataset->data, object.at("feature").get<std::string>(), strata,
                flag_threshold);
            ordered_json entry;
            entry["feature"] = report.feature;
            entry["flagged"] = report.flagged;
            entry["undiagnosable"] = report.undiagnosable;
            if (report.undiagnosable)
                entry["weighted_tv"] = nullptr;
            else
                entry["weighted_tv"] = report.weighted_tv;
            entry["per_stratum_tv"] = report.per_stratum_tv;
            entry["stratum_sizes"] = report.stratum_sizes;
            entry["excluded_strata"] = report.excluded_strata;
            result["feature"] = entry;
            any_flagged = report.flagged;
            any_undiagnosable = report.undiagnosable;
        } else {
            auto ability = fairlens::AbilityMeasure::RestScore;
            if (object.contains("ability"))
                ability = parse_ability(object.at("ability").get<std::string>());
            const auto report =
                fairlens::dif_analyze(dataset->data, ability, strata, flag_threshold);
            result["ability"] = ability == fairlens::AbilityMeasure::RestScore
                                    ? "rest_score"
                                    : "target";
            ordered_json items = ordered_json::array();
            for (const auto& item : report.items) {
                ordered_json entry;
                entry["item_id"] = item.item_id;
                entry["flagged"] = item.flagged;
                entry["undiagnosable"] = item.undiagnosable;
                if (item.undiagnosable)
                    entry["weighted_gap"] = nullptr;
                else
                    entry["weighted_gap"] = item.weighted_gap;
                entry["per_stratum_gap"] = item.per_stratum_gap;
                entry["stratum_sizes"] = item.stratum_sizes;
                entry["excluded_strata"] = item.excluded_strata;
                items.push_back(std::move(entry));
                any_flagged = any_flagged || item.flagged;
                any_undiagnosable = any_undiagnosable || item.undiagnosable;
            }
            result["items"] = items;
        }
        const int exit_code = any_flagged ? 1 : any_undiagnosable ? 2 : 0;
        result["exit_code"] = exit_code;
        *out_json = alloc_string(result.dump(2) + "\n");
        *out_exit_code = exit_code;
        return FAIRLENS_OK;
    });
}

fairlens_rc fairlens_figure2_csv(double rho_ay, double lo, double hi, double step,
                                 char** out_csv) {
    if (out_csv == nullptr) return fail_invalid("out_csv is NULL");
    return guarded([&] {
        const auto grid = fairlens::make_grid(lo, hi, step);
        *out_csv = alloc_string(fairlens::incompatibility_csv(rho_ay, grid));
        return FAIRLENS_OK;
    });
}

fairlens_rc fairlens_synth_run(const char* spec_json, uint64_t seed, char** out_csv,
                               char** out_sidecar_json) {
    if (spec_json == nullptr) return fail_invalid("spec_json is NULL");
    if (out_csv == nullptr) return fail_invalid("out_csv is NULL");
    return guarded([&] {
        const json spec = json::parse(spec_json);
        if (!spec.is_object())
            throw fairlens::InvalidArgument("synth spec: expected a JSON object");
        if (!spec.contains("kind"))
            throw fairlens::InvalidArgument("synth spec: missing kind");
        const auto kind = spec.at("kind").get<std::string>();
        fairlens::Dataset dataset;
        if (kind == "two_group") {
            reject_unknown_keys(spec, {"kind", "n", "groups"}, "synth spec");
            if (!spec.contains("n") || !spec.contains("groups"))
                throw fairlens::InvalidArgument("synth spec: two_group needs n and groups");
            std::vector<fairlens::GaussianGroupSpec> groups;
            for (const json& entry : spec.at("groups"))
                groups.push_back(parse_group_spec(entry));
            dataset = fairlens::generate_two_group(
                groups, spec.at("n").get<std::size_t>(), seed);
        } else if (kind == "correlated") {
            reject_unknown_keys(spec, {"kind", "n", "rho_ay", "rho_ry", "criterion"},
                                "synth spec");
            if (!spec.contains("n") || !spec.contains("rho_ay") ||
                !spec.contains("rho_ry") || !spec.contains("criterion"))
                throw fairlens::InvalidArgument(
                    "synth spec: correlated needs n, rho_ay, rho_ry, criterion");
            fairlens::TargetCorrelationSpec target;
            target.rho_ay = spec.at("rho_ay").get<double>();
            target.rho_ry = spec.at("rho_ry").get<double>();
            target.n = spec.at("n").get<std::size_t>();
            target.seed = seed;
            dataset =
                fairlens::generate_correlated(target, spec.at("criterion").get<int>());
        } else {
            throw fairlens::InvalidArgument("synth spec: unknown kind '" + kind + "'");
        }
        char* csv = alloc_string(fairlens::to_csv(dataset));
        if (out_sidecar_json != nullptr) {
            ordered_json sidecar;
            sidecar["spec"] = spec;
            sidecar["seed"] = seed;
            sidecar["generator"] = fairlens::kGeneratorName;
            sidecar["tool_version"] = fairlens::kToolVersion;
            *out_sidecar_json = alloc_string(sidecar.dump(2) + "\n");
        }
        *out_csv = csv;
        return FAIRLENS_OK;
    });
}

} // extern "C"
