#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include <json.hpp>

#include "fairlens/fairlens.h"

using nlohmann::json;

namespace {

/// Owns a char* returned through an out parameter.
struct OwnedString {
    char* text = nullptr;
    ~OwnedString() { fairlens_string_free(text); }
    std::string str() const { return text == nullptr ? std::string() : text; }
};

/// Owns a dataset handle.
struct OwnedDataset {
    fairlens_dataset* handle = nullptr;
    ~OwnedDataset() { fairlens_dataset_free(handle); }
};

std::string mirrored_csv() {
    std::string csv = "group,score,target\n";
    for (int i = 0; i < 10; ++i) {
        const std::string value = std::to_string((i + 0.5) / 10.0);
        csv += "a," + value + "," + value + "\n";
        csv += "b," + value + "," + value + "\n";
    }
    return csv;
}

std::string solver_csv() {
    return "group,score,target\n"
           "a,1,0\na,2,0\na,3,1\na,4,1\n"
           "b,11,0\nb,12,1\nb,13,1\nb,14,1\n";
}

std::string items_csv() {
    // Five ability levels per group; group b sits 0.2 below group a on item_q1
    // at every level while item_q2 matches exactly within each level.
    std::string csv = "group,score,target,item_q1,item_q2\n";
    for (int level = 0; level < 5; ++level) {
        for (int i = 0; i < 10; ++i) {
            const std::string ability = std::to_string(level);
            const std::string q2 = i < 2 * level ? "1" : "0";
            const std::string a_q1 = i < 2 + level ? "1" : "0";
            const std::string b_q1 = i < level ? "1" : "0";
            csv += "a," + ability + "," + ability + "," + a_q1 + "," + q2 + "\n";
            csv += "b," + ability + "," + ability + "," + b_q1 + "," + q2 + "\n";
        }
    }
    return csv;
}

} // namespace

TEST_CASE("version and error text basics") {
    CHECK(std::string(fairlens_version()) == "0.1.0");
    fairlens_string_free(nullptr);
    fairlens_dataset_free(nullptr);
    CHECK(fairlens_dataset_size(nullptr) == 0);
}

TEST_CASE("parse, info, and round-trip") {
    OwnedDataset dataset;
    REQUIRE(fairlens_dataset_parse(mirrored_csv().c_str(), nullptr, &dataset.handle) ==
            FAIRLENS_OK);
    CHECK(std::string(fairlens_last_error()).empty());
    CHECK(fairlens_dataset_size(dataset.handle) == 20);

    OwnedString info;
    REQUIRE(fairlens_dataset_info(dataset.handle, &info.text) == FAIRLENS_OK);
    const json parsed = json::parse(info.str());
    CHECK(parsed["records"] == 20);
    CHECK(parsed["groups"]["a"] == 10);
    CHECK(parsed["groups"]["b"] == 10);
    CHECK(parsed["has_decision"] == false);
    CHECK(parsed["items"].empty());

    OwnedString first, second;
    REQUIRE(fairlens_dataset_to_csv(dataset.handle, &first.text) == FAIRLENS_OK);
    OwnedDataset reparsed;
    REQUIRE(fairlens_dataset_parse(first.text, nullptr, &reparsed.handle) == FAIRLENS_OK);
    REQUIRE(fairlens_dataset_to_csv(reparsed.handle, &second.text) == FAIRLENS_OK);
    CHECK(first.str() == second.str());
}

TEST_CASE("schema maps external column names") {
    const char* csv = "cohort,result,outcome\nx,1,2\nx,2,3\ny,1,2\ny,2,3\n";
    OwnedDataset dataset;
    REQUIRE(fairlens_dataset_parse(
                csv, R"({"group":"cohort","score":"result","target":"outcome"})",
                &dataset.handle) == FAIRLENS_OK);
    CHECK(fairlens_dataset_size(dataset.handle) == 4);

    fairlens_dataset* out = nullptr;
    CHECK(fairlens_dataset_parse(csv, R"({"grp":"cohort"})", &out) == FAIRLENS_E_INVALID);
    CHECK(std::string(fairlens_last_error()).find("unknown key") != std::string::npos);
    CHECK(fairlens_dataset_parse(csv, "not json", &out) == FAIRLENS_E_PARSE);
}

TEST_CASE("parse and argument failures set codes and messages") {
    fairlens_dataset* out = nullptr;
    CHECK(fairlens_dataset_parse("group,score\n", nullptr, &out) == FAIRLENS_E_PARSE);
    CHECK_FALSE(std::string(fairlens_last_error()).empty());
    CHECK(fairlens_dataset_parse(nullptr, nullptr, &out) == FAIRLENS_E_INVALID);
    CHECK(fairlens_dataset_parse("x", nullptr, nullptr) == FAIRLENS_E_INVALID);
    CHECK(fairlens_dataset_load("no_such_file.csv", nullptr, &out) == FAIRLENS_E_PARSE);
    CHECK(std::string(fairlens_last_error()).find("no_such_file.csv") !=
          std::string::npos);
}

TEST_CASE("load reads a file written by to_csv") {
    const std::string path = "capi_roundtrip.csv";
    {
        std::ofstream out(path);
        out << mirrored_csv();
    }
    OwnedDataset dataset;
    REQUIRE(fairlens_dataset_load(path.c_str(), nullptr, &dataset.handle) == FAIRLENS_OK);
    CHECK(fairlens_dataset_size(dataset.handle) == 20);
    std::remove(path.c_str());
}

TEST_CASE("audit runs and reports through the C surface") {
    OwnedDataset dataset;
    REQUIRE(fairlens_dataset_parse(mirrored_csv().c_str(), nullptr, &dataset.handle) ==
            FAIRLENS_OK);
    const char* options = R"({
        "criteria": ["cleary", "cole_tpr"],
        "thresholds": "fixed:0.5:0.5",
        "include_timestamp": false
    })";
    OwnedString report_json, report_csv;
    int exit_code = -1;
    REQUIRE(fairlens_audit_run(dataset.handle, options, &report_json.text,
                               &report_csv.text, &exit_code) == FAIRLENS_OK);
    CHECK(exit_code == 0);
    const json report = json::parse(report_json.str());
    CHECK(report["schema_version"] == 1);
    CHECK_FALSE(report.contains("generated_at"));
    REQUIRE(report["criteria"].size() == 2);
    CHECK(report["criteria"][0]["criterion"] == "cleary");
    CHECK(report["criteria"][0]["verdict"] == "pass");
    CHECK(report_csv.str().rfind("criterion,component,group,value", 0) == 0);

    // The CSV out parameter is optional.
    OwnedString json_only;
    REQUIRE(fairlens_audit_run(dataset.handle, options, &json_only.text, nullptr,
                               &exit_code) == FAIRLENS_OK);
    CHECK(json_only.str() == report_json.str());
}

TEST_CASE("audit surfaces option errors") {
    OwnedDataset dataset;
    REQUIRE(fairlens_dataset_parse(mirrored_csv().c_str(), nullptr, &dataset.handle) ==
            FAIRLENS_OK);
    OwnedString report;
    int exit_code = -1;
    CHECK(fairlens_audit_run(dataset.handle, R"({"tolernce": 0.1})", &report.text,
                             nullptr, &exit_code) == FAIRLENS_E_INVALID);
    CHECK(std::string(fairlens_last_error()).find("tolernce") != std::string::npos);
    CHECK(fairlens_audit_run(dataset.handle, "{", &report.text, nullptr, &exit_code) ==
          FAIRLENS_E_PARSE);
    CHECK(fairlens_audit_run(dataset.handle, R"({"criteria": ["nope"]})", &report.text,
                             nullptr, &exit_code) == FAIRLENS_E_INVALID);
    CHECK(report.text == nullptr);
}

TEST_CASE("solver emits cutoffs and threshold text") {
    OwnedDataset dataset;
    REQUIRE(fairlens_dataset_parse(solver_csv().c_str(), nullptr, &dataset.handle) ==
            FAIRLENS_OK);
    OwnedString result;
    REQUIRE(fairlens_solve_thresholds(dataset.handle, "thorndike_ratio", 0.5, 0.01,
                                      nullptr, &result.text) == FAIRLENS_OK);
    const json solved = json::parse(result.str());
    CHECK(solved["feasible"] == true);
    CHECK(solved["reference_group"] == "a");
    CHECK(solved["achieved_disparity"] == 0.0);
    CHECK(solved["cutoffs"]["a"] == 3.0);
    CHECK(solved["cutoffs"]["b"] == 12.0);
    const std::string text = solved["thresholds_text"].get<std::string>();
    CHECK(text.find("a,3\n") != std::string::npos);
    CHECK(text.find("__target__,0.5\n") != std::string::npos);

    OwnedString bad;
    CHECK(fairlens_solve_thresholds(dataset.handle, "calibration", 0.5, 0.01, nullptr,
                                    &bad.text) == FAIRLENS_E_INVALID);
}

TEST_CASE("infeasible solves are results, not errors") {
    // Group b has no positives anywhere, so cole_tpr never becomes defined.
    const char* csv = "group,score,target\n"
                      "a,1,0\na,2,1\na,3,1\n"
                      "b,1,0\nb,2,0\nb,3,0\n";
    OwnedDataset dataset;
    REQUIRE(fairlens_dataset_parse(csv, nullptr, &dataset.handle) == FAIRLENS_OK);
    OwnedString result;
    REQUIRE(fairlens_solve_thresholds(dataset.handle, "cole_tpr", 0.5, 0.01, nullptr,
                                      &result.text) == FAIRLENS_OK);
    const json solved = json::parse(result.str());
    CHECK(solved["feasible"] == false);
    CHECK_FALSE(solved["diagnostic"].get<std::string>().empty());
}

TEST_CASE("dif runs in item and feature modes") {
    OwnedDataset dataset;
    REQUIRE(fairlens_dataset_parse(items_csv().c_str(), nullptr, &dataset.handle) ==
            FAIRLENS_OK);
    OwnedString items_out;
    int exit_code = -1;
    REQUIRE(fairlens_dif_run(
                dataset.handle,
                R"({"ability": "target", "strata": {"mode": "equal_width", "count": 5}})",
                &items_out.text, &exit_code) == FAIRLENS_OK);
    CHECK(exit_code == 1);
    const json items = json::parse(items_out.str());
    CHECK(items["ability"] == "target");
    REQUIRE(items["items"].size() == 2);
    CHECK(items["items"][0]["item_id"] == "item_q1");
    CHECK(items["items"][0]["flagged"] == true);
    CHECK(items["items"][0]["weighted_gap"].get<double>() == doctest::Approx(0.2));
    CHECK(items["items"][1]["flagged"] == false);
    CHECK(items["items"][1]["weighted_gap"].get<double>() == doctest::Approx(0.0));
    CHECK(items["exit_code"] == 1);

    OwnedString feature_out;
    REQUIRE(fairlens_dif_run(dataset.handle,
                             R"({"feature": "item_q2",
                                 "strata": {"mode": "equal_width", "count": 5}})",
                             &feature_out.text, &exit_code) == FAIRLENS_OK);
    CHECK(exit_code == 0);
    const json feature = json::parse(feature_out.str());
    CHECK(feature["feature"]["feature"] == "item_q2");
    CHECK(feature["feature"]["flagged"] == false);
    CHECK(feature["feature"]["weighted_tv"].get<double>() == doctest::Approx(0.0));

    OwnedString conflict;
    CHECK(fairlens_dif_run(dataset.handle,
                           R"({"ability": "target", "feature": "item_q2"})",
                           &conflict.text, &exit_code) == FAIRLENS_E_INVALID);
}

TEST_CASE("figure2 table matches closed forms at the grid points") {
    OwnedString table;
    REQUIRE(fairlens_figure2_csv(0.2, 0.25, 1.0, 0.25, &table.text) == FAIRLENS_OK);
    const std::string csv = table.str();
    CHECK(csv.rfind("rho_ry,target1,target2,target3,target4,gap12,gap23", 0) == 0);
    CHECK(csv.find("\n0.25,0.8,0.2,0.05,0,") != std::string::npos);
    CHECK(csv.find("\n1,0.2,0.2,0.2,0,0,0\n") != std::string::npos);

    OwnedString bad;
    CHECK(fairlens_figure2_csv(0.2, 0.25, 1.0, 0.0, &bad.text) == FAIRLENS_E_INVALID);
}

TEST_CASE("synth generates reproducible data with a sidecar") {
    const char* spec = R"({
        "kind": "two_group",
        "n": 100,
        "groups": [
            {"label": "a", "weight": 0.5, "mean_r": 0.0, "mean_y": 0.0,
             "sd_r": 1.0, "sd_y": 1.0, "rho_ry": 0.5},
            {"label": "b", "weight": 0.5, "mean_r": -1.0, "mean_y": 0.0,
             "sd_r": 1.0, "sd_y": 1.0, "rho_ry": 0.5}
        ]
    })";
    OwnedString first_csv, sidecar;
    REQUIRE(fairlens_synth_run(spec, 7, &first_csv.text, &sidecar.text) == FAIRLENS_OK);
    OwnedDataset dataset;
    REQUIRE(fairlens_dataset_parse(first_csv.text, nullptr, &dataset.handle) ==
            FAIRLENS_OK);
    CHECK(fairlens_dataset_size(dataset.handle) == 100);

    const json meta = json::parse(sidecar.str());
    CHECK(meta["seed"] == 7);
    CHECK(meta["generator"] == "mt19937_64+marsaglia-polar");
    CHECK(meta["tool_version"] == "0.1.0");
    CHECK(meta["spec"]["kind"] == "two_group");
    CHECK(meta["spec"]["n"] == 100);

    OwnedString second_csv;
    REQUIRE(fairlens_synth_run(spec, 7, &second_csv.text, nullptr) == FAIRLENS_OK);
    CHECK(first_csv.str() == second_csv.str());
    OwnedString other_seed;
    REQUIRE(fairlens_synth_run(spec, 8, &other_seed.text, nullptr) == FAIRLENS_OK);
    CHECK(first_csv.str() != other_seed.str());
}

TEST_CASE("synth rejects bad specs and impossible correlations") {
    OwnedString out;
    CHECK(fairlens_synth_run("{", 1, &out.text, nullptr) == FAIRLENS_E_PARSE);
    CHECK(fairlens_synth_run(R"({"kind": "nope"})", 1, &out.text, nullptr) ==
          FAIRLENS_E_INVALID);
    CHECK(fairlens_synth_run(R"({"kind": "two_group", "n": 10})", 1, &out.text,
                             nullptr) == FAIRLENS_E_INVALID);

    // An implied score correlation above 1 cannot be realized.
    CHECK(fairlens_synth_run(
              R"({"kind": "correlated", "n": 100, "rho_ay": 0.9, "rho_ry": 0.1,
                  "criterion": 2})",
              1, &out.text, nullptr) == FAIRLENS_E_INFEASIBLE);
    CHECK_FALSE(std::string(fairlens_last_error()).empty());

    OwnedString ok;
    CHECK(fairlens_synth_run(
              R"({"kind": "correlated", "n": 400, "rho_ay": 0.2, "rho_ry": 0.5,
                  "criterion": 1})",
              3, &ok.text, nullptr) == FAIRLENS_OK);
    OwnedDataset dataset;
    REQUIRE(fairlens_dataset_parse(ok.text, nullptr, &dataset.handle) == FAIRLENS_OK);
    CHECK(fairlens_dataset_size(dataset.handle) == 400);
}

TEST_CASE("percentile adjustment produces a fresh dataset") {
    OwnedDataset dataset;
    REQUIRE(fairlens_dataset_parse(solver_csv().c_str(), nullptr, &dataset.handle) ==
            FAIRLENS_OK);
    OwnedString before;
    REQUIRE(fairlens_dataset_to_csv(dataset.handle, &before.text) == FAIRLENS_OK);

    OwnedDataset adjusted;
    REQUIRE(fairlens_percentile_adjust(dataset.handle, &adjusted.handle) == FAIRLENS_OK);
    OwnedString adjusted_csv, after;
    REQUIRE(fairlens_dataset_to_csv(adjusted.handle, &adjusted_csv.text) == FAIRLENS_OK);
    REQUIRE(fairlens_dataset_to_csv(dataset.handle, &after.text) == FAIRLENS_OK);
    CHECK(before.str() == after.str());

    // Both groups hold the same four ranks, so the transformed scores match.
    CHECK(adjusted_csv.str().find("a,0.125,0") != std::string::npos);
    CHECK(adjusted_csv.str().find("b,0.125,0") != std::string::npos);
    CHECK(adjusted_csv.str().find("0.875,1") != std::string::npos);
}
