// Command-line front end. Everything flows through the C interface in
// fairlens.h; this file only parses flags, moves text, and maps status codes
// to exit codes: 0 pass, 1 fail, 2 undefined or infeasible, 3 unparseable
// input, 4 usage or operational error.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fairlens/fairlens.h"

using nlohmann::json;

namespace {

constexpr int kExitParse = 3;
constexpr int kExitError = 4;

struct OwnedString {
    char* text = nullptr;
    ~OwnedString() { fairlens_string_free(text); }
    std::string str() const { return text == nullptr ? std::string() : text; }
};

struct OwnedDataset {
    fairlens_dataset* handle = nullptr;
    ~OwnedDataset() { fairlens_dataset_free(handle); }
};

int complain(fairlens_rc rc) {
    std::cerr << "fairlens: " << fairlens_last_error() << "\n";
    return rc == FAIRLENS_E_PARSE ? kExitParse : kExitError;
}

int complain(const std::string& message) {
    std::cerr << "fairlens: " << message << "\n";
    return kExitError;
}

/// "-" or empty means stdout.
bool write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return true;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) return false;
    out << content;
    return static_cast<bool>(out.flush());
}

std::string read_stdin() {
    std::ostringstream buffer;
    buffer << std::cin.rdbuf();
    return buffer.str();
}

/// ROLE=COLUMN pairs into the schema JSON the library expects.
std::optional<std::string> schema_json(const std::vector<std::string>& mappings,
                                       std::string& error) {
    if (mappings.empty()) return std::nullopt;
    json schema = json::object();
    for (const std::string& pair : mappings) {
        const auto eq = pair.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == pair.size()) {
            error = "bad --schema entry '" + pair + "', expected ROLE=COLUMN";
            return std::nullopt;
        }
        schema[pair.substr(0, eq)] = pair.substr(eq + 1);
    }
    return schema.dump();
}

/// Loads --input (a path, or "-" for stdin) with the schema applied.
/// Returns an exit code, 0 on success.
int load_input(const std::string& input, const std::vector<std::string>& mappings,
               OwnedDataset& dataset) {
    std::string error;
    const auto schema = schema_json(mappings, error);
    if (!error.empty()) return complain(error);
    const char* schema_text = schema ? schema->c_str() : nullptr;
    fairlens_rc rc;
    if (input == "-") {
        const std::string text = read_stdin();
        rc = fairlens_dataset_parse(text.c_str(), schema_text, &dataset.handle);
    } else {
        rc = fairlens_dataset_load(input.c_str(), schema_text, &dataset.handle);
    }
    return rc == FAIRLENS_OK ? 0 : complain(rc);
}

/// FAIRLENS_SEED wins over the flag so scripted runs can repin every
/// generator from the environment.
int apply_seed_env(std::uint64_t& seed) {
    const char* env = std::getenv("FAIRLENS_SEED");
    if (env == nullptr || *env == '\0') return 0;
    try {
        std::size_t used = 0;
        const auto value = std::stoull(env, &used);
        if (used != std::string(env).size()) throw std::invalid_argument(env);
        seed = value;
    } catch (const std::exception&) {
        return complain(std::string("FAIRLENS_SEED is not an unsigned integer: ") + env);
    }
    return 0;
}

struct AuditFlags {
    std::string input;
    std::vector<std::string> schema;
    std::vector<std::string> criteria;
    std::string thresholds;
    std::string group_one;
    std::string fit_on;
    std::string dif_ability;
    std::vector<std::string> candidates;
    double tolerance = -1.0;
    int bins = 0;
    int min_per_cell = 0;
    double lambda1 = -1.0, lambda2 = -1.0;
    double k = 0.0;
    double compromise_lambda = -1.0;
    double jones_percent = -1.0;
    double flag_threshold = -1.0;
    double halfwidth = -1.0;
    bool underprediction_only = false;
    bool adjust_percentile = false;
    bool no_timestamp = false;
    bool k_set = false;
    std::string out = "-";
    std::string format = "json";
};

json audit_options(const AuditFlags& flags) {
    json options = json::object();
    if (!flags.criteria.empty() &&
        !(flags.criteria.size() == 1 && flags.criteria[0] == "all"))
        options["criteria"] = flags.criteria;
    if (flags.tolerance >= 0.0) options["tolerance"] = flags.tolerance;
    if (!flags.group_one.empty()) options["group_as_one"] = flags.group_one;
    if (!flags.thresholds.empty()) options["thresholds"] = flags.thresholds;
    if (!flags.fit_on.empty()) options["fit_on"] = flags.fit_on;
    if (flags.underprediction_only) options["sign_policy"] = "underprediction_only";
    json bin_patch = json::object();
    if (flags.bins > 0) bin_patch["count"] = flags.bins;
    if (flags.min_per_cell > 0) bin_patch["min_per_cell"] = flags.min_per_cell;
    if (!bin_patch.empty()) {
        options["calibration_bins"] = bin_patch;
        options["guion_bins"] = bin_patch;
        options["dif_strata"] = bin_patch;
    }
    if (!flags.dif_ability.empty()) options["dif_ability"] = flags.dif_ability;
    if (flags.flag_threshold >= 0.0) options["dif_flag_threshold"] = flags.flag_threshold;
    if (flags.halfwidth >= 0.0) options["einhorn_halfwidth"] = flags.halfwidth;
    json thorndikian = json::object();
    if (flags.lambda1 >= 0.0) thorndikian["lambda1"] = flags.lambda1;
    if (flags.lambda2 >= 0.0) thorndikian["lambda2"] = flags.lambda2;
    if (!thorndikian.empty()) options["thorndikian"] = thorndikian;
    if (flags.compromise_lambda >= 0.0)
        options["compromise_lambda"] = flags.compromise_lambda;
    if (flags.jones_percent > 0.0) options["jones_percent"] = flags.jones_percent;
    if (!flags.candidates.empty()) options["optimum_candidates"] = flags.candidates;
    if (flags.k_set) options["optimum_k"] = flags.k;
    if (flags.no_timestamp) options["include_timestamp"] = false;
    return options;
}

int run_audit_cmd(const AuditFlags& flags) {
    OwnedDataset dataset;
    if (const int code = load_input(flags.input, flags.schema, dataset); code != 0)
        return code;
    if (flags.adjust_percentile) {
        OwnedDataset adjusted;
        const auto rc = fairlens_percentile_adjust(dataset.handle, &adjusted.handle);
        if (rc != FAIRLENS_OK) return complain(rc);
        std::swap(dataset.handle, adjusted.handle);
    }
    const std::string options = audit_options(flags).dump();
    OwnedString report_json, report_csv;
    int exit_code = 0;
    const auto rc = fairlens_audit_run(dataset.handle, options.c_str(),
                                       &report_json.text, &report_csv.text, &exit_code);
    if (rc != FAIRLENS_OK) return complain(rc);
    const std::string& report =
        flags.format == "csv" ? report_csv.str() : report_json.str();
    if (!write_output(flags.out, report))
        return complain("cannot write output file: " + flags.out);
    return exit_code;
}

struct Figure2Flags {
    double rho_ay = 0.0;
    double lo = 0.05, hi = 1.0, step = 0.05;
    std::string out = "-";
};

int run_figure2_cmd(const Figure2Flags& flags) {
    OwnedString table;
    const auto rc =
        fairlens_figure2_csv(flags.rho_ay, flags.lo, flags.hi, flags.step, &table.text);
    if (rc != FAIRLENS_OK) return complain(rc);
    if (!write_output(flags.out, table.str()))
        return complain("cannot write output file: " + flags.out);
    return 0;
}

struct SynthFlags {
    std::string spec;
    std::uint64_t seed = 0;
    std::string out = "-";
    std::string sidecar;
    bool no_sidecar = false;
};

std::string default_sidecar_path(const std::string& out) {
    std::string base = out;
    if (base.size() > 4 && base.rfind(".csv") == base.size() - 4)
        base.resize(base.size() - 4);
    return base + ".sidecar.json";
}

int run_synth_cmd(SynthFlags flags) {
    if (const int code = apply_seed_env(flags.seed); code != 0) return code;
    std::string spec_text;
    if (flags.spec == "-") {
        spec_text = read_stdin();
    } else {
        std::ifstream in(flags.spec, std::ios::binary);
        if (!in) return complain("cannot open spec file: " + flags.spec);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        spec_text = buffer.str();
    }
    OwnedString csv, sidecar;
    const auto rc =
        fairlens_synth_run(spec_text.c_str(), flags.seed, &csv.text, &sidecar.text);
    if (rc != FAIRLENS_OK) return complain(rc);
    if (!write_output(flags.out, csv.str()))
        return complain("cannot write output file: " + flags.out);
    const bool to_stdout = flags.out.empty() || flags.out == "-";
    if (!flags.no_sidecar && !(to_stdout && flags.sidecar.empty())) {
        const std::string path =
            flags.sidecar.empty() ? default_sidecar_path(flags.out) : flags.sidecar;
        if (!write_output(path, sidecar.str()))
            return complain("cannot write sidecar file: " + path);
    }
    return 0;
}

struct SolveFlags {
    std::string input;
    std::vector<std::string> schema;
    std::string criterion;
    double y_star = 0.5;
    double tolerance = 0.01;
    double lambda1 = -1.0, lambda2 = -1.0;
    std::string out = "-";
    std::string format = "text";
};

int run_solve_cmd(const SolveFlags& flags) {
    OwnedDataset dataset;
    if (const int code = load_input(flags.input, flags.schema, dataset); code != 0)
        return code;
    json params = json::object();
    if (flags.lambda1 >= 0.0) params["lambda1"] = flags.lambda1;
    if (flags.lambda2 >= 0.0) params["lambda2"] = flags.lambda2;
    const std::string params_text = params.dump();
    OwnedString result;
    const auto rc = fairlens_solve_thresholds(dataset.handle, flags.criterion.c_str(),
                                              flags.y_star, flags.tolerance,
                                              params_text.c_str(), &result.text);
    if (rc != FAIRLENS_OK) return complain(rc);
    const json solved = json::parse(result.str());
    const bool feasible = solved.at("feasible").get<bool>();
    std::string output;
    if (flags.format == "json") {
        output = result.str();
    } else if (feasible) {
        output = solved.at("thresholds_text").get<std::string>();
    } else {
        // No usable map; surface the diagnostic instead of a partial file.
        std::cerr << "fairlens: " << solved.at("diagnostic").get<std::string>() << "\n";
        return 2;
    }
    if (!write_output(flags.out, output))
        return complain("cannot write output file: " + flags.out);
    return feasible ? 0 : 2;
}

struct DifFlags {
    std::string input;
    std::vector<std::string> schema;
    std::string ability;
    std::string feature;
    int bins = 0;
    int min_per_cell = 0;
    std::string strata_mode;
    double flag_threshold = -1.0;
    std::string out = "-";
    std::string format = "json";
};

std::string dif_csv(const json& report) {
    std::ostringstream out;
    out << "subject,weighted_gap,flagged,undiagnosable,excluded_strata\n";
    const auto row = [&out](const std::string& name, const json& entry,
                            const char* gap_key) {
        out << name << ',';
        if (!entry.at(gap_key).is_null()) out << entry.at(gap_key).get<double>();
        out << ',' << (entry.at("flagged").get<bool>() ? "true" : "false") << ','
            << (entry.at("undiagnosable").get<bool>() ? "true" : "false") << ','
            << entry.at("excluded_strata").get<std::size_t>() << '\n';
    };
    if (report.contains("items"))
        for (const json& item : report.at("items"))
            row(item.at("item_id").get<std::string>(), item, "weighted_gap");
    if (report.contains("feature"))
        row(report.at("feature").at("feature").get<std::string>(),
            report.at("feature"), "weighted_tv");
    return out.str();
}

int run_dif_cmd(const DifFlags& flags) {
    OwnedDataset dataset;
    if (const int code = load_input(flags.input, flags.schema, dataset); code != 0)
        return code;
    json options = json::object();
    if (!flags.ability.empty()) options["ability"] = flags.ability;
    if (!flags.feature.empty()) options["feature"] = flags.feature;
    if (flags.flag_threshold >= 0.0) options["flag_threshold"] = flags.flag_threshold;
    json strata = json::object();
    if (flags.bins > 0) strata["count"] = flags.bins;
    if (flags.min_per_cell > 0) strata["min_per_cell"] = flags.min_per_cell;
    if (!flags.strata_mode.empty()) strata["mode"] = flags.strata_mode;
    if (!strata.empty()) options["strata"] = strata;
    const std::string options_text = options.dump();
    OwnedString report;
    int exit_code = 0;
    const auto rc = fairlens_dif_run(dataset.handle, options_text.c_str(), &report.text,
                                     &exit_code);
    if (rc != FAIRLENS_OK) return complain(rc);
    const std::string output =
        flags.format == "csv" ? dif_csv(json::parse(report.str())) : report.str();
    if (!write_output(flags.out, output))
        return complain("cannot write output file: " + flags.out);
    return exit_code;
}

void add_schema_flag(CLI::App* cmd, std::vector<std::string>& schema) {
    cmd->add_option("--schema", schema,
                    "Column mapping ROLE=COLUMN; roles: group, score, target, decision")
        ->delimiter(',');
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Group-fairness audits over scored datasets"};
    app.set_version_flag("--version", []() { return std::string(fairlens_version()); });
    app.require_subcommand(1);

    AuditFlags audit;
    CLI::App* audit_cmd =
        app.add_subcommand("audit", "Run fairness criteria and emit a report");
    audit_cmd->add_option("-i,--input", audit.input, "Dataset CSV path, or - for stdin")
        ->required();
    add_schema_flag(audit_cmd, audit.schema);
    audit_cmd
        ->add_option("--criteria", audit.criteria,
                     "Criteria to run (comma separated); default or 'all' runs the "
                     "standard battery")
        ->delimiter(',');
    audit_cmd->add_option("--thresholds", audit.thresholds,
                          "fixed:CUTOFF[:YSTAR] | file:PATH | solver:CRITERION[:YSTAR]");
    audit_cmd->add_option("--tolerance", audit.tolerance,
                          "Disparity allowed before a criterion fails");
    audit_cmd->add_option("--bins", audit.bins,
                          "Bin count for calibration, decision-rule, and DIF strata");
    audit_cmd->add_option("--min-per-cell", audit.min_per_cell,
                          "Smallest group-by-bin cell the binned criteria keep");
    audit_cmd->add_option("--lambda1", audit.lambda1, "Utility weight on false positives");
    audit_cmd->add_option("--lambda2", audit.lambda2, "Utility weight on false negatives");
    audit_cmd->add_option("--k", audit.k, "Culture penalty for the optimum-score search");
    audit_cmd->add_option("--compromise-lambda", audit.compromise_lambda,
                          "Exponent for the compromise criterion");
    audit_cmd->add_option("--jones-percent", audit.jones_percent,
                          "Selection percentage for the at-position comparison");
    audit_cmd
        ->add_option("--candidates", audit.candidates,
                     "Extra columns searched by culturally_optimum (comma separated)")
        ->delimiter(',');
    audit_cmd->add_option("--group-one", audit.group_one,
                          "Group coded 1 in group-indicator correlations");
    audit_cmd->add_option("--fit-on", audit.fit_on,
                          "Fit regressions on this group only instead of pooled");
    audit_cmd->add_flag("--underprediction-only", audit.underprediction_only,
                        "Count only score-below-target deviations as unfair");
    audit_cmd
        ->add_option("--dif-ability", audit.dif_ability, "DIF matching variable")
        ->check(CLI::IsMember({"rest_score", "target"}));
    audit_cmd->add_option("--flag-threshold", audit.flag_threshold,
                          "Weighted gap at which DIF flags an item");
    audit_cmd->add_option("--halfwidth", audit.halfwidth,
                          "Score window half-width for the designated-risk criterion");
    audit_cmd->add_flag("--adjust-percentile", audit.adjust_percentile,
                        "Replace scores with within-group percentiles before auditing");
    audit_cmd->add_flag("--no-timestamp", audit.no_timestamp,
                        "Omit generated_at so reruns are byte-identical");
    audit_cmd->add_option("-o,--out", audit.out, "Report path, - for stdout");
    audit_cmd->add_option("--format", audit.format, "Report form")
        ->check(CLI::IsMember({"json", "csv"}));

    Figure2Flags figure2;
    CLI::App* figure2_cmd = app.add_subcommand(
        "figure2", "Fair-score-correlation targets over a test-target correlation grid");
    figure2_cmd->add_option("--rho-ay", figure2.rho_ay,
                            "Correlation between group and target")
        ->required();
    figure2_cmd->add_option("--lo", figure2.lo, "First grid point");
    figure2_cmd->add_option("--hi", figure2.hi, "Last grid point");
    figure2_cmd->add_option("--step", figure2.step, "Grid spacing");
    figure2_cmd->add_option("-o,--out", figure2.out, "CSV path, - for stdout");

    SynthFlags synth;
    CLI::App* synth_cmd =
        app.add_subcommand("synth", "Generate a synthetic dataset from a JSON spec");
    synth_cmd->add_option("--spec", synth.spec, "Spec JSON path, or - for stdin")
        ->required();
    synth_cmd->add_option("--seed", synth.seed,
                          "Generator seed; FAIRLENS_SEED overrides");
    synth_cmd->add_option("-o,--out", synth.out, "Dataset CSV path, - for stdout");
    synth_cmd->add_option("--sidecar", synth.sidecar,
                          "Sidecar JSON path; default <out>.sidecar.json");
    synth_cmd->add_flag("--no-sidecar", synth.no_sidecar, "Skip the sidecar file");

    SolveFlags solve;
    CLI::App* solve_cmd = app.add_subcommand(
        "solve", "Per-group cutoffs equalizing one confusion-matrix criterion");
    solve_cmd->add_option("-i,--input", solve.input, "Dataset CSV path, or - for stdin")
        ->required();
    add_schema_flag(solve_cmd, solve.schema);
    solve_cmd->add_option("--criterion", solve.criterion, "Criterion to equalize")
        ->required();
    solve_cmd->add_option("--y-star", solve.y_star, "Target cutoff defining positives");
    solve_cmd->add_option("--tolerance", solve.tolerance, "Disparity the solution allows");
    solve_cmd->add_option("--lambda1", solve.lambda1, "Utility weight on false positives");
    solve_cmd->add_option("--lambda2", solve.lambda2, "Utility weight on false negatives");
    solve_cmd->add_option("-o,--out", solve.out, "Output path, - for stdout");
    solve_cmd->add_option("--format", solve.format,
                          "text emits a threshold map usable as file:PATH")
        ->check(CLI::IsMember({"text", "json"}));

    DifFlags dif;
    CLI::App* dif_cmd = app.add_subcommand(
        "dif", "Differential functioning of items, or of one feature column");
    dif_cmd->add_option("-i,--input", dif.input, "Dataset CSV path, or - for stdin")
        ->required();
    add_schema_flag(dif_cmd, dif.schema);
    dif_cmd->add_option("--ability", dif.ability, "Matching variable for item mode")
        ->check(CLI::IsMember({"rest_score", "target"}));
    dif_cmd->add_option("--feature", dif.feature,
                        "Column to compare across groups at matched score");
    dif_cmd->add_option("--bins", dif.bins, "Number of ability or score strata");
    dif_cmd->add_option("--min-per-cell", dif.min_per_cell,
                        "Smallest group-by-stratum cell kept");
    dif_cmd->add_option("--strata-mode", dif.strata_mode, "How strata are cut")
        ->check(CLI::IsMember({"equal_count", "equal_width"}));
    dif_cmd->add_option("--flag-threshold", dif.flag_threshold,
                        "Weighted gap at which an item is flagged");
    dif_cmd->add_option("-o,--out", dif.out, "Report path, - for stdout");
    dif_cmd->add_option("--format", dif.format, "Report form")
        ->check(CLI::IsMember({"json", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitError;
    }

    if (audit_cmd->parsed()) {
        audit.k_set = audit_cmd->count("--k") > 0;
        return run_audit_cmd(audit);
    }
    if (figure2_cmd->parsed()) return run_figure2_cmd(figure2);
    if (synth_cmd->parsed()) return run_synth_cmd(synth);
    if (solve_cmd->parsed()) return run_solve_cmd(solve);
    if (dif_cmd->parsed()) return run_dif_cmd(dif);
    return kExitError;
}
