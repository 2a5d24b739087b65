#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

using nlohmann::json;

// Drives the installed binary as a subprocess; FAIRLENS_CLI carries its path.

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

std::string cli_path() {
    const char* path = std::getenv("FAIRLENS_CLI");
    REQUIRE_MESSAGE(path != nullptr, "FAIRLENS_CLI must point at the built binary");
    return path;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

/// Runs the CLI with stdout captured; stderr joins stdout so diagnostics are
/// visible in failures. extra is appended verbatim (e.g. env prefix via
/// `env FAIRLENS_SEED=9`).
RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    const std::string out_path = "cli_stdout.txt";
    const std::string command =
        env_prefix + cli_path() + " " + args + " > " + out_path + " 2>&1";
    const int status = std::system(command.c_str());
    RunResult result;
    result.exit_code = WEXITSTATUS(status);
    result.output = slurp(out_path);
    std::remove(out_path.c_str());
    return result;
}

std::string mirrored_csv() {
    std::string csv = "group,score,target\n";
    for (int i = 0; i < 10; ++i) {
        const std::string value = std::to_string((i + 0.5) / 10.0);
        csv += "a," + value + "," + value + "\n";
        csv += "b," + value + "," + value + "\n";
    }
    return csv;
}

const char* kSolverCsv = "group,score,target\n"
                         "a,1,0\na,2,0\na,3,1\na,4,1\n"
                         "b,11,0\nb,12,1\nb,13,1\nb,14,1\n";

const char* kTwoGroupSpec = R"({
    "kind": "two_group",
    "n": 60,
    "groups": [
        {"label": "a", "weight": 0.5, "mean_r": 0.0, "mean_y": 0.0,
         "sd_r": 1.0, "sd_y": 1.0, "rho_ry": 0.6},
        {"label": "b", "weight": 0.5, "mean_r": 0.0, "mean_y": 0.0,
         "sd_r": 1.0, "sd_y": 1.0, "rho_ry": 0.6}
    ]
})";

} // namespace

TEST_CASE("version and usage errors") {
    CHECK(run_cli("--version").output == "0.1.0\n");
    CHECK(run_cli("--version").exit_code == 0);
    CHECK(run_cli("audit").exit_code == 4);          // missing --input
    CHECK(run_cli("audit --nope x").exit_code == 4); // unknown flag
    CHECK(run_cli("").exit_code == 4);               // missing subcommand
}

TEST_CASE("audit emits deterministic reports in both formats") {
    spit("cli_mirror.csv", mirrored_csv());
    const std::string base =
        "audit -i cli_mirror.csv --criteria cleary,cole_tpr "
        "--thresholds fixed:0.5:0.5 --no-timestamp";
    const RunResult first = run_cli(base);
    CHECK(first.exit_code == 0);
    const json report = json::parse(first.output);
    CHECK(report["schema_version"] == 1);
    REQUIRE(report["criteria"].size() == 2);
    CHECK(report["criteria"][0]["verdict"] == "pass");
    CHECK(report["criteria"][1]["verdict"] == "pass");
    CHECK(run_cli(base).output == first.output);

    const RunResult csv = run_cli(base + " --format csv");
    CHECK(csv.exit_code == 0);
    CHECK(csv.output.rfind("criterion,component,group,value,disparity", 0) == 0);
    CHECK(csv.output.find("cole_tpr,tpr,a,1,0,0.01,pass") != std::string::npos);
    std::remove("cli_mirror.csv");
}

TEST_CASE("audit reads stdin and mapped column names") {
    spit("cli_mapped.csv", "cohort,result,outcome\n"
                           "x,1,1\nx,2,2\ny,1,1\ny,2,2\n");
    const RunResult mapped = run_cli(
        "audit -i cli_mapped.csv --schema group=cohort,score=result,outcome=bad "
        "--criteria cleary --no-timestamp");
    CHECK(mapped.exit_code == 4); // unknown schema role

    const RunResult good = run_cli(
        "audit -i cli_mapped.csv --schema group=cohort,score=result,target=outcome "
        "--criteria cleary --no-timestamp");
    CHECK(good.exit_code == 0);

    spit("cli_stdin.csv", mirrored_csv());
    const RunResult piped =
        run_cli("audit -i - --criteria cleary --no-timestamp < cli_stdin.csv");
    CHECK(piped.exit_code == 0);
    std::remove("cli_mapped.csv");
    std::remove("cli_stdin.csv");
}

TEST_CASE("solve writes a threshold map the audit accepts") {
    spit("cli_solver.csv", kSolverCsv);
    const RunResult solved = run_cli(
        "solve -i cli_solver.csv --criterion thorndike_ratio -o cli_cuts.txt");
    CHECK(solved.exit_code == 0);
    const std::string cuts = slurp("cli_cuts.txt");
    CHECK(cuts.find("a,3\n") != std::string::npos);
    CHECK(cuts.find("b,12\n") != std::string::npos);

    const RunResult fair = run_cli(
        "audit -i cli_solver.csv --criteria thorndike_ratio "
        "--thresholds file:cli_cuts.txt --no-timestamp");
    CHECK(fair.exit_code == 0);
    const RunResult unfair = run_cli(
        "audit -i cli_solver.csv --criteria thorndike_ratio "
        "--thresholds fixed:3 --no-timestamp");
    CHECK(unfair.exit_code == 1);

    const RunResult as_json = run_cli(
        "solve -i cli_solver.csv --criterion thorndike_ratio --format json");
    CHECK(as_json.exit_code == 0);
    const json details = json::parse(as_json.output);
    CHECK(details["feasible"] == true);
    CHECK(details["cutoffs"]["b"] == 12.0);

    // A group with no positives anywhere leaves cole_tpr unattainable.
    spit("cli_hopeless.csv", "group,score,target\n"
                             "a,1,0\na,2,1\na,3,1\n"
                             "b,1,0\nb,2,0\nb,3,0\n");
    const RunResult infeasible =
        run_cli("solve -i cli_hopeless.csv --criterion cole_tpr");
    CHECK(infeasible.exit_code == 2);
    std::remove("cli_solver.csv");
    std::remove("cli_cuts.txt");
    std::remove("cli_hopeless.csv");
}

TEST_CASE("synth is seed-deterministic and sidecarred") {
    spit("cli_spec.json", kTwoGroupSpec);
    const RunResult first =
        run_cli("synth --spec cli_spec.json --seed 5 -o cli_synth.csv");
    CHECK(first.exit_code == 0);
    const std::string data = slurp("cli_synth.csv");
    CHECK(data.rfind("group,score,target\n", 0) == 0);
    const json sidecar = json::parse(slurp("cli_synth.sidecar.json"));
    CHECK(sidecar["seed"] == 5);
    CHECK(sidecar["generator"] == "mt19937_64+marsaglia-polar");
    CHECK(sidecar["spec"]["n"] == 60);

    CHECK(run_cli("synth --spec cli_spec.json --seed 5 -o cli_synth_b.csv").exit_code ==
          0);
    CHECK(slurp("cli_synth_b.csv") == data);

    // The environment seed takes precedence over the flag.
    CHECK(run_cli("synth --spec cli_spec.json --seed 5 -o cli_synth_env.csv",
                  "env FAIRLENS_SEED=9 ")
              .exit_code == 0);
    CHECK(slurp("cli_synth_env.csv") != data);
    CHECK(json::parse(slurp("cli_synth_env.sidecar.json"))["seed"] == 9);

    // Spec over stdin, data to stdout: no sidecar files appear.
    const RunResult piped = run_cli("synth --spec - --seed 5 < cli_spec.json");
    CHECK(piped.exit_code == 0);
    CHECK(piped.output == data);

    for (const char* path :
         {"cli_spec.json", "cli_synth.csv", "cli_synth.sidecar.json", "cli_synth_b.csv",
          "cli_synth_b.sidecar.json", "cli_synth_env.csv", "cli_synth_env.sidecar.json"})
        std::remove(path);
}

TEST_CASE("figure2 grid and error handling") {
    const RunResult zero = run_cli("figure2 --rho-ay 0 --lo 0.5 --hi 1 --step 0.25");
    CHECK(zero.exit_code == 0);
    CHECK(zero.output.find("\n0.5,0,0,0,0,0,0\n") != std::string::npos);
    CHECK(zero.output.find("\n1,0,0,0,0,0,0\n") != std::string::npos);
    CHECK(run_cli("figure2 --rho-ay 0.2 --step 0").exit_code == 4);
    CHECK(run_cli("figure2 --rho-ay 1.5").exit_code == 4);
}

TEST_CASE("dif subcommand flags items and inspects features") {
    std::string csv = "group,score,target,item_q1,item_q2\n";
    for (int level = 0; level < 5; ++level) {
        for (int i = 0; i < 10; ++i) {
            const std::string ability = std::to_string(level);
            const std::string q2 = i < 2 * level ? "1" : "0";
            csv += "a," + ability + "," + ability + "," +
                   (i < 2 + level ? "1" : "0") + "," + q2 + "\n";
            csv += "b," + ability + "," + ability + "," + (i < level ? "1" : "0") +
                   "," + q2 + "\n";
        }
    }
    spit("cli_items.csv", csv);
    const std::string base = "dif -i cli_items.csv --ability target "
                             "--strata-mode equal_width --bins 5";
    const RunResult flagged = run_cli(base);
    CHECK(flagged.exit_code == 1);
    const json report = json::parse(flagged.output);
    CHECK(report["items"][0]["flagged"] == true);
    CHECK(report["items"][1]["flagged"] == false);

    const RunResult csv_form = run_cli(base + " --format csv");
    CHECK(csv_form.output.rfind("subject,weighted_gap,flagged", 0) == 0);
    CHECK(csv_form.output.find("item_q1,0.2,true,false,0") != std::string::npos);

    const RunResult feature = run_cli(
        "dif -i cli_items.csv --feature item_q2 --strata-mode equal_width --bins 5");
    CHECK(feature.exit_code == 0);
    CHECK(json::parse(feature.output)["feature"]["flagged"] == false);
    std::remove("cli_items.csv");
}

TEST_CASE("percentile adjustment flag flips demographic-parity style failures") {
    spit("cli_ranks.csv", kSolverCsv);
    const RunResult raw =
        run_cli("audit -i cli_ranks.csv --criteria darlington4 --no-timestamp");
    CHECK(raw.exit_code == 1);
    const RunResult adjusted = run_cli(
        "audit -i cli_ranks.csv --criteria darlington4 --adjust-percentile "
        "--no-timestamp");
    CHECK(adjusted.exit_code == 0);
    const json report = json::parse(adjusted.output);
    CHECK(report["criteria"][0]["max_disparity"].get<double>() ==
          doctest::Approx(0.0));
    std::remove("cli_ranks.csv");
}
