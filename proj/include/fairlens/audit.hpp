#ifndef FAIRLENS_AUDIT_HPP
#define FAIRLENS_AUDIT_HPP

#include <optional>
#include <string>
#include <vector>

#include "fairlens/classification.hpp"
#include "fairlens/dataset.hpp"
#include "fairlens/dif.hpp"
#include "fairlens/regression.hpp"
#include "fairlens/report.hpp"
#include "fairlens/types.hpp"

namespace fairlens {

inline constexpr const char* kToolName = "fairlens";
inline constexpr const char* kToolVersion = "0.1.0";

/// Where the per-group cutoffs for the confusion-matrix criteria come from.
/// Textual form: "fixed:CUTOFF[:YSTAR]", "file:PATH",
/// "solver:CRITERION[:YSTAR]"; y* defaults to 0.5.
struct ThresholdSource {
    enum class Kind { Fixed, File, Solver } kind = Kind::Fixed;
    double cutoff = 0.5;     // Fixed
    std::string path;        // File
    std::string criterion;   // Solver
    double y_star = 0.5;
};

ThresholdSource parse_threshold_source(const std::string& text);

struct AuditOptions {
    /// Criterion names to run; empty means the full default battery, which
    /// skips (with a note) entries whose inputs are missing. Explicitly named
    /// criteria never skip: a missing precondition is an error.
    std::vector<std::string> criteria;
    double tolerance = kDefaultTolerance;
    /// Group coded 1 in the group indicator; empty picks the
    /// lexicographically greatest label.
    std::string group_as_one;
    std::optional<ThresholdSource> thresholds;
    std::string fit_on;                       // regression fits; empty = pooled
    SignPolicy sign_policy = SignPolicy::BothSigns;
    BinSpec calibration_bins = calibration_default_bins();
    BinSpec guion_bins = guion_default_bins();
    BinSpec dif_strata = dif_default_strata();
    AbilityMeasure dif_ability = AbilityMeasure::RestScore;
    double dif_flag_threshold = 0.05;
    std::optional<double> einhorn_halfwidth;  // empty = 0.1 x pooled score sd
    ThorndikianParams thorndikian_params;
    double compromise_lambda = 1.0;           // explicit-only criteria below
    double jones_percent = 50.0;
    std::vector<std::string> optimum_candidates; // empty = every extra column
    double optimum_k = 0.0;
    bool include_timestamp = true;
};

/// Names expanded from the empty criteria list, in run order.
const std::vector<std::string>& default_criteria();
/// Additional names accepted only when requested by name.
const std::vector<std::string>& explicit_only_criteria();

struct AuditOutcome {
    /// 0 all pass; 1 any fail; 2 no fails but an undefined verdict or an
    /// infeasible threshold solve. (Input and usage errors surface as
    /// exceptions and map to 3/4 at the interface layer.)
    int exit_code = 0;
    std::string report_json; // schema_version 1 object, 2-space indent
    std::string report_csv;  // criterion,component,group,value,disparity,tolerance,verdict
};

AuditOutcome run_audit(const Dataset& dataset, const AuditOptions& options);

} // namespace fairlens

#endif
