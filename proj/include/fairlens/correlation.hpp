#ifndef FAIRLENS_CORRELATION_HPP
#define FAIRLENS_CORRELATION_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairlens/dataset.hpp"
#include "fairlens/report.hpp"
#include "fairlens/types.hpp"

namespace fairlens {

/// The four fair values of rho_AR implied by a given rho_AY and rho_RY:
///   1: rho_ay / rho_ry   (undefined when rho_ry = 0)
///   2: rho_ay
///   3: rho_ay * rho_ry
///   4: 0
/// target2^2 = target1 * target3 whenever target1 is defined.
struct DarlingtonTargets {
    double rho_ay = 0.0;
    double rho_ry = 0.0;
    std::optional<double> target1;
    double target2 = 0.0;
    double target3 = 0.0;
    double target4 = 0.0;

    std::optional<double> target(int which) const;
};

DarlingtonTargets darlington_targets(double rho_ay, double rho_ry);

/// Checks criterion `which` (1..4) on the sample: measured rho_AR against the
/// target computed from the measured rho_AY and rho_RY. The report's value map
/// has keys "measured" and "target"; disparity is |measured - target|.
CriterionReport darlington_check(const Dataset& dataset, const std::string& group_as_one,
                                 int which, double tolerance = kDefaultTolerance);

/// Interpolated fair value rho_ay * rho_ry^lambda. lambda = -1, 0, 1
/// reproduce targets 1, 2, 3. Fractional lambda requires rho_ry > 0.
double compromise_curve(double rho_ay, double rho_ry, double lambda);

/// Sample check against the interpolated target, same report shape as
/// darlington_check.
CriterionReport compromise_check(const Dataset& dataset, const std::string& group_as_one,
                                 double lambda, double tolerance = kDefaultTolerance);

/// Linear combination of the named candidate columns maximizing Pearson
/// correlation with the composite Y - k*A. Weights have unit norm and the
/// sign making the achieved correlation non-negative.
struct OptimumResult {
    std::vector<std::string> candidates;
    std::vector<double> weights;
    double achieved = 0.0;
    bool collinear = false;
    std::vector<std::string> notes;
};

OptimumResult culturally_optimum(const Dataset& dataset,
                                 const std::vector<std::string>& candidate_scores,
                                 double k, const std::string& group_as_one);

/// One row of the incompatibility table: the four targets at a given rho_ry
/// plus the pairwise gaps between neighbouring criteria. On the scan's domain
/// (rho_ry > 0) target1 is always defined.
struct ScanRow {
    double rho_ry = 0.0;
    DarlingtonTargets targets;
    double gap12 = 0.0;
    double gap23 = 0.0;
};

std::vector<ScanRow> incompatibility_scan(double rho_ay, std::span<const double> rho_ry_grid);

/// CSV with header rho_ry,target1,target2,target3,target4,gap12,gap23.
std::string incompatibility_csv(double rho_ay, std::span<const double> rho_ry_grid);

/// lo, lo+step, ... up to hi; a point within 1e-12 of hi snaps onto it so
/// grids like 0.05..1.0 step 0.05 end exactly at 1.
std::vector<double> make_grid(double lo, double hi, double step);

} // namespace fairlens

#endif
