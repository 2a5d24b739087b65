#include "fairlens/correlation.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "fairlens/error.hpp"
#include "fairlens/stats.hpp"

namespace fairlens {

namespace {

void require_correlation(double value, const char* name) {
    if (!(value >= -1.0 && value <= 1.0)) {
        throw InvalidArgument(std::string(name) + " must lie in [-1,1], got " +
                              format_double(value));
    }
}

/// Diagnostics note when the pooled marginals are visibly non-Gaussian; the
/// correlation criteria's equivalences are only trustworthy near normality.
void append_normality_notes(const Dataset& dataset, std::vector<std::string>& notes) {
    for (const char* column : {"score", "target"}) {
        const auto values = dataset.column(column);
        const double skew = skewness(values);
        const double kurt = excess_kurtosis(values);
        if (std::abs(skew) > 1.0 || std::abs(kurt) > 1.0) {
            notes.push_back(std::string(column) + " looks non-normal (skew " +
                            format_double(skew) + ", excess kurtosis " +
                            format_double(kurt) +
                            "); correlation-target comparisons assume roughly "
                            "normal marginals");
        }
    }
}

CriterionReport target_comparison_report(std::string criterion, const Dataset& dataset,
                                         const std::string& group_as_one,
                                         std::optional<double> target,
                                         double tolerance) {
    const CorrelationTriple triple = correlations(dataset, group_as_one);
    Component component;
    component.name = "rho_ar";
    component.per_group["measured"] = triple.rho_ar;
    component.per_group["target"] = target;

    std::vector<std::string> notes;
    if (!target.has_value()) notes.push_back("target undefined (rho_ry = 0)");
    append_normality_notes(dataset, notes);
    return finalize_report(std::move(criterion), tolerance, {std::move(component)},
                           std::move(notes));
}

} // namespace

std::optional<double> DarlingtonTargets::target(int which) const {
    switch (which) {
    case 1: return target1;
    case 2: return target2;
    case 3: return target3;
    case 4: return target4;
    }
    throw InvalidArgument("criterion index must be 1..4, got " + std::to_string(which));
}

DarlingtonTargets darlington_targets(double rho_ay, double rho_ry) {
    require_correlation(rho_ay, "rho_ay");
    require_correlation(rho_ry, "rho_ry");
    DarlingtonTargets targets;
    targets.rho_ay = rho_ay;
    targets.rho_ry = rho_ry;
    if (rho_ry != 0.0) targets.target1 = rho_ay / rho_ry;
    targets.target2 = rho_ay;
    targets.target3 = rho_ay * rho_ry;
    targets.target4 = 0.0;
    return targets;
}

CriterionReport darlington_check(const Dataset& dataset, const std::string& group_as_one,
                                 int which, double tolerance) {
    if (which < 1 || which > 4) {
        throw InvalidArgument("criterion index must be 1..4, got " + std::to_string(which));
    }
    const CorrelationTriple triple = correlations(dataset, group_as_one);
    const DarlingtonTargets targets = darlington_targets(triple.rho_ay, triple.rho_ry);
    return target_comparison_report("darlington" + std::to_string(which), dataset,
                                    group_as_one, targets.target(which), tolerance);
}

double compromise_curve(double rho_ay, double rho_ry, double lambda) {
    require_correlation(rho_ay, "rho_ay");
    require_correlation(rho_ry, "rho_ry");
    const bool integral = lambda == std::floor(lambda);
    if (!integral && rho_ry <= 0.0) {
        throw InvalidArgument("fractional lambda needs rho_ry > 0, got " +
                              format_double(rho_ry));
    }
    if (rho_ry == 0.0 && lambda < 0.0) {
        throw InvalidArgument("negative lambda needs rho_ry != 0");
    }
    if (lambda == 0.0) return rho_ay;
    return rho_ay * std::pow(rho_ry, lambda);
}

CriterionReport compromise_check(const Dataset& dataset, const std::string& group_as_one,
                                 double lambda, double tolerance) {
    const CorrelationTriple triple = correlations(dataset, group_as_one);
    std::optional<double> target;
    try {
        target = compromise_curve(triple.rho_ay, triple.rho_ry, lambda);
    } catch (const InvalidArgument&) {
        // rho_ry = 0 (or negative with fractional lambda) on the sample:
        // the interpolated target does not exist there.
    }
    std::ostringstream name;
    name << "compromise(lambda=" << format_double(lambda) << ")";
    return target_comparison_report(name.str(), dataset, group_as_one, target, tolerance);
}

OptimumResult culturally_optimum(const Dataset& dataset,
                                 const std::vector<std::string>& candidate_scores,
                                 double k, const std::string& group_as_one) {
    if (candidate_scores.empty()) {
        throw InvalidArgument("culturally_optimum needs at least one candidate column");
    }
    if (k < 0.0) throw InvalidArgument("k must be non-negative");

    const std::vector<double> indicator = group_indicator(dataset, group_as_one);
    const std::size_t n = dataset.size();
    const std::size_t p = candidate_scores.size();

    Eigen::MatrixXd centered(n, p);
    for (std::size_t j = 0; j < p; ++j) {
        const auto column = dataset.column(candidate_scores[j]);
        const double mu = mean(column);
        for (std::size_t i = 0; i < n; ++i) centered(i, j) = column[i] - mu;
    }
    Eigen::VectorXd composite(n);
    for (std::size_t i = 0; i < n; ++i) {
        composite(i) = dataset.records[i].target - k * indicator[i];
    }
    composite.array() -= composite.mean();

    // Correlation with a linear combination is maximized by the least-squares
    // projection of the composite onto the candidate span; the minimum-norm
    // solution covers rank-deficient (collinear) candidate sets.
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(centered);
    Eigen::VectorXd weights = cod.solve(composite);

    OptimumResult result;
    result.candidates = candidate_scores;
    result.collinear = cod.rank() < static_cast<Eigen::Index>(p);
    if (result.collinear) {
        result.notes.push_back("candidate columns are collinear; reporting the "
                               "minimum-norm weight vector");
    }

    const double norm = weights.norm();
    if (norm < 1e-300) {
        // Composite orthogonal to every candidate: any direction scores zero.
        weights.setZero();
        weights(0) = 1.0;
        result.notes.push_back("composite is uncorrelated with every candidate");
    } else {
        weights /= norm;
    }

    const Eigen::VectorXd blend = centered * weights;
    std::vector<double> blend_values(blend.data(), blend.data() + blend.size());
    std::vector<double> composite_values(composite.data(), composite.data() + composite.size());
    const auto rho = pearson(blend_values, composite_values);
    double achieved = rho.value_or(0.0);
    if (achieved < 0.0) {
        achieved = -achieved;
        weights = -weights;
    }
    result.achieved = achieved;
    result.weights.assign(weights.data(), weights.data() + weights.size());
    return result;
}

std::vector<ScanRow> incompatibility_scan(double rho_ay, std::span<const double> rho_ry_grid) {
    require_correlation(rho_ay, "rho_ay");
    std::vector<ScanRow> rows;
    rows.reserve(rho_ry_grid.size());
    for (const double rho_ry : rho_ry_grid) {
        if (!(rho_ry > 0.0 && rho_ry <= 1.0)) {
            throw InvalidArgument("scan grid points must lie in (0,1], got " +
                                  format_double(rho_ry));
        }
        ScanRow row;
        row.rho_ry = rho_ry;
        row.targets = darlington_targets(rho_ay, rho_ry);
        row.gap12 = std::abs(*row.targets.target1 - row.targets.target2);
        row.gap23 = std::abs(row.targets.target2 - row.targets.target3);
        rows.push_back(row);
    }
    return rows;
}

std::string incompatibility_csv(double rho_ay, std::span<const double> rho_ry_grid) {
    std::ostringstream out;
    out << "rho_ry,target1,target2,target3,target4,gap12,gap23\n";
    for (const ScanRow& row : incompatibility_scan(rho_ay, rho_ry_grid)) {
        out << format_double(row.rho_ry) << ',' << format_double(*row.targets.target1)
            << ',' << format_double(row.targets.target2) << ','
            << format_double(row.targets.target3) << ','
            << format_double(row.targets.target4) << ',' << format_double(row.gap12)
            << ',' << format_double(row.gap23) << '\n';
    }
    return out.str();
}

std::vector<double> make_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo)) {
        throw InvalidArgument("grid needs step > 0 and hi >= lo");
    }
    std::vector<double> grid;
    for (int i = 0;; ++i) {
        double value = lo + i * step;
        if (value > hi + 1e-12) break;
        if (std::abs(value - hi) <= 1e-12) value = hi;
        grid.push_back(value);
        if (value == hi) break;
    }
    return grid;
}

} // namespace fairlens
