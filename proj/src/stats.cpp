#include "fairlens/stats.hpp"

#include <algorithm>
#include <cmath>

#include "fairlens/error.hpp"

namespace fairlens {

double mean(std::span<const double> values) {
    if (values.empty()) throw InvalidArgument("mean of empty range");
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidArgument("pearson: length mismatch");
    if (x.size() < 2) throw InvalidArgument("pearson: need at least 2 points");
    const double mx = mean(x);
    const double my = mean(y);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    const double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

std::optional<double> partial_correlation(double rho_xy, double rho_xz, double rho_yz) {
    const double radicand = (1.0 - rho_xz * rho_xz) * (1.0 - rho_yz * rho_yz);
    if (radicand <= 0.0) return std::nullopt;
    return (rho_xy - rho_xz * rho_yz) / std::sqrt(radicand);
}

namespace {

struct Moments {
    double m = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
};

Moments central_moments(std::span<const double> values) {
    Moments out;
    out.m = mean(values);
    const double n = static_cast<double>(values.size());
    for (double v : values) {
        const double d = v - out.m;
        out.m2 += d * d;
        out.m3 += d * d * d;
        out.m4 += d * d * d * d;
    }
    out.m2 /= n;
    out.m3 /= n;
    out.m4 /= n;
    return out;
}

} // namespace

double skewness(std::span<const double> values) {
    const auto m = central_moments(values);
    if (m.m2 == 0.0) return 0.0;
    return m.m3 / std::pow(m.m2, 1.5);
}

double excess_kurtosis(std::span<const double> values) {
    const auto m = central_moments(values);
    if (m.m2 == 0.0) return 0.0;
    return m.m4 / (m.m2 * m.m2) - 3.0;
}

std::vector<double> group_indicator(const Dataset& dataset, const std::string& group_as_one) {
    const auto labels = dataset.groups();
    if (labels.size() != 2)
        throw InvalidArgument(
            "correlation criteria need exactly 2 groups (got " +
            std::to_string(labels.size()) +
            "); binarize the dataset by naming the group coded 1");
    if (std::find(labels.begin(), labels.end(), group_as_one) == labels.end())
        throw InvalidArgument("unknown group label: " + group_as_one);
    std::vector<double> indicator;
    indicator.reserve(dataset.size());
    for (const auto& r : dataset.records)
        indicator.push_back(r.group == group_as_one ? 1.0 : 0.0);
    return indicator;
}

std::optional<double> point_biserial(const Dataset& dataset, const std::string& group_as_one) {
    const auto a = group_indicator(dataset, group_as_one);
    return pearson(a, dataset.column("score"));
}

CorrelationTriple correlations(const Dataset& dataset, const std::string& group_as_one) {
    const auto a = group_indicator(dataset, group_as_one);
    const auto r = dataset.column("score");
    const auto y = dataset.column("target");

    const auto rho_ar = pearson(a, r);
    const auto rho_ay = pearson(a, y);
    const auto rho_ry = pearson(r, y);
    if (!rho_ry) throw InvalidArgument("correlations: score or target is constant");
    if (!rho_ar || !rho_ay)
        throw InvalidArgument("correlations: group indicator is constant");

    CorrelationTriple out;
    out.rho_ar = *rho_ar;
    out.rho_ay = *rho_ay;
    out.rho_ry = *rho_ry;
    out.rho_ar_given_y = partial_correlation(out.rho_ar, out.rho_ay, out.rho_ry);
    out.rho_ay_given_r = partial_correlation(out.rho_ay, out.rho_ar, out.rho_ry);
    return out;
}

RegressionFit ols(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidArgument("ols: length mismatch");
    if (x.size() < 2) throw InvalidArgument("ols: need at least 2 points");
    const double mx = mean(x);
    const double my = mean(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        sxx += dx * dx;
        sxy += dx * (y[i] - my);
    }
    if (sxx == 0.0) throw InvalidArgument("ols: constant predictor");
    RegressionFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.residuals.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        fit.residuals.push_back(y[i] - fit.predict(x[i]));
    return fit;
}

RegressionFit pooled_ols(const Dataset& dataset, Predictor predictor) {
    const auto r = dataset.column("score");
    const auto y = dataset.column("target");
    return predictor == Predictor::Score ? ols(r, y) : ols(y, r);
}

RegressionFit ols_fit_on(const Dataset& dataset, Predictor predictor,
                         std::span<const std::size_t> fit_rows) {
    const auto r = dataset.column("score");
    const auto y = dataset.column("target");
    const auto& x_all = predictor == Predictor::Score ? r : y;
    const auto& y_all = predictor == Predictor::Score ? y : r;

    std::vector<double> fx, fy;
    fx.reserve(fit_rows.size());
    fy.reserve(fit_rows.size());
    for (auto i : fit_rows) {
        fx.push_back(x_all[i]);
        fy.push_back(y_all[i]);
    }
    RegressionFit fit = ols(fx, fy);
    fit.residuals.clear();
    fit.residuals.reserve(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i)
        fit.residuals.push_back(y_all[i] - fit.predict(x_all[i]));
    return fit;
}

} // namespace fairlens
