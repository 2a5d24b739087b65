#include "fairlens/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fairlens/error.hpp"

namespace fairlens {

namespace {

constexpr double kLn2 = 0.6931471805599453094172321215; // rounds to nearest double

/// Uniform in [0,1) with 53 random bits.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1p-53;
}

/// Attenuation of a correlation when one standard-normal variable is
/// replaced by its median split: corr(1{L>0}, X) = rho_LX * sqrt(2/pi).
const double kAttenuation = std::sqrt(2.0 / 3.14159265358979323846);

} // namespace

double deterministic_log(double x) {
    if (!(x > 0.0)) throw InvalidArgument("deterministic_log needs x > 0");
    // x = m * 2^e with m in [sqrt(1/2), sqrt(2)) keeps |t| <= 0.1716 below.
    int e = 0;
    double m = std::frexp(x, &e); // m in [0.5, 1)
    if (m < 0.70710678118654752440) {
        m *= 2.0;
        e -= 1;
    }
    const double t = (m - 1.0) / (m + 1.0);
    const double t2 = t * t;
    // atanh(t) = sum t^(2k+1)/(2k+1); |t| <= 0.172 converges well under
    // double precision within 13 terms.
    double term = t;
    double sum = 0.0;
    for (int k = 0; k < 13; ++k) {
        sum += term / static_cast<double>(2 * k + 1);
        term *= t2;
    }
    return 2.0 * sum + static_cast<double>(e) * kLn2;
}

double NormalSource::next() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    for (;;) {
        const double u = 2.0 * uniform01(rng_) - 1.0;
        const double v = 2.0 * uniform01(rng_) - 1.0;
        const double s = u * u + v * v;
        if (s >= 1.0 || s == 0.0) continue;
        const double factor = std::sqrt(-2.0 * deterministic_log(s) / s);
        spare_ = v * factor;
        have_spare_ = true;
        return u * factor;
    }
}

Dataset generate_two_group(const std::vector<GaussianGroupSpec>& specs, std::size_t n,
                           std::uint64_t seed) {
    if (specs.size() < 2) throw InvalidArgument("need at least two group specs");
    if (n < 2 * specs.size()) throw InvalidArgument("n too small for the group count");
    double weight_sum = 0.0;
    for (const auto& spec : specs) {
        if (spec.label.empty()) throw InvalidArgument("group label must be non-empty");
        if (!(spec.weight > 0.0 && spec.weight < 1.0))
            throw InvalidArgument("group weight must lie in (0,1)");
        if (!(spec.sd_r > 0.0 && spec.sd_y > 0.0))
            throw InvalidArgument("standard deviations must be positive");
        if (!(std::abs(spec.rho_ry) < 1.0))
            throw InvalidArgument("within-group rho_ry must satisfy |rho| < 1");
        weight_sum += spec.weight;
    }
    for (std::size_t i = 0; i < specs.size(); ++i) {
        for (std::size_t j = i + 1; j < specs.size(); ++j) {
            if (specs[i].label == specs[j].label)
                throw InvalidArgument("duplicate group label " + specs[i].label);
        }
    }
    if (std::abs(weight_sum - 1.0) > 1e-9)
        throw InvalidArgument("group weights must sum to 1");

    // Largest-remainder apportionment; ties go to the earlier spec.
    std::vector<std::size_t> counts(specs.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const double exact = specs[i].weight * static_cast<double>(n);
        counts[i] = static_cast<std::size_t>(std::floor(exact));
        assigned += counts[i];
        remainders.emplace_back(exact - std::floor(exact), i);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t extra = 0; extra < n - assigned; ++extra) {
        counts[remainders[extra % remainders.size()].second] += 1;
    }

    NormalSource normals(seed);
    Dataset dataset;
    dataset.records.reserve(n);
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& spec = specs[i];
        const double tail = std::sqrt(1.0 - spec.rho_ry * spec.rho_ry);
        for (std::size_t row = 0; row < counts[i]; ++row) {
            const double z1 = normals.next();
            const double z2 = normals.next();
            Record record;
            record.group = spec.label;
            record.score = spec.mean_r + spec.sd_r * z1;
            record.target = spec.mean_y + spec.sd_y * (spec.rho_ry * z1 + tail * z2);
            dataset.records.push_back(std::move(record));
        }
    }
    dataset.validate();
    return dataset;
}

double correlated_target_rho_ar(double rho_ay, double rho_ry, int criterion) {
    switch (criterion) {
    case 1:
        if (rho_ry == 0.0)
            throw Infeasible("criterion 1 has no target at rho_ry = 0");
        return rho_ay / rho_ry;
    case 2: return rho_ay;
    case 3: return rho_ay * rho_ry;
    case 4: return 0.0;
    }
    throw InvalidArgument("criterion index must be 1..4, got " + std::to_string(criterion));
}

Dataset generate_correlated(const TargetCorrelationSpec& spec, int criterion) {
    if (!(std::abs(spec.rho_ay) <= 1.0 && std::abs(spec.rho_ry) <= 1.0))
        throw InvalidArgument("correlations must lie in [-1,1]");
    if (spec.n < 4) throw InvalidArgument("n must be at least 4");

    const double rho_ar = correlated_target_rho_ar(spec.rho_ay, spec.rho_ry, criterion);

    // Latent correlations compensated for the median split.
    const double rho_lr = rho_ar / kAttenuation;
    const double rho_ly = spec.rho_ay / kAttenuation;
    const auto check_latent = [](double value, const char* name, double requested) {
        if (std::abs(value) >= 1.0) {
            std::ostringstream msg;
            msg << "infeasible: requested " << name << " = " << format_double(requested)
                << " needs latent correlation " << format_double(value)
                << "; the dichotomization bound is |rho| < sqrt(2/pi) = "
                << format_double(kAttenuation);
            throw Infeasible(msg.str());
        }
    };
    check_latent(rho_lr, "rho_ar", rho_ar);
    check_latent(rho_ly, "rho_ay", spec.rho_ay);

    const double det = 1.0 + 2.0 * rho_lr * rho_ly * spec.rho_ry - rho_lr * rho_lr -
                       rho_ly * rho_ly - spec.rho_ry * spec.rho_ry;
    if (det < -1e-12) {
        std::ostringstream msg;
        msg << "infeasible: latent correlation matrix is not PSD; need 1 + "
               "2*rho_lr*rho_ly*rho_ry - rho_lr^2 - rho_ly^2 - rho_ry^2 >= 0 but got "
            << format_double(det) << " with rho_lr = " << format_double(rho_lr)
            << ", rho_ly = " << format_double(rho_ly)
            << ", rho_ry = " << format_double(spec.rho_ry);
        throw Infeasible(msg.str());
    }

    NormalSource normals(spec.seed);
    Dataset dataset;
    dataset.records.reserve(spec.n);

    if (std::abs(spec.rho_ry) == 1.0) {
        // Degenerate boundary: Y is exactly +-R, which PSD admits only when
        // the two latent correlations already agree.
        const double sign = spec.rho_ry > 0.0 ? 1.0 : -1.0;
        if (std::abs(rho_lr - sign * rho_ly) > 1e-12) {
            throw Infeasible("infeasible: |rho_ry| = 1 forces rho_ar = rho_ay * rho_ry, "
                             "which this criterion does not satisfy here");
        }
        const double tail = std::sqrt(std::max(0.0, 1.0 - rho_lr * rho_lr));
        for (std::size_t row = 0; row < spec.n; ++row) {
            const double z0 = normals.next();
            const double z1 = normals.next();
            Record record;
            record.group = z0 > 0.0 ? "b" : "a";
            record.score = rho_lr * z0 + tail * z1;
            record.target = sign * record.score;
            dataset.records.push_back(std::move(record));
        }
        dataset.validate();
        return dataset;
    }

    // Fixed-order 3x3 Cholesky of the latent matrix over (L, R, Y).
    const double l22 = std::sqrt(1.0 - rho_lr * rho_lr);
    const double l32 = (spec.rho_ry - rho_lr * rho_ly) / l22;
    const double l33 = std::sqrt(std::max(0.0, 1.0 - rho_ly * rho_ly - l32 * l32));
    for (std::size_t row = 0; row < spec.n; ++row) {
        const double z0 = normals.next();
        const double z1 = normals.next();
        const double z2 = normals.next();
        Record record;
        record.group = z0 > 0.0 ? "b" : "a";
        record.score = rho_lr * z0 + l22 * z1;
        record.target = rho_ly * z0 + l32 * z1 + l33 * z2;
        dataset.records.push_back(std::move(record));
    }
    dataset.validate();
    return dataset;
}

std::vector<ConfusionMatrix> enumerate_confusion_matrices(int max_count) {
    if (max_count < 1) throw InvalidArgument("max_count must be at least 1");
    std::vector<ConfusionMatrix> matrices;
    const int side = max_count + 1;
    matrices.reserve(static_cast<std::size_t>(side) * side * side * side - 1);
    for (int tp = 0; tp <= max_count; ++tp)
        for (int fp = 0; fp <= max_count; ++fp)
            for (int fn = 0; fn <= max_count; ++fn)
                for (int tn = 0; tn <= max_count; ++tn) {
                    if (tp + fp + fn + tn == 0) continue;
                    matrices.push_back(ConfusionMatrix{tp, fp, fn, tn});
                }
    return matrices;
}

void enumerate_confusion_pairs(
    int max_count,
    const std::function<void(const ConfusionMatrix&, const ConfusionMatrix&)>& visit) {
    const std::vector<ConfusionMatrix> matrices = enumerate_confusion_matrices(max_count);
    for (const auto& first : matrices)
        for (const auto& second : matrices) visit(first, second);
}

} // namespace fairlens
