#ifndef FAIRLENS_SYNTH_HPP
#define FAIRLENS_SYNTH_HPP

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fairlens/dataset.hpp"
#include "fairlens/types.hpp"

namespace fairlens {

/// Recorded in sidecars so a reader can reproduce a file from its seed.
inline constexpr const char* kGeneratorName = "mt19937_64+marsaglia-polar";

/// One group's marginal parameters for the two-line generators.
struct GaussianGroupSpec {
    std::string label;
    double weight = 0.5;   // fraction of records, in (0,1); weights sum to 1
    double mean_r = 0.0;
    double mean_y = 0.0;
    double sd_r = 1.0;
    double sd_y = 1.0;
    double rho_ry = 0.0;   // within-group score/target correlation, |rho| < 1
};

/// n records split across the groups by largest-remainder rounding, each
/// group's (R, Y) bivariate normal with its configured moments. Reproducible:
/// the same seed yields the identical dataset on every platform.
Dataset generate_two_group(const std::vector<GaussianGroupSpec>& specs, std::size_t n,
                           std::uint64_t seed);

/// Target pairwise correlations for the latent-Gaussian generator.
struct TargetCorrelationSpec {
    double rho_ay = 0.0;
    double rho_ry = 0.0;
    std::size_t n = 0;
    std::uint64_t seed = 0;
};

/// Binary A by thresholding a latent standard normal at 0 (groups "a"/"b",
/// where "b" is the A=1 group); rho_AR is set to the fair value the chosen
/// criterion (1..4) implies for (rho_ay, rho_ry). Latent correlations are
/// scaled up by sqrt(pi/2) so the measured point-biserial correlations land
/// on the requested values despite dichotomization attenuation sqrt(2/pi).
/// Throws Infeasible when the implied latent matrix is not PSD; the message
/// names the violated bound.
Dataset generate_correlated(const TargetCorrelationSpec& spec, int criterion);

/// What rho_AR the generator aims for; exposed so tests can assert recovery.
double correlated_target_rho_ar(double rho_ay, double rho_ry, int criterion);

/// All matrices with every cell in 0..max_count and total >= 1,
/// lexicographic in (tp, fp, fn, tn).
std::vector<ConfusionMatrix> enumerate_confusion_matrices(int max_count);

/// All ordered pairs of such matrices, streamed to avoid materializing the
/// square; same lexicographic order, outer then inner.
void enumerate_confusion_pairs(
    int max_count,
    const std::function<void(const ConfusionMatrix&, const ConfusionMatrix&)>& visit);

/// Natural log via argument reduction and a fixed-length atanh series: only
/// IEEE basic operations in a fixed order, so results match across libms.
double deterministic_log(double x);

/// Standard normal deviates from mt19937_64 via the polar (trig-free)
/// rejection method, using deterministic_log. Pairs are cached, so draws
/// cost one rejection loop per two values.
class NormalSource {
public:
    explicit NormalSource(std::uint64_t seed) : rng_(seed) {}
    double next();

private:
    std::mt19937_64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace fairlens

#endif
