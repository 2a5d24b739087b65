#include "fairlens/dif.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fairlens/error.hpp"

namespace fairlens {

namespace {

/// Equal-count bin edges on the pooled conditioning values; ties stay in one
/// bin because lookup uses upper_bound on the right-open edges.
std::vector<double> stratum_edges(std::vector<double> values, int bin_count) {
    std::sort(values.begin(), values.end());
    std::vector<double> edges;
    for (int k = 1; k < bin_count; ++k) {
        edges.push_back(values[static_cast<std::size_t>(k) * values.size() /
                               static_cast<std::size_t>(bin_count)]);
    }
    return edges;
}

std::vector<int> assign_strata(const std::vector<double>& values, const BinSpec& spec) {
    std::vector<int> strata(values.size(), 0);
    if (spec.mode == BinSpec::Mode::EqualCount) {
        const std::vector<double> edges = stratum_edges(values, spec.bin_count);
        for (std::size_t i = 0; i < values.size(); ++i) {
            strata[i] = static_cast<int>(
                std::upper_bound(edges.begin(), edges.end(), values[i]) - edges.begin());
        }
    } else {
        const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
        const double lo = *lo_it;
        const double hi = *hi_it;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (hi > lo) {
                const double scaled = (values[i] - lo) / (hi - lo) * spec.bin_count;
                strata[i] = std::clamp(static_cast<int>(scaled), 0, spec.bin_count - 1);
            }
        }
    }
    return strata;
}

/// Largest pairwise total variation distance between the groups' value
/// distributions within one stratum. rows: record index per group.
double max_pairwise_tv(const Dataset& dataset,
                       const std::map<std::string, std::vector<std::size_t>>& rows,
                       const std::vector<double>& values) {
    std::vector<double> support;
    for (const auto& [group, indices] : rows) {
        for (const std::size_t i : indices) support.push_back(values[i]);
    }
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());

    std::vector<std::vector<double>> masses;
    for (const auto& [group, indices] : rows) {
        std::vector<double> mass(support.size(), 0.0);
        for (const std::size_t i : indices) {
            const auto pos = std::lower_bound(support.begin(), support.end(), values[i]) -
                             support.begin();
            mass[static_cast<std::size_t>(pos)] += 1.0 / indices.size();
        }
        masses.push_back(std::move(mass));
    }

    double worst = 0.0;
    for (std::size_t g = 0; g < masses.size(); ++g) {
        for (std::size_t h = g + 1; h < masses.size(); ++h) {
            double tv = 0.0;
            for (std::size_t v = 0; v < support.size(); ++v) {
                tv += std::abs(masses[g][v] - masses[h][v]);
            }
            worst = std::max(worst, 0.5 * tv);
        }
    }
    return worst;
}

struct StratifiedGaps {
    std::vector<double> gaps;
    std::vector<std::size_t> sizes;
    std::size_t excluded = 0;
    double weighted = 0.0;
    bool undiagnosable = false;
};

/// Shared stratified comparison: partition by `strata`, keep strata where
/// every group clears min_per_cell, compare with `statistic`.
template <typename Statistic>
StratifiedGaps stratified_gaps(const Dataset& dataset, const std::vector<int>& strata,
                               int min_per_cell, Statistic statistic) {
    const std::vector<std::string> groups = dataset.groups();
    std::map<int, std::map<std::string, std::vector<std::size_t>>> cells;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        cells[strata[i]][dataset.records[i].group].push_back(i);
    }

    StratifiedGaps out;
    double weight_sum = 0.0;
    double weighted_sum = 0.0;
    for (const auto& [stratum, rows] : cells) {
        bool usable = rows.size() == groups.size();
        for (const auto& [group, indices] : rows) {
            if (indices.size() < static_cast<std::size_t>(min_per_cell)) usable = false;
        }
        if (!usable) {
            out.excluded += 1;
            continue;
        }
        std::size_t stratum_size = 0;
        for (const auto& [group, indices] : rows) stratum_size += indices.size();
        const double gap = statistic(rows);
        out.gaps.push_back(gap);
        out.sizes.push_back(stratum_size);
        weight_sum += static_cast<double>(stratum_size);
        weighted_sum += static_cast<double>(stratum_size) * gap;
    }
    if (out.gaps.empty()) {
        out.undiagnosable = true;
    } else {
        out.weighted = weighted_sum / weight_sum;
    }
    return out;
}

} // namespace

DifReport dif_analyze(const Dataset& dataset, AbilityMeasure ability, BinSpec strata,
                      double flag_threshold) {
    if (!dataset.has_items()) throw InvalidArgument("dif: dataset has no item columns");
    if (strata.bin_count < 1) throw InvalidArgument("dif: bin_count must be >= 1");
    if (flag_threshold < 0.0) throw InvalidArgument("dif: negative flag threshold");
    if (ability == AbilityMeasure::RestScore && dataset.item_ids.size() < 2) {
        throw InvalidArgument("dif: rest-score matching needs at least 2 items");
    }

    DifReport report;
    report.ability = ability;
    report.flag_threshold = flag_threshold;

    std::vector<double> target_ability;
    if (ability == AbilityMeasure::Target) {
        for (const auto& record : dataset.records) target_ability.push_back(record.target);
    }

    const std::size_t item_count = dataset.item_ids.size();
    for (std::size_t item = 0; item < item_count; ++item) {
        std::vector<double> abilities;
        if (ability == AbilityMeasure::RestScore) {
            abilities.reserve(dataset.size());
            for (const auto& record : dataset.records) {
                double sum = 0.0;
                for (std::size_t j = 0; j < item_count; ++j) {
                    if (j != item) sum += record.items[j];
                }
                abilities.push_back(sum / static_cast<double>(item_count - 1));
            }
        }
        const std::vector<double>& conditioning =
            ability == AbilityMeasure::RestScore ? abilities : target_ability;
        const std::vector<int> assignment = assign_strata(conditioning, strata);

        const auto rate_gap =
            [&](const std::map<std::string, std::vector<std::size_t>>& rows) {
                std::vector<double> rates;
                for (const auto& [group, indices] : rows) {
                    double correct = 0.0;
                    for (const std::size_t i : indices) {
                        correct += dataset.records[i].items[item] ? 1.0 : 0.0;
                    }
                    rates.push_back(correct / static_cast<double>(indices.size()));
                }
                double worst = 0.0;
                for (std::size_t g = 0; g < rates.size(); ++g) {
                    for (std::size_t h = g + 1; h < rates.size(); ++h) {
                        worst = std::max(worst, std::abs(rates[g] - rates[h]));
                    }
                }
                return worst;
            };
        const StratifiedGaps gaps =
            stratified_gaps(dataset, assignment, strata.min_per_cell, rate_gap);

        ItemReport item_report;
        item_report.item_id = dataset.item_ids[item];
        item_report.per_stratum_gap = gaps.gaps;
        item_report.stratum_sizes = gaps.sizes;
        item_report.excluded_strata = gaps.excluded;
        item_report.weighted_gap = gaps.weighted;
        item_report.undiagnosable = gaps.undiagnosable;
        item_report.flagged = !gaps.undiagnosable && gaps.weighted >= flag_threshold;
        report.items.push_back(std::move(item_report));
    }
    return report;
}

FeatureReport feature_dif(const Dataset& dataset, const std::string& feature,
                          BinSpec score_bins, double flag_threshold) {
    if (score_bins.bin_count < 1) throw InvalidArgument("dif: bin_count must be >= 1");
    if (flag_threshold < 0.0) throw InvalidArgument("dif: negative flag threshold");
    const std::vector<double> values = dataset.column(feature);

    std::vector<double> scores;
    for (const auto& record : dataset.records) scores.push_back(record.score);
    const std::vector<int> assignment = assign_strata(scores, score_bins);

    const StratifiedGaps gaps = stratified_gaps(
        dataset, assignment, score_bins.min_per_cell,
        [&](const std::map<std::string, std::vector<std::size_t>>& rows) {
            return max_pairwise_tv(dataset, rows, values);
        });

    FeatureReport report;
    report.feature = feature;
    report.per_stratum_tv = gaps.gaps;
    report.stratum_sizes = gaps.sizes;
    report.excluded_strata = gaps.excluded;
    report.weighted_tv = gaps.weighted;
    report.undiagnosable = gaps.undiagnosable;
    report.flagged = !gaps.undiagnosable && gaps.weighted >= flag_threshold;
    return report;
}

} // namespace fairlens
