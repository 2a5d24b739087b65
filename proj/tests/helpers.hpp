#ifndef FAIRLENS_TEST_HELPERS_HPP
#define FAIRLENS_TEST_HELPERS_HPP

#include <random>
#include <string>
#include <vector>

#include "fairlens/dataset.hpp"

namespace fairlens::testing {

/// Builds a two-group dataset from parallel vectors, pairing records
/// (group, score, target) in order.
inline Dataset make_dataset(const std::vector<std::string>& groups,
                            const std::vector<double>& scores,
                            const std::vector<double>& targets) {
    Dataset dataset;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        Record record;
        record.group = groups[i];
        record.score = scores[i];
        record.target = targets[i];
        dataset.records.push_back(record);
    }
    return dataset;
}

/// Random two-group dataset for property tests. Scores and targets are
/// independent uniforms so nothing degenerate is generated.
inline Dataset random_dataset(std::mt19937_64& rng, std::size_t n_per_group,
                              bool with_decision = false, int n_items = 0) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    Dataset dataset;
    for (int q = 0; q < n_items; ++q)
        dataset.item_ids.push_back("item_q" + std::to_string(q + 1));
    for (const char* group : {"a", "b"}) {
        for (std::size_t i = 0; i < n_per_group; ++i) {
            Record record;
            record.group = group;
            record.score = unit(rng);
            record.target = unit(rng);
            if (with_decision) record.decision = coin(rng) ? 1 : 0;
            for (int q = 0; q < n_items; ++q)
                record.items.push_back(coin(rng) ? 1 : 0);
            dataset.records.push_back(record);
        }
    }
    return dataset;
}

} // namespace fairlens::testing

#endif
