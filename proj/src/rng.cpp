#include "mvq/rng.hpp"

#include <algorithm>
#include <string>

namespace mvq {

std::vector<std::size_t> sample_weighted_without_replacement(std::span<const double> weights,
                                                             std::size_t k, SplitMix64& rng) {
    std::vector<double> cumulative(weights.size());
    double total = 0.0;
    std::size_t positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] < 0.0) throw std::invalid_argument("negative weight");
        if (weights[i] > 0.0) ++positive;
        total += weights[i];
        cumulative[i] = total;
    }
    if (k > positive)
        throw std::invalid_argument("cannot draw " + std::to_string(k) + " items from " +
                                    std::to_string(positive) + " with positive weight");

    std::vector<std::size_t> picked;
    picked.reserve(k);
    std::vector<bool> taken(weights.size(), false);
    while (picked.size() < k) {
        double u = rng.next_double() * total;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        std::size_t idx = static_cast<std::size_t>(it - cumulative.begin());
        // Zero-weight items have the same cumulative value as their
        // predecessor, so upper_bound never lands on them; the guards cover
        // rounding at the very top of the range and rejected repeats.
        if (idx >= weights.size() || weights[idx] == 0.0 || taken[idx]) continue;
        taken[idx] = true;
        picked.push_back(idx);
    }
    return picked;
}

}  // namespace mvq
