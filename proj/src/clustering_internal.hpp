#pragma once

#include "wearable/clustering.hpp"
#include "wearable/error.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace wearable::detail {

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

inline void require_k(std::size_t n, int k) {
    if (n == 0) throw ParameterError("empty corpus");
    if (k < 1 || static_cast<std::size_t>(k) > n) {
        throw ParameterError("k = " + std::to_string(k) + " must lie in [1, " + std::to_string(n) + "]");
    }
}

/// k-means++ seeding: first index uniform, then proportional to the squared
/// distance to the nearest chosen seed. `dist2(i, j)` is the squared distance
/// between points i and j.
template <typename Dist2>
std::vector<std::size_t> plus_plus_seeds(std::size_t n, int k, std::mt19937_64& rng, Dist2&& dist2) {
    std::vector<std::size_t> seeds;
    std::vector<bool> chosen(n, false);
    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    seeds.push_back(first(rng));
    chosen[seeds.back()] = true;

    std::vector<double> nearest(n);
    for (std::size_t i = 0; i < n; ++i) nearest[i] = dist2(i, seeds.back());

    while (seeds.size() < static_cast<std::size_t>(k)) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!chosen[i]) total += nearest[i];
        }
        std::size_t pick = n;
        if (total > 0.0) {
            std::uniform_real_distribution<double> u(0.0, total);
            const double target = u(rng);
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (chosen[i] || nearest[i] <= 0.0) continue;
                acc += nearest[i];
                pick = i;
                if (acc > target) break;
            }
        }
        if (pick == n) {
            // every remaining point coincides with a seed
            for (std::size_t i = 0; i < n; ++i) {
                if (!chosen[i]) {
                    pick = i;
                    break;
                }
            }
        }
        seeds.push_back(pick);
        chosen[pick] = true;
        for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], dist2(i, pick));
    }
    return seeds;
}

/// Moves the point with the largest cost (among clusters with > 1 member)
/// into each empty cluster. `cost[i]` is point i's distance to its own
/// cluster and is zeroed for moved points.
inline void repair_empty_clusters(std::vector<int>& labels, std::vector<double>& cost, int k) {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
    for (int c = 0; c < k; ++c) {
        if (sizes[static_cast<std::size_t>(c)] != 0) continue;
        std::size_t far = labels.size();
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (sizes[static_cast<std::size_t>(labels[i])] < 2) continue;
            if (far == labels.size() || cost[i] > cost[far]) far = i;
        }
        if (far == labels.size()) return;
        --sizes[static_cast<std::size_t>(labels[far])];
        labels[far] = c;
        cost[far] = 0.0;
        ++sizes[static_cast<std::size_t>(c)];
    }
}

/// Reorders prototype rows to follow compact_labels' mapping.
inline Matrix reorder_rows(const Matrix& rows, const std::vector<int>& old_of_new) {
    Matrix out;
    out.reserve(old_of_new.size());
    for (int old : old_of_new) out.push_back(rows[static_cast<std::size_t>(old)]);
    return out;
}

}  // namespace wearable::detail
