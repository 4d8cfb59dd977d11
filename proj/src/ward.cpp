#include "clustering_internal.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace wearable {

std::vector<WardMerge> ward_linkage(const Matrix& x) {
    check_rectangular(x);
    const std::size_t n = x.size();

    // squared Euclidean between active clusters, updated by Lance-Williams
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) d[i * n + j] = d[j * n + i] = squared_euclidean(x[i], x[j]);
    }
    std::vector<bool> active(n, true);
    std::vector<std::size_t> size(n, 1), id(n);
    std::iota(id.begin(), id.end(), std::size_t{0});

    std::vector<WardMerge> merges;
    merges.reserve(n > 0 ? n - 1 : 0);
    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t bi = n, bj = n;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (active[j] && d[i * n + j] < best) {
                    best = d[i * n + j];
                    bi = i;
                    bj = j;
                }
            }
        }
        const double ni = static_cast<double>(size[bi]), nj = static_cast<double>(size[bj]);
        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k] || k == bi || k == bj) continue;
            const double nk = static_cast<double>(size[k]);
            const double v = ((ni + nk) * d[bi * n + k] + (nj + nk) * d[bj * n + k] - nk * best) / (ni + nj + nk);
            d[bi * n + k] = d[k * n + bi] = v;
        }
        merges.push_back({id[bi], id[bj], std::sqrt(std::max(best, 0.0)), size[bi] + size[bj]});
        size[bi] += size[bj];
        id[bi] = n + step;
        active[bj] = false;
    }
    return merges;
}

ClusterModel ward_fit(const Matrix& x, int k) {
    detail::require_k(x.size(), k);
    const std::size_t n = x.size();
    const auto merges = ward_linkage(x);

    // union-find over dendrogram node ids
    std::vector<std::size_t> parent(2 * n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (std::size_t m = 0; m < n - static_cast<std::size_t>(k); ++m) {
        parent[find(merges[m].left)] = n + m;
        parent[find(merges[m].right)] = n + m;
    }

    ClusterModel model;
    model.algorithm = Algorithm::Ward;
    model.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) model.labels[i] = static_cast<int>(find(i));
    model.n_clusters = static_cast<int>(detail::compact_labels(model.labels).size());
    model.params = {{"k", k}};
    for (std::size_t m = 0; m < n - static_cast<std::size_t>(k); ++m) model.objective_trace.push_back(merges[m].height);
    return model;
}

}  // namespace wearable
