#include "clustering_internal.hpp"

#include <limits>

namespace wearable {

namespace {

struct LloydRun {
    std::vector<int> labels;
    Matrix centroids;
    std::vector<double> trace;
    int iterations = 0;
};

double wcss(const Matrix& x, const std::vector<int>& labels, const Matrix& centroids) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += squared_euclidean(x[i], centroids[static_cast<std::size_t>(labels[i])]);
    }
    return s;
}

LloydRun lloyd(const Matrix& x, int k, int max_iter, std::mt19937_64& rng) {
    const std::size_t n = x.size(), dim = x.front().size();
    const auto seeds = detail::plus_plus_seeds(n, k, rng, [&](std::size_t i, std::size_t j) {
        return squared_euclidean(x[i], x[j]);
    });

    LloydRun run;
    for (auto s : seeds) run.centroids.push_back(x[s]);
    run.labels.assign(n, -1);
    std::vector<double> cost(n);

    for (int iter = 0; iter < max_iter; ++iter) {
        std::vector<int> next(n);
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = squared_euclidean(x[i], run.centroids[static_cast<std::size_t>(c)]);
                if (d < best) {
                    best = d;
                    next[i] = c;
                }
            }
            cost[i] = best;
        }
        detail::repair_empty_clusters(next, cost, k);
        if (next == run.labels) break;
        run.labels = std::move(next);
        ++run.iterations;

        Matrix sums(static_cast<std::size_t>(k), std::vector<double>(dim, 0.0));
        std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(run.labels[i]);
            ++counts[c];
            for (std::size_t d = 0; d < dim; ++d) sums[c][d] += x[i][d];
        }
        for (std::size_t c = 0; c < sums.size(); ++c) {
            if (counts[c] == 0) continue;
            for (std::size_t d = 0; d < dim; ++d) run.centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
        }
        run.trace.push_back(wcss(x, run.labels, run.centroids));
    }
    return run;
}

}  // namespace

ClusterModel kmeans_fit(const Matrix& x, const KMeansOptions& options) {
    detail::require_k(x.size(), options.k);
    check_rectangular(x);
    if (options.max_iter < 1 || options.n_init < 1) throw ParameterError("max_iter and n_init must be >= 1");

    LloydRun best;
    double best_obj = std::numeric_limits<double>::infinity();
    for (int r = 0; r < options.n_init; ++r) {
        auto rng = detail::make_rng(options.seed, static_cast<std::uint64_t>(r));
        auto run = lloyd(x, options.k, options.max_iter, rng);
        const double obj = run.trace.empty() ? wcss(x, run.labels, run.centroids) : run.trace.back();
        if (obj < best_obj) {
            best_obj = obj;
            best = std::move(run);
        }
    }

    ClusterModel model;
    model.algorithm = Algorithm::KMeans;
    model.seed = options.seed;
    model.labels = std::move(best.labels);
    const auto old_of_new = detail::compact_labels(model.labels);
    model.prototypes = detail::reorder_rows(best.centroids, old_of_new);
    model.n_clusters = static_cast<int>(old_of_new.size());
    model.objective_trace = std::move(best.trace);
    model.params = {{"k", options.k},
                    {"max_iter", options.max_iter},
                    {"n_init", options.n_init},
                    {"iterations", best.iterations},
                    {"wcss", best_obj}};
    return model;
}

}  // namespace wearable
