#include "clustering_internal.hpp"

#include <algorithm>
#include <limits>

namespace wearable {

namespace {

struct KernelRun {
    std::vector<int> labels;
    std::vector<double> trace;
    int iterations = 0;
};

class FeatureSpace {
public:
    FeatureSpace(const std::vector<double>& gram, std::size_t n) : k_(gram), n_(n) {}

    double operator()(std::size_t i, std::size_t j) const { return k_[i * n_ + j]; }

    double dist2(std::size_t i, std::size_t j) const {
        return std::max(0.0, (*this)(i, i) + (*this)(j, j) - 2.0 * (*this)(i, j));
    }

    /// Squared feature-space distance of every point to every cluster mean.
    std::vector<double> distances_to_means(const std::vector<int>& labels, int k) const {
        const auto kk = static_cast<std::size_t>(k);
        std::vector<double> size(kk, 0.0), intra(kk, 0.0);
        std::vector<double> cross(n_ * kk, 0.0);  // sum_{j in c} K(i, j)
        for (std::size_t j = 0; j < n_; ++j) size[static_cast<std::size_t>(labels[j])] += 1.0;
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) cross[i * kk + static_cast<std::size_t>(labels[j])] += (*this)(i, j);
        }
        for (std::size_t i = 0; i < n_; ++i) intra[static_cast<std::size_t>(labels[i])] += cross[i * kk + static_cast<std::size_t>(labels[i])];

        std::vector<double> d(n_ * kk, std::numeric_limits<double>::infinity());
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t c = 0; c < kk; ++c) {
                if (size[c] == 0.0) continue;
                d[i * kk + c] = std::max(0.0, (*this)(i, i) - 2.0 * cross[i * kk + c] / size[c] + intra[c] / (size[c] * size[c]));
            }
        }
        return d;
    }

    double objective(const std::vector<int>& labels, int k) const {
        const auto d = distances_to_means(labels, k);
        double s = 0.0;
        for (std::size_t i = 0; i < n_; ++i) s += d[i * static_cast<std::size_t>(k) + static_cast<std::size_t>(labels[i])];
        return s;
    }

    std::size_t size() const { return n_; }

private:
    const std::vector<double>& k_;
    std::size_t n_;
};

KernelRun run_kernel_kmeans(const FeatureSpace& fs, int k, int max_iter, std::mt19937_64& rng) {
    const std::size_t n = fs.size();
    const auto kk = static_cast<std::size_t>(k);
    const auto seeds = detail::plus_plus_seeds(n, k, rng, [&](std::size_t i, std::size_t j) { return fs.dist2(i, j); });

    KernelRun run;
    run.labels.assign(n, 0);
    std::vector<double> cost(n);
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < kk; ++c) {
            const double d = fs.dist2(i, seeds[c]);
            if (d < best) {
                best = d;
                run.labels[i] = static_cast<int>(c);
            }
        }
        cost[i] = best;
    }
    detail::repair_empty_clusters(run.labels, cost, k);
    run.trace.push_back(fs.objective(run.labels, k));

    for (int iter = 0; iter < max_iter; ++iter) {
        const auto d = fs.distances_to_means(run.labels, k);
        std::vector<int> next(n);
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < kk; ++c) {
                if (d[i * kk + c] < best) {
                    best = d[i * kk + c];
                    next[i] = static_cast<int>(c);
                }
            }
            cost[i] = best;
        }
        detail::repair_empty_clusters(next, cost, k);
        if (next == run.labels) break;
        run.labels = std::move(next);
        ++run.iterations;
        run.trace.push_back(fs.objective(run.labels, k));
    }
    return run;
}

}  // namespace

double median_heuristic_gamma(const Matrix& x) {
    check_rectangular(x);
    std::vector<double> d2;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) d2.push_back(squared_euclidean(x[i], x[j]));
    }
    if (d2.empty()) return 1.0;
    auto mid = d2.begin() + static_cast<std::ptrdiff_t>(d2.size() / 2);
    std::nth_element(d2.begin(), mid, d2.end());
    return *mid > 0.0 ? 1.0 / *mid : 1.0;
}

ClusterModel kernel_kmeans_fit(const Matrix& x, const KernelKMeansOptions& options) {
    detail::require_k(x.size(), options.k);
    check_rectangular(x);
    if (options.kernel.kind == KernelKind::Rbf && !(options.kernel.gamma > 0.0)) {
        throw ParameterError("RBF kernel requires gamma > 0");
    }
    if (options.max_iter < 1 || options.n_init < 1) throw ParameterError("max_iter and n_init must be >= 1");

    const auto gram = gram_matrix(x, options.kernel);
    const FeatureSpace fs(gram, x.size());

    KernelRun best;
    double best_obj = std::numeric_limits<double>::infinity();
    for (int r = 0; r < options.n_init; ++r) {
        auto rng = detail::make_rng(options.seed, static_cast<std::uint64_t>(r));
        auto run = run_kernel_kmeans(fs, options.k, options.max_iter, rng);
        if (run.trace.back() < best_obj) {
            best_obj = run.trace.back();
            best = std::move(run);
        }
    }

    ClusterModel model;
    model.algorithm = Algorithm::KernelKMeans;
    model.seed = options.seed;
    model.labels = std::move(best.labels);
    model.n_clusters = static_cast<int>(detail::compact_labels(model.labels).size());
    model.objective_trace = std::move(best.trace);
    model.params = {{"k", options.k},
                    {"gamma", options.kernel.kind == KernelKind::Rbf ? options.kernel.gamma : 0.0},
                    {"linear_kernel", options.kernel.kind == KernelKind::Linear ? 1.0 : 0.0},
                    {"max_iter", options.max_iter},
                    {"n_init", options.n_init},
                    {"iterations", best.iterations},
                    {"objective", best_obj}};
    return model;
}

}  // namespace wearable
