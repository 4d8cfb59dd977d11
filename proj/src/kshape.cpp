#include "clustering_internal.hpp"

#include <Eigen/Dense>

#include <limits>

namespace wearable {

namespace {

bool all_zero(const std::vector<double>& v) {
    for (double x : v) {
        if (x != 0.0) return false;
    }
    return true;
}

/// Centroid of `members` (indices into z) aligned against `reference`.
std::vector<double> extract_shape(const Matrix& z, const std::vector<std::size_t>& members,
                                  const std::vector<double>& reference) {
    const auto dim = static_cast<Eigen::Index>(reference.size());
    Eigen::MatrixXd aligned(static_cast<Eigen::Index>(members.size()), dim);
    const bool have_reference = !all_zero(reference) && !is_constant(reference);
    for (std::size_t r = 0; r < members.size(); ++r) {
        const auto& x = z[members[r]];
        const auto shifted = have_reference ? circular_shift(x, shape_match(reference, x).shift) : x;
        for (Eigen::Index d = 0; d < dim; ++d) aligned(static_cast<Eigen::Index>(r), d) = shifted[static_cast<std::size_t>(d)];
    }

    const Eigen::MatrixXd scatter = aligned.transpose() * aligned;
    const Eigen::MatrixXd centering =
        Eigen::MatrixXd::Identity(dim, dim) - Eigen::MatrixXd::Constant(dim, dim, 1.0 / static_cast<double>(dim));
    const Eigen::MatrixXd m = centering * scatter * centering;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    Eigen::VectorXd v = solver.eigenvectors().col(dim - 1);
    if ((aligned * v).sum() < 0.0) v = -v;

    std::vector<double> centroid(v.data(), v.data() + dim);
    if (is_constant(centroid)) return reference;
    return z_normalize(centroid);
}

struct KShapeRun {
    std::vector<int> labels;
    Matrix centroids;
    std::vector<double> trace;
    double objective = 0.0;
    int iterations = 0;
};

KShapeRun run_kshape(const Matrix& z, int k, int max_iter, std::mt19937_64& rng) {
    const std::size_t n = z.size();
    const auto seeds = detail::plus_plus_seeds(n, k, rng, [&](std::size_t i, std::size_t j) {
        const double d = shape_based_distance(z[i], z[j]);
        return d * d;
    });

    KShapeRun run;
    for (auto s : seeds) run.centroids.push_back(z[s]);
    run.labels.assign(n, -1);
    std::vector<double> cost(n);

    auto objective = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s += shape_based_distance(run.centroids[static_cast<std::size_t>(run.labels[i])], z[i]);
        }
        return s;
    };

    for (int iter = 0; iter < max_iter; ++iter) {
        std::vector<int> next(n);
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = shape_based_distance(run.centroids[static_cast<std::size_t>(c)], z[i]);
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

        for (int c = 0; c < k; ++c) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < n; ++i) {
                if (run.labels[i] == c) members.push_back(i);
            }
            if (members.empty()) continue;
            auto& centroid = run.centroids[static_cast<std::size_t>(c)];
            centroid = extract_shape(z, members, centroid);
        }
        run.trace.push_back(objective());
    }
    run.objective = run.trace.empty() ? objective() : run.trace.back();
    return run;
}

}  // namespace

ClusterModel kshape_fit(const Matrix& x, const KShapeOptions& options) {
    detail::require_k(x.size(), options.k);
    const std::size_t dim = check_rectangular(x);
    if (dim < 2) throw DimensionError("k-shape needs series of length >= 2");
    if (options.max_iter < 1 || options.n_init < 1) throw ParameterError("max_iter and n_init must be >= 1");

    Matrix z;
    z.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (is_constant(x[i])) throw PreprocessingError(i, "constant series cannot be z-normalized");
        z.push_back(z_normalize(x[i]));
    }

    KShapeRun best;
    double best_obj = std::numeric_limits<double>::infinity();
    for (int r = 0; r < options.n_init; ++r) {
        auto rng = detail::make_rng(options.seed, static_cast<std::uint64_t>(r));
        auto run = run_kshape(z, options.k, options.max_iter, rng);
        if (run.objective < best_obj) {
            best_obj = run.objective;
            best = std::move(run);
        }
    }

    ClusterModel model;
    model.algorithm = Algorithm::KShape;
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
                    {"sbd_sum", best_obj}};
    return model;
}

}  // namespace wearable
