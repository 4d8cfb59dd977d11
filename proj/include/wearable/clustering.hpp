#pragma once

#include "wearable/distance.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wearable {

enum class Algorithm { KMeans, KShape, KernelKMeans, Dbscan, Optics, Ward, Som };

/// "kmeans", "kshape", "kernel-kmeans", "dbscan", "optics", "ward", "som".
std::string_view to_string(Algorithm algorithm);
Algorithm algorithm_from_string(std::string_view name);

inline constexpr int kNoise = -1;

/// A fitted clustering of a corpus.
///
/// Labels are compacted to 0..n_clusters-1 with label 0 the largest cluster
/// (ties: the cluster whose first member comes first). Density methods may
/// emit kNoise. `prototypes` is set for k-means, k-shape and SOM only, with
/// one row per label. `objective_trace` records the fitting objective per
/// iteration (k-means WCSS, k-shape SBD sum, kernel objective, SOM
/// quantization error before/after training).
struct ClusterModel {
    Algorithm algorithm = Algorithm::KMeans;
    std::map<std::string, double> params;
    std::vector<int> labels;
    std::optional<Matrix> prototypes;
    int n_clusters = 0;
    std::uint64_t seed = 0;
    std::vector<double> objective_trace;

    /// Throws ParameterError if an invariant is broken.
    void validate(std::size_t corpus_size) const;
};

struct KMeansOptions {
    int k = 2;
    std::uint64_t seed = 0;
    int max_iter = 300;
    int n_init = 10;  // seeded restarts; the lowest WCSS wins
};

/// Lloyd's algorithm from k-means++ seeding. An emptied cluster is reseeded
/// with the point farthest from its own centroid.
ClusterModel kmeans_fit(const Matrix& x, const KMeansOptions& options);

struct KShapeOptions {
    int k = 2;
    std::uint64_t seed = 0;
    int max_iter = 100;
    int n_init = 10;
};

/// k-shape: shape-based-distance assignment alternated with shape extraction
/// (dominant eigenvector of the centred, aligned member scatter). Series are
/// z-normalized first; prototypes are z-normalized centroids. Throws
/// PreprocessingError naming the first constant series.
ClusterModel kshape_fit(const Matrix& x, const KShapeOptions& options);

struct KernelKMeansOptions {
    int k = 2;
    Kernel kernel{};
    std::uint64_t seed = 0;
    int max_iter = 300;
    int n_init = 10;
};

/// Batch kernel k-means on the Gram matrix.
ClusterModel kernel_kmeans_fit(const Matrix& x, const KernelKMeansOptions& options);

/// 1 / median pairwise squared Euclidean distance.
double median_heuristic_gamma(const Matrix& x);

struct DbscanOptions {
    double eps = 0.0;
    int min_pts = 5;
};

/// Core points within eps of each other form clusters; a border point joins
/// the cluster of its nearest core point, so the result does not depend on
/// input order. Neighbourhoods include the point itself.
ClusterModel dbscan_fit(const Matrix& x, const DbscanOptions& options);

/// The `quantile` of distances to each point's `neighbors`-th nearest other point.
double default_density_eps(const Matrix& x, int neighbors = 5, double quantile = 0.95);

struct OpticsOptions {
    int min_pts = 5;
    double eps = 0.0;  // extraction cut
};

struct OpticsResult {
    ClusterModel model;
    std::vector<std::size_t> ordering;
    std::vector<double> reachability;   // indexed by position in `ordering`; +inf if undefined
    std::vector<double> core_distance;  // indexed by point
};

/// OPTICS ordering with an unbounded generating distance, clusters extracted
/// by a horizontal cut at eps.
OpticsResult optics_fit(const Matrix& x, const OpticsOptions& options);

struct WardMerge {
    std::size_t left = 0;   // cluster ids: < n are points, n + i is the i-th merge
    std::size_t right = 0;
    double height = 0.0;
    std::size_t size = 0;
};

/// Full Ward dendrogram (n - 1 merges) via the Lance-Williams update.
std::vector<WardMerge> ward_linkage(const Matrix& x);
ClusterModel ward_fit(const Matrix& x, int k);

/// Side of the square SOM grid: ceil(sqrt(ceil(sqrt(num_users)))).
int som_grid_side(int num_users);
/// Number of SOM units (the side squared).
int som_grid_size(int num_users);

struct SomGrid {
    int rows = 1;
    int cols = 1;
    int iterations = 10000;
    double initial_learning_rate = 0.5;
    double initial_radius = 0.0;  // <= 0 selects max(rows, cols) / 2
    std::optional<Matrix> initial_codebook;  // default: distinct random corpus samples

    static SomGrid square_for_users(int num_users);
};

struct SomFit {
    ClusterModel model;
    Matrix codebook;                 // rows * cols units, row-major grid order
    std::vector<int> unit_of_label;  // grid unit for each compacted label
};

/// Online SOM: one random sample per iteration, learning rate a0*exp(-t/T),
/// Gaussian neighbourhood radius r0*exp(-t*ln(r0)/T). Units that win no
/// series after training are dropped from the labelling.
SomFit som_train(const Matrix& x, const SomGrid& grid, std::uint64_t seed);
ClusterModel som_fit(const Matrix& x, const SomGrid& grid, std::uint64_t seed);

struct ClusterSummary {
    int label = 0;
    std::size_t members = 0;
    std::vector<double> mean;
};

/// Element-wise mean curve and member count for each non-noise label.
std::vector<ClusterSummary> cluster_summary(const ClusterModel& model, const Matrix& x);

namespace detail {

/// Relabels so that 0 is the largest cluster, dropping unused ids. Noise
/// stays kNoise. Returns the old id of each new label.
std::vector<int> compact_labels(std::vector<int>& labels);

}  // namespace detail

}  // namespace wearable
