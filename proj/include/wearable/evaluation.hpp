#pragma once

#include "wearable/clustering.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace wearable {

/// Mean silhouette over non-noise points. Members of singleton clusters
/// score 0. Throws UndefinedValueError with fewer than two clusters.
double silhouette(const DistanceMatrix& distances, std::span<const int> labels);
double silhouette(const Matrix& x, std::span<const int> labels, Metric metric = Metric::Euclidean);

/// Sum of squared distances from each non-noise series to its cluster
/// prototype (cluster mean when the model has none). k-shape models use the
/// squared shape-based distance to their z-normalized centroids.
double distortion(const Matrix& x, const ClusterModel& model);

struct Elbow {
    int k = 0;
    bool low_confidence = false;
    double second_difference = 0.0;
};

/// argmax over interior k of d[k-1] - 2 d[k] + d[k+1], smallest k on ties.
/// Needs at least three consecutive k values (InsufficientDataError).
Elbow elbow_detect(const std::map<int, double>& curve);

/// Noise labels count as singleton clusters. Throws DimensionError on length mismatch.
double purity(std::span<const int> labels, std::span<const int> truth);
double rand_index(std::span<const int> labels, std::span<const int> truth);

/// (p_o - p_e) / (1 - p_e). Returns 1 when both annotators use one identical
/// label; throws UndefinedValueError when each uses a single but different label.
double cohens_kappa(std::span<const std::string> first, std::span<const std::string> second);

/// Integer codes in order of first appearance.
std::vector<int> encode_categories(std::span<const std::string> values);

struct ExtrinsicScores {
    double purity = 0.0;
    double rand_index = 0.0;
    std::size_t n = 0;
    int n_clusters = 0;
    bool purity_degenerate = false;  // every point in its own cluster
};

ExtrinsicScores extrinsic_scores(std::span<const int> labels, std::span<const int> truth);

struct SweepPoint {
    int k = 0;
    std::optional<double> silhouette;
    double distortion = 0.0;
};

struct SweepOptions {
    Algorithm algorithm = Algorithm::KMeans;  // KMeans, KShape, KernelKMeans or Ward
    int k_min = 2;
    int k_max = 10;
    std::uint64_t seed = 0;
    double gamma = 0.0;  // kernel k-means; <= 0 selects the median heuristic
    int n_init = 10;
};

struct EvalReport {
    Algorithm algorithm = Algorithm::KMeans;
    std::vector<SweepPoint> sweep;
    std::optional<int> chosen_k;  // silhouette maximiser
    std::optional<Elbow> elbow;   // needs >= 3 sweep points
    std::optional<ExtrinsicScores> extrinsic;
    std::optional<double> annotator_kappa;
};

/// Fits every k in [k_min, k_max] (concurrently) and scores each fit.
EvalReport select_k(const Matrix& x, const SweepOptions& options);

nlohmann::json to_json(const EvalReport& report);
nlohmann::json to_json(const ExtrinsicScores& scores);

/// `k,silhouette,distortion` (empty silhouette when undefined).
void write_sweep_csv(std::ostream& out, const EvalReport& report);

}  // namespace wearable
