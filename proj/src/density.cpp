#include "clustering_internal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace wearable {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_density_params(double eps, int min_pts) {
    if (!(eps > 0.0)) throw ParameterError("eps must be > 0");
    if (min_pts < 1) throw ParameterError("min_pts must be >= 1");
}

/// Non-core points within eps of a core point take the label of the nearest
/// such core (lowest index on ties); the rest are noise.
void assign_borders(const DistanceMatrix& d, const std::vector<bool>& core, double eps, std::vector<int>& labels) {
    const std::size_t n = d.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (core[i]) continue;
        double best = kInf;
        int label = kNoise;
        for (std::size_t j = 0; j < n; ++j) {
            if (!core[j] || d(i, j) > eps) continue;
            if (d(i, j) < best) {
                best = d(i, j);
                label = labels[j];
            }
        }
        labels[i] = label;
    }
}

/// Distance from each point to its min_pts-th nearest point, the point itself included.
std::vector<double> core_distances(const DistanceMatrix& d, int min_pts) {
    const std::size_t n = d.size();
    std::vector<double> out(n, kInf);
    if (static_cast<std::size_t>(min_pts) > n) return out;
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) row[j] = d(i, j);
        auto kth = row.begin() + (min_pts - 1);
        std::nth_element(row.begin(), kth, row.end());
        out[i] = *kth;
    }
    return out;
}

}  // namespace

ClusterModel dbscan_fit(const Matrix& x, const DbscanOptions& options) {
    require_density_params(options.eps, options.min_pts);
    check_rectangular(x);
    const std::size_t n = x.size();
    const DistanceMatrix d(x, Metric::Euclidean);

    std::vector<bool> core(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        int count = 0;
        for (std::size_t j = 0; j < n; ++j) count += d(i, j) <= options.eps ? 1 : 0;
        core[i] = count >= options.min_pts;
    }

    std::vector<int> labels(n, kNoise);
    int next = 0;
    for (std::size_t start = 0; start < n; ++start) {
        if (!core[start] || labels[start] != kNoise) continue;
        std::vector<std::size_t> stack{start};
        labels[start] = next;
        while (!stack.empty()) {
            const auto p = stack.back();
            stack.pop_back();
            for (std::size_t q = 0; q < n; ++q) {
                if (core[q] && labels[q] == kNoise && d(p, q) <= options.eps) {
                    labels[q] = next;
                    stack.push_back(q);
                }
            }
        }
        ++next;
    }
    assign_borders(d, core, options.eps, labels);

    ClusterModel model;
    model.algorithm = Algorithm::Dbscan;
    model.labels = std::move(labels);
    model.n_clusters = static_cast<int>(detail::compact_labels(model.labels).size());
    const auto noise = std::count(model.labels.begin(), model.labels.end(), kNoise);
    model.params = {{"eps", options.eps}, {"min_pts", options.min_pts}, {"noise", static_cast<double>(noise)}};
    return model;
}

double default_density_eps(const Matrix& x, int neighbors, double quantile) {
    check_rectangular(x);
    if (neighbors < 1) throw ParameterError("neighbors must be >= 1");
    if (quantile < 0.0 || quantile > 1.0) throw ParameterError("quantile must lie in [0, 1]");
    const std::size_t n = x.size();
    if (n < 2) return 1.0;
    const auto kth = std::min<std::size_t>(static_cast<std::size_t>(neighbors), n - 1);

    std::vector<double> knn(n);
    std::vector<double> row;
    for (std::size_t i = 0; i < n; ++i) {
        row.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) row.push_back(euclidean(x[i], x[j]));
        }
        std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(kth - 1), row.end());
        knn[i] = row[kth - 1];
    }
    std::sort(knn.begin(), knn.end());
    const double pos = quantile * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, n - 1);
    const double q = knn[lo] + (knn[hi] - knn[lo]) * (pos - static_cast<double>(lo));
    return std::max(q, 1e-12);
}

OpticsResult optics_fit(const Matrix& x, const OpticsOptions& options) {
    require_density_params(options.eps, options.min_pts);
    check_rectangular(x);
    const std::size_t n = x.size();
    const DistanceMatrix d(x, Metric::Euclidean);

    OpticsResult result;
    result.core_distance = core_distances(d, options.min_pts);
    const auto& cd = result.core_distance;

    std::vector<double> reach(n, kInf);
    std::vector<bool> processed(n, false);
    auto expand_from = [&](std::size_t p) {
        if (!std::isfinite(cd[p])) return;
        for (std::size_t q = 0; q < n; ++q) {
            if (processed[q]) continue;
            reach[q] = std::min(reach[q], std::max(cd[p], d(p, q)));
        }
    };

    for (std::size_t start = 0; start < n; ++start) {
        if (processed[start]) continue;
        processed[start] = true;
        result.ordering.push_back(start);
        result.reachability.push_back(kInf);
        expand_from(start);
        while (true) {
            std::size_t next = n;
            for (std::size_t q = 0; q < n; ++q) {
                if (!processed[q] && std::isfinite(reach[q]) && (next == n || reach[q] < reach[next])) next = q;
            }
            if (next == n) break;
            processed[next] = true;
            result.ordering.push_back(next);
            result.reachability.push_back(reach[next]);
            expand_from(next);
        }
    }

    // eps-cut: a reachability jump above eps starts a new cluster at a core point
    std::vector<int> labels(n, kNoise);
    std::vector<bool> core(n, false);
    int current = kNoise;
    int next_id = 0;
    for (std::size_t pos = 0; pos < n; ++pos) {
        const auto p = result.ordering[pos];
        core[p] = cd[p] <= options.eps;
        if (result.reachability[pos] > options.eps) {
            if (core[p]) {
                current = next_id++;
                labels[p] = current;
            }
        } else if (core[p]) {
            labels[p] = current;
        }
    }
    assign_borders(d, core, options.eps, labels);

    auto& model = result.model;
    model.algorithm = Algorithm::Optics;
    model.labels = std::move(labels);
    model.n_clusters = static_cast<int>(detail::compact_labels(model.labels).size());
    const auto noise = std::count(model.labels.begin(), model.labels.end(), kNoise);
    model.params = {{"eps", options.eps}, {"min_pts", options.min_pts}, {"noise", static_cast<double>(noise)}};
    return result;
}

}  // namespace wearable
