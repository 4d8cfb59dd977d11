#include "clustering_internal.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <set>

namespace wearable {

namespace {

constexpr std::array<std::pair<Algorithm, std::string_view>, 7> kAlgorithmNames{{
    {Algorithm::KMeans, "kmeans"},
    {Algorithm::KShape, "kshape"},
    {Algorithm::KernelKMeans, "kernel-kmeans"},
    {Algorithm::Dbscan, "dbscan"},
    {Algorithm::Optics, "optics"},
    {Algorithm::Ward, "ward"},
    {Algorithm::Som, "som"},
}};

bool has_prototypes(Algorithm a) {
    return a == Algorithm::KMeans || a == Algorithm::KShape || a == Algorithm::Som;
}

bool allows_noise(Algorithm a) {
    return a == Algorithm::Dbscan || a == Algorithm::Optics;
}

}  // namespace

std::string_view to_string(Algorithm algorithm) {
    for (const auto& [a, name] : kAlgorithmNames) {
        if (a == algorithm) return name;
    }
    return "unknown";
}

Algorithm algorithm_from_string(std::string_view name) {
    for (const auto& [a, n] : kAlgorithmNames) {
        if (n == name) return a;
    }
    throw ParameterError("unknown algorithm '" + std::string(name) + "'");
}

void ClusterModel::validate(std::size_t corpus_size) const {
    if (labels.size() != corpus_size) throw ParameterError("label count does not match corpus size");
    std::set<int> seen;
    for (int l : labels) {
        if (l == kNoise) {
            if (!allows_noise(algorithm)) throw ParameterError("noise label on a non-density model");
            continue;
        }
        if (l < 0 || l >= n_clusters) throw ParameterError("label outside 0..n_clusters-1");
        seen.insert(l);
    }
    if (static_cast<int>(seen.size()) != n_clusters) throw ParameterError("labels are not contiguous");
    if (prototypes.has_value() != has_prototypes(algorithm)) {
        throw ParameterError("prototypes present iff k-means, k-shape or SOM");
    }
    if (prototypes && static_cast<int>(prototypes->size()) != n_clusters) {
        throw ParameterError("one prototype per cluster expected");
    }
}

std::vector<ClusterSummary> cluster_summary(const ClusterModel& model, const Matrix& x) {
    if (model.labels.size() != x.size()) throw DimensionError("model and data disagree on size");
    const std::size_t dim = x.empty() ? 0 : check_rectangular(x);
    std::vector<ClusterSummary> out(static_cast<std::size_t>(model.n_clusters));
    for (int c = 0; c < model.n_clusters; ++c) {
        out[static_cast<std::size_t>(c)].label = c;
        out[static_cast<std::size_t>(c)].mean.assign(dim, 0.0);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        const int l = model.labels[i];
        if (l == kNoise) continue;
        auto& s = out.at(static_cast<std::size_t>(l));
        ++s.members;
        for (std::size_t d = 0; d < dim; ++d) s.mean[d] += x[i][d];
    }
    for (auto& s : out) {
        if (s.members == 0) continue;
        for (double& v : s.mean) v /= static_cast<double>(s.members);
    }
    return out;
}

namespace detail {

std::vector<int> compact_labels(std::vector<int>& labels) {
    std::map<int, std::pair<std::size_t, std::size_t>> stats;  // id -> (size, first index)
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == kNoise) continue;
        auto [it, inserted] = stats.try_emplace(labels[i], 0, i);
        ++it->second.first;
    }
    std::vector<int> old_of_new;
    for (const auto& [id, s] : stats) old_of_new.push_back(id);
    std::sort(old_of_new.begin(), old_of_new.end(), [&](int a, int b) {
        const auto& sa = stats.at(a);
        const auto& sb = stats.at(b);
        if (sa.first != sb.first) return sa.first > sb.first;
        return sa.second < sb.second;
    });
    std::map<int, int> new_of_old;
    for (std::size_t i = 0; i < old_of_new.size(); ++i) new_of_old[old_of_new[i]] = static_cast<int>(i);
    for (int& l : labels) {
        if (l != kNoise) l = new_of_old.at(l);
    }
    return old_of_new;
}

}  // namespace detail

}  // namespace wearable
