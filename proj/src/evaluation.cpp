#include "wearable/evaluation.hpp"

#include "wearable/corpus_io.hpp"
#include "wearable/error.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <set>
#include <unordered_map>

namespace wearable {

namespace {

void require_same_length(std::size_t a, std::size_t b) {
    if (a != b) throw DimensionError("label vectors differ in length");
}

/// Gives every noise point its own cluster id.
std::vector<int> noise_as_singletons(std::span<const int> labels) {
    int next = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<int> out(labels.begin(), labels.end());
    for (int& l : out) {
        if (l == kNoise) l = next++;
    }
    return out;
}

std::int64_t pairs(std::int64_t m) { return m * (m - 1) / 2; }

}  // namespace

double silhouette(const DistanceMatrix& d, std::span<const int> labels) {
    if (labels.size() != d.size()) throw DimensionError("labels and distances differ in size");
    std::vector<std::size_t> idx;
    std::map<int, std::size_t> cluster_of;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == kNoise) continue;
        idx.push_back(i);
        cluster_of.try_emplace(labels[i], cluster_of.size());
    }
    const std::size_t k = cluster_of.size();
    if (k < 2) throw UndefinedValueError("silhouette needs at least two clusters");

    std::vector<std::size_t> member_count(k, 0);
    for (auto i : idx) ++member_count[cluster_of.at(labels[i])];

    double total = 0.0;
    std::vector<double> sums(k);
    for (auto i : idx) {
        std::fill(sums.begin(), sums.end(), 0.0);
        for (auto j : idx) sums[cluster_of.at(labels[j])] += d(i, j);
        const auto own = cluster_of.at(labels[i]);
        if (member_count[own] < 2) continue;
        const double a = sums[own] / static_cast<double>(member_count[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            if (c != own) b = std::min(b, sums[c] / static_cast<double>(member_count[c]));
        }
        const double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    return total / static_cast<double>(idx.size());
}

double silhouette(const Matrix& x, std::span<const int> labels, Metric metric) {
    return silhouette(DistanceMatrix(x, metric), labels);
}

double distortion(const Matrix& x, const ClusterModel& model) {
    if (model.labels.size() != x.size()) throw DimensionError("model and data disagree on size");
    Matrix centres;
    if (model.prototypes) {
        centres = *model.prototypes;
    } else {
        for (auto& s : cluster_summary(model, x)) centres.push_back(std::move(s.mean));
    }
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const int l = model.labels[i];
        if (l == kNoise) continue;
        const auto& c = centres.at(static_cast<std::size_t>(l));
        if (model.algorithm == Algorithm::KShape) {
            const double sbd = shape_based_distance(c, x[i]);
            total += sbd * sbd;
        } else {
            total += squared_euclidean(x[i], c);
        }
    }
    return total;
}

Elbow elbow_detect(const std::map<int, double>& curve) {
    if (curve.size() < 3) throw InsufficientDataError("elbow detection needs at least three k values");
    std::vector<int> ks;
    std::vector<double> d;
    for (const auto& [k, v] : curve) {
        if (!ks.empty() && k != ks.back() + 1) throw InsufficientDataError("elbow curve k values must be consecutive");
        ks.push_back(k);
        d.push_back(v);
    }
    double scale = 0.0;
    for (double v : d) scale = std::max(scale, std::abs(v));
    const double tol = 1e-12 * std::max(scale, 1.0);

    Elbow best;
    best.second_difference = -std::numeric_limits<double>::infinity();
    bool tied = false;
    for (std::size_t i = 1; i + 1 < d.size(); ++i) {
        const double sd = d[i - 1] - 2.0 * d[i] + d[i + 1];
        if (sd > best.second_difference + tol) {
            best.k = ks[i];
            best.second_difference = sd;
            tied = false;
        } else if (std::abs(sd - best.second_difference) <= tol) {
            tied = true;
        }
    }
    best.low_confidence = tied || best.second_difference <= tol;
    return best;
}

double purity(std::span<const int> labels, std::span<const int> truth) {
    require_same_length(labels.size(), truth.size());
    if (labels.empty()) throw DimensionError("purity of an empty labelling");
    const auto clusters = noise_as_singletons(labels);
    std::map<int, std::map<int, std::size_t>> table;
    for (std::size_t i = 0; i < clusters.size(); ++i) ++table[clusters[i]][truth[i]];
    std::size_t hits = 0;
    for (const auto& [c, row] : table) {
        std::size_t best = 0;
        for (const auto& [cls, count] : row) best = std::max(best, count);
        hits += best;
    }
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double rand_index(std::span<const int> labels, std::span<const int> truth) {
    require_same_length(labels.size(), truth.size());
    if (labels.size() < 2) throw DimensionError("Rand index needs at least two points");
    const auto clusters = noise_as_singletons(labels);
    std::map<std::pair<int, int>, std::int64_t> joint;
    std::map<int, std::int64_t> rows, cols;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        ++joint[{clusters[i], truth[i]}];
        ++rows[clusters[i]];
        ++cols[truth[i]];
    }
    std::int64_t both = 0, same_cluster = 0, same_class = 0;
    for (const auto& [key, m] : joint) both += pairs(m);
    for (const auto& [key, m] : rows) same_cluster += pairs(m);
    for (const auto& [key, m] : cols) same_class += pairs(m);
    const std::int64_t total = pairs(static_cast<std::int64_t>(labels.size()));
    const std::int64_t agree = total + 2 * both - same_cluster - same_class;
    return static_cast<double>(agree) / static_cast<double>(total);
}

double cohens_kappa(std::span<const std::string> first, std::span<const std::string> second) {
    require_same_length(first.size(), second.size());
    if (first.empty()) throw DimensionError("kappa of empty annotations");
    const double n = static_cast<double>(first.size());
    std::map<std::string, double> m1, m2;
    double observed = 0.0;
    for (std::size_t i = 0; i < first.size(); ++i) {
        m1[first[i]] += 1.0;
        m2[second[i]] += 1.0;
        if (first[i] == second[i]) observed += 1.0;
    }
    if (m1.size() == 1 && m2.size() == 1) {
        if (m1.begin()->first == m2.begin()->first) return 1.0;
        throw UndefinedValueError("kappa undefined: annotators each use a single, different label");
    }
    double expected = 0.0;
    for (const auto& [label, c1] : m1) {
        auto it = m2.find(label);
        if (it != m2.end()) expected += (c1 / n) * (it->second / n);
    }
    observed /= n;
    if (expected >= 1.0) return 1.0;
    return (observed - expected) / (1.0 - expected);
}

std::vector<int> encode_categories(std::span<const std::string> values) {
    std::unordered_map<std::string, int> codes;
    std::vector<int> out;
    out.reserve(values.size());
    for (const auto& v : values) out.push_back(codes.try_emplace(v, static_cast<int>(codes.size())).first->second);
    return out;
}

ExtrinsicScores extrinsic_scores(std::span<const int> labels, std::span<const int> truth) {
    ExtrinsicScores s;
    s.purity = purity(labels, truth);
    s.rand_index = rand_index(labels, truth);
    s.n = labels.size();
    const auto clusters = noise_as_singletons(labels);
    s.n_clusters = static_cast<int>(std::set<int>(clusters.begin(), clusters.end()).size());
    s.purity_degenerate = static_cast<std::size_t>(s.n_clusters) == s.n;
    return s;
}

EvalReport select_k(const Matrix& x, const SweepOptions& options) {
    check_rectangular(x);
    if (options.k_min < 1 || options.k_max < options.k_min) throw ParameterError("invalid k range");
    if (static_cast<std::size_t>(options.k_max) > x.size()) throw ParameterError("k_max exceeds corpus size");

    const Metric metric = options.algorithm == Algorithm::KShape ? Metric::ShapeBased : Metric::Euclidean;
    Matrix scored = x;
    if (metric == Metric::ShapeBased) {
        for (auto& row : scored) row = z_normalize(row);
    }
    const DistanceMatrix distances(scored, metric);
    const double gamma = options.gamma > 0.0 ? options.gamma : median_heuristic_gamma(x);

    auto fit = [&](int k) {
        switch (options.algorithm) {
            case Algorithm::KMeans:
                return kmeans_fit(x, {.k = k, .seed = options.seed, .n_init = options.n_init});
            case Algorithm::KShape:
                return kshape_fit(x, {.k = k, .seed = options.seed, .n_init = options.n_init});
            case Algorithm::KernelKMeans:
                return kernel_kmeans_fit(x, {.k = k, .kernel = {KernelKind::Rbf, gamma}, .seed = options.seed,
                                             .n_init = options.n_init});
            default:
                return ward_fit(x, k);
        }
    };
    auto score = [&](int k) {
        const auto model = fit(k);
        SweepPoint p;
        p.k = k;
        p.distortion = distortion(x, model);
        if (model.n_clusters >= 2) p.silhouette = silhouette(distances, model.labels);
        return p;
    };

    // only these algorithms take a cluster count
    if (options.algorithm != Algorithm::KMeans && options.algorithm != Algorithm::KShape &&
        options.algorithm != Algorithm::KernelKMeans && options.algorithm != Algorithm::Ward) {
        throw ParameterError("k sweep supports kmeans, kshape, kernel-kmeans and ward");
    }

    std::vector<std::future<SweepPoint>> jobs;
    for (int k = options.k_min; k <= options.k_max; ++k) jobs.push_back(std::async(std::launch::async, score, k));

    EvalReport report;
    report.algorithm = options.algorithm;
    for (auto& job : jobs) report.sweep.push_back(job.get());

    std::map<int, double> curve;
    double best_silhouette = -std::numeric_limits<double>::infinity();
    for (const auto& p : report.sweep) {
        curve[p.k] = p.distortion;
        if (p.silhouette && *p.silhouette > best_silhouette) {
            best_silhouette = *p.silhouette;
            report.chosen_k = p.k;
        }
    }
    if (curve.size() >= 3) report.elbow = elbow_detect(curve);
    return report;
}

nlohmann::json to_json(const ExtrinsicScores& s) {
    return {{"purity", s.purity},
            {"rand_index", s.rand_index},
            {"n", s.n},
            {"n_clusters", s.n_clusters},
            {"purity_degenerate", s.purity_degenerate}};
}

nlohmann::json to_json(const EvalReport& report) {
    nlohmann::json j;
    j["algorithm"] = std::string(to_string(report.algorithm));
    auto sweep = nlohmann::json::array();
    for (const auto& p : report.sweep) {
        sweep.push_back({{"k", p.k},
                         {"silhouette", p.silhouette ? nlohmann::json(*p.silhouette) : nlohmann::json(nullptr)},
                         {"distortion", p.distortion}});
    }
    j["sweep"] = std::move(sweep);
    j["chosen_k"] = report.chosen_k ? nlohmann::json(*report.chosen_k) : nlohmann::json(nullptr);
    j["elbow"] = report.elbow ? nlohmann::json{{"k", report.elbow->k},
                                               {"low_confidence", report.elbow->low_confidence},
                                               {"second_difference", report.elbow->second_difference}}
                              : nlohmann::json(nullptr);
    j["extrinsic"] = report.extrinsic ? to_json(*report.extrinsic) : nlohmann::json(nullptr);
    j["annotator_kappa"] = report.annotator_kappa ? nlohmann::json(*report.annotator_kappa) : nlohmann::json(nullptr);
    return j;
}

void write_sweep_csv(std::ostream& out, const EvalReport& report) {
    out << "k,silhouette,distortion\n";
    for (const auto& p : report.sweep) {
        out << p.k << ',' << (p.silhouette ? format_number(*p.silhouette) : std::string{}) << ','
            << format_number(p.distortion) << '\n';
    }
}

}  // namespace wearable
