#include <doctest.h>

#include "oracles.hpp"
#include "wearable/clustering.hpp"
#include "wearable/error.hpp"
#include "wearable/evaluation.hpp"
#include "wearable/model_io.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

using namespace wearable;

namespace {

Matrix column(std::initializer_list<double> values) {
    Matrix x;
    for (double v : values) x.push_back({v});
    return x;
}

/// `per_blob` points around each centre with uniform jitter of `spread`.
Matrix blobs(const Matrix& centres, int per_blob, double spread, std::uint64_t seed, std::vector<int>* truth = nullptr) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-spread, spread);
    Matrix x;
    for (std::size_t c = 0; c < centres.size(); ++c) {
        for (int i = 0; i < per_blob; ++i) {
            std::vector<double> p = centres[c];
            for (double& v : p) v += u(rng);
            x.push_back(p);
            if (truth) truth->push_back(static_cast<int>(c));
        }
    }
    return x;
}

Matrix rings(std::vector<int>& truth) {
    Matrix x;
    for (int ring = 0; ring < 2; ++ring) {
        const double r = ring == 0 ? 1.0 : 5.0;
        for (int i = 0; i < 40; ++i) {
            const double a = 2.0 * M_PI * i / 40.0;
            x.push_back({r * std::cos(a), r * std::sin(a)});
            truth.push_back(ring);
        }
    }
    return x;
}

std::vector<double> sine(std::size_t n, double phase, double amp, double offset) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = offset + amp * std::sin(2 * M_PI * i / n + phase);
    return v;
}

}  // namespace

TEST_CASE("algorithm names round trip") {
    for (auto a : {Algorithm::KMeans, Algorithm::KShape, Algorithm::KernelKMeans, Algorithm::Dbscan,
                   Algorithm::Optics, Algorithm::Ward, Algorithm::Som}) {
        CHECK(algorithm_from_string(to_string(a)) == a);
    }
    CHECK_THROWS_AS(algorithm_from_string("bogus"), ParameterError);
}

TEST_CASE("compact_labels orders by size then first appearance") {
    std::vector<int> labels{5, 2, 2, kNoise, 7, 5, 2};
    const auto old = detail::compact_labels(labels);
    CHECK(labels == std::vector<int>{1, 0, 0, kNoise, 2, 1, 0});
    CHECK(old == std::vector<int>{2, 5, 7});
}

TEST_CASE("kmeans separated pairs") {
    const auto m = kmeans_fit(column({0, 0.1, 10, 10.1}), {2, 1});
    CHECK(m.labels[0] == m.labels[1]);
    CHECK(m.labels[2] == m.labels[3]);
    CHECK(m.labels[0] != m.labels[2]);
    m.validate(4);
}

TEST_CASE("kmeans k=1 centroid is the column mean") {
    const Matrix x{{1, 10}, {2, 20}, {6, 0}};
    const auto m = kmeans_fit(x, {1, 3});
    REQUIRE(m.prototypes);
    CHECK((*m.prototypes)[0][0] == doctest::Approx(3.0));
    CHECK((*m.prototypes)[0][1] == doctest::Approx(10.0));
}

TEST_CASE("kmeans wcss equals the best 2-partition") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 20; ++t) {
        std::vector<double> pts = oracle::random_vector(rng, 6, 0.0, 10.0);
        Matrix x;
        for (double p : pts) x.push_back({p});
        const auto m = kmeans_fit(x, {2, static_cast<std::uint64_t>(t)});
        CHECK(distortion(x, m) == doctest::Approx(oracle::best_two_partition_wcss(pts)).epsilon(1e-9));
    }
}

TEST_CASE("kmeans objective is non-increasing") {
    const auto x = blobs({{0, 0}, {3, 0}, {0, 3}}, 20, 1.5, 4);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto m = kmeans_fit(x, {3, seed});
        REQUIRE(!m.objective_trace.empty());
        for (std::size_t i = 1; i < m.objective_trace.size(); ++i) {
            CHECK(m.objective_trace[i] <= m.objective_trace[i - 1] + 1e-9);
        }
    }
}

TEST_CASE("kmeans parameter errors") {
    CHECK_THROWS_AS(kmeans_fit(column({1, 2}), {3, 0}), ParameterError);
    CHECK_THROWS_AS(kmeans_fit(column({1, 2}), {0, 0}), ParameterError);
    CHECK_THROWS_AS(kmeans_fit(Matrix{}, {1, 0}), ParameterError);
}

TEST_CASE("kmeans with duplicated points still fills k clusters") {
    const auto m = kmeans_fit(column({1, 1, 1, 1, 2}), {3, 0});
    CHECK(m.n_clusters == 3);
    m.validate(5);
}

TEST_CASE("kshape separates shape families") {
    Matrix x;
    std::vector<int> truth;
    std::mt19937_64 rng(2);
    std::normal_distribution<double> noise(0.0, 0.05);
    for (int i = 0; i < 10; ++i) {
        auto s = sine(24, 0.0, 1.0 + 0.2 * i, 0.1 * i);
        for (double& v : s) v += noise(rng);
        x.push_back(s);
        truth.push_back(0);
        std::vector<double> ramp(24);
        for (std::size_t j = 0; j < 24; ++j) ramp[j] = (0.5 + 0.1 * i) * ((j % 12) < 6 ? 1.0 : 0.0) + noise(rng);
        x.push_back(ramp);
        truth.push_back(1);
    }
    const auto m = kshape_fit(x, {2, 0});
    CHECK(rand_index(m.labels, truth) == 1.0);
    m.validate(x.size());
}

TEST_CASE("kshape groups a series with its affine copy") {
    const auto a = sine(16, 0.3, 1.0, 0.0);
    std::vector<double> b;
    for (double v : a) b.push_back(2 * v + 5);
    std::vector<double> c(16);
    for (std::size_t i = 0; i < 16; ++i) c[i] = (i < 8) ? 1.0 : -1.0 + 0.01 * i;
    const auto m = kshape_fit(Matrix{a, c, b}, {2, 0});
    CHECK(m.labels[0] == m.labels[2]);
    CHECK(m.labels[0] != m.labels[1]);
}

TEST_CASE("kshape k=n gives singletons at zero distance") {
    const Matrix x{sine(12, 0, 1, 0), {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12}, {0, 5, 0, 5, 0, 5, 0, 5, 0, 5, 0, 5}};
    const auto m = kshape_fit(x, {3, 0});
    CHECK(m.n_clusters == 3);
    REQUIRE(m.prototypes);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(shape_based_distance(x[i], (*m.prototypes)[static_cast<std::size_t>(m.labels[i])]) ==
              doctest::Approx(0.0).epsilon(1e-9));
    }
}

TEST_CASE("kshape names the constant series") {
    const Matrix x{{1, 2, 3}, {4, 4, 4}, {3, 1, 2}};
    try {
        kshape_fit(x, {2, 0});
        FAIL("expected PreprocessingError");
    } catch (const PreprocessingError& e) {
        CHECK(e.index() == 1);
    }
}

TEST_CASE("kernel kmeans separates concentric rings") {
    std::vector<int> truth;
    const auto x = rings(truth);
    const auto m = kernel_kmeans_fit(x, {2, {KernelKind::Rbf, 1.0}, 0});
    CHECK(purity(m.labels, truth) == 1.0);
    CHECK(rand_index(m.labels, truth) == 1.0);
    m.validate(x.size());
    CHECK(!m.prototypes);
}

TEST_CASE("kernel kmeans objective is non-increasing") {
    std::vector<int> truth;
    const auto x = rings(truth);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto m = kernel_kmeans_fit(x, {3, {KernelKind::Rbf, 0.5}, seed});
        for (std::size_t i = 1; i < m.objective_trace.size(); ++i) {
            CHECK(m.objective_trace[i] <= m.objective_trace[i - 1] + 1e-9);
        }
    }
}

TEST_CASE("linear kernel kmeans reproduces kmeans on separated blobs") {
    const auto x = blobs({{0, 0}, {10, 0}, {0, 10}}, 15, 1.0, 8);
    const auto a = kernel_kmeans_fit(x, {3, {KernelKind::Linear, 0.0}, 1});
    const auto b = kmeans_fit(x, {3, 1});
    CHECK(oracle::same_partition(a.labels, b.labels));
}

TEST_CASE("kernel kmeans k=1 and gamma checks") {
    const auto x = blobs({{0, 0}, {5, 5}}, 5, 0.5, 1);
    const auto m = kernel_kmeans_fit(x, {1, {KernelKind::Rbf, 1.0}, 0});
    CHECK(std::all_of(m.labels.begin(), m.labels.end(), [](int l) { return l == 0; }));
    CHECK_THROWS_AS(kernel_kmeans_fit(x, {2, {KernelKind::Rbf, 0.0}, 0}), ParameterError);
    CHECK_THROWS_AS(kernel_kmeans_fit(x, {11, {KernelKind::Rbf, 1.0}, 0}), ParameterError);
}

TEST_CASE("median heuristic gamma") {
    // squared distances 1, 4, 9 -> median 4
    CHECK(median_heuristic_gamma(column({0, 1, 3})) == doctest::Approx(0.25));
}

TEST_CASE("dbscan two blobs and an outlier") {
    const Matrix x{{0, 0}, {0.1, 0}, {0, 0.1}, {0.1, 0.1}, {0.05, 0.05},
                   {5, 5}, {5.1, 5}, {5, 5.1},  {5.1, 5.1}, {5.05, 5.05}, {20, -20}};
    const auto m = dbscan_fit(x, {0.5, 3});
    CHECK(m.n_clusters == 2);
    CHECK(m.labels[10] == kNoise);
    CHECK(std::count(m.labels.begin(), m.labels.end(), kNoise) == 1);
    CHECK(m.labels[0] != m.labels[5]);
    m.validate(x.size());
}

TEST_CASE("dbscan degenerate parameters") {
    const Matrix x{{0, 0}, {1, 1}, {3, 0}, {0, 4}};
    const auto one = dbscan_fit(x, {100.0, 1});
    CHECK(one.n_clusters == 1);
    CHECK(std::count(one.labels.begin(), one.labels.end(), kNoise) == 0);
    const auto none = dbscan_fit(x, {100.0, 5});
    CHECK(none.n_clusters == 0);
    CHECK(std::all_of(none.labels.begin(), none.labels.end(), [](int l) { return l == kNoise; }));
    CHECK_THROWS_AS(dbscan_fit(x, {0.0, 2}), ParameterError);
    CHECK_THROWS_AS(dbscan_fit(x, {1.0, 0}), ParameterError);
}

TEST_CASE("dbscan is permutation invariant up to renaming") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 10; ++t) {
        Matrix x;
        for (int i = 0; i < 40; ++i) x.push_back(oracle::random_vector(rng, 2, 0.0, 4.0));
        std::vector<std::size_t> perm(x.size());
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        Matrix y;
        for (auto p : perm) y.push_back(x[p]);
        const DbscanOptions opt{0.6, 3};
        const auto a = dbscan_fit(x, opt), b = dbscan_fit(y, opt);
        std::vector<int> back(x.size());
        for (std::size_t i = 0; i < perm.size(); ++i) back[perm[i]] = b.labels[i];
        CHECK(oracle::same_partition(a.labels, back));
    }
}

TEST_CASE("optics eps-cut equals dbscan") {
    std::mt19937_64 rng(41);
    for (int t = 0; t < 20; ++t) {
        Matrix x;
        for (int i = 0; i < 30; ++i) x.push_back(oracle::random_vector(rng, 3, 0.0, 3.0));
        for (double eps : {0.4, 0.8, 1.2}) {
            for (int min_pts : {1, 3, 5}) {
                const auto d = dbscan_fit(x, {eps, min_pts});
                const auto o = optics_fit(x, {min_pts, eps});
                CHECK(oracle::same_partition(d.labels, o.model.labels));
            }
        }
    }
}

TEST_CASE("optics single point and two-blob valleys") {
    const auto one = optics_fit(Matrix{{1, 2}}, {1, 1.0});
    REQUIRE(one.ordering.size() == 1);
    CHECK(std::isinf(one.reachability[0]));

    const auto x = blobs({{0, 0}, {10, 10}}, 15, 0.5, 3);
    const auto r = optics_fit(x, {4, 2.0});
    // high reachability separates the two valleys
    int valleys = 0;
    bool in_valley = false;
    for (double v : r.reachability) {
        const bool low = v <= 2.0;
        if (low && !in_valley) ++valleys;
        in_valley = low;
    }
    CHECK(valleys == 2);
    CHECK(r.model.n_clusters == 2);
}

TEST_CASE("ward three points") {
    const auto x = column({0, 1, 10});
    const auto m = ward_fit(x, 2);
    CHECK(m.labels[0] == m.labels[1]);
    CHECK(m.labels[0] != m.labels[2]);
    const auto merges = ward_linkage(x);
    REQUIRE(merges.size() == 2);
    CHECK(merges[0].height == doctest::Approx(1.0));
    // Lance-Williams: sqrt(2 * |{0,1}| * |{10}| / 3) * |9.5|
    CHECK(merges[1].height == doctest::Approx(std::sqrt(4.0 / 3.0) * 9.5));
    CHECK(ward_fit(x, 3).n_clusters == 3);
    CHECK(ward_fit(x, 1).n_clusters == 1);
}

TEST_CASE("ward merge heights are non-decreasing") {
    std::mt19937_64 rng(12);
    Matrix x;
    for (int i = 0; i < 40; ++i) x.push_back(oracle::random_vector(rng, 4));
    const auto merges = ward_linkage(x);
    CHECK(merges.size() == 39);
    for (std::size_t i = 1; i < merges.size(); ++i) CHECK(merges[i].height >= merges[i - 1].height - 1e-12);
    CHECK(merges.back().size == 40);
}

TEST_CASE("som grid size") {
    CHECK(som_grid_size(1) == 1);
    CHECK(som_grid_size(256) == 16);
    CHECK(som_grid_size(322) == 25);
    CHECK(som_grid_side(322) == 5);
    for (int n = 1; n < 2000; ++n) {
        const int root = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
        const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(root))));
        CHECK(som_grid_size(n) == side * side);
    }
    CHECK_THROWS_AS(som_grid_size(0), ParameterError);
}

TEST_CASE("som maps four blob families to distinct units") {
    std::vector<int> truth;
    const auto x = blobs({{0, 0, 0}, {5, 0, 0}, {0, 5, 0}, {0, 0, 5}}, 10, 0.3, 6, &truth);
    SomGrid grid;
    grid.rows = 2;
    grid.cols = 2;
    grid.iterations = 2000;
    const auto m = som_fit(x, grid, 3);
    CHECK(m.n_clusters == 4);
    CHECK(rand_index(m.labels, truth) == 1.0);
    m.validate(x.size());
}

TEST_CASE("som is bitwise deterministic") {
    const auto x = blobs({{0, 0}, {5, 5}}, 10, 1.0, 2);
    SomGrid grid;
    grid.rows = 2;
    grid.cols = 3;
    grid.iterations = 500;
    const auto a = som_train(x, grid, 7), b = som_train(x, grid, 7);
    CHECK(a.codebook == b.codebook);
    CHECK(a.model.labels == b.model.labels);
}

TEST_CASE("som single series contracts its codebook") {
    const Matrix x{{0.2, 0.8, 0.5}};
    SomGrid grid;
    grid.iterations = 50;
    grid.initial_codebook = Matrix{{1.0, 0.0, 0.0}};
    const auto fit = som_train(x, grid, 0);
    CHECK(fit.model.labels == std::vector<int>{0});
    REQUIRE(fit.model.objective_trace.size() == 2);
    CHECK(fit.model.objective_trace[1] < fit.model.objective_trace[0]);
    CHECK(euclidean(fit.codebook[0], x[0]) < 1e-6);
}

TEST_CASE("som drops empty units") {
    const auto x = blobs({{0, 0}, {9, 9}}, 6, 0.1, 5);
    SomGrid grid;
    grid.rows = 3;
    grid.cols = 3;
    grid.iterations = 1000;
    const auto fit = som_train(x, grid, 1);
    CHECK(fit.model.n_clusters <= 9);
    CHECK(fit.unit_of_label.size() == static_cast<std::size_t>(fit.model.n_clusters));
    fit.model.validate(x.size());
}

TEST_CASE("cluster summary") {
    ClusterModel m;
    m.algorithm = Algorithm::Dbscan;
    m.labels = {0, 0, kNoise, 1};
    m.n_clusters = 2;
    const Matrix x{{0, 1}, {1, 0}, {9, 9}, {3, 3}};
    const auto s = cluster_summary(m, x);
    REQUIRE(s.size() == 2);
    CHECK(s[0].mean == std::vector<double>{0.5, 0.5});
    CHECK(s[0].members == 2);
    CHECK(s[1].mean == std::vector<double>{3, 3});
    std::size_t total = 0;
    for (const auto& c : s) total += c.members;
    CHECK(total == 3);
}

TEST_CASE("cluster summary counts match a label histogram") {
    const auto x = blobs({{0, 0}, {4, 0}, {0, 4}}, 7, 1.5, 13);
    const auto m = kmeans_fit(x, {3, 2});
    std::map<int, std::size_t> hist;
    for (int l : m.labels) ++hist[l];
    for (const auto& c : cluster_summary(m, x)) CHECK(c.members == hist[c.label]);
}

TEST_CASE("model invariants are enforced") {
    ClusterModel m;
    m.algorithm = Algorithm::Ward;
    m.labels = {0, 1, 1};
    m.n_clusters = 2;
    CHECK_NOTHROW(m.validate(3));
    CHECK_THROWS_AS(m.validate(4), ParameterError);
    m.labels = {0, 2, 2};
    CHECK_THROWS_AS(m.validate(3), ParameterError);
    m.labels = {0, kNoise, 1};
    CHECK_THROWS_AS(m.validate(3), ParameterError);
    m.labels = {0, 1, 1};
    m.prototypes = Matrix{{0.0}, {1.0}};
    CHECK_THROWS_AS(m.validate(3), ParameterError);
}

TEST_CASE("fits are deterministic given the seed") {
    const auto x = blobs({{0, 1, 0, 1}, {1, 0, 1, 0}, {0, 0, 1, 1}}, 8, 0.4, 21);
    for (std::uint64_t seed : {0u, 9u}) {
        CHECK(kmeans_fit(x, {3, seed}).labels == kmeans_fit(x, {3, seed}).labels);
        CHECK(*kmeans_fit(x, {3, seed}).prototypes == *kmeans_fit(x, {3, seed}).prototypes);
        CHECK(*kshape_fit(x, {3, seed}).prototypes == *kshape_fit(x, {3, seed}).prototypes);
        CHECK(kernel_kmeans_fit(x, {3, {}, seed}).labels == kernel_kmeans_fit(x, {3, {}, seed}).labels);
        CHECK(som_fit(x, SomGrid::square_for_users(24), seed).labels ==
              som_fit(x, SomGrid::square_for_users(24), seed).labels);
    }
}

TEST_CASE("model json round trip") {
    const auto x = blobs({{0, 0}, {5, 5}}, 4, 0.5, 1);
    const auto m = kmeans_fit(x, {2, 4});
    std::vector<SeriesId> ids;
    for (std::size_t i = 0; i < x.size(); ++i) ids.push_back({"u" + std::to_string(i), "2021-01-01"});
    const auto j = model_to_json(m, ids);
    const auto back = model_from_json(j);
    CHECK(back.model.algorithm == m.algorithm);
    CHECK(back.model.labels == m.labels);
    CHECK(back.model.n_clusters == m.n_clusters);
    CHECK(back.model.seed == m.seed);
    CHECK(*back.model.prototypes == *m.prototypes);
    CHECK(back.model.params == m.params);
    REQUIRE(back.series.size() == x.size());
    CHECK(back.series[3].user_id == "u3");
    CHECK(model_to_json(back.model, back.series).dump() == j.dump());

    const auto d = dbscan_fit(x, {1.0, 2});
    CHECK(model_to_json(d).at("prototypes").is_null());
    CHECK(!model_from_json(model_to_json(d)).model.prototypes);
}

TEST_CASE("cluster mean csv") {
    std::ostringstream out;
    write_cluster_mean_csv(out, ClusterSummary{0, 2, {0.5, 0.25}});
    CHECK(out.str() == "slot,mean,members\n0,0.5,2\n1,0.25,2\n");
}
