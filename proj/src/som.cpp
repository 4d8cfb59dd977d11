#include "clustering_internal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace wearable {

namespace {

int ceil_sqrt(int v) {
    auto s = static_cast<int>(std::sqrt(static_cast<double>(v)));
    while (s * s < v) ++s;
    while (s > 0 && (s - 1) * (s - 1) >= v) --s;
    return s;
}

std::size_t best_matching_unit(const Matrix& codebook, std::span<const double> x) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t u = 0; u < codebook.size(); ++u) {
        const double d = squared_euclidean(codebook[u], x);
        if (d < best_d) {
            best_d = d;
            best = u;
        }
    }
    return best;
}

double quantization_error(const Matrix& codebook, const Matrix& x) {
    double s = 0.0;
    for (const auto& row : x) s += euclidean(row, codebook[best_matching_unit(codebook, row)]);
    return s / static_cast<double>(x.size());
}

Matrix initial_codebook(const Matrix& x, std::size_t units, std::mt19937_64& rng) {
    const std::size_t n = x.size();
    Matrix codebook;
    codebook.reserve(units);
    if (n >= units) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        for (std::size_t u = 0; u < units; ++u) {
            std::uniform_int_distribution<std::size_t> pick(u, n - 1);
            std::swap(idx[u], idx[pick(rng)]);
            codebook.push_back(x[idx[u]]);
        }
    } else {
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        for (std::size_t u = 0; u < units; ++u) codebook.push_back(x[pick(rng)]);
    }
    return codebook;
}

}  // namespace

int som_grid_side(int num_users) {
    if (num_users < 1) throw ParameterError("num_users must be >= 1");
    return ceil_sqrt(ceil_sqrt(num_users));
}

int som_grid_size(int num_users) {
    const int side = som_grid_side(num_users);
    return side * side;
}

SomGrid SomGrid::square_for_users(int num_users) {
    SomGrid grid;
    grid.rows = grid.cols = som_grid_side(num_users);
    return grid;
}

SomFit som_train(const Matrix& x, const SomGrid& grid, std::uint64_t seed) {
    const std::size_t dim = check_rectangular(x);
    if (grid.rows < 1 || grid.cols < 1) throw ParameterError("SOM grid needs rows, cols >= 1");
    if (grid.iterations < 1) throw ParameterError("SOM iterations must be >= 1");
    if (!(grid.initial_learning_rate > 0.0 && grid.initial_learning_rate <= 1.0)) {
        throw ParameterError("initial learning rate must lie in (0, 1]");
    }
    const auto units = static_cast<std::size_t>(grid.rows) * static_cast<std::size_t>(grid.cols);
    auto rng = detail::make_rng(seed, 0);

    SomFit fit;
    if (grid.initial_codebook) {
        if (grid.initial_codebook->size() != units) throw DimensionError("initial codebook needs rows*cols vectors");
        for (const auto& w : *grid.initial_codebook) {
            if (w.size() != dim) throw DimensionError("initial codebook dimension mismatch");
        }
        fit.codebook = *grid.initial_codebook;
    } else {
        fit.codebook = initial_codebook(x, units, rng);
    }

    const double radius0 =
        grid.initial_radius > 0.0 ? grid.initial_radius : static_cast<double>(std::max(grid.rows, grid.cols)) / 2.0;
    const double iterations = static_cast<double>(grid.iterations);
    const double radius_tau = radius0 > 1.0 ? iterations / std::log(radius0) : iterations;
    const double qe_initial = quantization_error(fit.codebook, x);

    std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
    for (int t = 0; t < grid.iterations; ++t) {
        const auto& sample = x[pick(rng)];
        const auto bmu = best_matching_unit(fit.codebook, sample);
        const double rate = grid.initial_learning_rate * std::exp(-static_cast<double>(t) / iterations);
        const double radius = radius0 * std::exp(-static_cast<double>(t) / radius_tau);
        const double two_r2 = 2.0 * radius * radius;
        const auto br = static_cast<double>(bmu / static_cast<std::size_t>(grid.cols));
        const auto bc = static_cast<double>(bmu % static_cast<std::size_t>(grid.cols));
        for (std::size_t u = 0; u < units; ++u) {
            const double dr = static_cast<double>(u / static_cast<std::size_t>(grid.cols)) - br;
            const double dc = static_cast<double>(u % static_cast<std::size_t>(grid.cols)) - bc;
            const double h = std::exp(-(dr * dr + dc * dc) / two_r2);
            auto& w = fit.codebook[u];
            for (std::size_t d = 0; d < dim; ++d) w[d] += rate * h * (sample[d] - w[d]);
        }
    }

    auto& model = fit.model;
    model.algorithm = Algorithm::Som;
    model.seed = seed;
    model.labels.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) model.labels[i] = static_cast<int>(best_matching_unit(fit.codebook, x[i]));
    fit.unit_of_label = detail::compact_labels(model.labels);
    model.prototypes = detail::reorder_rows(fit.codebook, fit.unit_of_label);
    model.n_clusters = static_cast<int>(fit.unit_of_label.size());
    model.objective_trace = {qe_initial, quantization_error(fit.codebook, x)};
    model.params = {{"rows", grid.rows},
                    {"cols", grid.cols},
                    {"iterations", grid.iterations},
                    {"initial_learning_rate", grid.initial_learning_rate},
                    {"initial_radius", radius0}};
    return fit;
}

ClusterModel som_fit(const Matrix& x, const SomGrid& grid, std::uint64_t seed) {
    return som_train(x, grid, seed).model;
}

}  // namespace wearable
