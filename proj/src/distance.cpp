#include "wearable/distance.hpp"

#include "wearable/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

namespace wearable {

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw DimensionError("length mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

double squared_euclidean(std::span<const double> a, std::span<const double> b) {
    require_same_length(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double euclidean(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(squared_euclidean(a, b));
}

bool is_constant(std::span<const double> x) {
    return std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) == x.end();
}

std::vector<double> z_normalize(std::span<const double> x) {
    std::vector<double> out(x.size(), 0.0);
    if (x.empty() || is_constant(x)) return out;
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / n);
    if (sd == 0.0) return out;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) / sd;
    return out;
}

std::vector<double> circular_shift(std::span<const double> x, int shift) {
    const auto n = static_cast<long>(x.size());
    std::vector<double> out(x.size());
    if (n == 0) return out;
    for (long i = 0; i < n; ++i) {
        const long src = ((i - shift) % n + n) % n;
        out[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(src)];
    }
    return out;
}

ShapeMatch shape_match(std::span<const double> a, std::span<const double> b) {
    require_same_length(a, b);
    if (a.size() < 2) throw DimensionError("shape-based distance needs series of length >= 2");
    const bool ca = is_constant(a), cb = is_constant(b);
    if (ca && cb) throw UndefinedValueError("shape-based distance undefined for two constant series");
    if (ca || cb) return {1.0, 0};

    const auto za = z_normalize(a);
    const auto zb = z_normalize(b);
    const double denom = std::sqrt(dot(za, za) * dot(zb, zb));
    const std::size_t n = za.size();

    double best = -std::numeric_limits<double>::infinity();
    int best_shift = 0;
    for (std::size_t s = 0; s < n; ++s) {
        // correlation of a with b shifted right by s
        double cc = 0.0;
        for (std::size_t i = 0; i < n; ++i) cc += za[i] * zb[(i + n - s) % n];
        if (cc > best) {
            best = cc;
            best_shift = static_cast<int>(s);
        }
    }
    const double d = 1.0 - best / denom;
    return {std::clamp(d, 0.0, 2.0), best_shift};
}

double shape_based_distance(std::span<const double> a, std::span<const double> b) {
    return shape_match(a, b).distance;
}

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
    if (!(gamma > 0.0)) throw ParameterError("RBF kernel requires gamma > 0");
    return std::exp(-gamma * squared_euclidean(a, b));
}

double Kernel::operator()(std::span<const double> a, std::span<const double> b) const {
    if (kind == KernelKind::Linear) {
        require_same_length(a, b);
        return dot(a, b);
    }
    return rbf_kernel(a, b, gamma);
}

std::vector<double> gram_matrix(const Matrix& x, const Kernel& kernel) {
    const std::size_t n = x.size();
    std::vector<double> k(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double v = kernel(x[i], x[j]);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    return k;
}

double distance(Metric metric, std::span<const double> a, std::span<const double> b) {
    return metric == Metric::Euclidean ? euclidean(a, b) : shape_based_distance(a, b);
}

DistanceMatrix::DistanceMatrix(const Matrix& x, Metric metric) : n_(x.size()), d_(x.size() * x.size(), 0.0) {
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = i + 1; j < n_; ++j) {
            const double v = distance(metric, x[i], x[j]);
            d_[i * n_ + j] = v;
            d_[j * n_ + i] = v;
        }
    }
}

std::size_t check_rectangular(const Matrix& x) {
    if (x.empty()) throw DimensionError("empty data set");
    const std::size_t dim = x.front().size();
    for (const auto& row : x) {
        if (row.size() != dim) throw DimensionError("rows differ in length");
    }
    return dim;
}

}  // namespace wearable
