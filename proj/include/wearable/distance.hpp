#pragma once

#include "wearable/timeseries.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace wearable {

double squared_euclidean(std::span<const double> a, std::span<const double> b);
double euclidean(std::span<const double> a, std::span<const double> b);

bool is_constant(std::span<const double> x);

/// Zero mean, unit (population) standard deviation. Constant input maps to
/// the zero vector.
std::vector<double> z_normalize(std::span<const double> x);

/// Circular shift: result[i] = x[(i - shift) mod n].
std::vector<double> circular_shift(std::span<const double> x, int shift);

struct ShapeMatch {
    double distance = 0.0;  // 1 - max coefficient-normalized cross-correlation
    int shift = 0;          // shift of `b` that best aligns it with `a`
};

/// Shape-based distance over all circular shifts of the z-normalized inputs,
/// with the best shift. If exactly one input is constant the correlation is
/// taken as 0 (distance 1). Throws UndefinedValueError when both are constant.
ShapeMatch shape_match(std::span<const double> a, std::span<const double> b);

/// shape_match(a, b).distance, in [0, 2].
double shape_based_distance(std::span<const double> a, std::span<const double> b);

/// exp(-gamma * |a - b|^2).
double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

enum class KernelKind { Rbf, Linear };

struct Kernel {
    KernelKind kind = KernelKind::Rbf;
    double gamma = 1.0;

    double operator()(std::span<const double> a, std::span<const double> b) const;
};

/// Full n x n kernel matrix, row-major.
std::vector<double> gram_matrix(const Matrix& x, const Kernel& kernel);

enum class Metric { Euclidean, ShapeBased };

double distance(Metric metric, std::span<const double> a, std::span<const double> b);

/// Symmetric pairwise distance table.
class DistanceMatrix {
public:
    DistanceMatrix(const Matrix& x, Metric metric);

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return d_[i * n_ + j]; }

private:
    std::size_t n_;
    std::vector<double> d_;
};

/// Throws DimensionError when rows differ in length or the matrix is empty.
std::size_t check_rectangular(const Matrix& x);

}  // namespace wearable
