#pragma once

#include <span>
#include <string>
#include <string_view>

#include "ridgemg/sparse.hpp"

namespace ridgemg {

enum class DistanceKind { euclidean, cosine, jaccard };

DistanceKind distance_from_string(std::string_view s);
std::string to_string(DistanceKind d);

/// d(X(:,i), X(:,j)) between two sparse columns.
///   euclidean: ||x - y||_2
///   cosine:    1 - <x,y> / (||x|| ||y||); 0 if both zero, 1 if exactly one is
///   jaccard:   1 - |supp(x) & supp(y)| / |supp(x) | supp(y)|; 0 if both empty
double column_distance(const CscMatrix& cols, std::size_t i, std::size_t j, DistanceKind d);

/// Squared euclidean distance between sparse column j and a dense vector p
/// with precomputed ||p||^2 (clamped at zero against cancellation).
double column_dense_sqdist(const CscMatrix& cols, std::size_t j, std::span<const double> p,
                           double p_sqnorm);

/// ||X(:,j)||^2 for every column.
DenseVector column_sqnorms(const CscMatrix& cols);

}  // namespace ridgemg
