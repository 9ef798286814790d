#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "graphite/numerics/autodiff.hpp"

// Differentiable tensor operations. Every operation checks shapes (throwing
// DimensionError) and rejects non-finite results (NumericError).
namespace graphite::num::ops {

// (m x k) * (k x n); both operands rank 2.
Var matmul(const Var& a, const Var& b);

// Elementwise binary operations. `b` may match `a`'s shape, be a single row
// broadcast over a's rows, or be a single value broadcast everywhere.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);

Var scale(const Var& a, double factor);
Var relu(const Var& a);
Var sigmoid(const Var& a);
Var exp(const Var& a);

// Softmax over the last axis, per row, with max subtraction.
Var softmax(const Var& a);

// Concatenates along the last axis; row counts must agree.
Var concat(const Var& a, const Var& b);

// Sum along `axis`. Rank-2 inputs keep rank (1 x C or R x 1); rank-1 input
// reduces to shape (1).
Var sum(const Var& a, std::size_t axis);
Var sum_all(const Var& a);
Var mean(const Var& a);

// Elementwise (a - b)^2.
Var squared_difference(const Var& a, const Var& b);

Var trace(const Var& a);
Var transpose(const Var& a);
Var frobenius_norm(const Var& a);

// Row j of the result is the sum of a's rows listed in groups[j]; an empty
// group yields a zero row. Covers neighbour aggregation, node-to-graph
// readout and table lookups.
using IndexGroups = std::vector<std::vector<std::size_t>>;
Var gather_sum(const Var& a, const IndexGroups& groups);

// D_ij = ||x_i - x_j||^2 over the rows of x.
Var pairwise_squared_distances(const Var& x);

// H K H with H = I - 11^T / n, for square K.
Var double_center(const Var& k);

}  // namespace graphite::num::ops
