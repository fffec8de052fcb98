// Floating-point lattice reduction: LLL with an exact integer transform,
// Fincke-Pohst enumeration of short vectors, and small dense determinants.
//
// Bases are row-major: `basis[i]` is the i-th generator, living in R^d with
// rank <= d.  Every routine that rewrites the basis also reports the
// unimodular transform, so callers holding exact provenance for the original
// rows can re-derive reduced rows exactly instead of trusting accumulated
// floating-point row operations.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace badflow {

struct ReductionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Rows are (numerically) linearly dependent.
struct DegenerateLattice : ReductionError {
  using ReductionError::ReductionError;
};

using Matrix = std::vector<std::vector<double>>;

struct LLLResult {
  Matrix basis;                                      // reduced rows
  std::vector<std::vector<std::int64_t>> transform;  // reduced = transform * original
};

// Lenstra-Lenstra-Lovasz reduction with parameter delta in (1/4, 1).
LLLResult lll_reduce(Matrix basis, double delta = 0.99);

// Absolute value of det(transform); always 1 for a genuine unimodular matrix.
// Exposed so tests can audit the invariant cheaply.
std::int64_t transform_det_abs(const std::vector<std::vector<std::int64_t>>& u);

// All nonzero coefficient vectors c (w.r.t. the *original* basis rows) with
// ||sum c_i b_i||^2 <= radius2, one representative per +-c pair (the last
// nonzero coefficient is positive).  Throws ReductionError if the search tree
// exceeds `node_cap` nodes.
std::vector<std::vector<std::int64_t>> enumerate_short(const Matrix& basis, double radius2,
                                                       std::size_t node_cap = 50'000'000);

struct SvResult {
  std::vector<std::int64_t> coeffs;  // w.r.t. the original basis
  std::vector<double> vec;
  double norm = 0.0;  // Euclidean length
};

// Shortest nonzero vector (up to sign), via LLL + enumeration.
SvResult shortest_vector(const Matrix& basis);

// Determinant of a square matrix by partially pivoted LU.
double det(Matrix m);

// Gram matrix of the rows of `basis`.
Matrix gram(const Matrix& basis);

}  // namespace badflow
