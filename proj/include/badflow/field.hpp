// Totally imaginary number fields of even degree n, presented through an
// integral basis with exact integer arithmetic and double / double-double
// embeddings.  Embeddings come in conjugate-adjacent pairs (2k, 2k+1), with
// the first one distinguished: Im sigma_1(generator) > 0.
//
// Two constructions:
//   * imaginary quadratic Q(sqrt(-D)) with its maximal order,
//   * a monic integer polynomial with no real root, using the power basis.
//
// Weighted approximation data (weight vectors, the r-norm, heights) lives here
// too, since it only depends on the embeddings.
#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "badflow/dd.hpp"
#include "badflow/parallel.hpp"

namespace badflow {

using cplx = std::complex<double>;

struct FieldError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotTotallyImaginary : FieldError {
  using FieldError::FieldError;
};
struct NotAField : FieldError {
  using FieldError::FieldError;
};
struct ZeroElement : FieldError {
  using FieldError::FieldError;
};
struct OverflowError : FieldError {
  using FieldError::FieldError;
};
struct Unsupported : FieldError {
  using FieldError::FieldError;
};

// ---------------------------------------------------------------------------

struct FieldSpec {
  enum class Kind { Quadratic, Poly };
  Kind kind = Kind::Quadratic;
  std::int64_t D = 1;                // Q(sqrt(-D)), D >= 1 square-free
  std::vector<std::int64_t> coeffs;  // monic: coeffs[k] multiplies x^k, coeffs.back() == 1
  int precision = 60;                // requested embedding digits (see effective_digits)
  bool trusted = false;              // accept the poly without an irreducibility certificate

  static FieldSpec quadratic(std::int64_t D);
  static FieldSpec poly(std::vector<std::int64_t> coeffs, bool trusted = false);

  std::string to_json() const;
  static FieldSpec from_json(const std::string& text);
};

// Element of the order, as integer coordinates in the chosen basis.
struct AlgebraicInt {
  std::vector<std::int64_t> coords;
  AlgebraicInt() = default;
  explicit AlgebraicInt(std::vector<std::int64_t> c) : coords(std::move(c)) {}
  bool is_zero() const {
    for (auto v : coords)
      if (v != 0) return false;
    return true;
  }
  friend bool operator==(const AlgebraicInt& a, const AlgebraicInt& b) {
    return a.coords == b.coords;
  }
};

struct NumberField {
  FieldSpec spec;
  int n = 0;                     // degree (even)
  std::int64_t discriminant = 0; // of the order (trace form determinant)
  bool class_number_one = false; // quadratic Stark list only
  int effective_digits = 0;      // digits the embeddings actually deliver

  // emb[j][k] = sigma_j(basis_k); dd copy for residue work; inverse for decoding
  std::vector<std::vector<cplx>> emb;
  std::vector<std::vector<ddcplx>> emb_dd;
  std::vector<std::vector<cplx>> emb_inv;

  std::vector<int> conj_perm;  // sigma_j conjugate = sigma_{conj_perm[j]}
  // coordinates of conj(basis_k), when conjugation stabilises the order
  std::optional<std::vector<AlgebraicInt>> conj_basis;

  // basis_i * basis_j = sum_k mult[i][j][k] basis_k
  std::vector<std::vector<std::vector<std::int64_t>>> mult;

  // least-squares data for numerator fitting: A^T (n x 2n) and the Cholesky
  // factor of A^T A, where A is the realified embedding matrix
  std::vector<std::vector<double>> lsq_at;
  std::vector<std::vector<double>> lsq_ata_chol;

  double tol() const { return 1e-12; }
  AlgebraicInt zero() const { return AlgebraicInt(std::vector<std::int64_t>(n, 0)); }
  AlgebraicInt one() const {
    std::vector<std::int64_t> c(n, 0);
    c[0] = 1;
    return AlgebraicInt(std::move(c));
  }
  AlgebraicInt from_coords(std::vector<std::int64_t> c) const;
};

// Validates the FieldSpec, certifies irreducibility where it can, and precomputes
// everything above.  Throws NotAField / NotTotallyImaginary / Unsupported.
NumberField make_field(const FieldSpec& spec);

// ---------------------------------------------------------------------------
// exact ring operations (checked 64-bit)

AlgebraicInt add(const NumberField& K, const AlgebraicInt& a, const AlgebraicInt& b);
AlgebraicInt sub(const NumberField& K, const AlgebraicInt& a, const AlgebraicInt& b);
AlgebraicInt neg(const NumberField& K, const AlgebraicInt& a);
AlgebraicInt mul(const NumberField& K, const AlgebraicInt& a, const AlgebraicInt& b);
AlgebraicInt mul_int(const NumberField& K, const AlgebraicInt& a, std::int64_t s);
// Complex conjugation at the basis level; Unsupported if the order is not stable.
AlgebraicInt conj_element(const NumberField& K, const AlgebraicInt& a);

// All embeddings of q, in embedding order.
std::vector<cplx> embed(const NumberField& K, const AlgebraicInt& q);
std::vector<ddcplx> embed_dd(const NumberField& K, const AlgebraicInt& q);
cplx embed1(const NumberField& K, const AlgebraicInt& q);

// Field norm (determinant of multiplication by q), exact.
std::int64_t field_norm(const NumberField& K, const AlgebraicInt& q);

// ---------------------------------------------------------------------------
// weights and heights

struct WeightVector {
  std::vector<double> r;        // nonnegative, sums to 1
  std::vector<int> sigma_plus;  // indices with r > 0
  std::vector<int> sigma_zero;  // indices with r == 0
  int omega = 0;                // argmax of r (lowest index on ties)
  double r_max = 0.0;

  static WeightVector make(std::vector<double> r);
  static WeightVector balanced(int n);
  bool is_balanced(double tol = 1e-12) const;
};

// Diagnoses the degenerate choice "weight 0 on an embedding whose conjugate is
// weighted": conjugate embeddings share moduli, so the admissible set is empty.
std::optional<std::string> weight_vacuity_note(const NumberField& K, const WeightVector& r);

// log of the weighted r-norm: max over weighted embeddings of log|sigma(q)| / r_sigma.
double log_weighted_norm(const NumberField& K, const WeightVector& r, const AlgebraicInt& q);
double weighted_norm(const NumberField& K, const WeightVector& r, const AlgebraicInt& q);

// Height max over weighted embeddings of |sigma(q)| * N(q)^{r_sigma}.
double height(const NumberField& K, const WeightVector& r, const AlgebraicInt& q);

// Admissible denominator test: |sigma(q)| <= eps on every weight-0 embedding.
bool in_OK_r_eps(const NumberField& K, const WeightVector& r, double eps, const AlgebraicInt& q);

// Every nonzero q with max_j |sigma_j(q)| <= M, in lexicographic coordinate
// order.  M < 1 yields nothing (the norm forces some |sigma| >= 1).
std::vector<AlgebraicInt> enumerate_bounded(const NumberField& K, double M,
                                            Exec mode = Exec::Serial);

}  // namespace badflow
