// The flow side of the correspondence: unimodular lattices in C^{2n}
// (realified to R^{4n}) obtained by shearing the ring lattice by the target z
// and flowing with the weighted diagonal one-parameter subgroup.  A target is
// badly approximable exactly when the orbit's systole stays bounded away from
// zero (Mahler's criterion); ratio points make the systole decay at rate
// r_max.
//
// Precision discipline: LLL runs in doubles, but the reduced generators are
// re-expressed through the exact integer pairs (p, q) they combine, and the
// final norms are re-evaluated freshly from those in double-double.  That
// keeps profiles meaningful at flow times where accumulated row operations
// would otherwise drown the systole in rounding noise.  The float path is kept
// selectable to measure exactly that effect.
#pragma once

#include <array>
#include <vector>

#include "badflow/bad_approx.hpp"
#include "badflow/field.hpp"
#include "badflow/parallel.hpp"
#include "badflow/reduction.hpp"

namespace badflow {

struct NotUnimodular : FieldError {
  using FieldError::FieldError;
};

// Element of the per-embedding block group: one 2x2 complex matrix (a b; c d)
// per embedding, acting on (u_sigma, w_sigma).
struct BlockDiag {
  std::vector<std::array<cplx, 4>> g;
};

BlockDiag flow_element(const WeightVector& r, double t);       // diag(e^{rt}, e^{-rt})
BlockDiag shear_element(const ComplexVector& z);               // (1 z; 0 1)
BlockDiag compose(const BlockDiag& a, const BlockDiag& b);
// Throws NotUnimodular unless every block determinant is within tol of 1.
void check_unimodular(const BlockDiag& g, double tol = 1e-9);
// (u | w) -> g (u | w), coordinates ordered u_1..u_n, w_1..w_n.
std::vector<cplx> apply_block(const BlockDiag& g, const std::vector<cplx>& uw);
// The 2n x 2n complex matrix of the action in that coordinate order.
std::vector<std::vector<cplx>> psi_matrix(const BlockDiag& g);

// Rank-2n lattice in R^{4n}; realification is [Re, Im] per complex coordinate,
// complex order u_1..u_n, w_1..w_n.  Every row keeps its exact provenance.
struct RealifiedLattice {
  Matrix rows;
  std::vector<PairPQ> gens;
  double scale = 1.0;  // |disc|^{-1/(2n)}, making the base covolume 1
};

// The unflowed base lattice (pairs of ring elements, covolume 1).
RealifiedLattice build_LK(const NumberField& K);

// psi(g_r(t)) psi(iota(z)) L_K.
RealifiedLattice orbit_lattice(const NumberField& K, const WeightVector& r,
                               const ComplexVector& z, double t);

struct OrbitShortest {
  double norm = 0.0;
  PairPQ pair;
};

// Shortest nonzero vector of the orbit lattice.  exact = true re-evaluates
// candidate norms from provenance in double-double.
OrbitShortest shortest_orbit_vector(const NumberField& K, const WeightVector& r,
                                    const ComplexVector& z, double t, bool exact = true);

struct OrbitProfile {
  std::vector<double> t;
  std::vector<double> systole;
  std::vector<PairPQ> witness;  // achieving pair per step
};

// Systole along t_i = T i / (steps - 1); steps are independent, so
// Exec::Parallel distributes them.
OrbitProfile systole_profile(const NumberField& K, const WeightVector& r,
                             const ComplexVector& z, double T, int steps, bool exact = true,
                             Exec mode = Exec::Serial);

enum class OrbitClass { Escaping, Bounded, Inconclusive };

struct OrbitVerdict {
  OrbitClass cls = OrbitClass::Inconclusive;
  double tail_slope = 0.0;   // least-squares slope of log systole over the last 40%
  double min_systole = 0.0;
};

// Escaping when the tail slope is clearly negative, Bounded when the slope is
// flat and the profile stays above `threshold`, Inconclusive otherwise.
OrbitVerdict classify_orbit(const OrbitProfile& p, double threshold, double slope_tol);

const char* orbit_class_name(OrbitClass c);

}  // namespace badflow
