// Weighted Diophantine approximation over a totally imaginary field.
//
// A target is a point z in C^n, one coordinate per embedding (embedding order
// as fixed by NumberField).  For a pair (p, q) of integers of the field the
// approximation quality at z is
//
//     max over weighted embeddings of  |sigma(q) z_sigma + sigma(p)| * N(q)^(r_sigma)
//
// where N(q) is the weighted r-norm of q.  Small quality means z is well
// approximated by the ratio point -sigma(p)/sigma(q); a target is eps-bad when
// no admissible pair beats quality eps.
#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "badflow/field.hpp"
#include "badflow/parallel.hpp"

namespace badflow {

using ComplexVector = std::vector<cplx>;

struct NotAdmissible : FieldError {
  using FieldError::FieldError;
};
// A ball radius falls in the gap between two radius classes.
struct NoClass : FieldError {
  using FieldError::FieldError;
};

struct PairPQ {
  AlgebraicInt p, q;
};

// ---------------------------------------------------------------------------
// quality and best numerators

// Approximation quality of (p, q) at z; throws ZeroElement for q = 0.
// Residues are evaluated in double-double so values far below 1e-16 are still
// meaningful.
double quality(const NumberField& K, const WeightVector& r, const ComplexVector& z,
               const AlgebraicInt& p, const AlgebraicInt& q);

// The numerator minimising the quality for a fixed denominator: least-squares
// rounding followed by a +-1 box refinement.
AlgebraicInt best_p(const NumberField& K, const WeightVector& r, const ComplexVector& z,
                    const AlgebraicInt& q);

// ---------------------------------------------------------------------------
// approximation boxes

// Polydisk of targets that (p, q) approximates to quality eps, centred at the
// ratio point sigma(p)/sigma(q).  Only the weighted embeddings carry a
// constraint.
struct DeltaBox {
  std::vector<int> sigma;     // embedding indices (the weighted ones)
  std::vector<cplx> center;   // sigma(p)/sigma(q)
  std::vector<double> radius; // eps / (|sigma(q)| * N(q)^(r_sigma))
  bool contains(const ComplexVector& z, double slack = 0.0) const;
};

DeltaBox delta_box(const NumberField& K, const WeightVector& r, double eps,
                   const AlgebraicInt& p, const AlgebraicInt& q);

// Ratio point sigma(p)/sigma(q) in all n coordinates.
ComplexVector ratio_point(const NumberField& K, const PairPQ& pair);

// Exact test that two pairs define the same ratio point: p1 q2 == p2 q1.
bool same_ratio(const NumberField& K, const PairPQ& a, const PairPQ& b);

// ---------------------------------------------------------------------------
// strategy constants and partitions

struct GameConstants {
  double beta = 0.0;
  double gamma = 0.0;
  double rho0 = 0.0;
  int R = 0;        // radius contraction ratio between classes
  double eps = 0.0; // certified badness level, rho0 / (4 R^(4n))
  double c_K = 1.0; // covolume-normalised packing constant
  int n = 0;        // field degree

  // Height threshold of level l >= 0: eps * R^l / rho0.
  double H_level(int l) const;
};

// Smallest admissible contraction ratio R >= 2 for the given parameters, plus
// the derived eps and height ladder.  Throws NotAdmissible if the parameters
// are out of range or no R below 10^9 satisfies the budget inequality
// n / (R^gamma - 1) <= (beta^2 / 2)^gamma.
GameConstants pick_constants(const NumberField& K, const WeightVector& r, double beta,
                             double gamma, double rho0);

// Radius class of a ball: the l >= 0 with beta rho0 / R^l < rho <= rho0 / R^l.
// When beta > 1/R the classes leave gaps and radii inside a gap have no class.
int ball_class(const GameConstants& C, double rho);
std::optional<int> try_ball_class(const GameConstants& C, double rho);

struct PartitionIndex {
  int m = 0;      // height band: H_m <= H(q) < H_{m+1}  (m = 0 collects H < H_1)
  int l = 0;      // refinement: H_m R^{4n(l-1)} <= N(q)^{2 r_max} < H_m R^{4nl}
  int m_dec = 0;  // decomposition level m - l
  bool orphan = false;  // m - l < 0: the pair escapes the decomposition
};

PartitionIndex partition_index(const GameConstants& C, const NumberField& K,
                               const WeightVector& r, const AlgebraicInt& q);

// ---------------------------------------------------------------------------
// pair searches

// All pairs (p, q), q != 0, with |sigma_j(q) z_j + sigma_j(p)| <= ubounds[j]
// and |sigma_j(q)| <= wbounds[j] for every embedding j, one representative per
// +-(p, q).  Candidates come from short-vector enumeration in a scaled
// realified lattice and are confirmed against the exact bounds in
// double-double, so tiny ubounds are honoured rather than lost to rounding.
std::vector<PairPQ> pairs_in_region(const NumberField& K, const ComplexVector& z,
                                    const std::vector<double>& ubounds,
                                    const std::vector<double>& wbounds);

// Pairs of height band H_band <= H(q) < H_{band+1} (ladder of C) whose box
// Delta_eps(p, q) meets the closed ball B(center, rho).  Any two of them share
// their ratio point when the ball is small enough; callers can audit that with
// same_ratio.
//
// refine > 0 additionally restricts to denominators of refinement level
// `refine` (N(q)^{2 r_max} in [H_band R^{4n(refine-1)}, H_band R^{4n refine})),
// which keeps the search window small for the game strategy; refine = 0 means
// the whole band.  For balanced weights every denominator has level 1, so
// refine >= 2 is detected as empty without searching.
std::vector<PairPQ> resonant_pairs(const NumberField& K, const WeightVector& r,
                                   const GameConstants& C, const ComplexVector& center,
                                   double rho, int band, int refine = 0);

// ---------------------------------------------------------------------------
// badness certificates

struct WitnessReport {
  bool bad = false;       // no admissible pair with quality < eps up to Hmax
  double eps = 0.0;
  double Hmax = 0.0;
  double min_quality = 0.0;
  std::optional<PairPQ> minimizer;
  std::size_t pairs_checked = 0;
};

// Exhaustively certify eps-badness of z against every admissible denominator
// of height at most Hmax.  Heights are swept in geometric bands, each band
// searched through the lattice kernel; bands are independent, so Exec::Parallel
// distributes them.
WitnessReport in_bad_eps(const NumberField& K, const WeightVector& r, const ComplexVector& z,
                         double eps, double Hmax, Exec mode = Exec::Serial);

struct BadConstantResult {
  double value = 0.0;   // min over scanned q of quality(z, best_p(q), q)
  PairPQ argmin;
  std::size_t denominators = 0;
};

// Brute-force reference: enumerate every denominator with max |sigma(q)| <= Qmax
// and take the best quality.  Independent of the lattice kernel on purpose; tests
// play the two routes against each other.  eps_zero bounds |sigma(q)| on
// weight-0 embeddings (ignored when all weights are positive).
BadConstantResult bad_constant_up_to_height(const NumberField& K, const WeightVector& r,
                                            const ComplexVector& z, double Qmax,
                                            double eps_zero = 1.0, Exec mode = Exec::Serial);

}  // namespace badflow
