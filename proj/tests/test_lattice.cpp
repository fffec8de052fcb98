#include <cmath>
#include <complex>
#include <random>
#include <set>
#include <vector>

#include "badflow/lattice.hpp"
#include "doctest.h"

using namespace badflow;

namespace {

NumberField gauss() { return make_field(FieldSpec::quadratic(1)); }

ComplexVector diag(cplx z) { return ComplexVector{z, std::conj(z)}; }

Matrix random_basis(std::mt19937_64& rng, int rank, int dim) {
  std::uniform_real_distribution<double> U(-5.0, 5.0);
  while (true) {
    Matrix B(rank, std::vector<double>(dim));
    for (auto& row : B)
      for (auto& x : row) x = U(rng);
    if (std::abs(det(gram(B))) > 1e-4) return B;
  }
}

// Classic Gram-Schmidt data for auditing the reduction conditions.
struct GSData {
  Matrix bstar;
  Matrix mu;
};

GSData gram_schmidt(const Matrix& B) {
  int k = int(B.size());
  GSData g{B, Matrix(k, std::vector<double>(k, 0.0))};
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < i; ++j) {
      double num = 0.0, den = 0.0;
      for (std::size_t c = 0; c < B[i].size(); ++c) {
        num += B[i][c] * g.bstar[j][c];
        den += g.bstar[j][c] * g.bstar[j][c];
      }
      g.mu[i][j] = num / den;
      for (std::size_t c = 0; c < B[i].size(); ++c) g.bstar[i][c] -= g.mu[i][j] * g.bstar[j][c];
    }
  }
  return g;
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

TEST_SUITE_BEGIN("lattice");

TEST_CASE("block elements: flow, shear, composition") {
  WeightVector r = WeightVector::balanced(2);
  ComplexVector z = diag(cplx(0.3, 0.7));
  BlockDiag f = flow_element(r, 0.8);
  BlockDiag s = shear_element(z);
  CHECK_NOTHROW(check_unimodular(f));
  CHECK_NOTHROW(check_unimodular(s));
  CHECK_NOTHROW(check_unimodular(compose(f, s)));
  CHECK(std::abs(f.g[0][0] - std::exp(0.4)) < 1e-15);
  CHECK(std::abs(f.g[0][3] - std::exp(-0.4)) < 1e-15);
  CHECK(s.g[1][1] == std::conj(cplx(0.3, 0.7)));

  BlockDiag scaled;
  scaled.g.push_back({cplx(2, 0), cplx(0, 0), cplx(0, 0), cplx(1, 0)});
  CHECK_THROWS_AS(check_unimodular(scaled), NotUnimodular);

  // shear action: u picks up z w, w is untouched
  std::vector<cplx> uw{cplx(1, 1), cplx(0, 2), cplx(3, 0), cplx(-1, 1)};
  auto out = apply_block(s, uw);
  CHECK(std::abs(out[0] - (uw[0] + z[0] * uw[2])) < 1e-15);
  CHECK(std::abs(out[1] - (uw[1] + z[1] * uw[3])) < 1e-15);
  CHECK(out[2] == uw[2]);
  CHECK(out[3] == uw[3]);
  CHECK_THROWS_AS(apply_block(s, std::vector<cplx>{cplx(1, 0)}), std::invalid_argument);
}

TEST_CASE("psi_matrix realises the block action and the group law") {
  WeightVector r = WeightVector::balanced(2);
  ComplexVector z = diag(cplx(-0.4, 0.9));
  BlockDiag a = flow_element(r, 0.3);
  BlockDiag b = shear_element(z);
  auto Ma = psi_matrix(a), Mb = psi_matrix(b), Mab = psi_matrix(compose(a, b));

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int it = 0; it < 25; ++it) {
    std::vector<cplx> uw(4);
    for (auto& c : uw) c = cplx(U(rng), U(rng));
    auto direct = apply_block(compose(a, b), uw);
    // matrix route: Mab * uw
    for (int i = 0; i < 4; ++i) {
      cplx acc(0, 0);
      for (int j = 0; j < 4; ++j) acc += Mab[i][j] * uw[j];
      CHECK(std::abs(acc - direct[i]) < 1e-12);
    }
  }
  // homomorphism at the matrix level
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      cplx acc(0, 0);
      for (int k = 0; k < 4; ++k) acc += Ma[i][k] * Mb[k][j];
      CHECK(std::abs(acc - Mab[i][j]) < 1e-9);
    }
}

TEST_CASE("the base lattice has covolume 1 and systole 1") {
  NumberField K = gauss();
  auto L = build_LK(K);
  CHECK(L.rows.size() == 4);
  CHECK(L.rows[0].size() == 8);
  CHECK(L.gens.size() == 4);
  CHECK(L.scale == doctest::Approx(std::pow(4.0, -0.25)).epsilon(1e-15));
  CHECK(det(gram(L.rows)) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(shortest_vector(L.rows).norm == doctest::Approx(1.0).epsilon(1e-9));
  // each generator pair has exactly one nonzero side
  for (const auto& pq : L.gens) CHECK(pq.p.is_zero() != pq.q.is_zero());
}

TEST_CASE("orbit lattice: identity at the origin, covolume along the flow") {
  NumberField K = gauss();
  WeightVector r = WeightVector::balanced(2);
  auto L = build_LK(K);
  auto O = orbit_lattice(K, r, diag(cplx(0, 0)), 0.0);
  CHECK(O.rows == L.rows);  // shear by 0 and flow by 0 are exact identities
  ComplexVector z = diag(cplx(0.3, 0.7));
  for (double t : {0.5, 2.0, 5.0})
    CHECK(std::sqrt(std::abs(det(gram(orbit_lattice(K, r, z, t).rows)))) ==
          doctest::Approx(1.0).epsilon(1e-8));
  CHECK_THROWS_AS(orbit_lattice(K, r, ComplexVector{cplx(0, 0)}, 0.0), std::invalid_argument);
}

TEST_CASE("flow cocycle: advancing time is a block scaling of the rows") {
  NumberField K = gauss();
  WeightVector r = WeightVector::balanced(2);
  ComplexVector z = diag(cplx(0.21, 0.55));
  double t = 1.3, s = 0.9;
  auto O1 = orbit_lattice(K, r, z, t);
  auto O2 = orbit_lattice(K, r, z, t + s);
  REQUIRE(O1.gens.size() == O2.gens.size());
  for (std::size_t i = 0; i < O1.rows.size(); ++i)
    for (int k = 0; k < 2 * K.n; ++k) {
      // coordinates 0..n-1 are u-blocks (scaled up), n..2n-1 w-blocks (down)
      double f = k < K.n ? std::exp(r.r[k] * s) : std::exp(-r.r[k - K.n] * s);
      CHECK(O2.rows[i][2 * k] == doctest::Approx(O1.rows[i][2 * k] * f).epsilon(1e-9));
      CHECK(O2.rows[i][2 * k + 1] == doctest::Approx(O1.rows[i][2 * k + 1] * f).epsilon(1e-9));
    }
}

TEST_CASE("LLL: size reduction, Lovasz condition, unimodular transform") {
  std::mt19937_64 rng(2024);
  for (int it = 0; it < 20; ++it) {
    Matrix B = random_basis(rng, 4, 4);
    auto red = lll_reduce(B, 0.99);
    REQUIRE(red.basis.size() == 4);
    auto gs = gram_schmidt(red.basis);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < i; ++j) CHECK(std::abs(gs.mu[i][j]) <= 0.5 + 1e-9);
    for (int i = 1; i < 4; ++i)
      CHECK(norm2(gs.bstar[i]) >=
            (0.99 - gs.mu[i][i - 1] * gs.mu[i][i - 1]) * norm2(gs.bstar[i - 1]) - 1e-9);
    CHECK(transform_det_abs(red.transform) == 1);
    // transform * original reproduces the reduced rows
    for (int i = 0; i < 4; ++i)
      for (int c = 0; c < 4; ++c) {
        double acc = 0.0;
        for (int j = 0; j < 4; ++j) acc += double(red.transform[i][j]) * B[j][c];
        CHECK(acc == doctest::Approx(red.basis[i][c]).epsilon(1e-9).scale(1.0));
      }
    // the classic quality bound for the first reduced vector
    auto sv = shortest_vector(B);
    double b1 = std::sqrt(norm2(red.basis[0]));
    CHECK(sv.norm <= b1 * (1.0 + 1e-9));
    CHECK(b1 <= std::pow(2.0, 1.5) * sv.norm * (1.0 + 1e-9));
    // the reported coefficients reproduce the reported vector
    for (std::size_t c = 0; c < sv.vec.size(); ++c) {
      double acc = 0.0;
      for (int j = 0; j < 4; ++j) acc += double(sv.coeffs[j]) * B[j][c];
      CHECK(acc == doctest::Approx(sv.vec[c]).epsilon(1e-9).scale(1.0));
    }
    CHECK(std::sqrt(norm2(sv.vec)) == doctest::Approx(sv.norm).epsilon(1e-12));
  }
  // rectangular rank-3 basis in R^5 works too
  Matrix R3 = random_basis(rng, 3, 5);
  auto red3 = lll_reduce(R3, 0.99);
  CHECK(red3.basis.size() == 3);
  CHECK(transform_det_abs(red3.transform) == 1);
}

TEST_CASE("shortest_vector is homogeneous and rejects dependent rows") {
  Matrix B{{2.0, 1.0, 0.3, -0.7}, {0.0, 3.0, 1.1, 0.2}, {4.0, -1.0, 0.0, 1.0},
           {1.0, 1.0, 1.0, 1.0}};
  auto s1 = shortest_vector(B);
  Matrix B3 = B;
  for (auto& row : B3)
    for (auto& x : row) x *= 3.0;
  CHECK(shortest_vector(B3).norm == doctest::Approx(3.0 * s1.norm).epsilon(1e-12));
  CHECK_THROWS_AS(lll_reduce(Matrix{{1.0, 0.0}, {2.0, 0.0}}), DegenerateLattice);
  CHECK_THROWS_AS(shortest_vector(Matrix{{1.0, 2.0}, {0.5, 1.0}}), DegenerateLattice);
}

TEST_CASE("enumerate_short: canonical representatives and the node cap") {
  Matrix I2{{1.0, 0.0}, {0.0, 1.0}};
  auto close = enumerate_short(I2, 1.001);
  std::set<std::vector<std::int64_t>> got(close.begin(), close.end());
  CHECK(got == std::set<std::vector<std::int64_t>>{{0, 1}, {1, 0}});
  auto wider = enumerate_short(I2, 2.001);
  CHECK(wider.size() == 4);  // adds the two diagonal classes, signs folded
  std::set<std::vector<std::int64_t>> got2(wider.begin(), wider.end());
  CHECK(got2.count({1, 1}) == 1);
  CHECK(got2.count({-1, 1}) == 1);
  // every representative's last nonzero coefficient is positive
  for (const auto& c : wider) {
    std::int64_t last = 0;
    for (auto x : c)
      if (x != 0) last = x;
    CHECK(last > 0);
  }
  Matrix I4{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
  CHECK_THROWS_AS(enumerate_short(I4, 100.0, 10), ReductionError);
}

TEST_CASE("determinants and gram matrices") {
  CHECK(det(Matrix{{1, 0}, {0, 1}}) == doctest::Approx(1.0));
  CHECK(det(Matrix{{2, 1}, {1, 2}}) == doctest::Approx(3.0));
  CHECK(det(Matrix{{0, 1}, {1, 0}}) == doctest::Approx(-1.0));
  auto g = gram(Matrix{{3, 4}, {0, 5}});
  CHECK(g[0][0] == doctest::Approx(25.0));
  CHECK(g[0][1] == doctest::Approx(20.0));
  CHECK(g[1][1] == doctest::Approx(25.0));
}

TEST_CASE("ratio points escape at rate r_max") {
  NumberField K = gauss();
  WeightVector r = WeightVector::balanced(2);
  ComplexVector zr = diag(cplx(0.5, -0.5));  // ratio point of (1, 1+i)
  auto pr = systole_profile(K, r, zr, 12.0, 49, true, Exec::Serial);
  auto v = classify_orbit(pr, 0.1, 0.05);
  CHECK(v.cls == OrbitClass::Escaping);
  CHECK(v.tail_slope == doctest::Approx(-0.5).epsilon(1e-9));
  // deep in the cusp the witness pair locks onto the ratio
  AlgebraicInt p0{{-1, 0}}, q0{{1, 1}};
  for (int i = 40; i < 49; ++i) CHECK(same_ratio(K, pr.witness[i], PairPQ{p0, q0}));

  // the origin is the ratio point of (0, 1)
  auto pz = systole_profile(K, r, diag(cplx(0, 0)), 12.0, 49, true, Exec::Serial);
  auto vz = classify_orbit(pz, 0.1, 0.05);
  CHECK(vz.cls == OrbitClass::Escaping);
  CHECK(vz.tail_slope == doctest::Approx(-0.5).epsilon(1e-9));
  CHECK(vz.min_systole == doctest::Approx(std::exp(-6.0)).epsilon(1e-9));
}

TEST_CASE("bounded targets: pinned minima, parallel agreement, float route") {
  NumberField K = gauss();
  WeightVector r = WeightVector::balanced(2);
  ComplexVector zb = diag(cplx(0.70710678118654752, 0.5));
  auto pp = systole_profile(K, r, zb, 20.0, 81, true, Exec::Parallel);
  auto ps = systole_profile(K, r, zb, 20.0, 81, true, Exec::Serial);
  for (int i = 0; i < 81; ++i) CHECK(pp.systole[i] == ps.systole[i]);
  auto v = classify_orbit(pp, 0.4, 0.05);
  CHECK(v.cls == OrbitClass::Bounded);
  CHECK(v.min_systole == doctest::Approx(0.84090957825263291).epsilon(1e-13));

  ComplexVector zs = diag(cplx(1.3002425902201205, 0.62481053384382657));
  auto pq = systole_profile(K, r, zs, 20.0, 81, true, Exec::Parallel);
  auto vq = classify_orbit(pq, 0.4, 0.05);
  CHECK(vq.cls == OrbitClass::Bounded);
  CHECK(vq.min_systole == doctest::Approx(0.97136746047928069).epsilon(1e-13));

  // the float route only diverges deep along the flow
  auto pf = systole_profile(K, r, zb, 4.0, 17, false, Exec::Serial);
  auto pe = systole_profile(K, r, zb, 4.0, 17, true, Exec::Serial);
  for (int i = 0; i < 17; ++i)
    CHECK(pf.systole[i] == doctest::Approx(pe.systole[i]).epsilon(1e-12));
}

TEST_CASE("classify_orbit: verdicts need both signals") {
  auto synth = [](double level, double rate) {
    OrbitProfile p;
    for (int i = 0; i < 10; ++i) {
      p.t.push_back(double(i));
      p.systole.push_back(level * std::exp(-rate * i));
    }
    return p;
  };
  // steep drop below the threshold: escaping
  CHECK(classify_orbit(synth(1.0, 0.3), 0.1, 0.05).cls == OrbitClass::Escaping);
  // flat and comfortably above: bounded
  CHECK(classify_orbit(synth(1.0, 0.0), 0.1, 0.05).cls == OrbitClass::Bounded);
  // falling but still above threshold: neither verdict is safe
  CHECK(classify_orbit(synth(2.0, 0.3), 0.1, 0.05).cls == OrbitClass::Inconclusive);
  // flat but already below threshold: also inconclusive
  CHECK(classify_orbit(synth(0.05, 0.0), 0.1, 0.05).cls == OrbitClass::Inconclusive);

  OrbitProfile tiny = synth(1.0, 0.0);
  tiny.t.resize(4);
  tiny.systole.resize(4);
  CHECK_THROWS_AS(classify_orbit(tiny, 0.1, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(classify_orbit(synth(1.0, 0.0), 0.1, 0.0), std::invalid_argument);

  NumberField K = gauss();
  WeightVector r = WeightVector::balanced(2);
  CHECK_THROWS_AS(systole_profile(K, r, diag(cplx(0, 0)), 12.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(systole_profile(K, r, diag(cplx(0, 0)), -1.0, 9), std::invalid_argument);
}

TEST_CASE("shortest orbit vectors decay at the ratio rate") {
  NumberField K = gauss();
  WeightVector r = WeightVector::balanced(2);
  ComplexVector zr = diag(cplx(0.5, -0.5));
  auto a = shortest_orbit_vector(K, r, zr, 8.0);
  auto b = shortest_orbit_vector(K, r, zr, 10.0);
  CHECK(b.norm / a.norm == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
  CHECK(same_ratio(K, a.pair, PairPQ{AlgebraicInt{{-1, 0}}, AlgebraicInt{{1, 1}}}));
  CHECK(shortest_orbit_vector(K, r, diag(cplx(0, 0)), 0.0).norm == doctest::Approx(1.0));
}

TEST_SUITE_END();
