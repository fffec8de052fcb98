#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "badflow/field.hpp"
#include "doctest.h"

using namespace badflow;

namespace {

NumberField gauss() { return make_field(FieldSpec::quadratic(1)); }
NumberField eisen() { return make_field(FieldSpec::quadratic(3)); }

}  // namespace

TEST_SUITE_BEGIN("field");

TEST_CASE("quadratic construction: Q(i)") {
  NumberField K = gauss();
  CHECK(K.n == 2);
  CHECK(K.discriminant == -4);
  CHECK(K.class_number_one);
  // basis {1, i}: sigma_1 maps the generator to +i
  CHECK(K.emb[0][0] == cplx(1.0, 0.0));
  CHECK(std::abs(K.emb[0][1] - cplx(0.0, 1.0)) < 1e-15);
  CHECK(std::abs(K.emb[1][1] - cplx(0.0, -1.0)) < 1e-15);
}

TEST_CASE("quadratic construction: Q(sqrt(-3)) uses the half-integer basis") {
  NumberField K = eisen();
  CHECK(K.discriminant == -3);
  CHECK(K.class_number_one);
  cplx w = K.emb[0][1];
  CHECK(w.real() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(w.imag() == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-14));
}

TEST_CASE("discriminants follow the 4D / D split") {
  CHECK(make_field(FieldSpec::quadratic(2)).discriminant == -8);
  CHECK(make_field(FieldSpec::quadratic(7)).discriminant == -7);
  CHECK(make_field(FieldSpec::quadratic(11)).discriminant == -11);
  CHECK(make_field(FieldSpec::quadratic(5)).discriminant == -20);
}

TEST_CASE("the nine class-number-one discriminants are flagged") {
  for (std::int64_t D : {1, 2, 3, 7, 11, 19, 43, 67, 163})
    CHECK(make_field(FieldSpec::quadratic(D)).class_number_one);
  for (std::int64_t D : {5, 6, 10, 13, 165})
    CHECK_FALSE(make_field(FieldSpec::quadratic(D)).class_number_one);
}

TEST_CASE("quadratic spec validation") {
  CHECK_THROWS_AS(make_field(FieldSpec::quadratic(0)), FieldError);
  CHECK_THROWS_AS(make_field(FieldSpec::quadratic(4)), FieldError);   // not square-free
  CHECK_THROWS_AS(make_field(FieldSpec::quadratic(12)), FieldError);  // 4 | 12
}

TEST_CASE("embeddings come in adjacent conjugate pairs") {
  for (std::int64_t D : {1, 2, 3, 7}) {
    NumberField K = make_field(FieldSpec::quadratic(D));
    for (int j = 0; j < K.n; j += 2) {
      CHECK(K.conj_perm[j] == j + 1);
      CHECK(K.conj_perm[j + 1] == j);
      for (int k = 0; k < K.n; ++k)
        CHECK(std::abs(K.emb[j + 1][k] - std::conj(K.emb[j][k])) < 1e-14);
    }
    CHECK(K.emb[0][1].imag() > 0.0);  // orientation of sigma_1
  }
}

TEST_CASE("polynomial field: x^2 + 1 agrees with the quadratic route") {
  NumberField K = make_field(FieldSpec::poly({1, 0, 1}));
  CHECK(K.n == 2);
  CHECK(K.discriminant == -4);
  CHECK(std::abs(K.emb[0][1] - cplx(0.0, 1.0)) < 1e-12);
}

TEST_CASE("polynomial field: x^4 + 2 certifies irreducibility") {
  NumberField K = make_field(FieldSpec::poly({2, 0, 0, 0, 1}));
  CHECK(K.n == 4);
  // disc(x^4 + a) = 256 a^3; positive, as for any field with two conjugate pairs
  CHECK(K.discriminant == 2048);
}

TEST_CASE("polynomial field: x^4 + 1 needs the trusted flag") {
  // x^4 + 1 is irreducible over Q but splits modulo every prime, so the
  // small-prime certificate can never fire.
  FieldSpec s = FieldSpec::poly({1, 0, 0, 0, 1});
  CHECK_THROWS_AS(make_field(s), NotAField);
  s.trusted = true;
  NumberField K = make_field(s);
  CHECK(K.n == 4);
  CHECK(K.discriminant == 256);
}

TEST_CASE("polynomial field: rejections") {
  // x^4 + 4 = (x^2-2x+2)(x^2+2x+2)
  CHECK_THROWS_AS(make_field(FieldSpec::poly({4, 0, 0, 0, 1})), NotAField);
  // x^2 - 2 is totally real
  CHECK_THROWS_AS(make_field(FieldSpec::poly({-2, 0, 1})), NotTotallyImaginary);
  // x^3 + 2 has one real root
  CHECK_THROWS_AS(make_field(FieldSpec::poly({2, 0, 0, 1})), NotTotallyImaginary);
  // non-monic
  CHECK_THROWS_AS(make_field(FieldSpec::poly({1, 0, 2})), FieldError);
}

TEST_CASE("embedding examples on Q(i)") {
  NumberField K = gauss();
  AlgebraicInt q{{1, 1}};  // 1 + i
  auto v = embed(K, q);
  CHECK(std::abs(v[0] - cplx(1.0, 1.0)) < 1e-15);
  CHECK(std::abs(v[1] - cplx(1.0, -1.0)) < 1e-15);
  auto z = embed(K, K.zero());
  CHECK(std::abs(z[0]) == 0.0);
  auto three = embed(K, AlgebraicInt{{3, 0}});
  CHECK(std::abs(three[0] - cplx(3.0, 0.0)) < 1e-15);
  CHECK(std::abs(three[1] - cplx(3.0, 0.0)) < 1e-15);
}

TEST_CASE("the embedding is a ring homomorphism on random elements") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<std::int64_t> U(-50, 50);
  for (auto D : {std::int64_t(1), std::int64_t(3), std::int64_t(7)}) {
    NumberField K = make_field(FieldSpec::quadratic(D));
    for (int it = 0; it < 333; ++it) {
      AlgebraicInt a{{U(rng), U(rng)}}, b{{U(rng), U(rng)}};
      auto va = embed(K, a), vb = embed(K, b);
      auto vs = embed(K, add(K, a, b));
      auto vp = embed(K, mul(K, a, b));
      for (int j = 0; j < K.n; ++j) {
        CHECK(std::abs(vs[j] - (va[j] + vb[j])) < 1e-10 * (1.0 + std::abs(vs[j])));
        CHECK(std::abs(vp[j] - va[j] * vb[j]) < 1e-10 * (1.0 + std::abs(vp[j])));
      }
    }
  }
}

TEST_CASE("field norms") {
  NumberField K = gauss();
  CHECK(field_norm(K, AlgebraicInt{{1, 1}}) == 2);
  CHECK(field_norm(K, K.one()) == 1);
  NumberField E = eisen();
  CHECK(field_norm(E, AlgebraicInt{{0, 1}}) == 1);  // omega_3 is a unit
  // |N(q)| matches the product of embedding moduli
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::int64_t> U(-50, 50);
  for (int it = 0; it < 200; ++it) {
    AlgebraicInt q{{U(rng), U(rng)}};
    if (q.is_zero()) continue;
    auto v = embed(K, q);
    double prod = std::abs(v[0]) * std::abs(v[1]);
    CHECK(std::abs(std::abs(double(field_norm(K, q))) - prod) < 1e-8 * prod);
  }
}

TEST_CASE("conjugation is the basis-level involution") {
  for (auto D : {std::int64_t(1), std::int64_t(3)}) {
    NumberField K = make_field(FieldSpec::quadratic(D));
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::int64_t> U(-20, 20);
    for (int it = 0; it < 100; ++it) {
      AlgebraicInt a{{U(rng), U(rng)}};
      AlgebraicInt c = conj_element(K, a);
      auto va = embed(K, a), vc = embed(K, c);
      CHECK(std::abs(vc[0] - std::conj(va[0])) < 1e-12);
      CHECK(conj_element(K, c) == a);
    }
  }
}

TEST_CASE("weight vectors") {
  WeightVector r = WeightVector::balanced(2);
  CHECK(r.r[0] == doctest::Approx(0.5));
  CHECK(r.sigma_plus.size() == 2);
  CHECK(r.sigma_zero.empty());
  CHECK(r.r_max == doctest::Approx(0.5));
  CHECK(r.is_balanced());

  WeightVector w = WeightVector::make({1.0, 0.0});
  CHECK(w.sigma_plus == std::vector<int>{0});
  CHECK(w.sigma_zero == std::vector<int>{1});
  CHECK(w.omega == 0);
  CHECK(w.r_max == doctest::Approx(1.0));
  CHECK_FALSE(w.is_balanced());

  // ties go to the lowest index
  WeightVector t = WeightVector::make({0.5, 0.5});
  CHECK(t.omega == 0);

  CHECK_THROWS_AS(WeightVector::make({0.7, 0.2}), FieldError);   // sum != 1
  CHECK_THROWS_AS(WeightVector::make({1.2, -0.2}), FieldError);  // negative
}

TEST_CASE("weight vacuity diagnostic for zero weight on a conjugate partner") {
  NumberField K = gauss();
  WeightVector e1 = WeightVector::make({1.0, 0.0});
  auto note = weight_vacuity_note(K, e1);
  REQUIRE(note.has_value());
  CHECK(note->find("conjugate") != std::string::npos);
  CHECK_FALSE(weight_vacuity_note(K, WeightVector::balanced(2)).has_value());
}

TEST_CASE("weighted norm and height examples") {
  NumberField K = gauss();
  WeightVector r = WeightVector::balanced(2);
  AlgebraicInt q1i{{1, 1}}, one = K.one(), two{{2, 0}};
  CHECK(weighted_norm(K, r, q1i) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(weighted_norm(K, r, one) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(height(K, r, q1i) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(height(K, r, one) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(height(K, r, two) == doctest::Approx(4.0).epsilon(1e-12));

  WeightVector e1 = WeightVector::make({1.0, 0.0});
  CHECK(weighted_norm(K, e1, two) == doctest::Approx(2.0).epsilon(1e-12));

  CHECK_THROWS_AS(weighted_norm(K, r, K.zero()), ZeroElement);
  CHECK_THROWS_AS(height(K, r, K.zero()), ZeroElement);
}

TEST_CASE("height chain 1 <= N^(1/n) <= H <= N^(2 r_max)") {
  for (auto D : {std::int64_t(1), std::int64_t(3)}) {
    NumberField K = make_field(FieldSpec::quadratic(D));
    WeightVector r = WeightVector::balanced(2);
    for (const AlgebraicInt& q : enumerate_bounded(K, 8.0)) {
      double N = weighted_norm(K, r, q);
      double H = height(K, r, q);
      CHECK(std::pow(N, 1.0 / K.n) >= 1.0 - 1e-9);
      CHECK(std::pow(N, 1.0 / K.n) <= H * (1.0 + 1e-9));
      CHECK(H <= std::pow(N, 2.0 * r.r_max) * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("enumerate_bounded counts on Q(i)") {
  NumberField K = gauss();
  CHECK(enumerate_bounded(K, 2.0).size() == 12);  // |q|^2 in {1, 2, 4}
  auto units = enumerate_bounded(K, 1.0);
  CHECK(units.size() == 4);
  CHECK(enumerate_bounded(K, 0.5).empty());
  // no duplicates, bound honoured
  auto v = enumerate_bounded(K, 5.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    auto e = embed(K, v[i]);
    CHECK(std::max(std::abs(e[0]), std::abs(e[1])) <= 5.0 + 1e-9);
    for (std::size_t j = i + 1; j < v.size(); ++j) CHECK_FALSE(v[i] == v[j]);
  }
}

TEST_CASE("enumerate_bounded: serial and parallel agree") {
  NumberField K = eisen();
  auto s = enumerate_bounded(K, 9.0, Exec::Serial);
  auto p = enumerate_bounded(K, 9.0, Exec::Parallel);
  REQUIRE(s.size() == p.size());
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i] == p[i]);
}

TEST_CASE("in_OK_r_eps membership") {
  NumberField K = gauss();
  WeightVector bal = WeightVector::balanced(2);
  WeightVector e1 = WeightVector::make({1.0, 0.0});
  AlgebraicInt q1i{{1, 1}};
  CHECK(in_OK_r_eps(K, bal, 0.1, q1i));  // Sigma_0 empty: vacuous
  CHECK_FALSE(in_OK_r_eps(K, e1, 0.5, q1i));
  // conjugate embeddings share modulus, so eps < 1 rejects everything
  for (const AlgebraicInt& q : enumerate_bounded(K, 3.0))
    CHECK_FALSE(in_OK_r_eps(K, e1, 0.99, q));
  CHECK_THROWS_AS(in_OK_r_eps(K, bal, 0.1, K.zero()), ZeroElement);
}

TEST_CASE("field spec JSON round-trip") {
  FieldSpec q = FieldSpec::quadratic(7);
  FieldSpec q2 = FieldSpec::from_json(q.to_json());
  CHECK(q2.kind == FieldSpec::Kind::Quadratic);
  CHECK(q2.D == 7);

  FieldSpec p = FieldSpec::poly({2, 0, 0, 0, 1});
  FieldSpec p2 = FieldSpec::from_json(p.to_json());
  CHECK(p2.kind == FieldSpec::Kind::Poly);
  CHECK(p2.coeffs == std::vector<std::int64_t>{2, 0, 0, 0, 1});
}

TEST_CASE("from_coords validates the coordinate length") {
  NumberField K = eisen();
  CHECK(K.from_coords({3, -2}) == AlgebraicInt{{3, -2}});
  CHECK_THROWS_AS(K.from_coords({1, 2, 3}), FieldError);
}

TEST_SUITE_END();
