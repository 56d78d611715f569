#include <catch2/catch.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "relfreq/hilbert.hpp"
#include "relfreq/rng.hpp"

using namespace relfreq;
using hilbert::Projector;
using hilbert::StateVector;

namespace {

StateVector make_state(std::initializer_list<Complex> amplitudes) {
  CVector v(static_cast<Index>(amplitudes.size()));
  Index i = 0;
  for (Complex z : amplitudes) v(i++) = z;
  return StateVector(v);
}

Projector diag_projector(std::initializer_list<double> diagonal) {
  CMatrix m = CMatrix::Zero(static_cast<Index>(diagonal.size()),
                            static_cast<Index>(diagonal.size()));
  Index i = 0;
  for (double d : diagonal) m(i, i) = d, ++i;
  return Projector(m);
}

// Test-local Kronecker oracle for two factors, straight from the index
// definition, independent of the library fold.
CVector kron_oracle(const CVector& a, const CVector& b) {
  CVector out(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i)
    for (Index j = 0; j < b.size(); ++j) out(i * b.size() + j) = a(i) * b(j);
  return out;
}

}  // namespace

TEST_CASE("probability of an event in a state", "[hilbert]") {
  Projector p = diag_projector({1.0, 0.0});

  SECTION("eigenstate gives certainty") {
    CHECK(hilbert::probability(make_state({1.0, 0.0}), p) == Approx(1.0).margin(1e-15));
  }
  SECTION("orthogonal state gives zero") {
    CHECK(hilbert::probability(make_state({0.0, 1.0}), p) == Approx(0.0).margin(1e-15));
  }
  SECTION("superposition weight |<0|psi>|^2") {
    StateVector psi = make_state({std::sqrt(0.3), std::sqrt(0.7)});
    CHECK(hilbert::probability(psi, p) == Approx(0.3).margin(1e-12));
  }
  SECTION("dimension mismatch is an error") {
    StateVector psi = make_state({1.0, 0.0, 0.0});
    CHECK_THROWS_AS(hilbert::probability(psi, p), Error);
  }
}

TEST_CASE("projector construction validates its invariants", "[hilbert]") {
  SECTION("non-Hermitian rejected") {
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 1) = 0.5;
    CHECK_THROWS_AS(Projector(m), Error);
  }
  SECTION("Hermitian but not idempotent rejected") {
    CMatrix m = CMatrix::Identity(2, 2) * 0.5;
    CHECK_THROWS_AS(Projector(m), Error);
  }
  SECTION("zero and identity are valid, with ranks 0 and d") {
    CHECK(Projector(CMatrix::Zero(3, 3)).rank() == 0);
    CHECK(Projector(CMatrix::Identity(3, 3)).rank() == 3);
  }
  SECTION("non-unit state rejected") {
    CVector v(2);
    v << 0.5, 0.5;
    CHECK_THROWS_AS(StateVector(v), Error);
  }
}

TEST_CASE("orthocomplement", "[hilbert]") {
  SECTION("diag(1,0) -> diag(0,1)") {
    Projector perp = hilbert::orthocomplement(diag_projector({1.0, 0.0}));
    CHECK(max_abs_diff(perp.matrix(), diag_projector({0.0, 1.0}).matrix()) == 0.0);
  }
  SECTION("identity -> zero on d=3") {
    Projector perp = hilbert::orthocomplement(Projector(CMatrix::Identity(3, 3)));
    CHECK(max_abs(perp.matrix()) == 0.0);
    CHECK(perp.rank() == 0);
  }
  SECTION("rank-1 onto (1,1)/sqrt2 -> rank-1 onto (1,-1)/sqrt2") {
    CVector plus(2), minus(2);
    plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    minus << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
    Projector p{CMatrix(plus * plus.adjoint())};
    CMatrix expected = minus * minus.adjoint();
    CHECK(max_abs_diff(hilbert::orthocomplement(p).matrix(), expected) < 1e-15);
  }
  SECTION("involution on random projectors") {
    SplitMix64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      for (Index d : {2, 3, 4}) {
        int rank = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(d));
        Projector p = hilbert::random_projector(d, rank, rng);
        Projector twice = hilbert::orthocomplement(hilbert::orthocomplement(p));
        CHECK(max_abs_diff(twice.matrix(), p.matrix()) <= tol::op);
      }
    }
  }
}

TEST_CASE("certainty conditions agree", "[hilbert]") {
  Projector p = diag_projector({1.0, 0.0});

  SECTION("eigenstate: all four hold") {
    auto report = hilbert::ee_link_check(make_state({1.0, 0.0}), p);
    CHECK(report.all_hold());
    CHECK(report.consistent());
  }
  SECTION("orthogonal state: none hold") {
    auto report = hilbert::ee_link_check(make_state({0.0, 1.0}), p);
    CHECK(report.none_hold());
    CHECK(report.consistent());
  }
  SECTION("balanced superposition: none hold") {
    auto report = hilbert::ee_link_check(make_state({std::sqrt(0.5), std::sqrt(0.5)}), p);
    CHECK(report.none_hold());
  }
  SECTION("never mixed on random pairs") {
    SplitMix64 rng(23);
    for (int trial = 0; trial < 50; ++trial) {
      for (Index d : {2, 3, 4}) {
        int rank = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(d));
        Projector rp = hilbert::random_projector(d, rank, rng);
        StateVector psi = hilbert::random_state(d, rng);
        CHECK(hilbert::ee_link_check(psi, rp).consistent());
      }
    }
  }
}

TEST_CASE("probability and its complement sum to one", "[hilbert]") {
  SplitMix64 rng(37);
  for (int trial = 0; trial < 50; ++trial) {
    for (Index d : {2, 3, 4}) {
      int rank = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(d));
      Projector p = hilbert::random_projector(d, rank, rng);
      StateVector psi = hilbert::random_state(d, rng);
      double total =
          hilbert::probability(psi, p) + hilbert::probability(psi, hilbert::orthocomplement(p));
      CHECK(total == Approx(1.0).margin(tol::op));
    }
  }
}

TEST_CASE("tensor power of a state", "[hilbert]") {
  SECTION("basis state squared") {
    StateVector out = hilbert::tensor_power_state(make_state({1.0, 0.0}), 2);
    CVector expected(4);
    expected << 1.0, 0.0, 0.0, 0.0;
    CHECK((out.amplitudes() - expected).norm() == 0.0);
  }
  SECTION("single copy is the identity") {
    StateVector psi = make_state({std::sqrt(0.3), std::sqrt(0.7)});
    StateVector out = hilbert::tensor_power_state(psi, 1);
    CHECK((out.amplitudes() - psi.amplitudes()).norm() == 0.0);
  }
  SECTION("balanced superposition squared, against the Kronecker oracle") {
    StateVector psi = make_state({std::sqrt(0.5), std::sqrt(0.5)});
    StateVector out = hilbert::tensor_power_state(psi, 2);
    CVector expected = kron_oracle(psi.amplitudes(), psi.amplitudes());
    CHECK((out.amplitudes() - expected).cwiseAbs().maxCoeff() < 1e-15);
    for (Index i = 0; i < 4; ++i) CHECK(out.amplitudes()(i).real() == Approx(0.5));
  }
  SECTION("unit norm within N * tol on random states") {
    SplitMix64 rng(41);
    for (Index d : {2, 3}) {
      for (int n = 1; n <= 5; ++n) {
        StateVector psi = hilbert::random_state(d, rng);
        StateVector out = hilbert::tensor_power_state(psi, n);
        CHECK(std::abs(out.amplitudes().squaredNorm() - 1.0) <= n * tol::norm);
      }
    }
  }
  SECTION("size cap enforced") {
    StateVector psi = make_state({1.0, 0.0});
    CHECK_THROWS_AS(hilbert::tensor_power_state(psi, 17), Error);  // 2^17 > 2^16
    CHECK_NOTHROW(hilbert::tensor_power_state(psi, 16));
  }
}

TEST_CASE("ordered product of distinct factors", "[hilbert]") {
  StateVector zero = make_state({1.0, 0.0});
  StateVector one = make_state({0.0, 1.0});

  SECTION("single factor") {
    std::vector<StateVector> factors{zero};
    StateVector out = hilbert::product_state(factors);
    CHECK((out.amplitudes() - zero.amplitudes()).norm() == 0.0);
  }
  SECTION("|0>|1> lands on index 1") {
    std::vector<StateVector> factors{zero, one};
    CVector expected = kron_oracle(zero.amplitudes(), one.amplitudes());
    StateVector out = hilbert::product_state(factors);
    CHECK((out.amplitudes() - expected).norm() == 0.0);
    CHECK(out.amplitudes()(1) == Complex(1.0, 0.0));
  }
  SECTION("|1>|0> lands on index 2: order matters") {
    std::vector<StateVector> factors{one, zero};
    StateVector out = hilbert::product_state(factors);
    CHECK(out.amplitudes()(2) == Complex(1.0, 0.0));
  }
  SECTION("mixed dimensions rejected") {
    std::vector<StateVector> factors{zero, make_state({1.0, 0.0, 0.0})};
    CHECK_THROWS_AS(hilbert::product_state(factors), Error);
  }
}

TEST_CASE("dense operators are tagged with a consistent factorization", "[hilbert]") {
  SECTION("dimension must equal d^N") {
    CHECK_NOTHROW(hilbert::DenseOperator(CMatrix::Identity(8, 8), 3, 2));
    CHECK_THROWS_AS(hilbert::DenseOperator(CMatrix::Identity(6, 6), 2, 2), Error);
    CHECK_THROWS_AS(hilbert::DenseOperator(CMatrix::Identity(8, 8), 2, 2), Error);
  }
  SECTION("operator size cap enforced") {
    CHECK_THROWS_AS(hilbert::DenseOperator(CMatrix::Identity(4, 4), 14, 2), Error);
  }
}

TEST_CASE("random projectors satisfy the axioms", "[hilbert]") {
  SplitMix64 rng(53);
  for (Index d : {2, 3, 4}) {
    for (int rank = 0; rank <= d; ++rank) {
      Projector p = hilbert::random_projector(d, rank, rng);
      CHECK(p.rank() == rank);
      CHECK(max_abs_diff(p.matrix(), p.matrix().adjoint()) <= tol::op);
      CHECK(max_abs_diff(p.matrix() * p.matrix(), p.matrix()) <= tol::op);
      CHECK(std::abs(p.matrix().trace().real() - rank) <= tol::op);
    }
  }
}
