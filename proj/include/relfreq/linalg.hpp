#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

#include "relfreq/common.hpp"

namespace relfreq {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

// Kronecker product, row-major block layout: out(i*rb+k, j*cb+l) = a(i,j)*b(k,l).
inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline CVector kron(const CVector& a, const CVector& b) {
  CVector out(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

inline double max_abs(const CMatrix& a) { return a.cwiseAbs().maxCoeff(); }

inline double max_abs_diff(const CMatrix& a, const CMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

// Eigenvalues of a Hermitian matrix, ascending.
inline RVector hermitian_eigenvalues(const CMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(a, Eigen::EigenvaluesOnly);
  require(solver.info() == Eigen::Success, "hermitian eigensolver failed to converge");
  return solver.eigenvalues();
}

// d^n with overflow guard; callers compare the result against the size caps.
inline long long checked_power(long long base, int exponent) {
  require(base >= 1 && exponent >= 0, "checked_power: bad arguments");
  long long result = 1;
  for (int i = 0; i < exponent; ++i) {
    require(result <= (1LL << 40) / base, "checked_power: dimension overflow");
    result *= base;
  }
  return result;
}

}  // namespace relfreq
