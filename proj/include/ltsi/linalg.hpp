#pragma once

#include <Eigen/Dense>
#include <complex>
#include <limits>

namespace ltsi {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Extended-precision aliases for the numerically delicate per-sample kernels.
using LongComplex = std::complex<long double>;
using LongMatrix = Eigen::Matrix<LongComplex, Eigen::Dynamic, Eigen::Dynamic>;

inline LongMatrix promote(const Matrix& m) {
  return m.cast<LongComplex>();
}

inline Matrix demote(const LongMatrix& m) {
  return m.cast<Complex>();
}

template <class Mat>
double spectral_norm(const Mat& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return static_cast<double>(svd.singularValues()(0));
}

// sigma_max / sigma_min; infinity for exactly rank-deficient input.
template <class Mat>
double condition_estimate(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& sv = svd.singularValues();
  double smax = static_cast<double>(sv(0));
  double smin = static_cast<double>(sv(sv.size() - 1));
  if (smax == 0.0) return std::numeric_limits<double>::infinity();
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

template <class Mat>
Mat hermitian_part(const Mat& m) {
  return (m + m.adjoint()) / typename Mat::RealScalar(2);
}

template <class Mat>
Mat skew_part(const Mat& m) {
  return (m - m.adjoint()) / typename Mat::RealScalar(2);
}

// Largest eigenvalue of the Hermitian part is taken on (m + m^a)/2; callers
// pass an already Hermitian matrix.
template <class Mat>
double lambda_max_hermitian(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(m), Eigen::EigenvaluesOnly);
  return static_cast<double>(es.eigenvalues().maxCoeff());
}

template <class Mat>
double lambda_min_hermitian(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(m), Eigen::EigenvaluesOnly);
  return static_cast<double>(es.eigenvalues().minCoeff());
}

// Largest real part of the spectrum.
inline double spectral_abscissa(const Matrix& a) {
  Eigen::ComplexEigenSolver<Matrix> es(a, false);
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    worst = std::max(worst, es.eigenvalues()(i).real());
  return worst;
}

// SVD-based inverse for small matrices; caller has already screened the
// condition number.
template <class Mat>
Mat svd_inverse(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixV() * svd.singularValues().cwiseInverse().asDiagonal() *
         svd.matrixU().adjoint();
}

}  // namespace ltsi
