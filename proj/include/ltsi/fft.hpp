#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "ltsi/errors.hpp"
#include "ltsi/linalg.hpp"

namespace ltsi {

// Periodic surrogate for the real line: points x_k = -L/2 + k L/N and bins
// omega_m = 2 pi m' / L with m' the signed bin index.
struct SpatialGrid {
  double length;
  int points;

  SpatialGrid(double length_, int points_) : length(length_), points(points_) {
    if (!(length > 0.0)) throw ConfigError("spatial grid length must be positive");
    if (points < 8) throw ConfigError("spatial grid needs at least 8 points");
    if ((points & (points - 1)) != 0)
      throw ConfigError("spatial grid point count must be a power of two");
  }

  double dx() const { return length / points; }
  double domega() const { return 2.0 * std::numbers::pi / length; }
  double x(int k) const { return -0.5 * length + k * dx(); }
  int signed_bin(int m) const { return m < points / 2 ? m : m - points; }
  double bin_omega(int m) const { return domega() * signed_bin(m); }
};

namespace detail {

inline void dft_row(std::vector<Complex>& buf, bool inverse) {
  Eigen::FFT<double> fft;
  std::vector<Complex> out(buf.size());
  if (inverse)
    fft.inv(out, buf);  // includes the 1/N factor
  else
    fft.fwd(out, buf);
  buf.swap(out);
}

}  // namespace detail

// Discretization of the unitary transform u -> (2 pi)^{-1/2} integral of
// u(x) e^{-i omega x} dx; the (-1)^m factor accounts for the -L/2 offset.
// Fields are component-by-point matrices.
inline Eigen::MatrixXcd forward_field(const SpatialGrid& g,
                                      const Eigen::MatrixXcd& field) {
  if (field.cols() != g.points)
    throw ConfigError("field has the wrong number of spatial samples");
  const double scale = g.dx() / std::sqrt(2.0 * std::numbers::pi);
  Eigen::MatrixXcd spec(field.rows(), field.cols());
  std::vector<Complex> buf(g.points);
  for (int r = 0; r < field.rows(); ++r) {
    for (int k = 0; k < g.points; ++k) buf[k] = field(r, k);
    detail::dft_row(buf, false);
    for (int m = 0; m < g.points; ++m)
      spec(r, m) = buf[m] * scale * (m % 2 == 0 ? 1.0 : -1.0);
  }
  return spec;
}

inline Eigen::MatrixXcd inverse_field(const SpatialGrid& g,
                                      const Eigen::MatrixXcd& spec) {
  if (spec.cols() != g.points)
    throw ConfigError("spectrum has the wrong number of bins");
  const double scale =
      g.domega() * g.points / std::sqrt(2.0 * std::numbers::pi);
  Eigen::MatrixXcd field(spec.rows(), spec.cols());
  std::vector<Complex> buf(g.points);
  for (int r = 0; r < spec.rows(); ++r) {
    for (int m = 0; m < g.points; ++m)
      buf[m] = spec(r, m) * (m % 2 == 0 ? 1.0 : -1.0);
    detail::dft_row(buf, true);
    for (int k = 0; k < g.points; ++k) field(r, k) = buf[k] * scale;
  }
  return field;
}

// Projects a spectrum onto the conjugate-symmetric subspace, i.e. onto the
// spectra of real fields. The Nyquist bin aliases +omega_max and -omega_max
// at once, so symbols that are odd in omega act ambiguously on it; it is
// zeroed, which keeps the real subspace exactly invariant under evolution.
inline void hermitian_symmetrize(Eigen::MatrixXcd& spec) {
  const int n = static_cast<int>(spec.cols());
  for (int m = 1; m < n / 2; ++m) {
    Eigen::VectorXcd avg =
        0.5 * (spec.col(m) + spec.col(n - m).conjugate());
    spec.col(m) = avg;
    spec.col(n - m) = avg.conjugate();
  }
  spec.col(0) = spec.col(0).real().cast<Complex>();
  spec.col(n / 2).setZero();
}

inline bool nearly_real(const Eigen::MatrixXcd& field, double tol = 1e-12) {
  double peak = field.cwiseAbs().maxCoeff();
  return field.imag().cwiseAbs().maxCoeff() <= tol * std::max(1.0, peak);
}

}  // namespace ltsi
