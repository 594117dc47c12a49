#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ltsi/analysis.hpp"
#include "ltsi/defaults.hpp"
#include "ltsi/errors.hpp"
#include "ltsi/linalg.hpp"
#include "ltsi/lti.hpp"
#include "ltsi/symbol.hpp"

namespace ltsi {

struct SignatureFactorization {
  Matrix L;  // lower Cholesky factor of Q with positive real diagonal
  Matrix U;  // eigenvectors of L^{-1} S L^{-a}, +1 eigenspace first
  Matrix D;  // exact signature diag(I_{n_plus}, -I_{n_minus})
  int n_plus = 0;
  int n_minus = 0;
  double eigenvalue_deviation = 0.0;  // max | |lambda| - 1 |
  double compat_residual = 0.0;       // ||Q - S Q^{-1} S|| / ||Q||
};

namespace detail {

// The whole per-sample kernel runs in extended precision: next to a rank drop
// lambda_min(Q) ~ omega^4, and the congruence amplifies any rounding by its
// inverse, which would eat the entire double-precision budget.
struct SignatureKernel {
  LongMatrix L, U;
  std::vector<int> signs;  // descending, each +1 or -1
  double eigenvalue_deviation;
  double compat_residual;
};

inline SignatureKernel signature_kernel(const LongMatrix& S, const LongMatrix& Q,
                                        double tol) {
  const int n = static_cast<int>(Q.rows());
  LongMatrix qh = 0.5L * (Q + Q.adjoint());
  Eigen::LLT<LongMatrix> llt(qh);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("signature factorization needs Q positive definite");
  SignatureKernel k{.L = llt.matrixL(),
                    .U = LongMatrix::Identity(n, n),
                    .signs = {},
                    .eigenvalue_deviation = 0.0,
                    .compat_residual = 0.0};

  LongMatrix x = k.L.template triangularView<Eigen::Lower>().solve(S);
  LongMatrix nmat =
      k.L.template triangularView<Eigen::Lower>().solve(x.adjoint()).adjoint();
  nmat = 0.5L * (nmat + nmat.adjoint());
  Eigen::SelfAdjointEigenSolver<LongMatrix> es(nmat);
  if (es.info() != Eigen::Success)
    throw Error("eigensolver_failure", "signature eigendecomposition failed");

  LongMatrix qr = S * llt.solve(S);
  k.compat_residual =
      spectral_norm(LongMatrix(qh - qr)) / std::max(1e-300, spectral_norm(qh));

  // descending order: +1 eigenspace first
  k.U.resize(n, n);
  k.signs.resize(n);
  for (int i = 0; i < n; ++i) {
    int src = n - 1 - i;
    long double lam = es.eigenvalues()(src);
    double dev = static_cast<double>(std::abs(std::abs(lam) - 1.0L));
    k.eigenvalue_deviation = std::max(k.eigenvalue_deviation, dev);
    k.signs[i] = lam >= 0 ? 1 : -1;
    k.U.col(i) = es.eigenvectors().col(src);
  }
  if (k.eigenvalue_deviation > tol)
    throw NotCompatible("pairing and storage are not compatible: eigenvalues of "
                        "L^{-1} S L^{-a} deviate from +-1 by " +
                        std::to_string(k.eigenvalue_deviation));
  for (int i = 1; i < n; ++i)
    if (k.signs[i] > k.signs[i - 1])
      throw Error("eigensolver_failure", "signature eigenvalues not sorted");

  // deterministic phases: the largest-magnitude entry of each column is made
  // real positive
  for (int j = 0; j < n; ++j) {
    int arg = 0;
    long double best = -1.0L;
    for (int i = 0; i < n; ++i) {
      long double mag = std::abs(k.U(i, j));
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    LongComplex v = k.U(arg, j);
    if (std::abs(v) > 0) k.U.col(j) *= std::conj(v) / std::abs(v);
  }
  return k;
}

// unitary polar factor of the overlap with the previous basis, used to align
// an eigenspace block across neighboring samples (orthogonal Procrustes)
inline void align_block(LongMatrix& u, int col0, int width, const LongMatrix& prev) {
  if (width <= 0) return;
  LongMatrix cur = u.middleCols(col0, width);
  LongMatrix overlap = cur.adjoint() * prev.middleCols(col0, width);
  Eigen::JacobiSVD<LongMatrix> svd(overlap, Eigen::ComputeFullU | Eigen::ComputeFullV);
  LongMatrix rot = svd.matrixU() * svd.matrixV().adjoint();
  u.middleCols(col0, width) = cur * rot;
}

}  // namespace detail

inline SignatureFactorization signature_factorize(const Matrix& S, const Matrix& Q,
                                                  double tol = 1e-6) {
  if (S.rows() != S.cols() || Q.rows() != Q.cols() || S.rows() != Q.rows())
    throw ConfigError("signature factorization needs square S, Q of equal size");
  auto k = detail::signature_kernel(promote(hermitian_part(S)), promote(Q), tol);
  const int n = static_cast<int>(S.rows());
  SignatureFactorization out{.L = demote(k.L),
                             .U = demote(k.U),
                             .D = Matrix::Identity(n, n),
                             .n_plus = 0,
                             .n_minus = 0,
                             .eigenvalue_deviation = k.eigenvalue_deviation,
                             .compat_residual = k.compat_residual};
  for (int i = 0; i < n; ++i) {
    out.D(i, i) = Complex(k.signs[i], 0);
    (k.signs[i] > 0 ? out.n_plus : out.n_minus)++;
  }
  return out;
}

struct PassiveReciprocalRealization {
  MatrixSymbol Abar_sym, Bbar_sym, Cbar_sym;
  MatrixSymbol T_sym, Tinv_sym;
  Matrix D;
  int n1 = 0;
  int n2 = 0;
  FrequencyGrid working_grid;  // family grid with the rank drops excluded
  std::vector<int> active_indices;
  std::vector<double> passivity_margin;  // per sample: lambda_max(Abar + Abar^a)
  std::vector<double> io_residual;       // ||Cbar^a - Bbar||
  std::vector<double> duality_residual;  // ||Abar^a D - D Abar||
  std::vector<double> b_bottom_norm;     // last n2 rows of Bbar
  std::vector<double> csqb;              // ||C S^{-1} Q B|| per sample
  double worst_passivity = 0.0;  // max over samples of lambda_max(Abar + Abar^a);
                                 // negative when strictly dissipative
  double worst_io = 0.0;
  double worst_duality = 0.0;
  double worst_b_bottom = 0.0;
  double worst_eigenvalue_deviation = 0.0;
  double sup_CSQB = 0.0;
  SupScan scan_CSQB;
  std::vector<int> compat_applied;  // samples where compatible_storage stepped in

  LtsiRealization family() const {
    return LtsiRealization(Abar_sym, Bbar_sym, Cbar_sym, working_grid);
  }
};

inline PassiveReciprocalRealization canonical_transform(
    const LtsiRealization& sys, const ReciprocityCertificate& s_cert,
    const StorageCertificate& q_cert, double tol = 1e-6) {
  const int count = sys.grid.count();
  const int n = sys.n;

  std::vector<char> skip(count, 0);
  for (const auto& d : s_cert.rank_drops) skip[d.index] = 1;
  for (const auto& d : q_cert.rank_drops) skip[d.index] = 1;
  std::vector<int> active, drops;
  for (int k = 0; k < count; ++k) {
    if (skip[k]) drops.push_back(k);
    if (!sys.grid.is_excluded(k) && !skip[k]) active.push_back(k);
  }
  if (active.empty()) throw ConfigError("no usable samples for the transform");

  auto nan = detail::quiet_nan();
  FrequencyGrid working = sys.grid.with_excluded(drops);
  PassiveReciprocalRealization out{
      .Abar_sym = MatrixSymbol::constant(Matrix::Zero(n, n)),
      .Bbar_sym = MatrixSymbol::constant(Matrix::Zero(n, sys.m)),
      .Cbar_sym = MatrixSymbol::constant(Matrix::Zero(sys.p, n)),
      .T_sym = MatrixSymbol::constant(Matrix::Zero(n, n)),
      .Tinv_sym = MatrixSymbol::constant(Matrix::Zero(n, n)),
      .D = Matrix::Identity(n, n),
      .n1 = 0,
      .n2 = 0,
      .working_grid = working,
      .active_indices = active,
      .passivity_margin = std::vector<double>(count, nan),
      .io_residual = std::vector<double>(count, nan),
      .duality_residual = std::vector<double>(count, nan),
      .b_bottom_norm = std::vector<double>(count, nan),
      .csqb = std::vector<double>(count, nan),
      .worst_passivity = -std::numeric_limits<double>::infinity(),
      .worst_io = 0.0,
      .worst_duality = 0.0,
      .worst_b_bottom = 0.0,
      .worst_eigenvalue_deviation = 0.0,
      .sup_CSQB = 0.0,
      .scan_CSQB = {},
      .compat_applied = {}};

  std::vector<Matrix> abar(count, Matrix::Zero(n, n));
  std::vector<Matrix> bbar(count, Matrix::Zero(n, sys.m));
  std::vector<Matrix> cbar(count, Matrix::Zero(sys.p, n));
  std::vector<Matrix> tmat(count, Matrix::Zero(n, n));
  std::vector<Matrix> tinv(count, Matrix::Zero(n, n));
  std::vector<double> csqb_active(active.size(), 0.0);

  // the alignment sweep is inherently sequential: each sample's eigenbasis is
  // rotated onto the previous one within each signature block
  bool first = true;
  int n1 = 0;
  LongMatrix prev_u;
  for (size_t pos = 0; pos < active.size(); ++pos) {
    int k = active[pos];
    double omega = sys.grid.sample(k);
    Matrix s_dbl = s_cert.S_sym.eval(omega);
    Matrix q_dbl = q_cert.Q_sym.eval(omega);
    LongMatrix s_ld = promote(hermitian_part(s_dbl));
    LongMatrix q_ld = promote(hermitian_part(q_dbl));

    detail::SignatureKernel kern{.L = LongMatrix::Identity(n, n),
                                 .U = LongMatrix::Identity(n, n),
                                 .signs = {},
                                 .eigenvalue_deviation = 0.0,
                                 .compat_residual = 0.0};
    try {
      kern = detail::signature_kernel(s_ld, q_ld, tol);
    } catch (const NotCompatible&) {
      auto fix = compatible_storage(s_dbl, q_dbl);
      kern = detail::signature_kernel(s_ld, promote(fix.Qc), tol);
      out.compat_applied.push_back(k);
    }
    out.worst_eigenvalue_deviation =
        std::max(out.worst_eigenvalue_deviation, kern.eigenvalue_deviation);

    int plus = 0;
    for (int s : kern.signs) plus += (s > 0);
    if (first) {
      n1 = plus;
    } else if (plus != n1) {
      throw SignatureNotConstant(
          "signature changed between samples: n_plus = " + std::to_string(n1) +
          " vs " + std::to_string(plus) + " at omega = " + std::to_string(omega));
    }

    if (!first) {
      detail::align_block(kern.U, 0, n1, prev_u);
      detail::align_block(kern.U, n1, n - n1, prev_u);
    }
    prev_u = kern.U;
    first = false;

    auto mem = sys.member_at(k);
    LongMatrix a_ld = promote(mem.A), b_ld = promote(mem.B), c_ld = promote(mem.C);
    LongMatrix t_ld = kern.U.adjoint() * kern.L.adjoint();
    LongMatrix tinv_ld =
        kern.L.adjoint().template triangularView<Eigen::Upper>().solve(kern.U);
    abar[k] = demote(LongMatrix(t_ld * a_ld * tinv_ld));
    bbar[k] = demote(LongMatrix(t_ld * b_ld));
    cbar[k] = demote(LongMatrix(c_ld * tinv_ld));
    tmat[k] = demote(t_ld);
    tinv[k] = demote(tinv_ld);

    // boundedness scalar sup||C S^{-1} Q B||, solved in extended precision
    Eigen::PartialPivLU<LongMatrix> lu(s_ld);
    Matrix csqb_m = demote(LongMatrix(c_ld * lu.solve(q_ld * b_ld)));
    csqb_active[pos] = spectral_norm(csqb_m);
    out.csqb[k] = csqb_active[pos];
  }

  out.n1 = n1;
  out.n2 = n - n1;
  out.D = Matrix::Identity(n, n);
  out.D.bottomRightCorner(out.n2, out.n2) *= -1.0;

  for (int k : active) {
    out.passivity_margin[k] = lambda_max_hermitian(Matrix(abar[k] + abar[k].adjoint()));
    out.io_residual[k] = spectral_norm(Matrix(cbar[k].adjoint() - bbar[k]));
    out.duality_residual[k] =
        spectral_norm(Matrix(abar[k].adjoint() * out.D - out.D * abar[k]));
    out.b_bottom_norm[k] =
        out.n2 > 0 ? bbar[k].bottomRows(out.n2).norm() : 0.0;
    out.worst_passivity = std::max(out.worst_passivity, out.passivity_margin[k]);
    out.worst_io = std::max(out.worst_io, out.io_residual[k]);
    out.worst_duality = std::max(out.worst_duality, out.duality_residual[k]);
    out.worst_b_bottom = std::max(out.worst_b_bottom, out.b_bottom_norm[k]);
  }

  out.Abar_sym = MatrixSymbol::sampled(working, abar);
  out.Bbar_sym = MatrixSymbol::sampled(working, bbar);
  out.Cbar_sym = MatrixSymbol::sampled(working, cbar);
  out.T_sym = MatrixSymbol::sampled(working, tmat);
  out.Tinv_sym = MatrixSymbol::sampled(working, tinv);
  out.scan_CSQB = detail::scan_sup(active, csqb_active, sys.grid);
  out.sup_CSQB = out.scan_CSQB.value;
  return out;
}

struct PortHamiltonianParts {
  MatrixSymbol J_sym, R_sym, G_sym;
  FrequencyGrid grid;
  double worst_r_negativity = 0.0;  // max over samples of max(0, -lambda_min(R))
  double worst_g_bottom = 0.0;      // last n2 rows of G
};

inline PortHamiltonianParts ph_parts(const PassiveReciprocalRealization& real,
                                     double tol = 1e-9) {
  const auto& grid = real.working_grid;
  const int count = grid.count();
  const int n = real.n1 + real.n2;
  std::vector<Matrix> js(count, Matrix::Zero(n, n));
  std::vector<Matrix> rs(count, Matrix::Zero(n, n));
  std::vector<Matrix> gs(count, Matrix::Zero(n, real.Bbar_sym.cols()));
  PortHamiltonianParts out{.J_sym = MatrixSymbol::constant(Matrix::Zero(n, n)),
                           .R_sym = MatrixSymbol::constant(Matrix::Zero(n, n)),
                           .G_sym = MatrixSymbol::constant(Matrix::Zero(n, 1)),
                           .grid = grid,
                           .worst_r_negativity = 0.0,
                           .worst_g_bottom = 0.0};

  for (int k : grid.active_indices()) {
    double omega = grid.sample(k);
    Matrix a = real.Abar_sym.eval(omega);
    double scale = std::max(1.0, spectral_norm(a));
    Matrix p = a.topLeftCorner(real.n1, real.n1);
    Matrix z = a.bottomRightCorner(real.n2, real.n2);
    double dev = spectral_norm(Matrix(p - p.adjoint())) +
                 spectral_norm(Matrix(z - z.adjoint()));
    if (dev > tol * scale)
      throw PartitionViolation(
          "diagonal blocks of the transformed generator are not self-adjoint at "
          "omega = " + std::to_string(omega) + " (deviation " + std::to_string(dev) +
          ")");
    Matrix j = skew_part(a);
    j.topLeftCorner(real.n1, real.n1).setZero();
    j.bottomRightCorner(real.n2, real.n2).setZero();
    Matrix r = -hermitian_part(a);
    js[k] = j;
    rs[k] = r;
    gs[k] = real.Bbar_sym.eval(omega);
    out.worst_r_negativity =
        std::max(out.worst_r_negativity, std::max(0.0, -lambda_min_hermitian(r)));
    if (real.n2 > 0)
      out.worst_g_bottom =
          std::max(out.worst_g_bottom, gs[k].bottomRows(real.n2).norm());
  }
  out.J_sym = MatrixSymbol::sampled(grid, js);
  out.R_sym = MatrixSymbol::sampled(grid, rs);
  out.G_sym = MatrixSymbol::sampled(grid, gs);
  return out;
}

}  // namespace ltsi
