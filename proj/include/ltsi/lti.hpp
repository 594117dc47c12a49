#pragma once

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ltsi/defaults.hpp"
#include "ltsi/errors.hpp"
#include "ltsi/linalg.hpp"

namespace ltsi {

/// Finite-dimensional state-space member (A, B, C), feedthrough-free.
struct LtiRealization {
  Matrix A, B, C;

  LtiRealization(Matrix a, Matrix b, Matrix c)
      : A(std::move(a)), B(std::move(b)), C(std::move(c)) {
    if (A.rows() != A.cols()) throw ConfigError("A must be square");
    if (B.rows() != A.rows()) throw ConfigError("B row count must match A");
    if (C.cols() != A.rows()) throw ConfigError("C column count must match A");
  }

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  int p() const { return static_cast<int>(C.rows()); }
};

inline Matrix impulse_response(const LtiRealization& sys, double t) {
  return sys.C * (sys.A * t).exp() * sys.B;
}

// Spectral norm of the propagator e^{At}; the workhorse behind the generator
// diagnostic.
inline double propagator_norm(const LtiRealization& sys, double t) {
  return spectral_norm(Matrix((sys.A * t).exp()));
}

inline Matrix transfer(const LtiRealization& sys, Complex s,
                       double condition_ceiling = defaults::condition_ceiling) {
  Matrix m = s * Matrix::Identity(sys.n(), sys.n()) - sys.A;
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  double cond = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1)
                                      : std::numeric_limits<double>::infinity();
  if (!(cond <= condition_ceiling))
    throw ResolventSingular("resolvent numerically singular at s = (" +
                            std::to_string(s.real()) + ", " + std::to_string(s.imag()) +
                            "), condition " + std::to_string(cond));
  return sys.C * svd.solve(sys.B);
}

inline Matrix controllability_matrix(const LtiRealization& sys) {
  Matrix w(sys.n(), sys.n() * sys.m());
  Matrix block = sys.B;
  for (int k = 0; k < sys.n(); ++k) {
    w.middleCols(k * sys.m(), sys.m()) = block;
    block = sys.A * block;
  }
  return w;
}

inline Matrix observability_matrix(const LtiRealization& sys) {
  Matrix o(sys.n() * sys.p(), sys.n());
  Matrix block = sys.C;
  for (int k = 0; k < sys.n(); ++k) {
    o.middleRows(k * sys.p(), sys.p()) = block;
    block = block * sys.A;
  }
  return o;
}

struct MinimalityReport {
  int rank_W = 0;
  int rank_O = 0;
  double sigma_min_W = 0.0;  // n-th singular value (full-rank margin)
  double sigma_min_O = 0.0;
  bool minimal = false;
};

inline MinimalityReport minimality_ranks(const LtiRealization& sys,
                                         double rel_threshold = defaults::rank_rel_threshold) {
  auto rank_of = [&](const Matrix& m, double& sig_min) {
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    sig_min = sv(sv.size() - 1);
    double cut = rel_threshold * sv(0);
    int r = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > cut) ++r;
    return r;
  };
  MinimalityReport rep;
  rep.rank_W = rank_of(controllability_matrix(sys), rep.sigma_min_W);
  rep.rank_O = rank_of(observability_matrix(sys), rep.sigma_min_O);
  rep.minimal = (rep.rank_W == sys.n() && rep.rank_O == sys.n());
  return rep;
}

struct ReciprocityMatrixResult {
  Matrix S;
  double residual_commute = 0.0;  // ||A^a S - S A|| relative
  double residual_output = 0.0;   // ||C^a - S B|| relative
  double hermiticity = 0.0;       // ||S - S^a|| relative
  double sigma_min = 0.0;         // invertibility margin of S
};

// Unique reciprocity matrix of a minimal system, computed as
// S = [C^a, A^a C^a, ...] * pinv(W) through an orthogonal factorization of W
// rather than by forming W W^a.
inline ReciprocityMatrixResult reciprocity_matrix(const LtiRealization& sys,
                                                  double tol = 1e-6) {
  if (sys.m() != sys.p()) throw ConfigError("reciprocity needs m = p");
  auto mr = minimality_ranks(sys);
  if (!mr.minimal)
    throw NotMinimal("system not minimal: rank_W = " + std::to_string(mr.rank_W) +
                     ", rank_O = " + std::to_string(mr.rank_O) + " of n = " +
                     std::to_string(sys.n()));

  Matrix oadj(sys.n(), sys.n() * sys.p());
  Matrix block = sys.C.adjoint();
  Matrix aadj = sys.A.adjoint();
  for (int k = 0; k < sys.n(); ++k) {
    oadj.middleCols(k * sys.p(), sys.p()) = block;
    block = aadj * block;
  }
  Matrix w = controllability_matrix(sys);
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(w);
  ReciprocityMatrixResult res;
  res.S = oadj * cod.pseudoInverse();

  double ns = spectral_norm(res.S);
  double na = spectral_norm(sys.A);
  double nc = spectral_norm(sys.C);
  res.residual_commute =
      spectral_norm(Matrix(sys.A.adjoint() * res.S - res.S * sys.A)) /
      std::max(1e-300, na * ns);
  res.residual_output =
      spectral_norm(Matrix(sys.C.adjoint() - res.S * sys.B)) / std::max(1.0, nc);
  res.hermiticity = spectral_norm(Matrix(res.S - res.S.adjoint())) / std::max(1e-300, ns);
  Eigen::JacobiSVD<Matrix> svd(res.S);
  res.sigma_min = svd.singularValues()(svd.singularValues().size() - 1);

  if (res.residual_commute > tol || res.residual_output > tol || res.hermiticity > tol)
    throw NotReciprocal("reciprocity residuals exceed tolerance: commute " +
                        std::to_string(res.residual_commute) + ", output " +
                        std::to_string(res.residual_output) + ", hermiticity " +
                        std::to_string(res.hermiticity));
  if (res.sigma_min < 1e-12 * std::max(1.0, ns))
    throw NotReciprocal("reciprocity matrix numerically singular (sigma_min = " +
                        std::to_string(res.sigma_min) + ")");
  return res;
}

struct ImpulseReciprocityReport {
  bool reciprocal = false;
  double worst_residual = 0.0;
  double scale = 1.0;  // max ||g(t)|| over the probe times
};

inline ImpulseReciprocityReport is_reciprocal(const LtiRealization& sys,
                                              const std::vector<double>& t_samples,
                                              double tol = 1e-8) {
  if (sys.m() != sys.p()) throw ConfigError("reciprocity needs m = p");
  ImpulseReciprocityReport rep;
  for (double t : t_samples) {
    Matrix g = impulse_response(sys, t);
    rep.scale = std::max(rep.scale, spectral_norm(g));
    rep.worst_residual =
        std::max(rep.worst_residual, spectral_norm(Matrix(g - g.adjoint())));
  }
  rep.reciprocal = rep.worst_residual <= tol * rep.scale;
  return rep;
}

inline std::vector<double> default_impulse_times() {
  std::vector<double> ts;
  for (int i = 0; i <= 10; ++i) ts.push_back(0.5 * i);
  return ts;
}

struct PositiveRealReport {
  double margin = 0.0;          // min over evaluated nu of lambda_min(G + G^a)
  double arg_nu = 0.0;
  std::vector<double> skipped;  // nu values next to imaginary-axis eigenvalues
  int evaluated = 0;
};

inline PositiveRealReport is_positive_real(const LtiRealization& sys,
                                           const std::vector<double>& nu_grid,
                                           double skip_tol = 1e-6) {
  if (sys.m() != sys.p()) throw ConfigError("positive-real check needs m = p");
  Eigen::ComplexEigenSolver<Matrix> es(sys.A, false);
  double scale = 1.0 + spectral_norm(sys.A);
  PositiveRealReport rep;
  rep.margin = std::numeric_limits<double>::infinity();
  for (double nu : nu_grid) {
    Complex s(0.0, nu);
    double dist = std::numeric_limits<double>::infinity();
    for (int i = 0; i < es.eigenvalues().size(); ++i)
      dist = std::min(dist, std::abs(s - es.eigenvalues()(i)));
    if (dist < skip_tol * scale) {
      rep.skipped.push_back(nu);
      continue;
    }
    Matrix g = transfer(sys, s);
    double lam = lambda_min_hermitian(Matrix(g + g.adjoint()));
    if (lam < rep.margin) {
      rep.margin = lam;
      rep.arg_nu = nu;
    }
    ++rep.evaluated;
  }
  if (rep.evaluated == 0)
    throw ConfigError("positive-real margin undefined: all grid points skipped");
  return rep;
}

// --- storage synthesis ------------------------------------------------------

struct SuppliedStorage {
  Matrix Q;
};
struct LosslessStorage {};
struct RelaxationStorage {
  Matrix S;
};
using StorageStrategy = std::variant<SuppliedStorage, LosslessStorage, RelaxationStorage>;

struct StorageResult {
  Matrix Q;
  double lmi_margin = 0.0;        // lambda_max(A^a Q + Q A), <= 0 wanted
  double output_residual = 0.0;   // ||C^a - Q B||
  double positivity_margin = 0.0; // lambda_min(Q)
  double solve_residual = 0.0;    // least-squares residual (Lossless only)
  int nullspace_dim = 0;          // uniqueness cross-check (Lossless only)
};

namespace detail {

// Least-squares solve of {A^a Q + Q A = 0, Q B = C^a} over Hermitian Q,
// carried out in extended precision: near frequencies where Q is close to
// singular the downstream transform amplifies any equation residual by
// 1/lambda_min(Q), so the residual floor here must sit well under 1e-14.
struct LosslessSolve {
  LongMatrix Q;
  double residual;
  int nullspace_dim;
};

inline LosslessSolve solve_lossless_storage(const LongMatrix& A, const LongMatrix& B,
                                            const LongMatrix& C) {
  using LongReal = long double;
  using RealMat = Eigen::Matrix<LongReal, Eigen::Dynamic, Eigen::Dynamic>;
  using RealVec = Eigen::Matrix<LongReal, Eigen::Dynamic, 1>;
  const int n = static_cast<int>(A.rows());
  const int m = static_cast<int>(B.cols());
  const int params = n * n;  // n real diagonal + n(n-1)/2 complex off-diagonal
  const int eq_rows = 2 * n * n + 2 * n * m;

  std::vector<LongMatrix> basis;
  basis.reserve(params);
  for (int i = 0; i < n; ++i) {
    LongMatrix e = LongMatrix::Zero(n, n);
    e(i, i) = LongComplex(1, 0);
    basis.push_back(e);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      LongMatrix re = LongMatrix::Zero(n, n);
      re(i, j) = LongComplex(1, 0);
      re(j, i) = LongComplex(1, 0);
      basis.push_back(re);
      LongMatrix im = LongMatrix::Zero(n, n);
      im(i, j) = LongComplex(0, 1);
      im(j, i) = LongComplex(0, -1);
      basis.push_back(im);
    }

  auto stack = [&](const LongMatrix& lyap, const LongMatrix& out, RealVec& col) {
    int idx = 0;
    for (int j = 0; j < lyap.cols(); ++j)
      for (int i = 0; i < lyap.rows(); ++i) {
        col(idx++) = lyap(i, j).real();
        col(idx++) = lyap(i, j).imag();
      }
    for (int j = 0; j < out.cols(); ++j)
      for (int i = 0; i < out.rows(); ++i) {
        col(idx++) = out(i, j).real();
        col(idx++) = out(i, j).imag();
      }
  };

  RealMat M(eq_rows, params);
  RealVec col(eq_rows);
  for (int d = 0; d < params; ++d) {
    const LongMatrix& e = basis[d];
    stack(A.adjoint() * e + e * A, e * B, col);
    M.col(d) = col;
  }
  RealVec rhs = RealVec::Zero(eq_rows);
  stack(LongMatrix::Zero(n, n), C.adjoint(), col);
  rhs = col;

  Eigen::JacobiSVD<RealMat> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  RealVec x = svd.solve(rhs);

  LosslessSolve out;
  out.Q = LongMatrix::Zero(n, n);
  for (int d = 0; d < params; ++d) out.Q += LongComplex(x(d), 0) * basis[d];
  out.residual = static_cast<double>((M * x - rhs).norm()) /
                 std::max(1.0, static_cast<double>(rhs.norm()));
  out.nullspace_dim = 0;
  const auto& sv = svd.singularValues();
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) <= 1e-10 * sv(0)) ++out.nullspace_dim;
  return out;
}

}  // namespace detail

inline StorageResult storage_synthesis(const LtiRealization& sys,
                                       const StorageStrategy& strategy,
                                       double tol = 1e-8) {
  auto finish = [&](Matrix q, double solve_residual, int nullspace_dim) {
    StorageResult res;
    res.Q = hermitian_part(q);
    res.solve_residual = solve_residual;
    res.nullspace_dim = nullspace_dim;
    res.lmi_margin = lambda_max_hermitian(
        Matrix(sys.A.adjoint() * res.Q + res.Q * sys.A));
    res.output_residual = spectral_norm(Matrix(sys.C.adjoint() - res.Q * sys.B));
    res.positivity_margin = lambda_min_hermitian(res.Q);
    double scale_q = std::max(1.0, spectral_norm(res.Q));
    double scale_lmi = std::max(1.0, spectral_norm(sys.A)) * scale_q;
    double scale_out = std::max(1.0, spectral_norm(sys.C));
    if (res.lmi_margin > tol * scale_lmi)
      throw InfeasibleStorage("storage violates the dissipation LMI: lambda_max = " +
                              std::to_string(res.lmi_margin));
    if (res.output_residual > tol * scale_out)
      throw InfeasibleStorage("storage violates C^a = Q B: residual = " +
                              std::to_string(res.output_residual));
    if (res.positivity_margin < -tol * scale_q)
      throw NotPositiveSemidefinite("storage not positive semidefinite: lambda_min = " +
                                    std::to_string(res.positivity_margin));
    return res;
  };

  if (std::holds_alternative<SuppliedStorage>(strategy)) {
    const Matrix& q = std::get<SuppliedStorage>(strategy).Q;
    if (q.rows() != sys.n() || q.cols() != sys.n())
      throw ConfigError("supplied storage has wrong shape");
    double herm = spectral_norm(Matrix(q - q.adjoint()));
    if (herm > tol * std::max(1.0, spectral_norm(q)))
      throw InfeasibleStorage("supplied storage is not self-adjoint");
    return finish(q, 0.0, 0);
  }
  if (std::holds_alternative<RelaxationStorage>(strategy)) {
    const Matrix& s = std::get<RelaxationStorage>(strategy).S;
    if (s.rows() != sys.n() || s.cols() != sys.n())
      throw ConfigError("relaxation storage has wrong shape");
    if (lambda_min_hermitian(s) <= 0.0)
      throw NotPositiveDefinite("relaxation strategy needs S positive definite");
    return finish(s, 0.0, 0);
  }
  auto solve = detail::solve_lossless_storage(promote(sys.A), promote(sys.B),
                                              promote(sys.C));
  if (solve.residual > tol)
    throw InfeasibleStorage("lossless storage equations unsolvable: residual = " +
                            std::to_string(solve.residual));
  auto res = finish(demote(solve.Q), solve.residual, solve.nullspace_dim);
  return res;
}

// --- compatible storage ------------------------------------------------------

struct CompatibleStorageResult {
  Matrix Qc;
  double compat_residual = 0.0;  // ||Qc - S Qc^{-1} S|| / ||Qc||
  double kyp_margin = 0.0;       // lambda_max(A^a Qc + Qc A) when a system is given
  double output_residual = 0.0;  // ||C^a - Qc B|| when a system is given
};

// Qc = Q^{1/2} |N| Q^{1/2} with N = Q^{-1/2} S Q^{-1/2}; the geometric mean of
// Q and S Q^{-1} S. Assumes the pair comes from a reciprocal passive system.
inline CompatibleStorageResult compatible_storage(const Matrix& S, const Matrix& Q,
                                                  const LtiRealization* sys = nullptr,
                                                  double tol = 1e-8) {
  if (S.rows() != S.cols() || Q.rows() != Q.cols() || S.rows() != Q.rows())
    throw ConfigError("compatible_storage needs square S, Q of equal size");
  Matrix qh = hermitian_part(Q);
  Eigen::SelfAdjointEigenSolver<Matrix> eq(qh);
  if (eq.eigenvalues().minCoeff() <= 0.0)
    throw NotPositiveDefinite("compatible_storage needs Q positive definite");
  Matrix q_half = eq.operatorSqrt();
  Matrix q_half_inv = eq.operatorInverseSqrt();

  Matrix n_mat = hermitian_part(Matrix(q_half_inv * hermitian_part(S) * q_half_inv));
  Eigen::SelfAdjointEigenSolver<Matrix> en(n_mat);
  double n_max = en.eigenvalues().cwiseAbs().maxCoeff();
  double n_min = en.eigenvalues().cwiseAbs().minCoeff();
  if (n_min <= tol * std::max(1.0, n_max))
    throw SingularN("compatibility factor numerically singular: min |lambda(N)| = " +
                    std::to_string(n_min));
  Matrix n_abs = en.eigenvectors() *
                 en.eigenvalues().cwiseAbs().asDiagonal() *
                 en.eigenvectors().adjoint();

  CompatibleStorageResult res;
  res.Qc = hermitian_part(Matrix(q_half * n_abs * q_half));
  Matrix qc_inv = svd_inverse(res.Qc);
  res.compat_residual = spectral_norm(Matrix(res.Qc - S * qc_inv * S)) /
                        std::max(1e-300, spectral_norm(res.Qc));
  if (sys) {
    res.kyp_margin = lambda_max_hermitian(
        Matrix(sys->A.adjoint() * res.Qc + res.Qc * sys->A));
    res.output_residual = spectral_norm(Matrix(sys->C.adjoint() - res.Qc * sys->B));
  }
  return res;
}

// --- Lagrangian state reconstruction -----------------------------------------

struct LagrangianResult {
  Vector z0;
  Complex integral;    // int_0^horizon <u(-t), y(t)> dt
  double quadratic;    // z0^a S z0
};

// z(0) = int_{-inf}^0 e^{-A tau} B u(tau) dtau by composite-Simpson quadrature
// over [-horizon, 0], then the free-output pairing integral on [0, horizon].
// The input must decay as tau -> -inf fast enough for the chosen horizon.
inline LagrangianResult lagrangian_from_io(
    const LtiRealization& sys, const Matrix& S,
    const std::function<Vector(double)>& u_past, double horizon, int panels = 8192) {
  double abscissa = spectral_abscissa(sys.A);
  if (abscissa > -1e-10 * std::max(1.0, spectral_norm(sys.A)))
    throw NotStable("lagrangian_from_io needs an asymptotically stable system "
                    "(spectral abscissa = " + std::to_string(abscissa) + ")");
  if (panels % 2) ++panels;
  double h = horizon / panels;
  Matrix e_h = (sys.A * h).exp();

  auto weight = [&](int k) {
    if (k == 0 || k == panels) return 1.0;
    return (k % 2) ? 4.0 : 2.0;
  };

  // z0 = sum_k w_k e^{A k h} B u(-k h), accumulated backward so each term sees
  // exactly k propagator applications.
  Vector acc = Vector::Zero(sys.n());
  for (int k = panels; k >= 0; --k) {
    acc = e_h * acc;
    acc += weight(k) * (sys.B * u_past(-k * h));
  }
  LagrangianResult res;
  res.z0 = (h / 3.0) * acc;

  // pairing integral: y(t) = C e^{At} z0 stepped exactly on the same lattice
  Complex pairing(0.0, 0.0);
  Vector z = res.z0;
  for (int k = 0; k <= panels; ++k) {
    if (k > 0) z = e_h * z;
    Vector y = sys.C * z;
    pairing += weight(k) * u_past(-k * h).dot(y);  // Eigen dot conjugates lhs
  }
  res.integral = (h / 3.0) * pairing;
  res.quadratic = std::real(Complex(res.z0.dot(S * res.z0)));
  return res;
}

// --- state transforms ---------------------------------------------------------

inline LtiRealization congruence_transform(const LtiRealization& sys, const Matrix& T,
                                           double condition_ceiling = defaults::condition_ceiling) {
  if (T.rows() != sys.n() || T.cols() != sys.n())
    throw ConfigError("transform shape mismatch");
  double cond = condition_estimate(T);
  if (!(cond <= condition_ceiling))
    throw SingularTransform("state transform numerically singular, condition " +
                            std::to_string(cond));
  Matrix t_inv = svd_inverse(T);
  return LtiRealization(T * sys.A * t_inv, T * sys.B, sys.C * t_inv);
}

}  // namespace ltsi
