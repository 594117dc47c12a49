#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ltsi/defaults.hpp"
#include "ltsi/errors.hpp"
#include "ltsi/grid.hpp"
#include "ltsi/linalg.hpp"
#include "ltsi/lti.hpp"
#include "ltsi/parallel.hpp"
#include "ltsi/symbol.hpp"

namespace ltsi {

/// A frequency-indexed family of state-space members given by symbols.
struct LtsiRealization {
  MatrixSymbol A_sym, B_sym, C_sym;
  int n, m, p;
  FrequencyGrid grid;

  LtsiRealization(MatrixSymbol a, MatrixSymbol b, MatrixSymbol c, FrequencyGrid g)
      : A_sym(std::move(a)), B_sym(std::move(b)), C_sym(std::move(c)),
        n(A_sym.rows()), m(B_sym.cols()), p(C_sym.rows()), grid(std::move(g)) {
    if (A_sym.rows() != A_sym.cols()) throw ConfigError("A symbol must be square");
    if (B_sym.rows() != n) throw ConfigError("B symbol row count must match A");
    if (C_sym.cols() != n) throw ConfigError("C symbol column count must match A");
  }

  LtiRealization member(double omega) const {
    return LtiRealization(A_sym.eval(omega), B_sym.eval(omega), C_sym.eval(omega));
  }
  LtiRealization member_at(int index) const { return member(grid.sample(index)); }
};

// --- shared sup-scan plumbing -------------------------------------------------

enum class SupVerdict { CertifiedBounded, SuspectedUnbounded, Inconclusive };

inline std::string to_string(SupVerdict v) {
  switch (v) {
    case SupVerdict::CertifiedBounded: return "certified-bounded";
    case SupVerdict::SuspectedUnbounded: return "suspected-unbounded";
    default: return "inconclusive";
  }
}

struct SupScan {
  double value = 0.0;
  double argmax_omega = 0.0;
  int argmax_index = -1;
  bool boundary = false;  // max first attained at an edge sample...
  bool growing = false;   // ...and strictly above its inward neighbor
};

namespace detail {

inline SupScan scan_sup(const std::vector<int>& indices,
                        const std::vector<double>& norms,
                        const FrequencyGrid& grid) {
  SupScan s;
  if (indices.empty()) return s;
  int pos = 0;
  for (int i = 0; i < static_cast<int>(indices.size()); ++i)
    if (norms[i] > s.value) {
      s.value = norms[i];
      pos = i;
    }
  s.argmax_index = indices[pos];
  s.argmax_omega = grid.sample(indices[pos]);
  bool at_left = (pos == 0);
  bool at_right = (pos + 1 == static_cast<int>(indices.size()));
  s.boundary = at_left || at_right;
  if (s.boundary && indices.size() >= 2) {
    double inward = at_left ? norms[pos + 1] : norms[pos - 1];
    s.growing = s.value > inward * (1.0 + 1e-12) + 1e-300;
  }
  return s;
}

inline SupVerdict sup_verdict(const SupScan& s, double bound) {
  if (s.boundary && s.growing) return SupVerdict::SuspectedUnbounded;
  if (s.value <= bound) return SupVerdict::CertifiedBounded;
  return SupVerdict::Inconclusive;
}

constexpr double quiet_nan() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace detail

// --- reciprocity across the family --------------------------------------------

struct FamilyReciprocitySample {
  int index = 0;
  double omega = 0.0;
  bool reciprocal = false;
  double residual = 0.0;
  double scale = 1.0;
};

struct FamilyReciprocityReport {
  std::vector<FamilyReciprocitySample> samples;  // active samples, grid order
  bool reciprocal = false;                       // conjunction over samples
  double worst_residual = 0.0;
  double worst_omega = 0.0;
};

inline FamilyReciprocityReport family_reciprocity(
    const LtsiRealization& sys,
    const std::vector<double>& t_samples = default_impulse_times(),
    double tol = 1e-8, int threads = 0) {
  if (sys.m != sys.p) throw ConfigError("family reciprocity needs m = p");
  auto active = sys.grid.active_indices();
  FamilyReciprocityReport rep;
  rep.samples.resize(active.size());
  parallel_for(static_cast<int>(active.size()), [&](int i) {
    int k = active[i];
    auto probe = is_reciprocal(sys.member_at(k), t_samples, tol);
    rep.samples[i] = {k, sys.grid.sample(k), probe.reciprocal, probe.worst_residual,
                      probe.scale};
  }, threads);
  rep.reciprocal = !rep.samples.empty();
  for (const auto& s : rep.samples) {
    rep.reciprocal = rep.reciprocal && s.reciprocal;
    if (s.residual > rep.worst_residual) {
      rep.worst_residual = s.residual;
      rep.worst_omega = s.omega;
    }
  }
  return rep;
}

// --- minimality scan ------------------------------------------------------------

struct RankDrop {
  int index = 0;
  double omega = 0.0;
  int rank_W = 0;
  int rank_O = 0;
};

struct MinimalFrequencyReport {
  std::vector<RankDrop> drops;  // every sample where the member is non-minimal,
                                // pre-excluded samples included
  FrequencyGrid working_grid;   // input grid with the drops marked excluded
};

inline MinimalFrequencyReport minimal_frequency_set(
    const LtsiRealization& sys, double rel_threshold = defaults::rank_rel_threshold,
    int threads = 0) {
  int count = sys.grid.count();
  std::vector<MinimalityReport> reports(count);
  parallel_for(count, [&](int k) {
    reports[k] = minimality_ranks(sys.member_at(k), rel_threshold);
  }, threads);
  MinimalFrequencyReport out{.drops = {}, .working_grid = sys.grid};
  std::vector<int> extra;
  for (int k = 0; k < count; ++k)
    if (!reports[k].minimal) {
      out.drops.push_back({k, sys.grid.sample(k), reports[k].rank_W, reports[k].rank_O});
      extra.push_back(k);
    }
  out.working_grid = sys.grid.with_excluded(extra);
  return out;
}

// --- the S-field (reciprocity certificate) --------------------------------------

struct LimitExtension {
  int index = 0;
  double omega = 0.0;
  Matrix value;
  double gap = 0.0;      // two-sided disagreement, absolute
  bool two_sided = false;
};

struct ReciprocityCertificate {
  MatrixSymbol S_sym;  // Sampled on the family grid; drops and pre-excluded
                       // samples are excluded (extension values stored at drops)
  FrequencyGrid grid;
  std::vector<double> residual_reciprocity;  // per sample: ||A^aS - SA|| + ||C^a - SB||,
                                             // NaN where no value exists
  std::vector<RankDrop> rank_drops;
  std::vector<LimitExtension> limit_extensions;
  double sup_S = 0.0;
  double sup_S_inv = 0.0;
  SupScan scan_S, scan_S_inv;
  double worst_hermiticity = 0.0;  // relative, over all stored values
};

inline ReciprocityCertificate s_field(const LtsiRealization& sys, double tol = 1e-6,
                                      double gap_tol = defaults::extension_gap_tol,
                                      int threads = 0) {
  if (sys.m != sys.p) throw ConfigError("the S-field needs m = p");
  auto mfs = minimal_frequency_set(sys, defaults::rank_rel_threshold, threads);
  const int count = sys.grid.count();

  std::vector<char> is_drop(count, 0);
  for (const auto& d : mfs.drops) is_drop[d.index] = 1;

  std::vector<int> active;
  for (int k = 0; k < count; ++k)
    if (!sys.grid.is_excluded(k) && !is_drop[k]) active.push_back(k);

  std::vector<Matrix> values(count, Matrix::Zero(sys.n, sys.n));
  std::vector<char> have(count, 0);
  std::vector<double> residual(count, detail::quiet_nan());
  std::vector<double> herm(active.size(), 0.0);
  std::vector<double> norm_S(active.size(), 0.0);
  std::vector<double> norm_S_inv(active.size(), 0.0);

  auto abs_residual = [&](int k, const Matrix& s) {
    auto mem = sys.member_at(k);
    return spectral_norm(Matrix(mem.A.adjoint() * s - s * mem.A)) +
           spectral_norm(Matrix(mem.C.adjoint() - s * mem.B));
  };

  parallel_for(static_cast<int>(active.size()), [&](int i) {
    int k = active[i];
    auto res = reciprocity_matrix(sys.member_at(k), tol);
    Matrix s = hermitian_part(res.S);
    values[k] = s;
    have[k] = 1;
    residual[k] = abs_residual(k, s);
    herm[i] = res.hermiticity;
    Eigen::JacobiSVD<Matrix> svd(s);
    const auto& sv = svd.singularValues();
    norm_S[i] = sv(0);
    norm_S_inv[i] = sv(sv.size() - 1) > 0 ? 1.0 / sv(sv.size() - 1)
                                          : std::numeric_limits<double>::infinity();
  }, threads);

  ReciprocityCertificate cert{
      .S_sym = MatrixSymbol::constant(Matrix::Zero(sys.n, sys.n)),
      .grid = sys.grid,
      .residual_reciprocity = {},
      .rank_drops = mfs.drops,
      .limit_extensions = {},
      .sup_S = 0.0,
      .sup_S_inv = 0.0,
      .scan_S = {},
      .scan_S_inv = {},
      .worst_hermiticity = 0.0};

  // limit extensions at the rank drops: linear extrapolation from two active
  // samples on each side; the two-sided gap is the discrete limit hypothesis
  for (const auto& d : mfs.drops) {
    int k = d.index;
    bool left_ok = k >= 2 && have[k - 1] && have[k - 2];
    bool right_ok = k + 2 < count && have[k + 1] && have[k + 2];
    if (!left_ok && !right_ok) continue;
    LimitExtension ext;
    ext.index = k;
    ext.omega = sys.grid.sample(k);
    if (left_ok && right_ok) {
      Matrix left = 2.0 * values[k - 1] - values[k - 2];
      Matrix right = 2.0 * values[k + 1] - values[k + 2];
      ext.gap = spectral_norm(Matrix(left - right));
      double nearby = 1.0 + std::max(spectral_norm(left), spectral_norm(right));
      if (ext.gap > gap_tol * nearby)
        throw LimitDisagreement(ext.omega, ext.gap);
      ext.value = hermitian_part(Matrix(0.5 * (left + right)));
      ext.two_sided = true;
    } else if (left_ok) {
      ext.value = hermitian_part(Matrix(2.0 * values[k - 1] - values[k - 2]));
    } else {
      ext.value = hermitian_part(Matrix(2.0 * values[k + 1] - values[k + 2]));
    }
    values[k] = ext.value;
    residual[k] = abs_residual(k, ext.value);
    cert.limit_extensions.push_back(std::move(ext));
  }

  std::vector<int> drop_indices;
  for (const auto& d : mfs.drops) drop_indices.push_back(d.index);
  cert.S_sym = MatrixSymbol::sampled(sys.grid.with_excluded(drop_indices), values);
  cert.residual_reciprocity = std::move(residual);
  cert.scan_S = detail::scan_sup(active, norm_S, sys.grid);
  cert.scan_S_inv = detail::scan_sup(active, norm_S_inv, sys.grid);
  cert.sup_S = cert.scan_S.value;
  cert.sup_S_inv = cert.scan_S_inv.value;
  for (double h : herm) cert.worst_hermiticity = std::max(cert.worst_hermiticity, h);
  return cert;
}

struct SelfDualityReport {
  SupVerdict verdict = SupVerdict::Inconclusive;
  bool certified = false;
  double sup_S = 0.0;
  double sup_S_inv = 0.0;
};

inline SelfDualityReport self_duality_check(const ReciprocityCertificate& cert,
                                            double bound = defaults::sup_bound) {
  SelfDualityReport rep;
  rep.sup_S = cert.sup_S;
  rep.sup_S_inv = cert.sup_S_inv;
  SupVerdict vs = detail::sup_verdict(cert.scan_S, bound);
  SupVerdict vi = detail::sup_verdict(cert.scan_S_inv, bound);
  if (vs == SupVerdict::SuspectedUnbounded || vi == SupVerdict::SuspectedUnbounded)
    rep.verdict = SupVerdict::SuspectedUnbounded;
  else if (vs == SupVerdict::CertifiedBounded && vi == SupVerdict::CertifiedBounded)
    rep.verdict = SupVerdict::CertifiedBounded;
  else
    rep.verdict = SupVerdict::Inconclusive;
  rep.certified = rep.verdict == SupVerdict::CertifiedBounded;
  return rep;
}

// --- storage certificates --------------------------------------------------------

struct FamilySupplied {
  MatrixSymbol Q;
};
struct FamilyLossless {};
struct FamilyRelaxation {};
using FamilyStorageStrategy =
    std::variant<FamilySupplied, FamilyLossless, FamilyRelaxation>;

struct StorageCertificate {
  MatrixSymbol Q_sym;
  FrequencyGrid grid;
  std::vector<double> lmi_margin;         // per sample, NaN where no value
  std::vector<double> output_residual;
  std::vector<double> positivity_margin;
  std::vector<int> active_indices;
  std::vector<RankDrop> rank_drops;
  double sup_Q = 0.0;
  SupScan scan_Q;
  bool weakly_passive = false;
  double tol = 0.0;
};

inline StorageCertificate weak_impedance_passivity(const LtsiRealization& sys,
                                                   const FamilyStorageStrategy& strategy,
                                                   double tol = 1e-8, int threads = 0) {
  if (sys.m != sys.p) throw ConfigError("passivity analysis needs m = p");
  auto mfs = minimal_frequency_set(sys, defaults::rank_rel_threshold, threads);
  const int count = sys.grid.count();
  std::vector<char> is_drop(count, 0);
  for (const auto& d : mfs.drops) is_drop[d.index] = 1;
  std::vector<int> active;
  for (int k = 0; k < count; ++k)
    if (!sys.grid.is_excluded(k) && !is_drop[k]) active.push_back(k);

  std::optional<ReciprocityCertificate> relax_cert;
  if (std::holds_alternative<FamilyRelaxation>(strategy))
    relax_cert = s_field(sys, 1e-6, defaults::extension_gap_tol, threads);

  StorageCertificate cert{.Q_sym = MatrixSymbol::constant(Matrix::Zero(sys.n, sys.n)),
                          .grid = sys.grid,
                          .lmi_margin = std::vector<double>(count, detail::quiet_nan()),
                          .output_residual = std::vector<double>(count, detail::quiet_nan()),
                          .positivity_margin = std::vector<double>(count, detail::quiet_nan()),
                          .active_indices = active,
                          .rank_drops = mfs.drops,
                          .sup_Q = 0.0,
                          .scan_Q = {},
                          .weakly_passive = false,
                          .tol = tol};

  std::vector<Matrix> values(count, Matrix::Zero(sys.n, sys.n));
  std::vector<double> norm_Q(active.size(), 0.0);

  parallel_for(static_cast<int>(active.size()), [&](int i) {
    int k = active[i];
    double omega = sys.grid.sample(k);
    auto mem = sys.member_at(k);
    StorageStrategy local = LosslessStorage{};
    if (std::holds_alternative<FamilySupplied>(strategy))
      local = SuppliedStorage{std::get<FamilySupplied>(strategy).Q.eval(omega)};
    else if (std::holds_alternative<FamilyRelaxation>(strategy))
      local = RelaxationStorage{relax_cert->S_sym.eval(omega)};
    StorageResult res;
    try {
      res = storage_synthesis(mem, local, tol);
    } catch (const Error& e) {
      throw InfeasibleStorage("at omega = " + std::to_string(omega) + ": " + e.what());
    }
    values[k] = res.Q;
    cert.lmi_margin[k] = res.lmi_margin;
    cert.output_residual[k] = res.output_residual;
    cert.positivity_margin[k] = res.positivity_margin;
    norm_Q[i] = spectral_norm(res.Q);
  }, threads);

  std::vector<int> drop_indices;
  for (const auto& d : mfs.drops) drop_indices.push_back(d.index);
  cert.Q_sym = MatrixSymbol::sampled(sys.grid.with_excluded(drop_indices), values);
  cert.scan_Q = detail::scan_sup(active, norm_Q, sys.grid);
  cert.sup_Q = cert.scan_Q.value;
  cert.weakly_passive = !active.empty();  // synthesis throws on any violation
  return cert;
}

struct ImpedancePassivityReport {
  SupVerdict verdict = SupVerdict::Inconclusive;
  bool certified = false;
  double sup_Q = 0.0;
};

inline ImpedancePassivityReport impedance_passivity(const StorageCertificate& cert,
                                                    double bound = defaults::sup_bound) {
  ImpedancePassivityReport rep;
  rep.sup_Q = cert.sup_Q;
  rep.verdict = cert.weakly_passive ? detail::sup_verdict(cert.scan_Q, bound)
                                    : SupVerdict::Inconclusive;
  rep.certified = cert.weakly_passive && rep.verdict == SupVerdict::CertifiedBounded;
  return rep;
}

// --- generator diagnostic ----------------------------------------------------------

enum class GeneratorVerdict { Contraction, UniformlyBounded, SuspectedUnbounded, Inconclusive };

inline std::string to_string(GeneratorVerdict v) {
  switch (v) {
    case GeneratorVerdict::Contraction: return "contraction";
    case GeneratorVerdict::UniformlyBounded: return "uniformly-bounded";
    case GeneratorVerdict::SuspectedUnbounded: return "suspected-unbounded";
    default: return "inconclusive";
  }
}

struct GeneratorDiagnostic {
  double t = 0.0;
  std::vector<int> indices;      // active samples, grid order
  std::vector<double> norms;     // ||expm(A t)|| per active sample
  double max_norm = 0.0;
  double argmax_omega = 0.0;
  GeneratorVerdict verdict = GeneratorVerdict::Inconclusive;
};

inline GeneratorDiagnostic generator_diagnostic(const LtsiRealization& sys, double t,
                                                double tol = 1e-9,
                                                double ceiling = defaults::sup_bound,
                                                int threads = 0) {
  if (!(t > 0)) throw ConfigError("generator diagnostic needs t > 0");
  GeneratorDiagnostic diag;
  diag.t = t;
  diag.indices = sys.grid.active_indices();
  diag.norms.resize(diag.indices.size());
  parallel_for(static_cast<int>(diag.indices.size()), [&](int i) {
    diag.norms[i] = propagator_norm(sys.member_at(diag.indices[i]), t);
  }, threads);
  SupScan scan = detail::scan_sup(diag.indices, diag.norms, sys.grid);
  diag.max_norm = scan.value;
  diag.argmax_omega = scan.argmax_omega;
  if (diag.max_norm <= 1.0 + tol)
    diag.verdict = GeneratorVerdict::Contraction;
  else if (scan.boundary && scan.growing)
    diag.verdict = GeneratorVerdict::SuspectedUnbounded;
  else if (diag.max_norm <= ceiling)
    diag.verdict = GeneratorVerdict::UniformlyBounded;
  else
    diag.verdict = GeneratorVerdict::Inconclusive;
  return diag;
}

}  // namespace ltsi
