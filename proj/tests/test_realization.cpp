#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "ltsi/realization.hpp"
#include "test_helpers.hpp"

using namespace ltsi;
using doctest::Approx;

namespace {

LtsiRealization beam_family(FrequencyGrid grid) {
  return LtsiRealization(th::beam_A(), th::beam_B(), th::beam_C(), std::move(grid));
}

LtsiRealization heat_family(FrequencyGrid grid) {
  return LtsiRealization(MatrixSymbol::closed_form({{th::mw2()}}),
                         MatrixSymbol::constant(Matrix::Identity(1, 1)),
                         MatrixSymbol::constant(Matrix::Identity(1, 1)),
                         std::move(grid));
}

LtsiRealization wave_family(FrequencyGrid grid) {
  Matrix b = Matrix::Zero(2, 1);
  b(0, 0) = Complex(1, 0);
  return LtsiRealization(
      MatrixSymbol::closed_form({{th::zero(), th::jw()}, {th::jw(), th::zero()}}),
      MatrixSymbol::constant(b), MatrixSymbol::constant(b.adjoint()),
      std::move(grid));
}

Matrix scalar_m(double re, double im = 0.0) {
  Matrix m(1, 1);
  m(0, 0) = Complex(re, im);
  return m;
}

}  // namespace

TEST_CASE("signature factorization, scalar oracles") {
  auto f = signature_factorize(scalar_m(-4.0), scalar_m(4.0));
  CHECK(f.L(0, 0).real() == Approx(2.0));
  CHECK(f.L(0, 0).imag() == Approx(0.0));
  CHECK(f.D(0, 0).real() == Approx(-1.0));
  CHECK(f.n_plus == 0);
  CHECK(f.n_minus == 1);
  CHECK(f.eigenvalue_deviation <= 1e-14);
  CHECK(f.compat_residual <= 1e-14);  // 4 - (-4)(1/4)(-4) = 0

  auto id = signature_factorize(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  CHECK(id.n_plus == 2);
  CHECK(id.n_minus == 0);
  CHECK((id.D - Matrix::Identity(2, 2)).norm() == Approx(0.0));
}

TEST_CASE("signature factorization recovers the beam inertia and transform identities") {
  Matrix s = th::beam_S().eval(1.0);
  Matrix q = th::beam_Q().eval(1.0);
  auto f = signature_factorize(s, q);
  CHECK(f.n_plus == 2);
  CHECK(f.n_minus == 2);
  CHECK(f.eigenvalue_deviation <= 1e-12);
  CHECK(f.compat_residual <= 1e-12);
  for (int i = 0; i < 4; ++i)
    CHECK(f.D(i, i).real() == Approx(i < 2 ? 1.0 : -1.0));

  // defining identities of the congruence pair
  Matrix t = f.U.adjoint() * f.L.adjoint();
  Matrix tinv = t.inverse();
  CHECK(spectral_norm(Matrix(t.adjoint() * t - q)) <= 1e-12);
  CHECK(spectral_norm(Matrix(tinv.adjoint() * hermitian_part(s) * tinv - f.D)) <= 1e-10);
}

TEST_CASE("signature factorization guards") {
  Matrix qbad = Matrix::Identity(2, 2);
  qbad(1, 1) = Complex(-1, 0);
  CHECK_THROWS_AS(signature_factorize(Matrix::Identity(2, 2), qbad),
                  NotPositiveDefinite);

  Matrix sfar = Matrix::Identity(2, 2);
  sfar(0, 0) = Complex(2, 0);  // |lambda(N)| = {2, 1}: not a compatible pair
  CHECK_THROWS_AS(signature_factorize(sfar, Matrix::Identity(2, 2)), NotCompatible);

  CHECK_THROWS_AS(signature_factorize(Matrix::Identity(2, 2), Matrix::Identity(3, 3)),
                  ConfigError);
}

TEST_CASE("heat pipeline transforms trivially") {
  auto sys = heat_family(FrequencyGrid(-2.0, 0.25, 17));
  auto s_cert = s_field(sys);
  auto q_cert = weak_impedance_passivity(
      sys, FamilySupplied{MatrixSymbol::constant(Matrix::Identity(1, 1))});
  auto real = canonical_transform(sys, s_cert, q_cert);

  CHECK(real.n1 == 1);
  CHECK(real.n2 == 0);
  CHECK(real.active_indices.size() == 17);
  for (double omega : {-2.0, 0.25, 1.5})
    CHECK(std::abs(real.T_sym.eval(omega)(0, 0) - Complex(1, 0)) <= 1e-12);
  CHECK(real.Abar_sym.eval(1.5)(0, 0).real() == Approx(-2.25));
  CHECK(real.worst_io <= 1e-12);
  CHECK(real.worst_duality <= 1e-12);
  CHECK(real.worst_passivity <= 1e-12);  // attained at omega = 0
  CHECK(real.sup_CSQB == Approx(1.0));
  CHECK(real.compat_applied.empty());

  auto fam = real.family();
  CHECK(fam.n == 1);
  auto diag = generator_diagnostic(fam, 1.0);
  CHECK(diag.verdict == GeneratorVerdict::Contraction);
  CHECK(diag.max_norm == Approx(1.0));  // the omega = 0 member is neutral
}

TEST_CASE("beam pipeline meets the canonical-form residual budget") {
  auto sys = beam_family(default_grid());
  auto s_cert = s_field(sys);
  auto q_cert = weak_impedance_passivity(sys, FamilyLossless{});
  auto real = canonical_transform(sys, s_cert, q_cert);

  CHECK(real.n1 == 2);
  CHECK(real.n2 == 2);
  CHECK(real.active_indices.size() == 400);
  for (int i = 0; i < 4; ++i)
    CHECK(real.D(i, i).real() == Approx(i < 2 ? 1.0 : -1.0));

  CHECK(real.worst_io <= 1e-10);
  CHECK(real.worst_duality <= 1e-10);
  CHECK(real.worst_passivity <= 1e-10);
  CHECK(real.worst_b_bottom <= 1e-10);
  CHECK(real.worst_eigenvalue_deviation <= 1e-6);
  CHECK(real.compat_applied.empty());

  // C S^{-1} Q B is identically one for this family
  double worst_csqb = 0.0;
  for (int k : real.active_indices)
    worst_csqb = std::max(worst_csqb, std::abs(real.csqb[k] - 1.0));
  CHECK(worst_csqb <= 1e-8);
  CHECK(real.sup_CSQB == Approx(1.0));

  // the transform must not move the transfer function
  auto fam = real.family();
  for (int k : {3, 57, 150, 260, 399}) {
    double omega = sys.grid.sample(k);
    Complex s_pt(1.3, 0.9);
    Matrix g0 = transfer(sys.member(omega), s_pt);
    Matrix g1 = transfer(fam.member(omega), s_pt);
    CHECK(spectral_norm(Matrix(g1 - g0)) <=
          1e-8 * std::max(1.0, spectral_norm(g0)));
  }

  // lossless family: the transformed propagators are contractions at any horizon
  for (double t : {0.5, 2.0}) {
    auto diag = generator_diagnostic(fam, t);
    CHECK(diag.verdict == GeneratorVerdict::Contraction);
  }

  // alignment keeps the transform from flipping branches between neighbors;
  // checked away from the excluded origin where T itself is discontinuous
  double worst_step = 0.0;
  for (int k = 201; k < 400; ++k) {
    Matrix t0 = real.T_sym.eval(sys.grid.sample(k));
    Matrix t1 = real.T_sym.eval(sys.grid.sample(k + 1));
    worst_step = std::max(worst_step, spectral_norm(Matrix(t1 - t0)));
  }
  CHECK(worst_step <= 0.5);

  auto parts = ph_parts(real);
  CHECK(parts.worst_r_negativity <= 1e-10);
  CHECK(parts.worst_g_bottom <= 1e-10);
  for (int k : {0, 180, 210, 400}) {
    double omega = sys.grid.sample(k);
    Matrix abar = real.Abar_sym.eval(omega);
    Matrix recon = parts.J_sym.eval(omega) - parts.R_sym.eval(omega);
    CHECK(spectral_norm(Matrix(abar - recon)) <=
          1e-9 * std::max(1.0, spectral_norm(abar)));
    CHECK(spectral_norm(parts.R_sym.eval(omega)) <= 1e-10);  // lossless
  }
}

TEST_CASE("wave family already canonical: the pipeline is idempotent") {
  auto sys = wave_family(FrequencyGrid(0.1, 0.1, 5));
  auto s_cert = s_field(sys);
  auto q_cert = weak_impedance_passivity(sys, FamilyLossless{});
  auto real = canonical_transform(sys, s_cert, q_cert);

  CHECK(real.n1 == 1);
  CHECK(real.n2 == 1);
  CHECK(real.D(0, 0).real() == Approx(1.0));
  CHECK(real.D(1, 1).real() == Approx(-1.0));
  for (int k : real.active_indices) {
    double omega = sys.grid.sample(k);
    CHECK(spectral_norm(Matrix(real.T_sym.eval(omega) - Matrix::Identity(2, 2))) <=
          1e-9);
    CHECK(spectral_norm(Matrix(real.Abar_sym.eval(omega) - sys.A_sym.eval(omega))) <=
          1e-9);
  }
  CHECK(real.worst_io <= 1e-12);
  CHECK(real.worst_duality <= 1e-12);
  CHECK(real.worst_b_bottom <= 1e-12);
  CHECK(real.sup_CSQB == Approx(1.0));
}

TEST_CASE("relaxation-type family lands in the definite canonical class") {
  std::mt19937 rng(7);
  Matrix g = th::random_complex(3, 3, rng);
  Matrix s0 = hermitian_part(Matrix(g * g.adjoint() + Matrix::Identity(3, 3)));
  Matrix h = th::random_complex(3, 3, rng);
  Matrix m = hermitian_part(
      Matrix(-(h * h.adjoint()) - 0.5 * Matrix::Identity(3, 3)));
  Matrix a = s0.partialPivLu().solve(m);
  Matrix b = th::random_complex(3, 1, rng);
  Matrix c = (s0 * b).adjoint();

  LtsiRealization sys(MatrixSymbol::constant(a), MatrixSymbol::constant(b),
                      MatrixSymbol::constant(c), FrequencyGrid(-0.5, 0.5, 3));
  REQUIRE(th::comfortably_minimal(sys.member(0.0)));

  auto s_cert = s_field(sys);
  CHECK(spectral_norm(Matrix(s_cert.S_sym.eval(0.0) - s0)) <=
        1e-8 * spectral_norm(s0));

  auto q_cert = weak_impedance_passivity(sys, FamilyRelaxation{});
  auto real = canonical_transform(sys, s_cert, q_cert);
  CHECK(real.n1 == 3);
  CHECK(real.n2 == 0);
  CHECK(real.worst_duality <= 1e-8);   // Hermitian generator when D = I
  CHECK(real.worst_io <= 1e-8);
  CHECK(real.worst_passivity < 0.0);   // strictly dissipative

  auto parts = ph_parts(real);
  CHECK(spectral_norm(parts.J_sym.eval(0.0)) == 0.0);
  CHECK(lambda_min_hermitian(parts.R_sym.eval(0.0)) > 0.0);
  CHECK(parts.worst_r_negativity == 0.0);
}

TEST_CASE("signature changes across the grid are rejected") {
  FrequencyGrid grid(-1.25, 0.5, 6);
  LtsiRealization sys(
      MatrixSymbol::closed_form(
          {{Polynomial({Complex(-1, 0), Complex(0, 0), Complex(-1, 0)})}}),
      MatrixSymbol::constant(Matrix::Identity(1, 1)),
      MatrixSymbol::constant(Matrix::Identity(1, 1)), grid);

  // hand-built certificates with a sign flip in S halfway along the grid
  std::vector<Matrix> svals(6, Matrix::Identity(1, 1));
  for (int k = 0; k < 3; ++k) svals[k] = -Matrix::Identity(1, 1);
  ReciprocityCertificate s_cert{.S_sym = MatrixSymbol::sampled(grid, svals),
                                .grid = grid,
                                .residual_reciprocity = {},
                                .rank_drops = {},
                                .limit_extensions = {},
                                .sup_S = 1.0,
                                .sup_S_inv = 1.0,
                                .scan_S = {},
                                .scan_S_inv = {},
                                .worst_hermiticity = 0.0};
  StorageCertificate q_cert{.Q_sym = MatrixSymbol::constant(Matrix::Identity(1, 1)),
                            .grid = grid,
                            .lmi_margin = {},
                            .output_residual = {},
                            .positivity_margin = {},
                            .active_indices = {0, 1, 2, 3, 4, 5},
                            .rank_drops = {},
                            .sup_Q = 1.0,
                            .scan_Q = {},
                            .weakly_passive = true,
                            .tol = 1e-8};
  CHECK_THROWS_AS(canonical_transform(sys, s_cert, q_cert), SignatureNotConstant);
}

TEST_CASE("port-Hamiltonian split of a plain dissipative family") {
  LtsiRealization sys(MatrixSymbol::constant(Matrix(-Matrix::Identity(2, 2))),
                      MatrixSymbol::constant(Matrix::Identity(2, 2)),
                      MatrixSymbol::constant(Matrix::Identity(2, 2)),
                      FrequencyGrid(-0.5, 0.5, 3));
  auto s_cert = s_field(sys);
  auto q_cert = weak_impedance_passivity(
      sys, FamilySupplied{MatrixSymbol::constant(Matrix::Identity(2, 2))});
  auto real = canonical_transform(sys, s_cert, q_cert);
  CHECK(real.n1 == 2);
  CHECK(real.n2 == 0);

  auto parts = ph_parts(real);
  CHECK(spectral_norm(parts.J_sym.eval(0.0)) == 0.0);
  CHECK(spectral_norm(Matrix(parts.R_sym.eval(0.0) - Matrix::Identity(2, 2))) <=
        1e-12);
  // the eigenbasis of N = I is only fixed up to rotation, so G is pinned to a
  // unitary, not to the identity
  Matrix gmat = parts.G_sym.eval(0.0);
  CHECK(spectral_norm(Matrix(gmat.adjoint() * gmat - Matrix::Identity(2, 2))) <=
        1e-12);
  CHECK(real.worst_io <= 1e-12);
}

TEST_CASE("non-Hermitian diagonal blocks are a partition violation") {
  FrequencyGrid grid(1.0, 1.0, 1);
  Matrix abad(2, 2);
  abad << Complex(0, 1), Complex(0, 0), Complex(0, 0), Complex(-1, 0);
  Matrix dsig = Matrix::Identity(2, 2);
  dsig(1, 1) = Complex(-1, 0);
  PassiveReciprocalRealization bad{
      .Abar_sym = MatrixSymbol::constant(abad),
      .Bbar_sym = MatrixSymbol::constant(Matrix::Zero(2, 1)),
      .Cbar_sym = MatrixSymbol::constant(Matrix::Zero(1, 2)),
      .T_sym = MatrixSymbol::constant(Matrix::Identity(2, 2)),
      .Tinv_sym = MatrixSymbol::constant(Matrix::Identity(2, 2)),
      .D = dsig,
      .n1 = 1,
      .n2 = 1,
      .working_grid = grid,
      .active_indices = {0},
      .passivity_margin = {},
      .io_residual = {},
      .duality_residual = {},
      .b_bottom_norm = {},
      .csqb = {},
      .worst_passivity = 0.0,
      .worst_io = 0.0,
      .worst_duality = 0.0,
      .worst_b_bottom = 0.0,
      .worst_eigenvalue_deviation = 0.0,
      .sup_CSQB = 0.0,
      .scan_CSQB = {},
      .compat_applied = {}};
  CHECK_THROWS_AS(ph_parts(bad), PartitionViolation);
}
