#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "ltsi/symbol.hpp"
#include "test_helpers.hpp"

using namespace ltsi;
using th::beam_A;
using th::beam_Q;
using th::beam_S;

namespace {
const Complex J(0.0, 1.0);

double entry_gap(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}
}  // namespace

TEST_CASE("closed-form eval: beam drift symbol at omega = 0") {
  Matrix a0 = beam_A().eval(0.0);
  Matrix want = Matrix::Zero(4, 4);
  want(0, 2) = 1.0;
  want(1, 3) = 1.0;
  want(3, 1) = -1.0;
  CHECK(entry_gap(a0, want) == 0.0);
}

TEST_CASE("closed-form eval: reciprocity symbol at omega = 1") {
  Matrix s1 = beam_S().eval(1.0);
  Matrix want = Matrix::Identity(4, 4);
  want(0, 0) = -1.0;
  want(0, 1) = J;
  want(1, 0) = -J;
  want(1, 1) = -2.0;
  CHECK(entry_gap(s1, want) == 0.0);
}

TEST_CASE("adjoint of a closed form stays closed form and is an involution") {
  auto a = beam_A();
  auto aa = adjoint(a);
  CHECK(aa.is_closed_form());
  auto back = adjoint(aa);
  const auto& orig = a.closed_form_entries();
  const auto& twice = back.closed_form_entries();
  for (size_t i = 0; i < orig.size(); ++i)
    for (size_t j = 0; j < orig[i].size(); ++j) {
      const auto& ca = orig[i][j].coeffs();
      const auto& cb = twice[i][j].coeffs();
      REQUIRE(ca.size() == cb.size());
      for (size_t d = 0; d < ca.size(); ++d) {
        // bitwise round trip, conj twice must not perturb anything
        CHECK(ca[d].real() == cb[d].real());
        CHECK(ca[d].imag() == cb[d].imag());
      }
    }
  // scalar spot check: adjoint sends j*omega to -j*omega
  auto jw = MatrixSymbol::closed_form({{th::jw()}});
  CHECK(adjoint(jw).eval(3.0)(0, 0) == Complex(0.0, -3.0));
}

TEST_CASE("storage symbol is a fixed point of adjoint") {
  auto q = beam_Q();
  for (double w : {-3.0, -0.4, 0.0, 1.7}) {
    CHECK(entry_gap(adjoint(q).eval(w), q.eval(w)) == 0.0);
  }
}

TEST_CASE("sampled adjoint round-trips bitwise") {
  FrequencyGrid g(-1.0, 0.5, 5);
  std::mt19937 rng(7);
  std::vector<Matrix> vals;
  for (int k = 0; k < g.count(); ++k) vals.push_back(th::random_complex(3, 2, rng));
  auto s = MatrixSymbol::sampled(g, vals);
  auto back = adjoint(adjoint(s));
  for (int k = 0; k < g.count(); ++k) {
    CHECK(back.sampled_values()[k].rows() == 3);
    CHECK(entry_gap(back.sampled_values()[k], vals[k]) == 0.0);
  }
}

TEST_CASE("sampled eval rejects off-grid frequencies") {
  FrequencyGrid g(0.0, 0.25, 9);
  std::vector<Matrix> vals(9, Matrix::Identity(2, 2));
  auto s = MatrixSymbol::sampled(g, vals);
  CHECK(entry_gap(s.eval(0.5), Matrix::Identity(2, 2)) == 0.0);
  CHECK_THROWS_AS(s.eval(0.37), EvalOffGrid);
  CHECK_THROWS_AS(s.eval(9.0), EvalOffGrid);
}

TEST_CASE("pointwise inverse matches the hand adjugate at omega = 1") {
  // top block of S at omega 1 is [[-1, j], [-j, -2]]: det = 1, so the inverse
  // is the adjugate [[-2, -j], [j, -1]], padded by the identity block
  FrequencyGrid g(1.0, 1.0, 1);
  auto inv = pointwise_inverse(beam_S(), g);
  Matrix want = Matrix::Identity(4, 4);
  want(0, 0) = -2.0;
  want(0, 1) = -J;
  want(1, 0) = J;
  want(1, 1) = -1.0;
  CHECK(entry_gap(inv.symbol.eval(1.0), want) < 1e-14);
  CHECK(inv.newly_excluded.empty());
}

TEST_CASE("pointwise inverse of the identity is the identity") {
  FrequencyGrid g(-2.0, 0.5, 9);
  auto inv = pointwise_inverse(MatrixSymbol::constant(Matrix::Identity(3, 3)), g);
  for (int k = 0; k < g.count(); ++k)
    CHECK(entry_gap(inv.symbol.sampled_values()[k], Matrix::Identity(3, 3)) == 0.0);
}

TEST_CASE("singular storage symbol at omega = 0") {
  // Q(0) has a zero row/column, so inversion must refuse or exclude it.
  FrequencyGrid g(-1.0, 1.0, 3);  // samples -1, 0, 1
  InverseOptions strict;
  strict.auto_exclude = false;
  CHECK_THROWS_AS(pointwise_inverse(beam_Q(), g, strict), SingularAtFrequency);

  auto lenient = pointwise_inverse(beam_Q(), g);
  REQUIRE(lenient.newly_excluded.size() == 1);
  CHECK(lenient.newly_excluded[0] == 1);
  CHECK(lenient.symbol.sampled_grid().is_excluded(1));

  // composite inverse evaluated straight at the singular point also throws
  auto inv_sym = MatrixSymbol::inverse(beam_Q());
  CHECK_THROWS_AS(inv_sym.eval(0.0), SingularAtFrequency);
}

TEST_CASE("inverse times original is the identity at active samples") {
  FrequencyGrid g = puncture_near_zero(FrequencyGrid(-2.0, 0.25, 17));
  auto inv = pointwise_inverse(beam_Q(), g);
  for (int k : inv.symbol.sampled_grid().active_indices()) {
    double w = g.sample(k);
    Matrix prod = inv.symbol.eval(w) * beam_Q().eval(w);
    double tol = 1e-10 * std::max(1.0, inv.condition[k]);
    CHECK(entry_gap(prod, Matrix::Identity(4, 4)) < tol);
  }
}

TEST_CASE("sup norm of a constant symbol") {
  FrequencyGrid g(-5.0, 0.5, 21);
  auto s = MatrixSymbol::constant(2.0 * Matrix::Identity(3, 3));
  auto est = sup_norm(s, g);
  CHECK(est.value == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(est.argmax == -5.0);
  CHECK(est.boundary_attained);
}

TEST_CASE("sup norm of the beam storage symbol is boundary-attained") {
  // top block eigenvalues are ((2w^2+1) +- sqrt(4w^2+1))/2, increasing in |w|
  auto lam_max = [](double w) {
    return ((2 * w * w + 1) + std::sqrt(4 * w * w + 1)) / 2.0;
  };
  auto est = sup_norm(beam_Q(), default_grid());
  CHECK(est.value == doctest::Approx(lam_max(10.0)).epsilon(1e-12));
  CHECK(est.value == doctest::Approx(110.51249219725039).epsilon(1e-12));
  CHECK(std::abs(est.argmax) == doctest::Approx(10.0));
  CHECK(est.boundary_attained);
}

TEST_CASE("sup norm of the zero symbol is zero") {
  FrequencyGrid g(0.0, 1.0, 3);
  auto est = sup_norm(MatrixSymbol::constant(Matrix::Zero(2, 2)), g);
  CHECK(est.value == 0.0);
}

TEST_CASE("grid refinement never lowers the sup estimate") {
  std::mt19937 rng(42);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<Polynomial>> entries(2, std::vector<Polynomial>(2));
    for (auto& row : entries)
      for (auto& e : row) {
        std::vector<Complex> coeffs(4);
        for (auto& c : coeffs) c = Complex(gauss(rng), gauss(rng));
        e = Polynomial(coeffs);
      }
    auto s = MatrixSymbol::closed_form(entries);
    FrequencyGrid coarse(-3.0, 0.5, 13);
    FrequencyGrid fine(-3.0, 0.25, 25);  // superset of coarse samples
    CHECK(sup_norm(s, fine).value >= sup_norm(s, coarse).value);
  }
}

TEST_CASE("continuity report: constant symbol has zero jump") {
  FrequencyGrid g(-1.0, 0.1, 21);
  auto s = materialize(MatrixSymbol::constant(Matrix::Identity(2, 2)), g);
  CHECK(continuity_report(s).max_jump == 0.0);
}

TEST_CASE("continuity report flags a sign flip across zero") {
  FrequencyGrid g(-1.0, 0.5, 5);
  std::vector<Matrix> vals;
  for (int k = 0; k < g.count(); ++k) {
    Matrix m(1, 1);
    m(0, 0) = g.sample(k) < 0 ? -1.0 : 1.0;
    vals.push_back(m);
  }
  auto rep = continuity_report(MatrixSymbol::sampled(g, vals));
  CHECK(rep.max_jump == doctest::Approx(2.0));
  CHECK(rep.at_omega == doctest::Approx(-0.5));
}

TEST_CASE("continuity report obeys the Lipschitz bound for the beam symbol") {
  auto s = materialize(beam_S(), default_grid());
  double h = 0.05;
  double bound = h * (2 * 10.0 + 1) + 2 * h * h;
  auto rep = continuity_report(s);
  CHECK(rep.max_jump <= bound);
  CHECK(rep.max_jump > 0.5 * bound);  // the bound is tight near the edges
}

TEST_CASE("grid parse and layout") {
  auto g = FrequencyGrid::parse("-10:0.05:10");
  CHECK(g.count() == 401);
  CHECK(g.omega_min() == -10.0);
  CHECK(g.omega_max() == doctest::Approx(10.0));
  CHECK_THROWS_AS(FrequencyGrid::parse("1:0:2"), ConfigError);
  CHECK_THROWS_AS(FrequencyGrid::parse("nonsense"), ConfigError);
  CHECK_THROWS_AS(FrequencyGrid::parse("0:0.3:1"), ConfigError);

  auto punctured = default_grid();
  REQUIRE(punctured.excluded().size() == 1);
  CHECK(punctured.excluded()[0] == 200);
  CHECK(std::abs(punctured.sample(200)) < 1e-8);
}
