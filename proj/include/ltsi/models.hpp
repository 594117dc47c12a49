#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ltsi/analysis.hpp"
#include "ltsi/errors.hpp"
#include "ltsi/grid.hpp"
#include "ltsi/polynomial.hpp"
#include "ltsi/symbol.hpp"

namespace ltsi {

// A built-in family plus whatever closed-form certificates are known for it.
// known_transfer maps (s, omega) to the p x m transfer value.
struct ModelBundle {
  std::string name;
  std::string notes;
  LtsiRealization sys;
  std::optional<MatrixSymbol> known_S;
  std::optional<MatrixSymbol> known_Q;
  std::optional<MatrixSymbol> known_T;
  std::function<Matrix(Complex, double)> known_transfer;
};

namespace detail {

inline Polynomial mz_c(Complex c) { return Polynomial::constant(c); }
inline Polynomial mz_zero() { return Polynomial::constant(Complex(0, 0)); }
inline Polynomial mz_jw() { return Polynomial({Complex(0, 0), Complex(0, 1)}); }
inline Polynomial mz_mjw() { return Polynomial({Complex(0, 0), Complex(0, -1)}); }
inline Polynomial mz_mw2() {
  return Polynomial({Complex(0, 0), Complex(0, 0), Complex(-1, 0)});
}
inline Polynomial mz_w2() {
  return Polynomial({Complex(0, 0), Complex(0, 0), Complex(1, 0)});
}
// -1 - omega^2 and 1 + omega^2
inline Polynomial mz_m1mw2() {
  return Polynomial({Complex(-1, 0), Complex(0, 0), Complex(-1, 0)});
}
inline Polynomial mz_1pw2() {
  return Polynomial({Complex(1, 0), Complex(0, 0), Complex(1, 0)});
}

inline Matrix mz_scalar(Complex v) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return m;
}

}  // namespace detail

inline std::vector<std::string> model_names() {
  return {"timoshenko-naive", "timoshenko-physical", "heat", "reaction-diffusion",
          "wave"};
}

inline ModelBundle model(const std::string& name, FrequencyGrid grid = default_grid()) {
  using detail::mz_c;
  using detail::mz_jw;
  using detail::mz_mjw;
  using detail::mz_mw2;
  using detail::mz_scalar;
  using detail::mz_w2;
  using detail::mz_zero;

  if (name == "timoshenko-naive") {
    // state [q, phi, q_t, phi_t], force input on q_t, velocity output
    MatrixSymbol a = MatrixSymbol::closed_form({
        {mz_zero(), mz_zero(), mz_c(1), mz_zero()},
        {mz_zero(), mz_zero(), mz_zero(), mz_c(1)},
        {mz_mw2(), mz_jw(), mz_zero(), mz_zero()},
        {mz_mjw(), detail::mz_m1mw2(), mz_zero(), mz_zero()},
    });
    Matrix b = Matrix::Zero(4, 1);
    b(2, 0) = 1.0;
    MatrixSymbol s_known = MatrixSymbol::closed_form({
        {mz_mw2(), mz_jw(), mz_zero(), mz_zero()},
        {mz_mjw(), detail::mz_m1mw2(), mz_zero(), mz_zero()},
        {mz_zero(), mz_zero(), mz_c(1), mz_zero()},
        {mz_zero(), mz_zero(), mz_zero(), mz_c(1)},
    });
    MatrixSymbol q_known = MatrixSymbol::closed_form({
        {mz_w2(), mz_mjw(), mz_zero(), mz_zero()},
        {mz_jw(), detail::mz_1pw2(), mz_zero(), mz_zero()},
        {mz_zero(), mz_zero(), mz_c(1), mz_zero()},
        {mz_zero(), mz_zero(), mz_zero(), mz_c(1)},
    });
    // velocity-first congruence factor: T^aT = Q and T^{-a}ST^{-1} = diag(I, -I)
    MatrixSymbol t_known = MatrixSymbol::closed_form({
        {mz_zero(), mz_zero(), mz_c(1), mz_zero()},
        {mz_zero(), mz_zero(), mz_zero(), mz_c(1)},
        {mz_mjw(), mz_c(-1), mz_zero(), mz_zero()},
        {mz_zero(), mz_mjw(), mz_zero(), mz_zero()},
    });
    auto transfer_fn = [](Complex s, double omega) {
      Complex w2(omega * omega, 0);
      Complex num = s * (s * s + w2 + 1.0);
      Complex den = s * s * s * s + s * s * (2.0 * w2 + 1.0) + w2 * w2;
      return mz_scalar(num / den);
    };
    return ModelBundle{.name = name,
                       .notes = "shear beam in second-order form; force in, "
                                "collocated velocity out",
                       .sys = LtsiRealization(a, MatrixSymbol::constant(b),
                                              MatrixSymbol::constant(b.adjoint()),
                                              std::move(grid)),
                       .known_S = s_known,
                       .known_Q = q_known,
                       .known_T = t_known,
                       .known_transfer = transfer_fn};
  }

  if (name == "timoshenko-physical") {
    // energy state [q_t, phi_t, shear, bending rate]; +j omega stands for the
    // spatial derivative
    MatrixSymbol a = MatrixSymbol::closed_form({
        {mz_zero(), mz_zero(), mz_jw(), mz_zero()},
        {mz_zero(), mz_zero(), mz_c(1), mz_jw()},
        {mz_jw(), mz_c(-1), mz_zero(), mz_zero()},
        {mz_zero(), mz_jw(), mz_zero(), mz_zero()},
    });
    Matrix b = Matrix::Zero(4, 1);
    b(0, 0) = 1.0;  // force drives the transverse velocity
    Matrix d = Matrix::Identity(4, 4);
    d(2, 2) = Complex(-1, 0);
    d(3, 3) = Complex(-1, 0);
    auto transfer_fn = [](Complex s, double omega) {
      Complex w2(omega * omega, 0);
      Complex num = s * (s * s + w2 + 1.0);
      Complex den = s * s * s * s + s * s * (2.0 * w2 + 1.0) + w2 * w2;
      return mz_scalar(num / den);
    };
    return ModelBundle{.name = name,
                       .notes = "canonical self-dual form of the shear beam; "
                                "lossless with unit storage",
                       .sys = LtsiRealization(a, MatrixSymbol::constant(b),
                                              MatrixSymbol::constant(b.adjoint()),
                                              std::move(grid)),
                       .known_S = MatrixSymbol::constant(d),
                       .known_Q = MatrixSymbol::constant(Matrix::Identity(4, 4)),
                       .known_T = std::nullopt,
                       .known_transfer = transfer_fn};
  }

  if (name == "heat") {
    auto transfer_fn = [](Complex s, double omega) {
      return mz_scalar(1.0 / (s + omega * omega));
    };
    return ModelBundle{.name = name,
                       .notes = "scalar relaxation family",
                       .sys = LtsiRealization(
                           MatrixSymbol::closed_form({{mz_mw2()}}),
                           MatrixSymbol::constant(Matrix::Identity(1, 1)),
                           MatrixSymbol::constant(Matrix::Identity(1, 1)),
                           std::move(grid)),
                       .known_S = MatrixSymbol::constant(Matrix::Identity(1, 1)),
                       .known_Q = MatrixSymbol::constant(Matrix::Identity(1, 1)),
                       .known_T = std::nullopt,
                       .known_transfer = transfer_fn};
  }

  if (name == "reaction-diffusion") {
    auto transfer_fn = [](Complex s, double omega) {
      return mz_scalar(1.0 / (s + 1.0 + omega * omega));
    };
    return ModelBundle{.name = name,
                       .notes = "uniformly damped relaxation family; completely "
                                "monotone impulse responses",
                       .sys = LtsiRealization(
                           MatrixSymbol::closed_form(
                               {{detail::mz_m1mw2()}}),
                           MatrixSymbol::constant(Matrix::Identity(1, 1)),
                           MatrixSymbol::constant(Matrix::Identity(1, 1)),
                           std::move(grid)),
                       .known_S = MatrixSymbol::constant(Matrix::Identity(1, 1)),
                       .known_Q = MatrixSymbol::constant(Matrix::Identity(1, 1)),
                       .known_T = std::nullopt,
                       .known_transfer = transfer_fn};
  }

  if (name == "wave") {
    Matrix b = Matrix::Zero(2, 1);
    b(0, 0) = 1.0;
    Matrix d = Matrix::Identity(2, 2);
    d(1, 1) = Complex(-1, 0);
    auto transfer_fn = [](Complex s, double omega) {
      return mz_scalar(s / (s * s + omega * omega));
    };
    return ModelBundle{.name = name,
                       .notes = "first-order lossless pair",
                       .sys = LtsiRealization(
                           MatrixSymbol::closed_form(
                               {{mz_zero(), mz_jw()}, {mz_jw(), mz_zero()}}),
                           MatrixSymbol::constant(b),
                           MatrixSymbol::constant(b.adjoint()), std::move(grid)),
                       .known_S = MatrixSymbol::constant(d),
                       .known_Q = MatrixSymbol::constant(Matrix::Identity(2, 2)),
                       .known_T = std::nullopt,
                       .known_transfer = transfer_fn};
  }

  throw UnknownModel(name);
}

}  // namespace ltsi
