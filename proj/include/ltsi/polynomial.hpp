#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace ltsi {

/// Polynomial in the spatial frequency omega with complex coefficients,
/// stored lowest degree first. Coefficients are kept verbatim (no trimming)
/// so serialized symbols round-trip bit for bit.
class Polynomial {
 public:
  using C = std::complex<double>;

  Polynomial() = default;
  explicit Polynomial(std::vector<C> coeffs) : coeffs_(std::move(coeffs)) {}

  static Polynomial constant(C c) { return Polynomial({c}); }
  static Polynomial monomial(int degree, C c = C(1.0, 0.0)) {
    std::vector<C> v(degree + 1, C(0.0, 0.0));
    v[degree] = c;
    return Polynomial(std::move(v));
  }

  C operator()(double omega) const {
    C acc(0.0, 0.0);
    for (size_t i = coeffs_.size(); i-- > 0;) acc = acc * omega + coeffs_[i];
    return acc;
  }

  // Coefficient-wise conjugate; for real omega this evaluates to conj(p(omega)).
  Polynomial conj() const {
    std::vector<C> v(coeffs_.size());
    for (size_t i = 0; i < coeffs_.size(); ++i) v[i] = std::conj(coeffs_[i]);
    return Polynomial(std::move(v));
  }

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<C>& coeffs() const { return coeffs_; }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<C> v(std::max(a.coeffs_.size(), b.coeffs_.size()), C(0.0, 0.0));
    for (size_t i = 0; i < a.coeffs_.size(); ++i) v[i] += a.coeffs_[i];
    for (size_t i = 0; i < b.coeffs_.size(); ++i) v[i] += b.coeffs_[i];
    return Polynomial(std::move(v));
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.coeffs_.empty() || b.coeffs_.empty()) return Polynomial();
    std::vector<C> v(a.coeffs_.size() + b.coeffs_.size() - 1, C(0.0, 0.0));
    for (size_t i = 0; i < a.coeffs_.size(); ++i)
      for (size_t j = 0; j < b.coeffs_.size(); ++j) v[i + j] += a.coeffs_[i] * b.coeffs_[j];
    return Polynomial(std::move(v));
  }

  friend Polynomial operator*(C s, const Polynomial& p) {
    std::vector<C> v(p.coeffs_);
    for (auto& c : v) c *= s;
    return Polynomial(std::move(v));
  }

 private:
  std::vector<C> coeffs_;
};

}  // namespace ltsi
