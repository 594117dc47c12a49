#pragma once

#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ltsi/defaults.hpp"
#include "ltsi/errors.hpp"
#include "ltsi/grid.hpp"
#include "ltsi/linalg.hpp"
#include "ltsi/polynomial.hpp"

namespace ltsi {

/// Frequency-indexed matrix symbol omega -> M(omega). Three backings:
///  - closed form: polynomial entries, evaluable everywhere;
///  - sampled: values on a FrequencyGrid, evaluable only at grid samples;
///  - composite: lazy pointwise sum / product / inverse / adjoint of others.
/// Symbols are immutable; copies share the backing node.
class MatrixSymbol {
  struct ClosedForm {
    std::vector<std::vector<Polynomial>> entries;  // [row][col]
  };
  struct Sampled {
    FrequencyGrid grid;
    std::vector<Matrix> values;  // one per grid sample, zero matrix if excluded
  };
  enum class Op { Sum, Product, Inverse, Adjoint };
  struct Composite {
    Op op;
    std::vector<MatrixSymbol> args;
    double condition_ceiling = defaults::condition_ceiling;  // Inverse only
  };
  struct Node {
    std::variant<ClosedForm, Sampled, Composite> backing;
    int rows = 0;
    int cols = 0;
  };

 public:
  static MatrixSymbol closed_form(std::vector<std::vector<Polynomial>> entries) {
    if (entries.empty() || entries.front().empty())
      throw ConfigError("closed-form symbol needs at least one entry");
    size_t cols = entries.front().size();
    for (const auto& row : entries)
      if (row.size() != cols) throw ConfigError("ragged closed-form entry rows");
    auto node = std::make_shared<Node>();
    node->rows = static_cast<int>(entries.size());
    node->cols = static_cast<int>(cols);
    node->backing = ClosedForm{std::move(entries)};
    return MatrixSymbol(std::move(node));
  }

  static MatrixSymbol constant(const Matrix& value) {
    std::vector<std::vector<Polynomial>> entries(value.rows(),
                                                 std::vector<Polynomial>(value.cols()));
    for (int i = 0; i < value.rows(); ++i)
      for (int j = 0; j < value.cols(); ++j)
        entries[i][j] = Polynomial::constant(value(i, j));
    return closed_form(std::move(entries));
  }

  static MatrixSymbol sampled(FrequencyGrid grid, std::vector<Matrix> values) {
    if (static_cast<int>(values.size()) != grid.count())
      throw ConfigError("sampled symbol needs one value per grid sample");
    for (const auto& v : values)
      if (v.rows() != values.front().rows() || v.cols() != values.front().cols())
        throw ConfigError("sampled symbol values must share one shape");
    auto node = std::make_shared<Node>();
    node->rows = static_cast<int>(values.front().rows());
    node->cols = static_cast<int>(values.front().cols());
    node->backing = Sampled{std::move(grid), std::move(values)};
    return MatrixSymbol(std::move(node));
  }

  static MatrixSymbol sum(MatrixSymbol a, MatrixSymbol b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
      throw ConfigError("symbol sum shape mismatch");
    auto node = std::make_shared<Node>();
    node->rows = a.rows();
    node->cols = a.cols();
    node->backing = Composite{Op::Sum, {std::move(a), std::move(b)}};
    return MatrixSymbol(std::move(node));
  }

  static MatrixSymbol product(MatrixSymbol a, MatrixSymbol b) {
    if (a.cols() != b.rows()) throw ConfigError("symbol product shape mismatch");
    auto node = std::make_shared<Node>();
    node->rows = a.rows();
    node->cols = b.cols();
    node->backing = Composite{Op::Product, {std::move(a), std::move(b)}};
    return MatrixSymbol(std::move(node));
  }

  static MatrixSymbol inverse(MatrixSymbol a,
                              double condition_ceiling = defaults::condition_ceiling) {
    if (a.rows() != a.cols()) throw ConfigError("symbol inverse needs a square symbol");
    auto node = std::make_shared<Node>();
    node->rows = a.rows();
    node->cols = a.cols();
    node->backing = Composite{Op::Inverse, {std::move(a)}, condition_ceiling};
    return MatrixSymbol(std::move(node));
  }

  static MatrixSymbol adjoint_of(MatrixSymbol a) {
    if (a.is_closed_form()) {
      const auto& cf = std::get<ClosedForm>(a.node_->backing);
      std::vector<std::vector<Polynomial>> entries(a.cols(),
                                                   std::vector<Polynomial>(a.rows()));
      for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) entries[j][i] = cf.entries[i][j].conj();
      return closed_form(std::move(entries));
    }
    if (a.is_sampled()) {
      const auto& s = std::get<Sampled>(a.node_->backing);
      std::vector<Matrix> values(s.values.size());
      for (size_t k = 0; k < s.values.size(); ++k) values[k] = s.values[k].adjoint();
      return sampled(s.grid, std::move(values));
    }
    auto node = std::make_shared<Node>();
    node->rows = a.cols();
    node->cols = a.rows();
    node->backing = Composite{Op::Adjoint, {std::move(a)}};
    return MatrixSymbol(std::move(node));
  }

  int rows() const { return node_->rows; }
  int cols() const { return node_->cols; }

  bool is_closed_form() const {
    return std::holds_alternative<ClosedForm>(node_->backing);
  }
  bool is_sampled() const { return std::holds_alternative<Sampled>(node_->backing); }

  const FrequencyGrid& sampled_grid() const {
    if (!is_sampled()) throw ConfigError("symbol is not sampled");
    return std::get<Sampled>(node_->backing).grid;
  }
  const std::vector<Matrix>& sampled_values() const {
    if (!is_sampled()) throw ConfigError("symbol is not sampled");
    return std::get<Sampled>(node_->backing).values;
  }
  const std::vector<std::vector<Polynomial>>& closed_form_entries() const {
    if (!is_closed_form()) throw ConfigError("symbol is not closed form");
    return std::get<ClosedForm>(node_->backing).entries;
  }

  Matrix eval(double omega) const {
    if (is_closed_form()) {
      const auto& cf = std::get<ClosedForm>(node_->backing);
      Matrix out(rows(), cols());
      for (int i = 0; i < rows(); ++i)
        for (int j = 0; j < cols(); ++j) out(i, j) = cf.entries[i][j](omega);
      return out;
    }
    if (is_sampled()) {
      const auto& s = std::get<Sampled>(node_->backing);
      auto k = s.grid.index_of(omega);
      if (!k) throw EvalOffGrid("omega = " + std::to_string(omega) +
                                " is not a sample of the backing grid");
      return s.values[*k];
    }
    const auto& c = std::get<Composite>(node_->backing);
    switch (c.op) {
      case Op::Sum:
        return c.args[0].eval(omega) + c.args[1].eval(omega);
      case Op::Product:
        return c.args[0].eval(omega) * c.args[1].eval(omega);
      case Op::Adjoint:
        return c.args[0].eval(omega).adjoint();
      case Op::Inverse: {
        Matrix m = c.args[0].eval(omega);
        double cond = condition_estimate(m);
        if (!(cond <= c.condition_ceiling)) throw SingularAtFrequency(omega, cond);
        return svd_inverse(m);
      }
    }
    throw ConfigError("unreachable symbol op");
  }

 private:
  explicit MatrixSymbol(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

inline MatrixSymbol adjoint(const MatrixSymbol& s) { return MatrixSymbol::adjoint_of(s); }

struct InverseOptions {
  double condition_ceiling = defaults::condition_ceiling;
  // When set, samples beyond the ceiling are excluded and reported instead of
  // raising SingularAtFrequency.
  bool auto_exclude = true;
};

struct PointwiseInverseResult {
  MatrixSymbol symbol;              // sampled on grid with offending samples excluded
  std::vector<int> newly_excluded;  // indices auto-excluded by the ceiling
  std::vector<double> condition;    // per grid sample; 0 where skipped
};

inline PointwiseInverseResult pointwise_inverse(const MatrixSymbol& s,
                                                const FrequencyGrid& grid,
                                                InverseOptions opts = {}) {
  if (s.rows() != s.cols()) throw ConfigError("pointwise inverse needs a square symbol");
  std::vector<Matrix> values(grid.count(), Matrix::Zero(s.rows(), s.cols()));
  std::vector<int> dropped;
  std::vector<double> cond(grid.count(), 0.0);
  for (int k = 0; k < grid.count(); ++k) {
    if (grid.is_excluded(k)) continue;
    Matrix m = s.eval(grid.sample(k));
    cond[k] = condition_estimate(m);
    if (!(cond[k] <= opts.condition_ceiling)) {
      if (!opts.auto_exclude) throw SingularAtFrequency(grid.sample(k), cond[k]);
      dropped.push_back(k);
      continue;
    }
    values[k] = svd_inverse(m);
  }
  return {MatrixSymbol::sampled(grid.with_excluded(dropped), std::move(values)),
          std::move(dropped), std::move(cond)};
}

struct SupNormEstimate {
  double value = 0.0;
  double argmax = 0.0;           // first sample attaining the max
  double left_edge_value = 0.0;  // norm at the first / last active sample
  double right_edge_value = 0.0;
  bool boundary_attained = false;
};

inline SupNormEstimate sup_norm(const MatrixSymbol& s, const FrequencyGrid& grid) {
  auto active = grid.active_indices();
  if (active.empty()) throw ConfigError("sup_norm needs at least one active sample");
  SupNormEstimate est;
  int arg_k = active.front();
  for (int k : active) {
    double nrm = spectral_norm(s.eval(grid.sample(k)));
    if (k == active.front()) est.left_edge_value = nrm;
    if (k == active.back()) est.right_edge_value = nrm;
    if (nrm > est.value) {
      est.value = nrm;
      arg_k = k;
    }
  }
  est.argmax = grid.sample(arg_k);
  est.boundary_attained = (arg_k == active.front() || arg_k == active.back());
  return est;
}

struct ContinuityReport {
  double max_jump = 0.0;
  double at_omega = 0.0;  // left sample of the worst adjacent pair
};

// Max jump between consecutive active samples of a sampled symbol.
inline ContinuityReport continuity_report(const MatrixSymbol& s) {
  if (!s.is_sampled()) throw ConfigError("continuity_report needs a sampled symbol");
  const auto& grid = s.sampled_grid();
  auto active = grid.active_indices();
  if (active.size() < 2)
    throw ConfigError("continuity_report needs at least two active samples");
  ContinuityReport rep;
  rep.at_omega = grid.sample(active.front());
  for (size_t i = 0; i + 1 < active.size(); ++i) {
    double jump = spectral_norm(
        Matrix(s.sampled_values()[active[i + 1]] - s.sampled_values()[active[i]]));
    if (jump > rep.max_jump) {
      rep.max_jump = jump;
      rep.at_omega = grid.sample(active[i]);
    }
  }
  return rep;
}

// Materializes any symbol onto a grid (used to persist composites).
inline MatrixSymbol materialize(const MatrixSymbol& s, const FrequencyGrid& grid) {
  std::vector<Matrix> values(grid.count(), Matrix::Zero(s.rows(), s.cols()));
  for (int k = 0; k < grid.count(); ++k)
    if (!grid.is_excluded(k)) values[k] = s.eval(grid.sample(k));
  return MatrixSymbol::sampled(grid, std::move(values));
}

}  // namespace ltsi
