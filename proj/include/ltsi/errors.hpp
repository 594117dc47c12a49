#pragma once

#include <stdexcept>
#include <string>

namespace ltsi {

// Common base so callers can catch toolkit errors in one place. `code()` is a
// stable machine-readable tag used by the CLI's ERROR lines.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& msg)
      : std::runtime_error(msg), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

struct EvalOffGrid : Error {
  explicit EvalOffGrid(const std::string& msg) : Error("eval_off_grid", msg) {}
};

struct SingularAtFrequency : Error {
  SingularAtFrequency(double omega_, double condition_)
      : Error("singular_at_frequency",
              "matrix numerically singular at omega = " + std::to_string(omega_) +
                  " (condition estimate " + std::to_string(condition_) + ")"),
        omega(omega_), condition(condition_) {}
  double omega;
  double condition;
};

struct ResolventSingular : Error {
  explicit ResolventSingular(const std::string& msg) : Error("resolvent_singular", msg) {}
};

struct NotMinimal : Error {
  explicit NotMinimal(const std::string& msg) : Error("not_minimal", msg) {}
};

struct NotReciprocal : Error {
  explicit NotReciprocal(const std::string& msg) : Error("not_reciprocal", msg) {}
};

struct InfeasibleStorage : Error {
  explicit InfeasibleStorage(const std::string& msg) : Error("infeasible_storage", msg) {}
};

struct NotPositiveSemidefinite : Error {
  explicit NotPositiveSemidefinite(const std::string& msg)
      : Error("not_positive_semidefinite", msg) {}
};

struct NotPositiveDefinite : Error {
  explicit NotPositiveDefinite(const std::string& msg)
      : Error("not_positive_definite", msg) {}
};

struct SingularN : Error {
  explicit SingularN(const std::string& msg) : Error("singular_n", msg) {}
};

struct NotStable : Error {
  explicit NotStable(const std::string& msg) : Error("not_stable", msg) {}
};

struct SingularTransform : Error {
  explicit SingularTransform(const std::string& msg) : Error("singular_transform", msg) {}
};

struct NotCompatible : Error {
  explicit NotCompatible(const std::string& msg) : Error("not_compatible", msg) {}
};

struct SignatureNotConstant : Error {
  explicit SignatureNotConstant(const std::string& msg)
      : Error("signature_not_constant", msg) {}
};

struct LimitDisagreement : Error {
  LimitDisagreement(double omega_, double gap_)
      : Error("limit_disagreement",
              "one-sided limits disagree at omega = " + std::to_string(omega_) +
                  " (gap " + std::to_string(gap_) + ")"),
        omega(omega_), gap(gap_) {}
  double omega;
  double gap;
};

struct PartitionViolation : Error {
  explicit PartitionViolation(const std::string& msg) : Error("partition_violation", msg) {}
};

struct BinEvaluationFailure : Error {
  explicit BinEvaluationFailure(const std::string& msg)
      : Error("bin_evaluation_failure", msg) {}
};

struct UnknownModel : Error {
  explicit UnknownModel(const std::string& name)
      : Error("unknown_model", "unknown model '" + name + "'") {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error("config_error", msg) {}
};

}  // namespace ltsi
