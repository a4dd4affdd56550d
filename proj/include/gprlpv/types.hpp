#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gprlpv {

/// A scheduling/operating point: a d-vector inside the operating box.
using OperatingPoint = Eigen::VectorXd;

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The gram matrix K + Sigma could not be factorized even at maximum jitter.
struct SingularGramError : std::runtime_error {
  int point_a;
  int point_b;
  SingularGramError(const std::string& msg, int a, int b)
      : std::runtime_error(msg), point_a(a), point_b(b) {}
};

/// A Schur complement or variance that must be positive came out non-positive.
struct NumericalDegeneracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Regressor sequence is not persistently exciting (rank-deficient).
struct PersistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Text-format error with 1-based location information where available.
struct ParseError : std::runtime_error {
  long line;
  long column;
  explicit ParseError(const std::string& msg, long line_ = -1, long column_ = -1)
      : std::runtime_error(msg), line(line_), column(column_) {}
};

/// A failure inside a campaign loop, tagged with the iteration it occurred at.
struct CampaignError : std::runtime_error {
  int iteration;
  CampaignError(const std::string& msg, int iteration_)
      : std::runtime_error(msg), iteration(iteration_) {}
};

/// Axis-aligned compact operating space (box constraints on theta).
struct OperatingBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  OperatingBox() = default;
  OperatingBox(Eigen::VectorXd lo, Eigen::VectorXd hi);

  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const OperatingPoint& theta) const;
  Eigen::VectorXd widths() const { return upper - lower; }
  OperatingPoint center() const { return 0.5 * (lower + upper); }
  OperatingPoint clamp(const OperatingPoint& theta) const;
};

/// Deterministic per-stream seed derivation (splitmix64 finalizer). All
/// randomness in a campaign flows from one master seed through this.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace gprlpv
