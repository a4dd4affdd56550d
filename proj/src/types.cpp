#include "gprlpv/types.hpp"

#include <utility>

namespace gprlpv {

OperatingBox::OperatingBox(Eigen::VectorXd lo, Eigen::VectorXd hi)
    : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size()) {
    throw DimensionError("operating box: lower and upper must have equal dimension");
  }
  if (lower.size() == 0) {
    throw ValidationError("operating box: dimension must be at least 1");
  }
  if (!lower.allFinite() || !upper.allFinite()) {
    throw ValidationError("operating box: non-finite bounds");
  }
  if (((upper - lower).array() <= 0.0).any()) {
    throw ValidationError("operating box: lower must be elementwise below upper");
  }
}

bool OperatingBox::contains(const OperatingPoint& theta) const {
  if (theta.size() != lower.size()) {
    throw DimensionError("operating box: point dimension mismatch");
  }
  return (theta.array() >= lower.array()).all() && (theta.array() <= upper.array()).all();
}

OperatingPoint OperatingBox::clamp(const OperatingPoint& theta) const {
  if (theta.size() != lower.size()) {
    throw DimensionError("operating box: point dimension mismatch");
  }
  return theta.cwiseMax(lower).cwiseMin(upper);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + (stream + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace gprlpv
