#pragma once

#include <cstddef>

#include "gdfactor/matrix.hpp"

namespace gdfactor {

/// Iterate (F, G) with F: m x k and G: n x k.
struct FactorPair {
  DenseMatrix F;
  DenseMatrix G;

  std::size_t inner_dim() const noexcept { return F.cols(); }
  /// Throws InvalidArgument when F and G disagree on k.
  void validate() const;
  /// F * G^T
  DenseMatrix product() const;

  friend bool operator==(const FactorPair&, const FactorPair&) = default;
};

/// f(F, G) = 1/4 * ||F G^T - X||_F^2.
double objective(const FactorPair& pair, const DenseMatrix& x);

}  // namespace gdfactor
