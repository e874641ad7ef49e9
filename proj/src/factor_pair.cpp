#include "gdfactor/factor_pair.hpp"

#include <string>

#include "gdfactor/error.hpp"
#include "gdfactor/linalg.hpp"

namespace gdfactor {

void FactorPair::validate() const {
  if (F.cols() != G.cols()) {
    throw InvalidArgument("FactorPair: F has " + std::to_string(F.cols()) + " columns, G has " +
                          std::to_string(G.cols()));
  }
}

DenseMatrix FactorPair::product() const { return matmul_nt(F, G); }

double objective(const FactorPair& pair, const DenseMatrix& x) {
  DenseMatrix residual = pair.product();
  residual -= x;
  const double fro = frobenius_norm(residual);
  return 0.25 * fro * fro;
}

}  // namespace gdfactor
