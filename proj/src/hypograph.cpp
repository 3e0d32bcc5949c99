#include <stdexcept>

#include "ecbf/conic_solvers.hpp"

namespace ecbf {

HypographBlock hypograph_reformulate(double a0, const Eigen::VectorXd& b_minus,
                                     const Eigen::VectorXd& b_plus,
                                     const std::vector<std::optional<double>>& known_terms) {
  const int k = static_cast<int>(b_minus.size());
  if (b_plus.size() != k || static_cast<int>(known_terms.size()) != k) {
    throw std::invalid_argument("hypograph_reformulate: size mismatch");
  }
  for (int i = 0; i < k; ++i) {
    if (b_minus(i) > b_plus(i)) {
      throw std::invalid_argument("hypograph_reformulate: b_minus exceeds b_plus at index " +
                                  std::to_string(i));
    }
  }

  HypographBlock block;
  block.folded_constant = a0;
  for (int i = 0; i < k; ++i) {
    if (known_terms[i]) {
      const double u = *known_terms[i];
      block.folded_constant += std::min(b_minus(i) * u, b_plus(i) * u);
    } else {
      block.decision_index.push_back(i);
      block.aux_of.push_back(b_minus(i) == b_plus(i) ? -1 : block.num_aux++);
    }
  }
  block.num_decision = static_cast<int>(block.decision_index.size());

  const int nz = block.num_decision + block.num_aux;
  const int rows = 2 * block.num_aux + 1;
  block.G = Eigen::MatrixXd::Zero(rows, nz);
  block.h = Eigen::VectorXd::Zero(rows);

  // Aggregate row: -(sum of linear terms + sum t) <= folded constant.
  const int agg = rows - 1;
  block.h(agg) = block.folded_constant;
  int row = 0;
  for (int j = 0; j < block.num_decision; ++j) {
    const int i = block.decision_index[j];
    const int aux = block.aux_of[j];
    if (aux < 0) {
      block.G(agg, j) = -b_minus(i);
      continue;
    }
    const int tcol = block.num_decision + aux;
    block.G(agg, tcol) = -1.0;
    // t <= b_minus u and t <= b_plus u
    block.G(row, tcol) = 1.0;
    block.G(row, j) = -b_minus(i);
    ++row;
    block.G(row, tcol) = 1.0;
    block.G(row, j) = -b_plus(i);
    ++row;
  }
  return block;
}

}  // namespace ecbf
