#pragma once

#include <cstdint>
#include <vector>

#include "bdnn/matrix.hpp"

namespace bdnn {

struct ItqConfig {
  int rotation_iterations = 50;
  std::uint64_t seed = 0;

  void validate() const;
};

// Per-round diagnostics: quantization loss ||b - r^T p||_F^2 and rotation
// orthogonality residual ||r^T r - I||_F after each rotation update.
struct ItqTrace {
  std::vector<double> quantization_loss;
  std::vector<double> rotation_residual;
};

// Iterative-quantization codes for x (one column per sample): center, project
// onto the top-k PCA directions, then alternate the closed-form updates
//   b = sgn(r^T p)   and   r = u v^T from the thin SVD of p b^T
// for config.rotation_iterations rounds. Returns the k x m sign matrix, with
// b recomputed from the final rotation. Requires 1 <= k <= rows(x) and at
// least two samples.
Mat itq_codes(const Mat& x, Index k, const ItqConfig& config,
              ItqTrace* trace = nullptr);

// Weight matrix for one layer, rows spanning the leading principal directions
// of the layer input h (column-per-sample). The first min(s_next, rows(h))
// rows are the top eigenvectors of cov(h), descending eigenvalue. When s_next
// exceeds rows(h) the surplus rows are filled with seeded random unit rows,
// mutually orthonormal within blocks of up to rows(h); a fully orthonormal
// row set of that width does not exist. Deterministic across runs.
Mat pca_weight_init(const Mat& h, Index s_next);

// The rows x cols matrix with ones on the main diagonal, zero elsewhere.
Mat rect_identity(Index rows, Index cols);

}  // namespace bdnn
