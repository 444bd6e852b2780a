#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bdnn/lbfgs.hpp"
#include "bdnn/matrix.hpp"
#include "bdnn/network.hpp"

namespace bdnn {

struct UhConfig {
  double lambda1 = 1e-5;  // weight decay
  double lambda2 = 5e-2;  // binding of H(n-1) to the binary codes B
  double lambda3 = 1e-2;  // bit independence
  double lambda4 = 1e-6;  // bit balance
  int T = 10;             // outer alternating rounds
  LayerSchedule schedule;
  LbfgsConfig lbfgs;
  int b_step_max_sweeps = 5;
  std::uint64_t seed = 0;

  void validate() const;
};

// One objective value per completed half-step. phase is "b" after a B update
// and "wc" after an L-BFGS (W,c) update; the initial fit is iteration 0.
struct TraceEntry {
  int iteration = 0;
  std::string phase;
  double objective = 0.0;
};

struct UhResult {
  NetworkParams params;
  Mat b;  // L x m codes for the training columns
  std::vector<TraceEntry> history;
};

// J(W, c; B) for the unsupervised net: reconstruction of X from the codes
// through the last layer, plus weight decay, the binding penalty pulling
// H(n-1) toward B, and the independence and balance penalties on H(n-1).
double objective_uh(const NetworkParams& params, const Mat& b, const Mat& x,
                    const UhConfig& cfg);

// Analytic gradient of objective_uh in (W, c). The last layer's gradient
// comes from the reconstruction term directly; the code layer seeds
// backpropagation with the binding, independence, and balance terms.
NetworkGrad gradient_uh(const NetworkParams& params, const Mat& b, const Mat& x,
                        const UhConfig& cfg);

// Cyclic coordinate descent on the rows of B for fixed (W, c), minimizing
//   ||X - W(n-1) B - c(n-1) 1||^2 + lambda2 ||H(n-1) - B||^2.
// Each row has a closed-form sign update; rows are swept in ascending order
// until a sweep changes nothing or b_step_max_sweeps is hit. The result is
// single-bit-flip optimal.
Mat b_step_uh(const NetworkParams& params, const Mat& x, const Mat& b_in,
              const UhConfig& cfg);

// Full alternating training: ITQ codes initialize B, PCA stacks initialize
// the interior weights, the last layer starts as the rectangular identity,
// biases start at zero. One initial (W, c) fit, then T rounds of B step
// followed by (W, c) step, warm-starting L-BFGS each time.
UhResult train_uh(const Mat& x, const UhConfig& cfg);

}  // namespace bdnn
