#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "bdnn/lbfgs.hpp"
#include "bdnn/matrix.hpp"
#include "bdnn/network.hpp"
#include "bdnn/uh_bdnn.hpp"

namespace bdnn {

using LabelVector = std::vector<std::uint32_t>;

struct ShConfig {
  double lambda1 = 1e-3;
  double lambda2 = 5.0;
  double lambda3 = 1.0;
  double lambda4 = 1e-4;
  int T = 5;
  LayerSchedule schedule;  // mode supervised, s_n = code length
  LbfgsConfig lbfgs;
  // When set, training keeps at most this many samples per class.
  std::optional<Index> per_class_sample;
  // S is m x m and dense; reject runs that would materialize more entries.
  Index max_similarity_entries = 25'000'000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ShResult {
  NetworkParams params;
  Mat b;
  std::vector<TraceEntry> history;
};

// S_ij = +1 when samples i and j share a label, else -1. Symmetric, unit
// diagonal.
Mat pairwise_labels(const LabelVector& y);

// J(W, c; B): squared gap between the scaled code Gram matrix (1/L) H^T H
// and S, plus weight decay, binding to B, independence, and balance, all on
// the last layer output H(n).
double objective_sh(const NetworkParams& params, const Mat& b, const Mat& x,
                    const Mat& s, const ShConfig& cfg);

NetworkGrad gradient_sh(const NetworkParams& params, const Mat& b, const Mat& x,
                        const Mat& s, const ShConfig& cfg);

// The binding sub-problem min_B ||H - B||^2 over sign matrices separates per
// entry; sgn(H) is its global minimizer.
Mat b_step_sh(const Mat& h_n);

// Uniform without-replacement choice of up to k columns per class. Output
// columns are grouped by ascending label, original order kept inside each
// class.
std::pair<Mat, LabelVector> per_class_subsample(const Mat& x, const LabelVector& y,
                                                Index k, std::uint64_t seed);

// Alternating training: optional per-class subsampling, pairwise S, ITQ
// codes for B0, PCA init for every weight layer, zero biases, one initial
// (W, c) fit, then T rounds of sign B step and warm-started (W, c) fit.
ShResult train_sh(const Mat& x, const LabelVector& y, const ShConfig& cfg);

}  // namespace bdnn
