#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bdnn/matrix.hpp"
#include "bdnn/network.hpp"
#include "bdnn/search_eval.hpp"
#include "bdnn/sh_bdnn.hpp"
#include "bdnn/uh_bdnn.hpp"

namespace bdnn {

// Dataset file: magic "BHDM" | version=1 | rows | cols (u32 LE), then
// rows*cols little-endian f32 column-major, sample j contiguous. Data is
// stored in 32-bit floats and widened to double on load.
void save_dataset(const std::string& path, const Mat& x);
Mat load_dataset(const std::string& path);

// Labels: one u32 LE per sample, no header; the sample count comes from the
// dataset the labels accompany.
void save_labels(const std::string& path, const LabelVector& y);
LabelVector load_labels(const std::string& path);

// Codes file: magic "BHCB" | L | count (u32 LE), then the packed words as
// u64 LE in PackedCodes layout.
void save_codes(const std::string& path, const PackedCodes& codes);
PackedCodes load_codes(const std::string& path);

// Ground truth text: one line per query, space-separated database indices.
void save_ground_truth(const std::string& path, const GroundTruth& gt);
GroundTruth load_ground_truth(const std::string& path);

// Objective trace: a "# seed=..." provenance line, a header, then one
// iteration,phase,objective row per half-step.
void write_trace_csv(const std::string& path,
                     const std::vector<TraceEntry>& history, std::uint64_t seed);

// Hidden-layer widths used when the config gives no explicit layer sizes.
// Known code lengths only: 8, 16, 24, 32.
std::vector<Index> default_hidden_units(Index code_length);

// Full size list s_1..s_n for a training run. With explicit sizes, checks
// they agree with the data dimension, the code length, and the mode's shape
// rule; otherwise builds the default schedule from the hidden-width table.
LayerSchedule schedule_for(HashMode mode, Index input_dim, Index code_length,
                           const std::vector<Index>& layer_sizes);

// Flat key=value training configuration. Unknown and duplicate keys are
// errors. `mode` is required; unset lambdas and T fall back to per-mode
// defaults inside uh_config()/sh_config().
struct RunConfig {
  HashMode mode = HashMode::unsupervised;
  Index code_length = 8;
  std::vector<Index> layer_sizes;  // empty -> default schedule
  std::optional<double> lambda1;
  std::optional<double> lambda2;
  std::optional<double> lambda3;
  std::optional<double> lambda4;
  std::optional<int> T;
  LbfgsConfig lbfgs;
  int b_step_max_sweeps = 5;
  std::uint64_t seed = 0;
  bool standardize = false;
  Index per_class_sample = 3000;  // supervised runs; 0 keeps every sample
  Index max_similarity_entries = 25'000'000;

  UhConfig uh_config(Index input_dim) const;
  ShConfig sh_config(Index input_dim) const;
};

RunConfig parse_run_config_text(const std::string& text);
RunConfig load_run_config(const std::string& path);

// Per-dimension affine map to zero mean, unit variance. Constant dimensions
// keep scale 1 so the map stays invertible.
struct Standardization {
  Vec mean;
  Vec inv_sigma;
};

Standardization fit_standardization(const Mat& x);
Mat apply_standardization(const Standardization& st, const Mat& x);

// Rewrites the first layer so the saved model consumes raw inputs:
// W(1) x' + c(1) with x' = diag(inv_sigma)(x - mean) becomes W'(1) x + c'(1).
void fold_standardization(NetworkParams& params, const Standardization& st);

// Axis-aligned Gaussian mixture: cluster c is centered at radius * e_c with
// unit isotropic noise; labels are cluster indices. Requires
// clusters <= dims so the means stay distinct.
struct SynthSpec {
  Index clusters = 3;
  Index dims = 16;
  Index per_cluster = 100;
  double radius = 10.0;
  std::uint64_t seed = 0;
};

std::pair<Mat, LabelVector> synth_dataset(const SynthSpec& spec);

}  // namespace bdnn
