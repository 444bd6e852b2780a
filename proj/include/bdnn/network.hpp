#pragma once

#include <string>
#include <vector>

#include "bdnn/matrix.hpp"

namespace bdnn {

enum class HashMode { unsupervised, supervised };

enum class Activation { sigmoid, identity };

// Layer sizes s_1..s_n, 1-based layer indices throughout. s_1 is the input
// dimension D. Unsupervised nets reconstruct the input, so s_{n-1} = L and
// s_n = D; supervised nets end at the code layer, s_n = L.
struct LayerSchedule {
  HashMode mode = HashMode::unsupervised;
  std::vector<Index> sizes;

  static LayerSchedule make(HashMode mode, std::vector<Index> sizes);

  Index layers() const { return static_cast<Index>(sizes.size()); }
  Index input_dim() const { return sizes.front(); }
  /// 1-based index of the layer whose thresholded output is the hash code.
  Index code_layer() const {
    return mode == HashMode::unsupervised ? layers() - 1 : layers();
  }
  Index code_length() const { return sizes[code_layer() - 1]; }

  void validate() const;
};

/// Activation of layer l (2 <= l <= n). Sigmoid on the interior layers;
/// identity on the code layer and, in unsupervised mode, the
/// reconstruction layer.
Activation activation(const LayerSchedule& schedule, Index layer);

struct NetworkParams {
  LayerSchedule schedule;
  std::vector<Mat> weights;  // W(l): s_{l+1} x s_l, l = 1..n-1
  std::vector<Vec> biases;   // c(l): s_{l+1},      l = 1..n-1

  void validate() const;
};

// Layer outputs H(1)..H(n) with H(1) = X, and pre-activations Z(2)..Z(n).
struct ForwardTrace {
  std::vector<Mat> h;  // h[l-1] = H(l), l = 1..n
  std::vector<Mat> z;  // z[l-2] = Z(l), l = 2..n

  const Mat& layer_output(Index layer) const { return h[layer - 1]; }
  const Mat& pre_activation(Index layer) const { return z[layer - 2]; }
};

ForwardTrace forward(const NetworkParams& params, const Mat& x);

/// Hash codes for X: element-wise sgn of the code layer's output.
Mat encode(const NetworkParams& params, const Mat& x);

/// Numerically guarded logistic function, element-wise.
Mat sigmoid(const Mat& z);

// Objective gradient, same shapes and layer indexing as NetworkParams.
struct NetworkGrad {
  std::vector<Mat> weights;
  std::vector<Vec> biases;
};

// The optimizer sees all parameters as one flat vector: for l = 1..n-1,
// W(l) in column-major order followed by c(l).
Index parameter_count(const LayerSchedule& schedule);
Vec pack_params(const NetworkParams& params);
NetworkParams unpack_params(const LayerSchedule& schedule, const Vec& flat);
Vec pack_grad(const LayerSchedule& schedule, const NetworkGrad& grad);

// Versioned binary model file. Layout (all integers little-endian u32,
// all floats little-endian f64):
//   magic "BHNM" | version=1 | mode (0 unsupervised, 1 supervised) | n |
//   s_1..s_n | for l = 1..n-1: W(l) column-major, then c(l)
void save_model(const std::string& path, const NetworkParams& params);
NetworkParams load_model(const std::string& path);

}  // namespace bdnn
