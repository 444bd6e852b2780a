#include "bdnn/init.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <stdexcept>

#include "bdnn/rng.hpp"

namespace bdnn {

void ItqConfig::validate() const {
  if (rotation_iterations < 1) {
    throw std::invalid_argument("itq: rotation_iterations must be >= 1");
  }
}

Mat itq_codes(const Mat& x, Index k, const ItqConfig& config, ItqTrace* trace) {
  config.validate();
  require_finite(x, "itq input");
  if (k < 1 || k > x.rows()) {
    throw std::invalid_argument("itq: code length must be in [1, rows(x)]");
  }
  if (x.cols() < 2) {
    throw std::invalid_argument("itq: need at least two samples");
  }

  const Vec mean = x.rowwise().mean();
  const Mat centered = x.colwise() - mean;
  const Mat eig = top_eigenvectors(covariance(x), k);  // d x k
  const Mat p = eig.transpose() * centered;            // k x m projections

  Rng rng(config.seed);
  Mat r(k, k);
  for (Index j = 0; j < k; ++j) {
    for (Index i = 0; i < k; ++i) r(i, j) = rng.normal();
  }
  r = Eigen::HouseholderQR<Mat>(r).householderQ() * Mat::Identity(k, k);

  Mat b = sgn(r.transpose() * p);
  for (int round = 0; round < config.rotation_iterations; ++round) {
    // Orthogonal Procrustes: the rotation closest to mapping p onto b.
    const Svd svd = svd_small(p * b.transpose());
    r = svd.u * svd.v.transpose();
    b = sgn(r.transpose() * p);
    if (trace) {
      trace->quantization_loss.push_back((b - r.transpose() * p).squaredNorm());
      trace->rotation_residual.push_back(
          (r.transpose() * r - Mat::Identity(k, k)).norm());
    }
  }
  return b;
}

Mat pca_weight_init(const Mat& h, Index s_next) {
  if (s_next < 1) throw std::invalid_argument("pca init: s_next must be >= 1");
  const Index d = h.rows();
  const Index lead = std::min(s_next, d);
  const Mat eig = top_eigenvectors(covariance(h), lead);  // d x lead

  Mat w(s_next, d);
  w.topRows(lead) = eig.transpose();
  if (s_next > d) {
    // No orthonormal completion of width > d exists. Surplus rows come from a
    // fixed-seed Gaussian draw, orthonormalized per block of up to d rows.
    Rng rng(0x706361u);  // constant so the init is reproducible
    Index filled = lead;
    while (filled < s_next) {
      const Index block = std::min(d, s_next - filled);
      Mat g(d, block);
      for (Index j = 0; j < block; ++j) {
        for (Index i = 0; i < d; ++i) g(i, j) = rng.normal();
      }
      const Mat q =
          Eigen::HouseholderQR<Mat>(g).householderQ() * Mat::Identity(d, block);
      w.middleRows(filled, block) = q.transpose();
      filled += block;
    }
  }
  return w;
}

Mat rect_identity(Index rows, Index cols) {
  return Mat::Identity(rows, cols);
}

}  // namespace bdnn
