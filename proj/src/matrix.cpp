#include "bdnn/matrix.hpp"

#include <cmath>
#include <string>

namespace bdnn {

void require_finite(const Mat& m, const char* name) {
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(name) + ": non-finite entries");
  }
}

void require_finite(double x, const char* name) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument(std::string(name) + ": non-finite value");
  }
}

double sgn(double x) {
  require_finite(x, "sgn");
  return x >= 0.0 ? 1.0 : -1.0;
}

Mat sgn(const Mat& m) {
  require_finite(m, "sgn");
  return m.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
}

bool is_sign_matrix(const Mat& m) {
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      const double v = m(i, j);
      if (v != 1.0 && v != -1.0) return false;
    }
  }
  return true;
}

Mat covariance(const Mat& x) {
  require_finite(x, "covariance");
  const Index m = x.cols();
  if (m < 2) {
    throw std::invalid_argument("covariance: need at least 2 samples, got " +
                                std::to_string(m));
  }
  const Vec mu = x.rowwise().mean();
  const Mat centered = x.colwise() - mu;
  return (centered * centered.transpose()) / static_cast<double>(m - 1);
}

Mat top_eigenvectors(const Mat& a, Index k) {
  require_finite(a, "top_eigenvectors");
  const Index d = a.rows();
  if (a.cols() != d) {
    throw std::invalid_argument("top_eigenvectors: matrix must be square");
  }
  if (k < 1 || k > d) {
    throw std::invalid_argument("top_eigenvectors: k out of range [1, " +
                                std::to_string(d) + "]");
  }
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (asym > 1e-10 * scale) {
    throw std::invalid_argument("top_eigenvectors: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> solver(a);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("top_eigenvectors: eigendecomposition failed");
  }
  // Eigen orders eigenvalues ascending; take the trailing k columns reversed.
  Mat out(d, k);
  for (Index i = 0; i < k; ++i) {
    out.col(i) = solver.eigenvectors().col(d - 1 - i);
  }
  return out;
}

Svd svd_small(const Mat& m) {
  require_finite(m, "svd_small");
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Svd out;
  out.u = svd.matrixU();
  out.sigma = svd.singularValues();
  out.v = svd.matrixV();
  return out;
}

}  // namespace bdnn
