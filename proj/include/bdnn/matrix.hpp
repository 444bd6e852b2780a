#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <vector>

// Dense linear algebra primitives shared by every module.
//
// Orientation convention: column j of a matrix is sample j. X is D x m,
// codes are L x m, weight matrices map layer l to layer l+1. All public
// entry points reject non-finite values.

namespace bdnn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

/// Throws std::invalid_argument if any entry of m is NaN or infinite.
void require_finite(const Mat& m, const char* name);
void require_finite(double x, const char* name);

/// Sign with the fixed tie convention sgn(0) = +1.
/// Throws on non-finite input; never returns 0.
double sgn(double x);

/// Element-wise sgn.
Mat sgn(const Mat& m);

/// True when every entry is exactly -1.0 or +1.0.
bool is_sign_matrix(const Mat& m);

/// Sample covariance (1/(m-1)) (X - mu 1^T)(X - mu 1^T)^T over columns.
/// Requires at least 2 columns.
Mat covariance(const Mat& x);

/// Columns are orthonormal eigenvectors of the symmetric matrix a,
/// ordered by descending eigenvalue. Requires 1 <= k <= dim and a
/// symmetric up to a small absolute tolerance.
Mat top_eigenvectors(const Mat& a, Index k);

struct Svd {
  Mat u;      // a x r
  Vec sigma;  // r singular values, non-negative, descending
  Mat v;      // b x r
};

/// Thin SVD for initialization-scale matrices (a, b up to a few hundred).
Svd svd_small(const Mat& m);

}  // namespace bdnn
