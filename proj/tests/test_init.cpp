#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include "bdnn/init.hpp"
#include "bdnn/matrix.hpp"
#include "bdnn/rng.hpp"

using bdnn::Index;
using bdnn::ItqConfig;
using bdnn::Mat;

namespace {

Mat random_matrix(Index rows, Index cols, std::uint64_t seed) {
  bdnn::Rng rng(seed);
  Mat m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  }
  return m;
}

}  // namespace

TEST_CASE("itq separates the four quadrants of a square") {
  Mat x(2, 4);
  x << 1, 1, -1, -1,
       1, -1, 1, -1;

  // Oracle: sweep rotations at one-degree resolution; at every loss-minimal
  // angle the four points land in four distinct quadrants. The alternating
  // scheme must find codes at least that good.
  std::vector<double> losses(360);
  std::vector<bool> separated(360);
  for (int deg = 0; deg < 360; ++deg) {
    const double t = deg * M_PI / 180.0;
    Mat r(2, 2);
    r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    const Mat projected = r.transpose() * x;
    const Mat b = bdnn::sgn(projected);
    losses[deg] = (b - projected).squaredNorm();
    std::set<std::pair<double, double>> codes;
    for (Index j = 0; j < 4; ++j) codes.insert({b(0, j), b(1, j)});
    separated[deg] = codes.size() == 4;
  }
  const double best_loss = *std::min_element(losses.begin(), losses.end());
  for (int deg = 0; deg < 360; ++deg) {
    if (losses[deg] <= best_loss + 1e-9) CHECK(separated[deg]);
  }

  ItqConfig cfg;
  cfg.seed = 3;
  const Mat codes = bdnn::itq_codes(x, 2, cfg);
  std::set<std::pair<double, double>> distinct;
  for (Index j = 0; j < 4; ++j) distinct.insert({codes(0, j), codes(1, j)});
  CHECK(distinct.size() == 4);
}

TEST_CASE("itq is deterministic under a fixed seed") {
  const Mat x = random_matrix(6, 40, 12);
  ItqConfig cfg;
  cfg.rotation_iterations = 1;
  cfg.seed = 99;
  const Mat a = bdnn::itq_codes(x, 4, cfg);
  const Mat b = bdnn::itq_codes(x, 4, cfg);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  cfg.seed = 100;
  cfg.rotation_iterations = 50;
  const Mat c = bdnn::itq_codes(x, 4, cfg);
  const Mat d = bdnn::itq_codes(x, 4, cfg);
  CHECK((c - d).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("itq emits sign codes and keeps the rotation orthogonal") {
  const Mat x = random_matrix(5, 30, 8);
  ItqConfig cfg;
  cfg.seed = 5;
  bdnn::ItqTrace trace;
  const Mat codes = bdnn::itq_codes(x, 3, cfg, &trace);
  CHECK(bdnn::is_sign_matrix(codes));
  CHECK(codes.rows() == 3);
  CHECK(codes.cols() == 30);
  REQUIRE(trace.rotation_residual.size() == 50);
  for (double residual : trace.rotation_residual) {
    CHECK(residual <= 1e-8);
  }
}

TEST_CASE("itq quantization loss never increases across rounds") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const Mat x = random_matrix(6, 50, 700 + seed);
    ItqConfig cfg;
    cfg.seed = seed;
    bdnn::ItqTrace trace;
    bdnn::itq_codes(x, 4, cfg, &trace);
    REQUIRE(trace.quantization_loss.size() == 50);
    for (std::size_t i = 1; i < trace.quantization_loss.size(); ++i) {
      CHECK(trace.quantization_loss[i] <=
            trace.quantization_loss[i - 1] + 1e-9);
    }
  }
}

TEST_CASE("itq validates its inputs") {
  const Mat x = random_matrix(3, 10, 1);
  ItqConfig cfg;
  CHECK_THROWS_AS(bdnn::itq_codes(x, 4, cfg), std::invalid_argument);
  CHECK_THROWS_AS(bdnn::itq_codes(x, 0, cfg), std::invalid_argument);
  CHECK_THROWS_AS(bdnn::itq_codes(Mat::Zero(3, 1), 2, cfg),
                  std::invalid_argument);
  cfg.rotation_iterations = 0;
  CHECK_THROWS_AS(bdnn::itq_codes(x, 2, cfg), std::invalid_argument);
}

TEST_CASE("pca weight init recovers a known diagonal covariance") {
  // Rows are orthogonal with zero mean; cov(x) = diag(3, 2, 1) exactly.
  Mat x(3, 4);
  const double a = std::sqrt(9.0 / 4.0);
  const double b = std::sqrt(6.0 / 4.0);
  const double c = std::sqrt(3.0 / 4.0);
  x.row(0) << a, a, -a, -a;
  x.row(1) << b, -b, b, -b;
  x.row(2) << c, -c, -c, c;
  const Mat cov = bdnn::covariance(x);
  CHECK((cov - Eigen::Vector3d(3, 2, 1).asDiagonal().toDenseMatrix()).norm() <
        1e-12);

  const Mat w = bdnn::pca_weight_init(x, 2);
  CHECK(w.rows() == 2);
  CHECK(w.cols() == 3);
  CHECK(std::abs(w(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(w(1, 1)) == doctest::Approx(1.0));
  CHECK(std::abs(w(0, 1)) < 1e-10);
  CHECK(std::abs(w(0, 2)) < 1e-10);
  CHECK(std::abs(w(1, 0)) < 1e-10);
  CHECK(std::abs(w(1, 2)) < 1e-10);
}

TEST_CASE("pca weight init with full width is an orthonormal basis") {
  const Mat h = random_matrix(5, 40, 44);
  const Mat w = bdnn::pca_weight_init(h, 5);
  CHECK((w * w.transpose() - Mat::Identity(5, 5)).norm() <= 1e-8);
}

TEST_CASE("pca weight init wider than its input") {
  // d+2 rows in R^d cannot all be mutually orthonormal (rank bound), so the
  // contract is: leading d rows orthonormal eigenvectors, surplus rows unit
  // length and orthonormal within their own block, and the whole map
  // deterministic.
  const Mat h = random_matrix(4, 30, 21);
  const Mat w = bdnn::pca_weight_init(h, 6);
  CHECK(w.rows() == 6);
  CHECK(w.cols() == 4);

  const Mat lead = w.topRows(4);
  CHECK((lead * lead.transpose() - Mat::Identity(4, 4)).norm() <= 1e-8);

  const Mat eig = bdnn::top_eigenvectors(bdnn::covariance(h), 4);
  CHECK((lead - eig.transpose()).norm() <= 1e-8);

  const Mat surplus = w.bottomRows(2);
  CHECK((surplus * surplus.transpose() - Mat::Identity(2, 2)).norm() <= 1e-8);

  const Mat again = bdnn::pca_weight_init(h, 6);
  CHECK((w - again).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pca weight init validates sample count") {
  CHECK_THROWS_AS(bdnn::pca_weight_init(Mat::Zero(3, 1), 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(bdnn::pca_weight_init(random_matrix(3, 5, 2), 0),
                  std::invalid_argument);
}

TEST_CASE("rect identity has ones on the main diagonal only") {
  const Mat i34 = bdnn::rect_identity(3, 4);
  CHECK(i34.rows() == 3);
  CHECK(i34.cols() == 4);
  for (Index i = 0; i < 3; ++i) {
    for (Index j = 0; j < 4; ++j) {
      CHECK(i34(i, j) == (i == j ? 1.0 : 0.0));
    }
  }
  const Mat i52 = bdnn::rect_identity(5, 2);
  CHECK(i52(0, 0) == 1.0);
  CHECK(i52(1, 1) == 1.0);
  CHECK(i52.sum() == doctest::Approx(2.0));
}
