#include "doctest.h"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bdnn/matrix.hpp"
#include "bdnn/rng.hpp"
#include "bdnn/search_eval.hpp"

using bdnn::GroundTruth;
using bdnn::Index;
using bdnn::Mat;
using bdnn::PackedCodes;
using bdnn::RankedItem;

namespace {

Mat random_signs(bdnn::Rng& rng, Index rows, Index cols) {
  Mat m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.below(2) == 0 ? -1.0 : 1.0;
  }
  return m;
}

Index naive_hamming(const Mat& a, Index i, const Mat& b, Index j) {
  Index d = 0;
  for (Index k = 0; k < a.rows(); ++k) {
    if (a(k, i) != b(k, j)) ++d;
  }
  return d;
}

std::string temp_path(const char* name) {
  return std::string("/tmp/bdnn_test_") + name;
}

}  // namespace

TEST_CASE("pack writes bit i of code j to word i/64 position i%64") {
  Mat b(3, 2);
  b.col(0) << 1, -1, 1;
  b.col(1) << -1, -1, 1;
  const PackedCodes codes = bdnn::pack(b);
  CHECK(codes.bits == 3);
  CHECK(codes.count == 2);
  CHECK(codes.words_per_code() == 1);
  REQUIRE(codes.words.size() == 2);
  CHECK(codes.words[0] == 0b101u);
  CHECK(codes.words[1] == 0b100u);

  // Bit 64 is the first bit of the second word.
  Mat wide = Mat::Constant(65, 1, -1.0);
  wide(64, 0) = 1.0;
  const PackedCodes two_words = bdnn::pack(wide);
  CHECK(two_words.words_per_code() == 2);
  REQUIRE(two_words.words.size() == 2);
  CHECK(two_words.words[0] == 0u);
  CHECK(two_words.words[1] == 1u);

  Mat bad(2, 1);
  bad << 1.0, 0.5;
  CHECK_THROWS_AS(bdnn::pack(bad), std::invalid_argument);
}

TEST_CASE("pack and unpack are inverse across word boundaries") {
  bdnn::Rng rng(7);
  for (Index bits : {1, 8, 63, 64, 65, 128}) {
    const Mat b = random_signs(rng, bits, 7);
    const Mat back = bdnn::unpack(bdnn::pack(b));
    CHECK((b - back).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("packed hamming distance equals the per-entry count") {
  bdnn::Rng rng(8);
  for (Index bits : {1, 8, 63, 64, 65, 128}) {
    const Mat a = random_signs(rng, bits, 5);
    const Mat b = random_signs(rng, bits, 6);
    const PackedCodes pa = bdnn::pack(a);
    const PackedCodes pb = bdnn::pack(b);
    for (Index i = 0; i < 5; ++i) {
      for (Index j = 0; j < 6; ++j) {
        const Index want = naive_hamming(a, i, b, j);
        CHECK(bdnn::hamming_distance(pa, i, pb, j) == want);
        CHECK(bdnn::hamming_distance(pb, j, pa, i) == want);
      }
    }
    for (Index i = 0; i < 5; ++i) {
      CHECK(bdnn::hamming_distance(pa, i, pa, i) == 0);
    }
    // Triangle inequality within the first set.
    for (Index i = 0; i < 5; ++i) {
      for (Index j = 0; j < 5; ++j) {
        for (Index k = 0; k < 5; ++k) {
          CHECK(bdnn::hamming_distance(pa, i, pa, k) <=
                bdnn::hamming_distance(pa, i, pa, j) +
                    bdnn::hamming_distance(pa, j, pa, k));
        }
      }
    }
  }
  const PackedCodes short_codes = bdnn::pack(random_signs(rng, 8, 2));
  const PackedCodes long_codes = bdnn::pack(random_signs(rng, 16, 2));
  CHECK_THROWS_AS(bdnn::hamming_distance(short_codes, 0, long_codes, 0),
                  std::invalid_argument);
}

TEST_CASE("hamming ranking matches a naive sort with index tie-breaks") {
  bdnn::Rng rng(9);
  // Only four distinct patterns over 20 columns, so ties are guaranteed.
  const Mat patterns = random_signs(rng, 8, 4);
  Mat db(8, 20);
  for (Index j = 0; j < 20; ++j) db.col(j) = patterns.col(rng.below(4));
  const Mat q = random_signs(rng, 8, 3);
  const PackedCodes pdb = bdnn::pack(db);
  const PackedCodes pq = bdnn::pack(q);

  for (Index qi = 0; qi < 3; ++qi) {
    const std::vector<RankedItem> got = bdnn::rank_by_hamming(pq, qi, pdb);
    std::vector<std::pair<Index, Index>> want(20);  // (distance, index)
    for (Index j = 0; j < 20; ++j) want[j] = {naive_hamming(q, qi, db, j), j};
    std::sort(want.begin(), want.end());
    REQUIRE(got.size() == 20);
    for (Index r = 0; r < 20; ++r) {
      CHECK(got[r].distance == want[r].first);
      CHECK(got[r].index == want[r].second);
    }
  }
}

TEST_CASE("euclidean ground truth keeps the k nearest, ties by index") {
  Mat db(1, 4);
  db << 0.0, 1.0, 2.0, 1.0;  // columns 1 and 3 tie at distance 0 from query 1
  Mat q(1, 2);
  q << 0.1, 1.0;
  const GroundTruth gt = bdnn::euclidean_ground_truth(db, q, 2);
  REQUIRE(gt.queries() == 2);
  CHECK(gt.relevant[0] == std::vector<Index>({0, 1}));
  CHECK(gt.relevant[1] == std::vector<Index>({1, 3}));

  CHECK_THROWS_AS(bdnn::euclidean_ground_truth(db, q, 0), std::invalid_argument);
  CHECK_THROWS_AS(bdnn::euclidean_ground_truth(db, q, 5), std::invalid_argument);
  CHECK_THROWS_AS(bdnn::euclidean_ground_truth(db, Mat::Zero(2, 1), 1),
                  std::invalid_argument);
}

TEST_CASE("label ground truth collects same-class database items") {
  const GroundTruth gt = bdnn::label_ground_truth({0, 1, 0, 2, 1}, {1, 0, 3});
  REQUIRE(gt.queries() == 3);
  CHECK(gt.relevant[0] == std::vector<Index>({1, 4}));
  CHECK(gt.relevant[1] == std::vector<Index>({0, 2}));
  CHECK(gt.relevant[2].empty());
}

TEST_CASE("average precision on hand-worked rankings") {
  // Relevant items at ranks 1 and 3 of four: AP = (1/1 + 2/3) / 2 = 5/6.
  const std::vector<std::vector<RankedItem>> rankings = {
      {{0, 0}, {5, 1}, {1, 1}, {7, 2}}};
  GroundTruth gt;
  gt.relevant = {{0, 1}};
  CHECK(bdnn::mean_average_precision(rankings, gt) ==
        doctest::Approx(5.0 / 6.0).epsilon(1e-12));

  // Truncation changes both the scan and the denominator.
  CHECK(bdnn::mean_average_precision(rankings, gt, 1) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bdnn::mean_average_precision(rankings, gt, 2) ==
        doctest::Approx(0.5).epsilon(1e-12));

  // A perfect prefix scores 1 regardless of the tail.
  const std::vector<std::vector<RankedItem>> perfect = {
      {{2, 0}, {4, 0}, {9, 1}, {1, 3}, {6, 4}}};
  GroundTruth gt3;
  gt3.relevant = {{2, 4, 9}};
  CHECK(bdnn::mean_average_precision(perfect, gt3) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // Relevant item missing from the ranking, and an empty ground truth.
  GroundTruth missing;
  missing.relevant = {{9}};
  CHECK(bdnn::mean_average_precision(rankings, missing) == 0.0);
  GroundTruth empty;
  empty.relevant = {{}};
  CHECK(bdnn::mean_average_precision(rankings, empty) == 0.0);

  GroundTruth wrong;
  wrong.relevant = {{0}, {1}};
  CHECK_THROWS_AS(bdnn::mean_average_precision(rankings, wrong),
                  std::invalid_argument);
}

TEST_CASE("radius precision counts only the low-distance prefix") {
  const std::vector<std::vector<RankedItem>> rankings = {
      {{3, 0}, {0, 1}, {8, 2}, {1, 3}, {2, 5}},
      {{4, 3}, {5, 4}, {6, 9}}};
  GroundTruth gt;
  gt.relevant = {{0, 8}, {4, 5, 6}};
  // Query 0: three items within radius 2, two of them relevant.
  // Query 1: nothing within radius 2 scores zero despite relevant items.
  CHECK(bdnn::precision_at_radius(rankings, gt, 2) ==
        doctest::Approx(0.5 * (2.0 / 3.0)).epsilon(1e-12));
  // Radius 9 covers everything of query 1.
  CHECK(bdnn::precision_at_radius(rankings, gt, 9) ==
        doctest::Approx(0.5 * (2.0 / 5.0 + 1.0)).epsilon(1e-12));
}

TEST_CASE("random codes score near the relevance base rate") {
  bdnn::Rng rng(10);
  const Mat db = random_signs(rng, 16, 200);
  const Mat q = random_signs(rng, 16, 20);
  const PackedCodes pdb = bdnn::pack(db);
  const PackedCodes pq = bdnn::pack(q);
  GroundTruth gt;
  gt.relevant.resize(20);
  for (auto& rel : gt.relevant) {
    std::vector<Index> all(200);
    for (Index j = 0; j < 200; ++j) all[j] = j;
    for (Index i = 0; i < 50; ++i) {
      std::swap(all[i], all[i + static_cast<Index>(rng.below(200 - i))]);
    }
    rel.assign(all.begin(), all.begin() + 50);
    std::sort(rel.begin(), rel.end());
  }
  std::vector<std::vector<RankedItem>> rankings;
  for (Index qi = 0; qi < 20; ++qi) {
    rankings.push_back(bdnn::rank_by_hamming(pq, qi, pdb));
  }
  const double map = bdnn::mean_average_precision(rankings, gt);
  CHECK(map > 0.15);
  CHECK(map < 0.40);
}

TEST_CASE("evaluate mirrors the manual rank-then-score pipeline") {
  bdnn::Rng rng(11);
  const Mat db = random_signs(rng, 8, 30);
  const Mat q = random_signs(rng, 8, 5);
  const PackedCodes pdb = bdnn::pack(db);
  const PackedCodes pq = bdnn::pack(q);
  GroundTruth gt;
  gt.relevant = {{0, 1, 2}, {3, 4}, {5}, {6, 7, 8, 9}, {1, 3, 5, 7, 9}};

  const bdnn::EvalReport report = bdnn::evaluate(pdb, pq, gt, 10, 2);
  std::vector<std::vector<RankedItem>> rankings;
  for (Index qi = 0; qi < 5; ++qi) {
    rankings.push_back(bdnn::rank_by_hamming(pq, qi, pdb));
  }
  CHECK(report.map ==
        doctest::Approx(bdnn::mean_average_precision(rankings, gt, 10))
            .epsilon(1e-12));
  CHECK(report.precision_at_radius2 ==
        doctest::Approx(bdnn::precision_at_radius(rankings, gt, 2))
            .epsilon(1e-12));
  CHECK(report.code_length == 8);
  REQUIRE(report.map_top_k.has_value());
  CHECK(*report.map_top_k == 10);
  REQUIRE(report.per_query.size() == 5);
  for (Index qi = 0; qi < 5; ++qi) {
    CHECK(report.per_query[qi].query == qi);
    Index within = 0;
    for (const RankedItem& item : rankings[qi]) {
      if (item.distance <= 2) ++within;
    }
    CHECK(report.per_query[qi].within_radius == within);
  }

  GroundTruth wrong;
  wrong.relevant = {{0}};
  CHECK_THROWS_AS(bdnn::evaluate(pdb, pq, wrong, std::nullopt, 2),
                  std::invalid_argument);
}

TEST_CASE("identical codes collapse to distance zero everywhere") {
  Mat one(4, 1);
  one << 1, -1, 1, -1;
  Mat db(4, 6);
  for (Index j = 0; j < 6; ++j) db.col(j) = one;
  const PackedCodes pdb = bdnn::pack(db);
  const PackedCodes pq = bdnn::pack(one);
  GroundTruth gt;
  gt.relevant = {{0, 3}};
  const bdnn::EvalReport report = bdnn::evaluate(pdb, pq, gt);
  CHECK(report.per_query[0].within_radius == 6);
  CHECK(report.per_query[0].precision == doctest::Approx(2.0 / 6.0));
  // All distances tie at zero, so ranking is by index and AP is fixed.
  CHECK(report.map == doctest::Approx((1.0 / 1.0 + 2.0 / 4.0) / 2.0));
}

TEST_CASE("eval csv has one row per query and a mean summary") {
  bdnn::Rng rng(12);
  const Mat db = random_signs(rng, 8, 10);
  const Mat q = random_signs(rng, 8, 3);
  GroundTruth gt;
  gt.relevant = {{0, 1}, {2}, {3, 4, 5}};
  const bdnn::EvalReport report =
      bdnn::evaluate(bdnn::pack(db), bdnn::pack(q), gt);

  const std::string path = temp_path("eval.csv");
  bdnn::write_eval_csv(path, report);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == "query,ap,within_radius,precision");
  CHECK(lines[1].substr(0, 2) == "0,");
  CHECK(lines[4].substr(0, 5) == "mean,");

  // The summary's map survives a text round-trip exactly.
  std::stringstream ss(lines[4].substr(5));
  std::string map_field;
  std::getline(ss, map_field, ',');
  CHECK(std::strtod(map_field.c_str(), nullptr) == report.map);

  std::remove(path.c_str());
  CHECK_THROWS_AS(bdnn::write_eval_csv("/nonexistent/dir/e.csv", report),
                  std::runtime_error);
}
