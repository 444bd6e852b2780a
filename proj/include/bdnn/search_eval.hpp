#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bdnn/matrix.hpp"

namespace bdnn {

// Sign codes packed one bit per entry: +1 -> 1, -1 -> 0. Code j occupies
// words [j*words_per_code, (j+1)*words_per_code); bit i of a code lives in
// word i/64 at position i%64. Padding bits are zero and cancel in XOR.
struct PackedCodes {
  Index bits = 0;
  Index count = 0;
  std::vector<std::uint64_t> words;

  Index words_per_code() const { return (bits + 63) / 64; }
  const std::uint64_t* code(Index j) const {
    return words.data() + j * words_per_code();
  }
};

PackedCodes pack(const Mat& b);
Mat unpack(const PackedCodes& codes);

// Number of disagreeing bit positions between code i of a and code j of b.
Index hamming_distance(const PackedCodes& a, Index i, const PackedCodes& b,
                       Index j);

// Per-query sets of relevant database indices.
struct GroundTruth {
  std::vector<std::vector<Index>> relevant;

  Index queries() const { return static_cast<Index>(relevant.size()); }
};

// The k database columns closest to each query column in Euclidean distance,
// ties broken by ascending database index.
GroundTruth euclidean_ground_truth(const Mat& x_db, const Mat& x_q, Index k);

// Relevant = every database item sharing the query's class label.
GroundTruth label_ground_truth(const std::vector<std::uint32_t>& db_labels,
                               const std::vector<std::uint32_t>& query_labels);

struct RankedItem {
  Index index = 0;
  Index distance = 0;
};

// Full database ranked by Hamming distance to query qi, ascending distance,
// ties broken by ascending database index.
std::vector<RankedItem> rank_by_hamming(const PackedCodes& queries, Index qi,
                                        const PackedCodes& db);

// AP per query: for each relevant item within the (optionally truncated)
// ranking, precision at its rank, summed and divided by min(|gt|, top_k).
// Queries with empty ground truth contribute 0.
double mean_average_precision(const std::vector<std::vector<RankedItem>>& rankings,
                              const GroundTruth& gt,
                              std::optional<Index> top_k = std::nullopt);

// Per query: precision among items at Hamming distance <= radius, zero when
// nothing qualifies. Returns the mean over queries.
double precision_at_radius(const std::vector<std::vector<RankedItem>>& rankings,
                           const GroundTruth& gt, Index radius = 2);

struct QueryEval {
  Index query = 0;
  double ap = 0.0;
  Index within_radius = 0;
  double precision = 0.0;
};

struct EvalReport {
  double map = 0.0;
  double precision_at_radius2 = 0.0;
  std::vector<QueryEval> per_query;
  Index code_length = 0;
  std::optional<Index> map_top_k;
  Index radius = 2;
};

// Runs the full linear-scan protocol: rank every query, then both metrics.
EvalReport evaluate(const PackedCodes& db, const PackedCodes& queries,
                    const GroundTruth& gt,
                    std::optional<Index> top_k = std::nullopt, Index radius = 2);

// CSV with one row per query (query, ap, within_radius, precision) and a
// final summary row (mean, map, total, precision_at_radius).
void write_eval_csv(const std::string& path, const EvalReport& report);

}  // namespace bdnn
