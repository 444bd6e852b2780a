#include "bdnn/search_eval.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <stdexcept>

namespace bdnn {

PackedCodes pack(const Mat& b) {
  if (!is_sign_matrix(b)) {
    throw std::invalid_argument("pack: entries must be exactly -1 or +1");
  }
  PackedCodes codes;
  codes.bits = b.rows();
  codes.count = b.cols();
  const Index wpc = codes.words_per_code();
  codes.words.assign(static_cast<std::size_t>(wpc * codes.count), 0);
  for (Index j = 0; j < codes.count; ++j) {
    std::uint64_t* word = codes.words.data() + j * wpc;
    for (Index i = 0; i < codes.bits; ++i) {
      if (b(i, j) > 0) word[i / 64] |= std::uint64_t{1} << (i % 64);
    }
  }
  return codes;
}

Mat unpack(const PackedCodes& codes) {
  Mat b(codes.bits, codes.count);
  const Index wpc = codes.words_per_code();
  for (Index j = 0; j < codes.count; ++j) {
    const std::uint64_t* word = codes.words.data() + j * wpc;
    for (Index i = 0; i < codes.bits; ++i) {
      b(i, j) = (word[i / 64] >> (i % 64)) & 1 ? 1.0 : -1.0;
    }
  }
  return b;
}

Index hamming_distance(const PackedCodes& a, Index i, const PackedCodes& b,
                       Index j) {
  if (a.bits != b.bits) {
    throw std::invalid_argument("hamming_distance: code lengths differ");
  }
  const Index wpc = a.words_per_code();
  const std::uint64_t* wa = a.code(i);
  const std::uint64_t* wb = b.code(j);
  Index d = 0;
  for (Index w = 0; w < wpc; ++w) {
    d += std::popcount(wa[w] ^ wb[w]);
  }
  return d;
}

GroundTruth euclidean_ground_truth(const Mat& x_db, const Mat& x_q, Index k) {
  if (x_db.rows() != x_q.rows()) {
    throw std::invalid_argument("ground truth: dimension mismatch");
  }
  if (k < 1 || k > x_db.cols()) {
    throw std::invalid_argument("ground truth: k must be in [1, database size]");
  }
  GroundTruth gt;
  gt.relevant.resize(x_q.cols());
  std::vector<std::pair<double, Index>> order(x_db.cols());
  for (Index q = 0; q < x_q.cols(); ++q) {
    for (Index j = 0; j < x_db.cols(); ++j) {
      order[j] = {(x_db.col(j) - x_q.col(q)).squaredNorm(), j};
    }
    std::sort(order.begin(), order.end());
    auto& out = gt.relevant[q];
    out.resize(k);
    for (Index j = 0; j < k; ++j) out[j] = order[j].second;
  }
  return gt;
}

GroundTruth label_ground_truth(const std::vector<std::uint32_t>& db_labels,
                               const std::vector<std::uint32_t>& query_labels) {
  GroundTruth gt;
  gt.relevant.resize(query_labels.size());
  for (std::size_t q = 0; q < query_labels.size(); ++q) {
    for (std::size_t j = 0; j < db_labels.size(); ++j) {
      if (db_labels[j] == query_labels[q]) {
        gt.relevant[q].push_back(static_cast<Index>(j));
      }
    }
  }
  return gt;
}

std::vector<RankedItem> rank_by_hamming(const PackedCodes& queries, Index qi,
                                        const PackedCodes& db) {
  std::vector<RankedItem> ranking(db.count);
  for (Index j = 0; j < db.count; ++j) {
    ranking[j] = {j, hamming_distance(queries, qi, db, j)};
  }
  std::sort(ranking.begin(), ranking.end(),
            [](const RankedItem& a, const RankedItem& b) {
              return a.distance != b.distance ? a.distance < b.distance
                                              : a.index < b.index;
            });
  return ranking;
}

namespace {

double average_precision(const std::vector<RankedItem>& ranking,
                         const std::vector<Index>& relevant,
                         std::optional<Index> top_k) {
  if (relevant.empty()) return 0.0;
  const std::vector<bool> is_relevant = [&] {
    Index max_index = 0;
    for (Index r : relevant) max_index = std::max(max_index, r);
    std::vector<bool> flags(max_index + 1, false);
    for (Index r : relevant) flags[r] = true;
    return flags;
  }();
  const Index limit =
      top_k ? std::min<Index>(*top_k, static_cast<Index>(ranking.size()))
            : static_cast<Index>(ranking.size());
  double sum = 0.0;
  Index hits = 0;
  for (Index r = 0; r < limit; ++r) {
    const Index idx = ranking[r].index;
    if (idx < static_cast<Index>(is_relevant.size()) && is_relevant[idx]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  }
  const Index denom =
      top_k ? std::min<Index>(static_cast<Index>(relevant.size()), *top_k)
            : static_cast<Index>(relevant.size());
  return sum / static_cast<double>(denom);
}

double radius_precision(const std::vector<RankedItem>& ranking,
                        const std::vector<Index>& relevant, Index radius,
                        Index* within_out) {
  Index within = 0;
  Index hits = 0;
  for (const RankedItem& item : ranking) {
    if (item.distance > radius) break;  // ranking is ascending by distance
    ++within;
    if (std::find(relevant.begin(), relevant.end(), item.index) !=
        relevant.end()) {
      ++hits;
    }
  }
  if (within_out) *within_out = within;
  if (within == 0) return 0.0;
  return static_cast<double>(hits) / static_cast<double>(within);
}

}  // namespace

double mean_average_precision(const std::vector<std::vector<RankedItem>>& rankings,
                              const GroundTruth& gt, std::optional<Index> top_k) {
  if (static_cast<Index>(rankings.size()) != gt.queries()) {
    throw std::invalid_argument("map: rankings must cover all queries");
  }
  if (rankings.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t q = 0; q < rankings.size(); ++q) {
    sum += average_precision(rankings[q], gt.relevant[q], top_k);
  }
  return sum / static_cast<double>(rankings.size());
}

double precision_at_radius(const std::vector<std::vector<RankedItem>>& rankings,
                           const GroundTruth& gt, Index radius) {
  if (static_cast<Index>(rankings.size()) != gt.queries()) {
    throw std::invalid_argument("precision: rankings must cover all queries");
  }
  if (rankings.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t q = 0; q < rankings.size(); ++q) {
    sum += radius_precision(rankings[q], gt.relevant[q], radius, nullptr);
  }
  return sum / static_cast<double>(rankings.size());
}

EvalReport evaluate(const PackedCodes& db, const PackedCodes& queries,
                    const GroundTruth& gt, std::optional<Index> top_k,
                    Index radius) {
  if (queries.count != gt.queries()) {
    throw std::invalid_argument("evaluate: ground truth must cover all queries");
  }
  EvalReport report;
  report.code_length = db.bits;
  report.map_top_k = top_k;
  report.radius = radius;
  report.per_query.resize(queries.count);
  double ap_sum = 0.0;
  double prec_sum = 0.0;
  for (Index q = 0; q < queries.count; ++q) {
    const std::vector<RankedItem> ranking = rank_by_hamming(queries, q, db);
    QueryEval& entry = report.per_query[q];
    entry.query = q;
    entry.ap = average_precision(ranking, gt.relevant[q], top_k);
    entry.precision =
        radius_precision(ranking, gt.relevant[q], radius, &entry.within_radius);
    ap_sum += entry.ap;
    prec_sum += entry.precision;
  }
  if (queries.count > 0) {
    report.map = ap_sum / static_cast<double>(queries.count);
    report.precision_at_radius2 = prec_sum / static_cast<double>(queries.count);
  }
  return report;
}

void write_eval_csv(const std::string& path, const EvalReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open eval csv for writing: " + path);
  out << "query,ap,within_radius,precision\n";
  out.precision(17);
  Index total_within = 0;
  for (const QueryEval& entry : report.per_query) {
    out << entry.query << ',' << entry.ap << ',' << entry.within_radius << ','
        << entry.precision << '\n';
    total_within += entry.within_radius;
  }
  out << "mean," << report.map << ',' << total_within << ','
      << report.precision_at_radius2 << '\n';
  if (!out) throw std::runtime_error("eval csv: write failed: " + path);
}

}  // namespace bdnn
