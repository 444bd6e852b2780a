// Python surface: training, encoding, and evaluation with numpy matrices
// (one column per sample, matching the C++ convention throughout).

#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bdnn/init.hpp"
#include "bdnn/io.hpp"
#include "bdnn/network.hpp"
#include "bdnn/search_eval.hpp"
#include "bdnn/sh_bdnn.hpp"
#include "bdnn/uh_bdnn.hpp"

namespace py = pybind11;

using bdnn::GroundTruth;
using bdnn::HashMode;
using bdnn::Index;
using bdnn::LabelVector;
using bdnn::Mat;
using bdnn::NetworkParams;

namespace {

// (iteration, phase, objective) tuples read naturally from Python.
std::vector<std::tuple<int, std::string, double>> history_tuples(
    const std::vector<bdnn::TraceEntry>& history) {
  std::vector<std::tuple<int, std::string, double>> out;
  out.reserve(history.size());
  for (const bdnn::TraceEntry& e : history) {
    out.emplace_back(e.iteration, e.phase, e.objective);
  }
  return out;
}

GroundTruth make_gt(std::vector<std::vector<Index>> relevant) {
  GroundTruth gt;
  gt.relevant = std::move(relevant);
  return gt;
}

py::dict report_dict(const bdnn::EvalReport& report) {
  py::dict out;
  out["map"] = report.map;
  out["precision_at_radius"] = report.precision_at_radius2;
  out["radius"] = report.radius;
  out["code_length"] = report.code_length;
  out["map_top_k"] = report.map_top_k;
  py::list ap;
  py::list within;
  for (const bdnn::QueryEval& q : report.per_query) {
    ap.append(q.ap);
    within.append(q.within_radius);
  }
  out["per_query_ap"] = ap;
  out["per_query_within_radius"] = within;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Binary deep hashing: train sign-code networks and run "
            "Hamming-space retrieval.";

  py::class_<NetworkParams>(m, "Model")
      .def_property_readonly(
          "layer_sizes",
          [](const NetworkParams& p) { return p.schedule.sizes; })
      .def_property_readonly(
          "code_length",
          [](const NetworkParams& p) { return p.schedule.code_length(); })
      .def(
          "encode",
          [](const NetworkParams& p, const Mat& x) {
            return bdnn::encode(p, x);
          },
          py::arg("x"),
          "Sign codes (+1/-1) for the columns of x, code_length x cols(x).")
      .def(
          "save",
          [](const NetworkParams& p, const std::string& path) {
            bdnn::save_model(path, p);
          },
          py::arg("path"))
      .def_static(
          "load",
          [](const std::string& path) { return bdnn::load_model(path); },
          py::arg("path"));

  m.def(
      "train_uh",
      [](const Mat& x, Index code_length, const std::vector<Index>& layer_sizes,
         int T, double lambda1, double lambda2, double lambda3, double lambda4,
         std::uint64_t seed) {
        bdnn::UhConfig cfg;
        cfg.schedule = bdnn::schedule_for(HashMode::unsupervised, x.rows(),
                                          code_length, layer_sizes);
        cfg.T = T;
        cfg.lambda1 = lambda1;
        cfg.lambda2 = lambda2;
        cfg.lambda3 = lambda3;
        cfg.lambda4 = lambda4;
        cfg.seed = seed;
        const bdnn::UhResult r = bdnn::train_uh(x, cfg);
        return py::make_tuple(r.params, r.b, history_tuples(r.history));
      },
      py::arg("x"), py::arg("code_length"),
      py::arg("layer_sizes") = std::vector<Index>{}, py::arg("T") = 10,
      py::arg("lambda1") = 1e-5, py::arg("lambda2") = 5e-2,
      py::arg("lambda3") = 1e-2, py::arg("lambda4") = 1e-6, py::arg("seed") = 0,
      "Unsupervised training on the columns of x. Returns (model, codes, "
      "history). Empty layer_sizes selects the built-in defaults.");

  m.def(
      "train_sh",
      [](const Mat& x, const LabelVector& y, Index code_length,
         const std::vector<Index>& layer_sizes, int T, double lambda1,
         double lambda2, double lambda3, double lambda4,
         std::optional<Index> per_class_sample, std::uint64_t seed) {
        bdnn::ShConfig cfg;
        cfg.schedule = bdnn::schedule_for(HashMode::supervised, x.rows(),
                                          code_length, layer_sizes);
        cfg.T = T;
        cfg.lambda1 = lambda1;
        cfg.lambda2 = lambda2;
        cfg.lambda3 = lambda3;
        cfg.lambda4 = lambda4;
        cfg.per_class_sample = per_class_sample;
        cfg.seed = seed;
        const bdnn::ShResult r = bdnn::train_sh(x, y, cfg);
        return py::make_tuple(r.params, r.b, history_tuples(r.history));
      },
      py::arg("x"), py::arg("labels"), py::arg("code_length"),
      py::arg("layer_sizes") = std::vector<Index>{}, py::arg("T") = 5,
      py::arg("lambda1") = 1e-3, py::arg("lambda2") = 5.0,
      py::arg("lambda3") = 1.0, py::arg("lambda4") = 1e-4,
      py::arg("per_class_sample") = std::nullopt, py::arg("seed") = 0,
      "Supervised training from class labels. Returns (model, codes, "
      "history).");

  m.def(
      "itq_codes",
      [](const Mat& x, Index code_length, int iterations, std::uint64_t seed) {
        bdnn::ItqConfig cfg;
        cfg.rotation_iterations = iterations;
        cfg.seed = seed;
        return bdnn::itq_codes(x, code_length, cfg);
      },
      py::arg("x"), py::arg("code_length"), py::arg("iterations") = 50,
      py::arg("seed") = 0,
      "Iterative-quantization sign codes, the trainers' starting point.");

  m.def("pairwise_labels", &bdnn::pairwise_labels, py::arg("labels"),
        "S with +1 for same-label pairs and -1 otherwise.");

  m.def(
      "hamming",
      [](const Mat& a, const Mat& b) {
        const bdnn::PackedCodes pa = bdnn::pack(a);
        const bdnn::PackedCodes pb = bdnn::pack(b);
        Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic> d(pa.count,
                                                               pb.count);
        for (Index i = 0; i < pa.count; ++i) {
          for (Index j = 0; j < pb.count; ++j) {
            d(i, j) = bdnn::hamming_distance(pa, i, pb, j);
          }
        }
        return d;
      },
      py::arg("a"), py::arg("b"),
      "All pairwise Hamming distances between the sign columns of a and b.");

  m.def(
      "euclidean_ground_truth",
      [](const Mat& db, const Mat& queries, Index k) {
        return bdnn::euclidean_ground_truth(db, queries, k).relevant;
      },
      py::arg("db"), py::arg("queries"), py::arg("k"),
      "Per query: indices of the k nearest database columns, ties by index.");

  m.def(
      "label_ground_truth",
      [](const LabelVector& db_labels, const LabelVector& query_labels) {
        return bdnn::label_ground_truth(db_labels, query_labels).relevant;
      },
      py::arg("db_labels"), py::arg("query_labels"),
      "Per query: indices of database items sharing the query's label.");

  m.def(
      "evaluate",
      [](const Mat& db_codes, const Mat& query_codes,
         std::vector<std::vector<Index>> relevant, std::optional<Index> top_k,
         Index radius) {
        const bdnn::EvalReport report =
            bdnn::evaluate(bdnn::pack(db_codes), bdnn::pack(query_codes),
                           make_gt(std::move(relevant)), top_k, radius);
        return report_dict(report);
      },
      py::arg("db_codes"), py::arg("query_codes"), py::arg("relevant"),
      py::arg("top_k") = std::nullopt, py::arg("radius") = 2,
      "Linear-scan retrieval on sign codes; returns mAP and radius "
      "precision plus per-query detail.");

  m.def(
      "synth_dataset",
      [](Index clusters, Index dims, Index per_cluster, double radius,
         std::uint64_t seed) {
        bdnn::SynthSpec spec;
        spec.clusters = clusters;
        spec.dims = dims;
        spec.per_cluster = per_cluster;
        spec.radius = radius;
        spec.seed = seed;
        return bdnn::synth_dataset(spec);
      },
      py::arg("clusters") = 3, py::arg("dims") = 16,
      py::arg("per_cluster") = 100, py::arg("radius") = 10.0,
      py::arg("seed") = 0,
      "Gaussian clusters on scaled axis directions; returns (x, labels).");
}
