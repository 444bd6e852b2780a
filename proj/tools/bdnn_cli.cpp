// bdnn: train binary hash networks, encode datasets, and evaluate retrieval.
//
// Exit codes: 0 success, 1 internal error, 2 usage or input error.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bdnn/io.hpp"
#include "bdnn/network.hpp"
#include "bdnn/search_eval.hpp"
#include "bdnn/sh_bdnn.hpp"
#include "bdnn/uh_bdnn.hpp"

namespace {

int run_train(const std::string& config_path, const std::string& data_path,
              const std::string& labels_path, const std::string& model_path,
              std::string trace_path) {
  const bdnn::RunConfig run = bdnn::load_run_config(config_path);
  bdnn::Mat x = bdnn::load_dataset(data_path);
  if (trace_path.empty()) trace_path = model_path + ".trace.csv";

  bdnn::Standardization st;
  if (run.standardize) {
    st = bdnn::fit_standardization(x);
    x = bdnn::apply_standardization(st, x);
  }

  bdnn::NetworkParams params;
  std::vector<bdnn::TraceEntry> history;
  if (run.mode == bdnn::HashMode::unsupervised) {
    if (!labels_path.empty()) {
      std::cerr << "note: labels are ignored in uh mode\n";
    }
    bdnn::UhResult result = bdnn::train_uh(x, run.uh_config(x.rows()));
    params = std::move(result.params);
    history = std::move(result.history);
  } else {
    if (labels_path.empty()) {
      std::cerr << "error: sh mode requires --labels\n";
      return 2;
    }
    const bdnn::LabelVector y = bdnn::load_labels(labels_path);
    if (static_cast<bdnn::Index>(y.size()) != x.cols()) {
      std::cerr << "error: label count " << y.size() << " does not match "
                << x.cols() << " samples\n";
      return 2;
    }
    bdnn::ShResult result = bdnn::train_sh(x, y, run.sh_config(x.rows()));
    params = std::move(result.params);
    history = std::move(result.history);
  }

  if (run.standardize) bdnn::fold_standardization(params, st);
  bdnn::save_model(model_path, params);
  bdnn::write_trace_csv(trace_path, history, run.seed);
  std::cout << "seed=" << run.seed << " final_objective="
            << history.back().objective << '\n';
  std::cout << "model written to " << model_path << '\n';
  std::cout << "trace written to " << trace_path << '\n';
  return 0;
}

int run_encode(const std::string& model_path, const std::string& data_path,
               const std::string& codes_path) {
  const bdnn::NetworkParams params = bdnn::load_model(model_path);
  const bdnn::Mat x = bdnn::load_dataset(data_path);
  if (x.rows() != params.schedule.input_dim()) {
    std::cerr << "error: data dimension " << x.rows()
              << " does not match model input " << params.schedule.input_dim()
              << '\n';
    return 2;
  }
  const bdnn::PackedCodes codes = bdnn::pack(bdnn::encode(params, x));
  bdnn::save_codes(codes_path, codes);
  std::cout << codes.count << " codes of " << codes.bits << " bits written to "
            << codes_path << '\n';
  return 0;
}

int run_groundtruth(const std::string& db_path, const std::string& query_path,
                    long long k, const std::string& out_path) {
  const bdnn::Mat db = bdnn::load_dataset(db_path);
  const bdnn::Mat queries = bdnn::load_dataset(query_path);
  const bdnn::GroundTruth gt =
      bdnn::euclidean_ground_truth(db, queries, static_cast<bdnn::Index>(k));
  bdnn::save_ground_truth(out_path, gt);
  std::cout << gt.queries() << " ground-truth rows written to " << out_path
            << '\n';
  return 0;
}

int run_eval(const std::string& db_path, const std::string& query_path,
             const std::string& gt_path, long long top_k, std::string csv_path) {
  const bdnn::PackedCodes db = bdnn::load_codes(db_path);
  const bdnn::PackedCodes queries = bdnn::load_codes(query_path);
  if (db.bits != queries.bits) {
    std::cerr << "error: database codes have " << db.bits
              << " bits but query codes have " << queries.bits << '\n';
    return 2;
  }
  const bdnn::GroundTruth gt = bdnn::load_ground_truth(gt_path);
  if (gt.queries() != queries.count) {
    std::cerr << "error: ground truth covers " << gt.queries()
              << " queries, code file has " << queries.count << '\n';
    return 2;
  }
  std::optional<bdnn::Index> top;
  if (top_k > 0) top = static_cast<bdnn::Index>(top_k);
  const bdnn::EvalReport report = bdnn::evaluate(db, queries, gt, top);
  if (csv_path.empty()) csv_path = query_path + ".eval.csv";
  bdnn::write_eval_csv(csv_path, report);
  std::cout.precision(6);
  std::cout << "queries=" << queries.count << " bits=" << db.bits;
  if (top) std::cout << " map_top_k=" << *top;
  std::cout << '\n';
  std::cout << "mAP=" << report.map
            << " precision@" << report.radius << "=" << report.precision_at_radius2
            << '\n';
  std::cout << "per-query csv written to " << csv_path << '\n';
  return 0;
}

int run_synth(const bdnn::SynthSpec& spec, const std::string& data_path,
              const std::string& labels_path) {
  const auto [x, y] = bdnn::synth_dataset(spec);
  bdnn::save_dataset(data_path, x);
  bdnn::save_labels(labels_path, y);
  std::cout << "seed=" << spec.seed << '\n';
  std::cout << x.cols() << " samples of dimension " << x.rows()
            << " written to " << data_path << '\n';
  std::cout << "labels written to " << labels_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binary deep hashing: training, encoding, Hamming retrieval"};
  app.require_subcommand(1);

  std::string config_path, data_path, labels_path, model_path, trace_path;
  auto* train = app.add_subcommand("train", "Train a hash network");
  train->add_option("config", config_path, "key=value training config")->required();
  train->add_option("data", data_path, "training dataset (BHDM)")->required();
  train->add_option("model", model_path, "output model path")->required();
  train->add_option("--labels", labels_path, "labels file (required in sh mode)");
  train->add_option("--trace", trace_path,
                    "objective trace csv (default: <model>.trace.csv)");

  std::string enc_model, enc_data, enc_codes;
  auto* encode = app.add_subcommand("encode", "Hash a dataset with a trained model");
  encode->add_option("model", enc_model, "model path")->required();
  encode->add_option("data", enc_data, "dataset (BHDM)")->required();
  encode->add_option("codes", enc_codes, "output codes path (BHCB)")->required();

  std::string gt_db, gt_query, gt_out;
  long long gt_k = 50;
  auto* groundtruth =
      app.add_subcommand("groundtruth", "Euclidean nearest-neighbor ground truth");
  groundtruth->add_option("db", gt_db, "database dataset (BHDM)")->required();
  groundtruth->add_option("queries", gt_query, "query dataset (BHDM)")->required();
  groundtruth->add_option("k", gt_k, "neighbors per query")->required();
  groundtruth->add_option("out", gt_out, "output text file")->required();

  std::string eval_db, eval_query, eval_gt, eval_csv;
  long long eval_top_k = 0;
  auto* eval = app.add_subcommand("eval", "Hamming retrieval metrics");
  eval->add_option("db_codes", eval_db, "database codes (BHCB)")->required();
  eval->add_option("query_codes", eval_query, "query codes (BHCB)")->required();
  eval->add_option("gt", eval_gt, "ground truth text file")->required();
  eval->add_option("--top-k", eval_top_k, "truncate mAP to this depth (0 = full)");
  eval->add_option("--csv", eval_csv,
                   "per-query csv path (default: <query_codes>.eval.csv)");

  bdnn::SynthSpec spec;
  long long synth_seed = 0;
  std::string synth_data, synth_labels;
  auto* synth = app.add_subcommand("synth", "Gaussian-mixture toy dataset");
  synth->add_option("data", synth_data, "output dataset path")->required();
  synth->add_option("labels", synth_labels, "output labels path")->required();
  synth->add_option("--clusters", spec.clusters, "number of clusters");
  synth->add_option("--dims", spec.dims, "feature dimension");
  synth->add_option("--per-cluster", spec.per_cluster, "samples per cluster");
  synth->add_option("--radius", spec.radius, "cluster mean distance from origin");
  synth->add_option("--seed", synth_seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(train)) {
      return run_train(config_path, data_path, labels_path, model_path,
                       trace_path);
    }
    if (app.got_subcommand(encode)) {
      return run_encode(enc_model, enc_data, enc_codes);
    }
    if (app.got_subcommand(groundtruth)) {
      return run_groundtruth(gt_db, gt_query, gt_k, gt_out);
    }
    if (app.got_subcommand(eval)) {
      return run_eval(eval_db, eval_query, eval_gt, eval_top_k, eval_csv);
    }
    if (app.got_subcommand(synth)) {
      if (synth_seed < 0) {
        std::cerr << "error: seed must be >= 0\n";
        return 2;
      }
      spec.seed = static_cast<std::uint64_t>(synth_seed);
      return run_synth(spec, synth_data, synth_labels);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
