#include "bdnn/sh_bdnn.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "bdnn/init.hpp"
#include "bdnn/rng.hpp"

namespace bdnn {

void ShConfig::validate() const {
  if (lambda1 < 0 || lambda2 < 0 || lambda3 < 0 || lambda4 < 0) {
    throw std::invalid_argument("sh config: lambdas must be >= 0");
  }
  if (T < 1) throw std::invalid_argument("sh config: T must be >= 1");
  if (per_class_sample && *per_class_sample < 1) {
    throw std::invalid_argument("sh config: per_class_sample must be >= 1");
  }
  if (max_similarity_entries < 1) {
    throw std::invalid_argument("sh config: max_similarity_entries must be >= 1");
  }
  schedule.validate();
  if (schedule.mode != HashMode::supervised) {
    throw std::invalid_argument("sh config: schedule mode must be supervised");
  }
  lbfgs.validate();
}

Mat pairwise_labels(const LabelVector& y) {
  const Index m = static_cast<Index>(y.size());
  Mat s(m, m);
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < m; ++i) {
      s(i, j) = y[i] == y[j] ? 1.0 : -1.0;
    }
  }
  return s;
}

namespace {

void check_shapes(const NetworkParams& params, const Mat& b, const Mat& x,
                  const Mat& s) {
  params.validate();
  if (params.schedule.mode != HashMode::supervised) {
    throw std::invalid_argument("sh: schedule mode must be supervised");
  }
  if (x.rows() != params.schedule.input_dim()) {
    throw std::invalid_argument("sh: input row count does not match schedule");
  }
  if (b.rows() != params.schedule.code_length() || b.cols() != x.cols()) {
    throw std::invalid_argument("sh: code matrix shape mismatch");
  }
  if (s.rows() != x.cols() || s.cols() != x.cols()) {
    throw std::invalid_argument("sh: similarity matrix must be m x m");
  }
  if (!is_sign_matrix(b)) {
    throw std::invalid_argument("sh: code entries must be exactly -1 or +1");
  }
  require_finite(x, "sh input");
}

Mat layer_derivative(const LayerSchedule& schedule, const ForwardTrace& trace,
                     Index layer) {
  const Mat& h = trace.layer_output(layer);
  if (activation(schedule, layer) == Activation::sigmoid) {
    return (h.array() * (1.0 - h.array())).matrix();
  }
  return Mat::Ones(h.rows(), h.cols());
}

}  // namespace

double objective_sh(const NetworkParams& params, const Mat& b, const Mat& x,
                    const Mat& s, const ShConfig& cfg) {
  check_shapes(params, b, x, s);
  const Index n = params.schedule.layers();
  const Index l_bits = params.schedule.code_length();
  const double m = static_cast<double>(x.cols());
  const Mat h = forward(params, x).layer_output(n);

  double j = ((h.transpose() * h) / static_cast<double>(l_bits) - s).squaredNorm() /
             (2.0 * m);

  double decay = 0.0;
  for (const Mat& w : params.weights) decay += w.squaredNorm();
  j += 0.5 * cfg.lambda1 * decay;

  j += cfg.lambda2 / (2.0 * m) * (h - b).squaredNorm();
  j += 0.5 * cfg.lambda3 *
       ((h * h.transpose()) / m - Mat::Identity(l_bits, l_bits)).squaredNorm();
  j += cfg.lambda4 / (2.0 * m) * h.rowwise().sum().squaredNorm();
  return j;
}

NetworkGrad gradient_sh(const NetworkParams& params, const Mat& b, const Mat& x,
                        const Mat& s, const ShConfig& cfg) {
  check_shapes(params, b, x, s);
  const Index n = params.schedule.layers();
  const Index l_bits = params.schedule.code_length();
  const double m = static_cast<double>(x.cols());
  const ForwardTrace trace = forward(params, x);
  const Mat& h = trace.layer_output(n);

  const Mat v = (h.transpose() * h) / static_cast<double>(l_bits) - s;
  Mat delta = (1.0 / (m * static_cast<double>(l_bits))) * h * (v + v.transpose());
  delta += (cfg.lambda2 / m) * (h - b);
  delta += (2.0 * cfg.lambda3 / m) *
           ((h * h.transpose()) / m - Mat::Identity(l_bits, l_bits)) * h;
  delta.colwise() += (cfg.lambda4 / m) * h.rowwise().sum();
  delta = delta.cwiseProduct(layer_derivative(params.schedule, trace, n));

  NetworkGrad grad;
  grad.weights.resize(n - 1);
  grad.biases.resize(n - 1);
  for (Index l = n - 1; l >= 1; --l) {
    grad.weights[l - 1] = delta * trace.layer_output(l).transpose() +
                          cfg.lambda1 * params.weights[l - 1];
    grad.biases[l - 1] = delta.rowwise().sum();
    if (l >= 2) {
      delta = (params.weights[l - 1].transpose() * delta)
                  .cwiseProduct(layer_derivative(params.schedule, trace, l));
    }
  }
  return grad;
}

Mat b_step_sh(const Mat& h_n) { return sgn(h_n); }

std::pair<Mat, LabelVector> per_class_subsample(const Mat& x, const LabelVector& y,
                                                Index k, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("per_class_subsample: k must be >= 1");
  if (static_cast<Index>(y.size()) != x.cols()) {
    throw std::invalid_argument("per_class_subsample: one label per column");
  }
  std::map<std::uint32_t, std::vector<Index>> by_class;
  for (Index j = 0; j < x.cols(); ++j) by_class[y[j]].push_back(j);

  Rng rng(seed);
  std::vector<Index> keep;
  for (auto& [label, columns] : by_class) {
    const Index take = std::min<Index>(k, static_cast<Index>(columns.size()));
    // Partial Fisher-Yates, then restore ascending order within the class.
    for (Index i = 0; i < take; ++i) {
      const Index j = i + static_cast<Index>(rng.below(columns.size() - i));
      std::swap(columns[i], columns[j]);
    }
    std::sort(columns.begin(), columns.begin() + take);
    keep.insert(keep.end(), columns.begin(), columns.begin() + take);
  }

  Mat x_out(x.rows(), static_cast<Index>(keep.size()));
  LabelVector y_out(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    x_out.col(static_cast<Index>(i)) = x.col(keep[i]);
    y_out[i] = y[keep[i]];
  }
  return {std::move(x_out), std::move(y_out)};
}

ShResult train_sh(const Mat& x, const LabelVector& y, const ShConfig& cfg) {
  cfg.validate();
  require_finite(x, "training data");
  if (static_cast<Index>(y.size()) != x.cols()) {
    throw std::invalid_argument("train_sh: one label per column");
  }
  if (x.rows() != cfg.schedule.input_dim()) {
    throw std::invalid_argument("train_sh: data dimension does not match schedule");
  }

  Mat xs = x;
  LabelVector ys = y;
  if (cfg.per_class_sample) {
    std::tie(xs, ys) = per_class_subsample(x, y, *cfg.per_class_sample, cfg.seed);
  }
  const Index m = xs.cols();
  if (m < 2) throw std::invalid_argument("train_sh: need at least two samples");
  if (m > cfg.max_similarity_entries / m) {
    throw std::invalid_argument(
        "train_sh: m^2 similarity entries exceed max_similarity_entries; "
        "subsample or raise the budget");
  }

  const Mat s = pairwise_labels(ys);
  const Index n = cfg.schedule.layers();
  const Index l_bits = cfg.schedule.code_length();

  ItqConfig itq;
  itq.seed = cfg.seed;
  Mat b = itq_codes(xs, l_bits, itq);

  NetworkParams params;
  params.schedule = cfg.schedule;
  params.weights.resize(n - 1);
  params.biases.resize(n - 1);
  Mat h = xs;
  for (Index l = 1; l <= n - 1; ++l) {
    params.weights[l - 1] = pca_weight_init(h, cfg.schedule.sizes[l]);
    params.biases[l - 1] = Vec::Zero(cfg.schedule.sizes[l]);
    if (l < n - 1) {
      h = sigmoid(params.weights[l - 1] * h);
    }
  }

  const auto fit_wc = [&]() {
    const ObjectiveFn objective = [&](const Vec& v, Vec& grad_out) {
      const NetworkParams p = unpack_params(cfg.schedule, v);
      grad_out = pack_grad(cfg.schedule, gradient_sh(p, b, xs, s, cfg));
      return objective_sh(p, b, xs, s, cfg);
    };
    const LbfgsResult result = minimize(objective, pack_params(params), cfg.lbfgs);
    params = unpack_params(cfg.schedule, result.x);
  };

  ShResult out;
  fit_wc();
  out.history.push_back({0, "wc", objective_sh(params, b, xs, s, cfg)});
  for (int t = 1; t <= cfg.T; ++t) {
    b = b_step_sh(forward(params, xs).layer_output(n));
    out.history.push_back({t, "b", objective_sh(params, b, xs, s, cfg)});
    fit_wc();
    out.history.push_back({t, "wc", objective_sh(params, b, xs, s, cfg)});
  }
  out.params = std::move(params);
  out.b = std::move(b);
  return out;
}

}  // namespace bdnn
