#include "bdnn/uh_bdnn.hpp"

#include <stdexcept>

#include "bdnn/init.hpp"

namespace bdnn {

void UhConfig::validate() const {
  if (lambda1 < 0 || lambda2 < 0 || lambda3 < 0 || lambda4 < 0) {
    throw std::invalid_argument("uh config: lambdas must be >= 0");
  }
  if (T < 1) throw std::invalid_argument("uh config: T must be >= 1");
  if (b_step_max_sweeps < 1) {
    throw std::invalid_argument("uh config: b_step_max_sweeps must be >= 1");
  }
  schedule.validate();
  if (schedule.mode != HashMode::unsupervised) {
    throw std::invalid_argument("uh config: schedule mode must be unsupervised");
  }
  lbfgs.validate();
}

namespace {

void check_shapes(const NetworkParams& params, const Mat& b, const Mat& x) {
  params.validate();
  if (params.schedule.mode != HashMode::unsupervised) {
    throw std::invalid_argument("uh: schedule mode must be unsupervised");
  }
  if (x.rows() != params.schedule.input_dim()) {
    throw std::invalid_argument("uh: input row count does not match schedule");
  }
  if (b.rows() != params.schedule.code_length() || b.cols() != x.cols()) {
    throw std::invalid_argument("uh: code matrix shape mismatch");
  }
  if (!is_sign_matrix(b)) {
    throw std::invalid_argument("uh: code entries must be exactly -1 or +1");
  }
  require_finite(x, "uh input");
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

double objective_uh(const NetworkParams& params, const Mat& b, const Mat& x,
                    const UhConfig& cfg) {
  check_shapes(params, b, x);
  const Index n = params.schedule.layers();
  const double m = static_cast<double>(x.cols());
  const ForwardTrace trace = forward(params, x);
  const Mat& h_code = trace.layer_output(n - 1);

  Mat residual = x - params.weights[n - 2] * b;
  residual.colwise() -= params.biases[n - 2];
  double j = residual.squaredNorm() / (2.0 * m);

  double decay = 0.0;
  for (const Mat& w : params.weights) decay += w.squaredNorm();
  j += 0.5 * cfg.lambda1 * decay;

  j += cfg.lambda2 / (2.0 * m) * (h_code - b).squaredNorm();

  const Index l = params.schedule.code_length();
  const Mat gram = (h_code * h_code.transpose()) / m - Mat::Identity(l, l);
  j += 0.5 * cfg.lambda3 * gram.squaredNorm();

  j += cfg.lambda4 / (2.0 * m) * h_code.rowwise().sum().squaredNorm();
  return j;
}

NetworkGrad gradient_uh(const NetworkParams& params, const Mat& b, const Mat& x,
                        const UhConfig& cfg) {
  check_shapes(params, b, x);
  const Index n = params.schedule.layers();
  const Index l_bits = params.schedule.code_length();
  const double m = static_cast<double>(x.cols());
  const ForwardTrace trace = forward(params, x);
  const Mat& h_code = trace.layer_output(n - 1);

  NetworkGrad grad;
  grad.weights.resize(n - 1);
  grad.biases.resize(n - 1);

  // Last layer: only the reconstruction and decay terms touch W(n-1), c(n-1).
  Mat residual = x - params.weights[n - 2] * b;
  residual.colwise() -= params.biases[n - 2];
  grad.weights[n - 2] =
      (-1.0 / m) * residual * b.transpose() + cfg.lambda1 * params.weights[n - 2];
  grad.biases[n - 2] = (-1.0 / m) * residual.rowwise().sum();

  // Code layer: binding, independence, and balance terms seed the backprop.
  Mat delta = (cfg.lambda2 / m) * (h_code - b);
  delta += (2.0 * cfg.lambda3 / m) *
           ((h_code * h_code.transpose()) / m - Mat::Identity(l_bits, l_bits)) *
           h_code;
  delta.colwise() += (cfg.lambda4 / m) * h_code.rowwise().sum();
  delta = delta.cwiseProduct(layer_derivative(params.schedule, trace, n - 1));

  for (Index l = n - 2; l >= 1; --l) {
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

Mat b_step_uh(const NetworkParams& params, const Mat& x, const Mat& b_in,
              const UhConfig& cfg) {
  check_shapes(params, b_in, x);
  const Index n = params.schedule.layers();
  const Index l_bits = params.schedule.code_length();
  const Index m = x.cols();
  const Mat& w = params.weights[n - 2];
  const Mat h_code = forward(params, x).layer_output(n - 1);

  const Mat v = x.colwise() - params.biases[n - 2];
  const Mat q = w.transpose() * v + cfg.lambda2 * h_code;  // L x m
  const Mat g = w.transpose() * w;                         // L x L

  Mat b = b_in;
  for (int sweep = 0; sweep < cfg.b_step_max_sweeps; ++sweep) {
    bool changed = false;
    for (Index k = 0; k < l_bits; ++k) {
      // Closed-form row minimizer with every other row held fixed:
      // b_k = sgn(q_k - w_k^T W_1 B_1), written via the Gram matrix so the
      // excluded row k is subtracted back out.
      const Eigen::RowVectorXd r =
          q.row(k) - (g.row(k) * b - g(k, k) * b.row(k));
      for (Index j = 0; j < m; ++j) {
        const double s = sgn(r(j));
        if (s != b(k, j)) {
          b(k, j) = s;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  return b;
}

UhResult train_uh(const Mat& x, const UhConfig& cfg) {
  cfg.validate();
  require_finite(x, "training data");
  if (x.rows() != cfg.schedule.input_dim()) {
    throw std::invalid_argument("train_uh: data dimension does not match schedule");
  }
  if (x.cols() < 2) {
    throw std::invalid_argument("train_uh: need at least two samples");
  }
  const Index n = cfg.schedule.layers();
  const Index l_bits = cfg.schedule.code_length();

  ItqConfig itq;
  itq.seed = cfg.seed;
  Mat b = itq_codes(x, l_bits, itq);

  NetworkParams params;
  params.schedule = cfg.schedule;
  params.weights.resize(n - 1);
  params.biases.resize(n - 1);
  Mat h = x;
  for (Index l = 1; l <= n - 2; ++l) {
    params.weights[l - 1] = pca_weight_init(h, cfg.schedule.sizes[l]);
    params.biases[l - 1] = Vec::Zero(cfg.schedule.sizes[l]);
    if (l < n - 2) {
      h = sigmoid(params.weights[l - 1] * h);
    }
  }
  params.weights[n - 2] =
      rect_identity(cfg.schedule.sizes[n - 1], cfg.schedule.sizes[n - 2]);
  params.biases[n - 2] = Vec::Zero(cfg.schedule.sizes[n - 1]);

  const auto fit_wc = [&]() {
    const ObjectiveFn objective = [&](const Vec& v, Vec& grad_out) {
      const NetworkParams p = unpack_params(cfg.schedule, v);
      grad_out = pack_grad(cfg.schedule, gradient_uh(p, b, x, cfg));
      return objective_uh(p, b, x, cfg);
    };
    const LbfgsResult result = minimize(objective, pack_params(params), cfg.lbfgs);
    params = unpack_params(cfg.schedule, result.x);
  };

  UhResult out;
  fit_wc();
  out.history.push_back({0, "wc", objective_uh(params, b, x, cfg)});
  for (int t = 1; t <= cfg.T; ++t) {
    b = b_step_uh(params, x, b, cfg);
    out.history.push_back({t, "b", objective_uh(params, b, x, cfg)});
    fit_wc();
    out.history.push_back({t, "wc", objective_uh(params, b, x, cfg)});
  }
  out.params = std::move(params);
  out.b = std::move(b);
  return out;
}

}  // namespace bdnn
