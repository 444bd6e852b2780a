#include "bdnn/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace bdnn {

void LbfgsConfig::validate() const {
  if (memory < 1) throw std::invalid_argument("lbfgs: memory must be >= 1");
  if (max_iterations < 0) throw std::invalid_argument("lbfgs: max_iterations must be >= 0");
  if (!(0.0 < wolfe_c1 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0)) {
    throw std::invalid_argument("lbfgs: need 0 < wolfe_c1 < wolfe_c2 < 1");
  }
  if (grad_tolerance < 0.0) throw std::invalid_argument("lbfgs: grad_tolerance must be >= 0");
  if (max_line_search_steps < 1) {
    throw std::invalid_argument("lbfgs: max_line_search_steps must be >= 1");
  }
}

namespace {

struct HistoryPair {
  Vec s;
  Vec y;
  double rho;  // 1 / (y^T s)
};

// Minimizer of the cubic interpolant through (a, fa, da) and (b, fb, db).
// Falls back to bisection when the interpolant is degenerate or the
// minimizer lands outside the safeguarded interior of [a, b].
double cubic_trial(double a, double fa, double da, double b, double fb, double db) {
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  const double span = hi - lo;
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  double trial = std::numeric_limits<double>::quiet_NaN();
  if (disc >= 0.0) {
    const double d2 = (b > a ? 1.0 : -1.0) * std::sqrt(disc);
    trial = b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
  }
  const double margin = 0.05 * span;
  if (!std::isfinite(trial) || trial < lo + margin || trial > hi - margin) {
    trial = 0.5 * (lo + hi);
  }
  return trial;
}

class LineSearch {
 public:
  LineSearch(const ObjectiveFn& objective, const Vec& x, const Vec& dir,
             double f0, double dphi0, const LbfgsConfig& cfg)
      : objective_(objective), x_(x), dir_(dir), phi0_(f0), dphi0_(dphi0),
        cfg_(cfg), grad_(x.size()) {}

  // Strong Wolfe search; returns true with the accepted state on success.
  bool run(double alpha_init, double& alpha_out, double& f_out, Vec& x_out, Vec& g_out) {
    double alpha_prev = 0.0;
    double phi_prev = phi0_;
    double dphi_prev = dphi0_;
    double alpha = alpha_init;

    while (evals_ < cfg_.max_line_search_steps) {
      double phi, dphi;
      eval(alpha, phi, dphi);
      const bool armijo_ok =
          std::isfinite(phi) && phi <= phi0_ + cfg_.wolfe_c1 * alpha * dphi0_;
      if (!armijo_ok || (evals_ > 1 && phi >= phi_prev)) {
        return zoom(alpha_prev, phi_prev, dphi_prev, alpha, phi, dphi,
                    alpha_out, f_out, x_out, g_out);
      }
      if (std::abs(dphi) <= -cfg_.wolfe_c2 * dphi0_) {
        accept(alpha, phi, alpha_out, f_out, x_out, g_out);
        return true;
      }
      if (dphi >= 0.0) {
        return zoom(alpha, phi, dphi, alpha_prev, phi_prev, dphi_prev,
                    alpha_out, f_out, x_out, g_out);
      }
      alpha_prev = alpha;
      phi_prev = phi;
      dphi_prev = dphi;
      alpha *= 2.0;
    }
    return false;
  }

 private:
  void eval(double alpha, double& phi, double& dphi) {
    ++evals_;
    trial_ = x_ + alpha * dir_;
    phi = objective_(trial_, grad_);
    if (grad_.size() != x_.size()) {
      throw std::logic_error("minimize: gradient dimension mismatch");
    }
    dphi = grad_.dot(dir_);
  }

  void accept(double alpha, double phi, double& alpha_out, double& f_out,
              Vec& x_out, Vec& g_out) {
    alpha_out = alpha;
    f_out = phi;
    x_out = trial_;
    g_out = grad_;
  }

  bool zoom(double lo, double phi_lo, double dphi_lo, double hi, double phi_hi,
            double dphi_hi, double& alpha_out, double& f_out, Vec& x_out, Vec& g_out) {
    while (evals_ < cfg_.max_line_search_steps) {
      if (std::abs(hi - lo) < 1e-16 * std::max(1.0, std::abs(lo))) return false;
      double alpha;
      if (std::isfinite(phi_hi)) {
        alpha = cubic_trial(lo, phi_lo, dphi_lo, hi, phi_hi, dphi_hi);
      } else {
        alpha = lo + 0.5 * (hi - lo);
      }
      double phi, dphi;
      eval(alpha, phi, dphi);
      const bool armijo_ok =
          std::isfinite(phi) && phi <= phi0_ + cfg_.wolfe_c1 * alpha * dphi0_;
      if (!armijo_ok || phi >= phi_lo) {
        hi = alpha;
        phi_hi = phi;
        dphi_hi = dphi;
        continue;
      }
      if (std::abs(dphi) <= -cfg_.wolfe_c2 * dphi0_) {
        accept(alpha, phi, alpha_out, f_out, x_out, g_out);
        return true;
      }
      if (dphi * (hi - lo) >= 0.0) {
        hi = lo;
        phi_hi = phi_lo;
        dphi_hi = dphi_lo;
      }
      lo = alpha;
      phi_lo = phi;
      dphi_lo = dphi;
    }
    return false;
  }

  const ObjectiveFn& objective_;
  const Vec& x_;
  const Vec& dir_;
  double phi0_;
  double dphi0_;
  const LbfgsConfig& cfg_;
  Vec trial_;
  Vec grad_;
  int evals_ = 0;
};

Vec two_loop_direction(const Vec& grad, const std::deque<HistoryPair>& history) {
  Vec q = -grad;
  if (history.empty()) return q;
  std::vector<double> alpha(history.size());
  for (std::size_t i = history.size(); i-- > 0;) {
    alpha[i] = history[i].rho * history[i].s.dot(q);
    q -= alpha[i] * history[i].y;
  }
  const HistoryPair& last = history.back();
  const double gamma = last.s.dot(last.y) / last.y.dot(last.y);
  q *= gamma;
  for (std::size_t i = 0; i < history.size(); ++i) {
    const double beta = history[i].rho * history[i].y.dot(q);
    q += (alpha[i] - beta) * history[i].s;
  }
  return q;
}

}  // namespace

LbfgsResult minimize(const ObjectiveFn& objective, const Vec& x0, const LbfgsConfig& cfg) {
  cfg.validate();
  LbfgsResult result;
  result.x = x0;

  Vec grad(x0.size());
  double f = objective(x0, grad);
  if (grad.size() != x0.size()) {
    throw std::logic_error("minimize: gradient dimension mismatch");
  }
  if (!std::isfinite(f) || !grad.allFinite()) {
    throw std::invalid_argument("minimize: objective non-finite at starting point");
  }
  result.f = f;

  if (grad.lpNorm<Eigen::Infinity>() <= cfg.grad_tolerance) {
    result.converged = true;
    return result;
  }

  std::deque<HistoryPair> history;
  Vec x = x0;

  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    Vec dir = two_loop_direction(grad, history);
    double dphi0 = grad.dot(dir);
    if (dphi0 >= 0.0) {
      // Numerically unusable direction: drop the history and restart
      // from steepest descent.
      history.clear();
      dir = -grad;
      dphi0 = grad.dot(dir);
      if (dphi0 >= 0.0) break;
    }

    // Unit trial step once curvature information exists; a gradient-scaled
    // first step avoids wild initial moves.
    const double alpha_init =
        history.empty() ? std::min(1.0, 1.0 / grad.lpNorm<1>()) : 1.0;

    LineSearch search(objective, x, dir, f, dphi0, cfg);
    double alpha, f_new;
    Vec x_new(x.size()), g_new(x.size());
    if (!search.run(alpha_init, alpha, f_new, x_new, g_new)) {
      result.line_search_failed = true;
      break;
    }

    const Vec s = x_new - x;
    const Vec y = g_new - grad;
    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      history.push_back({s, y, 1.0 / sy});
      if (static_cast<int>(history.size()) > cfg.memory) history.pop_front();
    }

    x = x_new;
    f = f_new;
    grad = g_new;
    result.x = x;
    result.f = f;
    result.iterations = iter;

    if (grad.lpNorm<Eigen::Infinity>() <= cfg.grad_tolerance) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace bdnn
