#pragma once

#include <deque>
#include <functional>

#include "qmetro/common.hpp"

namespace qmetro::detail {

struct LbfgsResult {
  RealVector x;
  double value = 0.0;
  int iterations = 0;
};

/// Limited-memory BFGS with Armijo backtracking. `value_and_grad` writes the
/// gradient into its second argument and returns the objective. If the
/// gradient is pre-projected onto an affine subspace and x0 is feasible, all
/// iterates stay feasible.
inline LbfgsResult lbfgs_minimize(
    const std::function<double(const RealVector&, RealVector&)>& value_and_grad,
    RealVector x0, int max_iters = 400, double grad_tol = 1e-11,
    int memory = 12) {
  const Eigen::Index n = x0.size();
  RealVector x = std::move(x0), g(n), g_new(n);
  double val = value_and_grad(x, g);

  std::deque<RealVector> s_hist, y_hist;
  std::deque<double> rho_hist;
  int it = 0;
  for (; it < max_iters; ++it) {
    if (g.norm() <= grad_tol) break;

    // two-loop recursion
    RealVector q = g;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (!y_hist.empty()) {
      const RealVector& y = y_hist.back();
      const RealVector& s = s_hist.back();
      q *= s.dot(y) / y.dot(y);
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    RealVector dir = -q;
    double slope = g.dot(dir);
    if (!(slope < 0)) {  // not a descent direction; restart from steepest
      dir = -g;
      slope = -g.squaredNorm();
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    double step = 1.0;
    double val_new = val;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      val_new = value_and_grad(x + step * dir, g_new);
      if (val_new <= val + 1e-4 * step * slope) {
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;

    RealVector s = step * dir;
    RealVector y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-14) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    x += s;
    if (std::abs(val - val_new) <= 1e-17 * (1.0 + std::abs(val)) &&
        g_new.norm() <= 1e2 * grad_tol) {
      val = val_new;
      g = g_new;
      ++it;
      break;
    }
    val = val_new;
    g.swap(g_new);
  }
  return {std::move(x), val, it};
}

}  // namespace qmetro::detail
