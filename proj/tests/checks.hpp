/**
 * @file checks.hpp
 * @brief Numerical checks shared by the unit and acceptance suites.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "tfr/autoencoder.hpp"

namespace checks {

struct GradCheckResult {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t checked = 0;
  std::size_t failures = 0;
};

/// Compares every analytic gradient with a central difference of the batch loss.
/// Components whose analytic and numeric magnitudes are both below `floor`
/// count as agreeing (relative error is undefined at zero).
inline GradCheckResult gradient_check(tfr::ModelWeights model, const std::vector<tfr::ImageTensor>& batch,
                                      const tfr::LossWeights& lw, double h, double tol,
                                      double floor = 1e-10) {
  const auto analytic = tfr::backward(model, batch, batch, lw).gradients;
  auto loss = [&] {
    double total = 0.0;
    for (const auto& x : batch) total += tfr::recon_loss(x, tfr::forward(model, x), lw.l1, lw.l2);
    return total / static_cast<double>(batch.size());
  };
  GradCheckResult r;
  auto compare = [&](double a, double n) {
    ++r.checked;
    const double scale = std::max(std::abs(a), std::abs(n));
    const double abs_err = std::abs(a - n);
    r.max_abs_error = std::max(r.max_abs_error, abs_err);
    if (scale < floor) return;
    const double rel = abs_err / scale;
    r.max_rel_error = std::max(r.max_rel_error, rel);
    if (rel > tol) ++r.failures;
  };
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    auto& layer = model.layers[l];
    for (std::size_t i = 0; i < layer.weight.size(); ++i) {
      compare(analytic.weight[l][i], oracle::central_difference(loss, &layer.weight[i], h));
    }
    for (std::size_t i = 0; i < layer.bias.size(); ++i) {
      compare(analytic.bias[l][i], oracle::central_difference(loss, &layer.bias[i], h));
    }
  }
  return r;
}

inline double mean_abs_error(const tfr::ImageTensor& a, const tfr::ImageTensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a.data()[i] - b.data()[i]);
  return s / static_cast<double>(a.size());
}

}  // namespace checks
