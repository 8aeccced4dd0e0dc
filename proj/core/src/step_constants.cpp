#include "specnet/step_constants.hpp"

#include <algorithm>
#include <cmath>

#include "specnet/errors.hpp"

namespace specnet {

StepConstants step_constants(const Pencil& p, Index k, Index max_batch_size, double r_opt) {
  if (k < 1 || max_batch_size < 1) throw InputError("step_constants needs K, |S| >= 1");
  const Index n = p.n();
  const Vector& d = p.d;

  // rho_i = sum_{j != i} Wbar_ij^2 / D_j and max |Wbar_ij|.
  Vector rho = Vector::Zero(n);
  Vector wii(n);
  double max_abs_w = 0.0;
  if (!p.deflated()) {
    for (Index i = 0; i < n; ++i) {
      const auto cols = p.w.row_cols(i);
      const auto vals = p.w.row_values(i);
      for (std::size_t m = 0; m < cols.size(); ++m) {
        if (cols[m] != i) rho[i] += vals[m] * vals[m] / d[cols[m]];
        max_abs_w = std::max(max_abs_w, std::abs(vals[m]));
      }
      wii[i] = p.w.diagonal(i);
    }
  } else {
    // rho_i expands to sum_j W_ij^2/d_j - eta_i^2 - (Wbar_ii)^2/d_i because
    // eta_j/d_j is constant and sum_j eta_j^2/d_j = 1.
    const Vector& eta = p.eta;
    std::vector<char> stored(static_cast<std::size_t>(n), 0);
    for (Index i = 0; i < n; ++i) {
      const auto cols = p.w.row_cols(i);
      const auto vals = p.w.row_values(i);
      double sum = 0.0;
      for (std::size_t m = 0; m < cols.size(); ++m) {
        sum += vals[m] * vals[m] / d[cols[m]];
        max_abs_w = std::max(max_abs_w, std::abs(vals[m] - eta[i] * eta[cols[m]]));
        stored[cols[m]] = 1;
      }
      wii[i] = p.w.diagonal(i) - eta[i] * eta[i];
      rho[i] = std::max(0.0, sum - eta[i] * eta[i] - wii[i] * wii[i] / d[i]);
      // Entries not stored in W equal -eta_i eta_j.
      double eta_off = 0.0;
      for (Index j = 0; j < n; ++j) {
        if (!stored[j]) eta_off = std::max(eta_off, eta[j]);
      }
      max_abs_w = std::max(max_abs_w, eta[i] * eta_off);
      for (Index j : cols) stored[j] = 0;
    }
  }

  StepConstants sc;
  sc.n = static_cast<double>(n);
  for (Index i = 0; i < n; ++i) {
    const double w = wii[i];
    sc.m1 = std::max(sc.m1, (w + std::sqrt(w * w + d[i] * rho[i] + d[i] / 2.0)) / (2.0 * d[i]));
    sc.m2 = std::max(sc.m2, w * w / (4.0 * d[i]) + rho[i] / 4.0);
  }
  sc.radius = std::max(r_opt, 2.0 * std::sqrt(sc.m1));
  const double r = sc.radius;
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  const double max_w2 = wii.cwiseAbs2().maxCoeff();
  const double max_d = d.maxCoeff();
  const double max_drho = (d.array() * rho.array()).maxCoeff();
  sc.m_of_r = 3.0 * (max_w2 * r * r + max_d * max_d * nn * nn * kk * kk * std::pow(r, 6) +
                     max_drho * nn * r * r);
  sc.lipschitz = 4.0 * max_abs_w + 4.0 * (nn + kk) * r * r * max_d;

  const double m = sc.m_of_r;
  const double a1 = (-2.0 * sc.m2 + std::sqrt(4.0 * sc.m2 * sc.m2 + 3.0 * m * r * r)) / (8.0 * m);
  const double a2 = 1.0 / (16.0 * m);
  const double a3 = 1.0 / (kk * sc.lipschitz * static_cast<double>(max_batch_size));
  sc.alpha_max = std::min({a1, a2, a3});
  return sc;
}

}  // namespace specnet
