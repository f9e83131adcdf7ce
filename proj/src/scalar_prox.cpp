#include "splitls/scalar_prox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace splitls {

double prox_l_half_scalar(double x, double gamma) {
  const double ax = std::abs(x);
  const double threshold = 1.5 * std::pow(gamma, 2.0 / 3.0);
  if (ax <= threshold) return 0.0;
  const double a = 0.25 * gamma * std::pow(ax / 3.0, -1.5);
  // a <= 1/sqrt(2) beyond the threshold; clamp guards rounding at the edge.
  const double phi = std::acos(std::min(a, 1.0));
  return (2.0 / 3.0) * x * (1.0 + std::cos((2.0 / 3.0) * (M_PI - phi)));
}

Vec prox_l_half(const Vec& x, double gamma_scaled) {
  Vec w(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    w[i] = prox_l_half_scalar(x[i], gamma_scaled);
  return w;
}

double prox_box_scalar(double x, double lo, double hi) {
  return std::min(std::max(x, lo), hi);
}

double prox_soft_corridor_scalar(double x, double rho, double kappa, double gamma) {
  const double ax = std::abs(x);
  if (ax <= rho) return x;
  const double s = x >= 0.0 ? 1.0 : -1.0;
  if (ax >= rho + gamma * kappa) return x - gamma * kappa * s;
  return s * rho;
}

Vec project_sparse_sphere(const Vec& x, Eigen::Index k) {
  const Eigen::Index n = x.size();
  k = std::min(k, n);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                    [&x](Eigen::Index a, Eigen::Index b) {
                      const double fa = std::abs(x[a]), fb = std::abs(x[b]);
                      return fa > fb || (fa == fb && a < b);
                    });
  Vec w = Vec::Zero(n);
  double norm2 = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    w[idx[static_cast<std::size_t>(j)]] = x[idx[static_cast<std::size_t>(j)]];
    norm2 += x[idx[static_cast<std::size_t>(j)]] * x[idx[static_cast<std::size_t>(j)]];
  }
  if (norm2 == 0.0) {
    w.setZero();
    w[0] = 1.0;  // documented fallback for an all-zero kept block
    return w;
  }
  return w / std::sqrt(norm2);
}

}  // namespace splitls
