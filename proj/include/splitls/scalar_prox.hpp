#ifndef SPLITLS_SCALAR_PROX_HPP
#define SPLITLS_SCALAR_PROX_HPP

#include "splitls/types.hpp"

namespace splitls {

/// Closed-form prox of gamma*sqrt(|.|) at a scalar x: zero when
/// |x| <= (3/2) gamma^{2/3} (ties resolved to zero), otherwise
/// (2/3) x (1 + cos((2/3)(pi - arccos((gamma/4)(|x|/3)^{-3/2})))),
/// the largest root of the stationarity cubic. Sign carried by x.
double prox_l_half_scalar(double x, double gamma);

/// Coordinatewise prox of gamma * r |.|_{1/2}^{1/2}; pass gamma_scaled = gamma*r.
Vec prox_l_half(const Vec& x, double gamma_scaled);

/// Prox of the box indicator [lo, hi]: clamp (step-independent).
double prox_box_scalar(double x, double lo, double hi);

/// Prox of kappa * max(0, |.| - rho) with step gamma: identity inside the
/// corridor, clamp to sign(x)*rho in the transition band, shrink by
/// gamma*kappa outside.
double prox_soft_corridor_scalar(double x, double rho, double kappa, double gamma);

/// Projection onto the sparse unit sphere {|x| = 1, nnz(x) <= k}: keep the k
/// largest-magnitude entries (ties to the lowest index), normalize. An
/// all-zero kept block falls back to e_1.
Vec project_sparse_sphere(const Vec& x, Eigen::Index k);

}  // namespace splitls

#endif
