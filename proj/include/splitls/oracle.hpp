#ifndef SPLITLS_ORACLE_HPP
#define SPLITLS_ORACLE_HPP

#include "splitls/types.hpp"

namespace splitls {

/// A function's value + proximal-map evaluator. The algorithms access the two
/// problem terms only through this interface. `prox` returns one selected
/// element of the possibly set-valued map; built-in oracles document their
/// tie-break. `value` may return +inf (outside the domain); NaN is a hard
/// error everywhere.
struct ProxOracle {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&, double)> prox;  // (point, step gamma>0) -> point
  bool is_generalized_quadratic = false;
};

/// Composite problem phi1 + phi2 with regime metadata. Read-only after
/// construction; factorization caches inside the oracles are built by the
/// problem builders before sharing.
struct SplitProblem {
  ProxOracle phi1;
  ProxOracle phi2;
  Regime regime;
  Eigen::Index dim = 0;
};

/// Full per-iteration DRS state: r = u - v exactly, dre = DRE at (s,u,v) for
/// the gamma in force.
struct DrsTriple {
  Vec s, u, v;
  double dre = 0.0;
};

struct DrsPair {
  Vec u, v;
};

/// One DRS oracle call: u = prox_{gamma phi1}(s), v = prox_{gamma phi2}(2u-s).
DrsPair drs_oracle(const SplitProblem& problem, const Vec& s, double gamma,
                   OracleCounters* counters = nullptr);

/// Douglas-Rachford envelope from an already-computed oracle pair:
///   phi1(u) + phi2(v) + <s-u, v-u>/gamma + |v-u|^2/(2 gamma).
double dre_eval(const SplitProblem& problem, const Vec& s, const Vec& u,
                const Vec& v, double gamma, OracleCounters* counters = nullptr);

/// Moreau-envelope form of the DRE (test-only cross-check):
///   phi1^gamma(s) - |s-u|^2/gamma + phi2^gamma(2u-s), u = prox_{gamma phi1}(s).
double dre_eval_moreau(const SplitProblem& problem, const Vec& s, double gamma);

/// beta-augmented Lagrangian f(x)+g(z)+<y, Ax+Bz-b>+(beta/2)|Ax+Bz-b|^2.
double auglag_eval(double f_val, double g_val, const LinOp& A_apply,
                   const LinOp& B_apply, const Vec& b, const Vec& x,
                   const Vec& z, const Vec& y, double beta);

/// Same, with the residual r = Ax+Bz-b already formed.
double auglag_from_residual(double f_val, double g_val, const Vec& y,
                            const Vec& r, double beta);

/// Sufficient-decrease constant
///   C(alpha, lambda) = lambda/(1+alpha)^2 * ((2-lambda)/2 - alpha*m),
/// m = max(alpha - lambda/2, 0) when the smooth term is convex, 1 otherwise.
/// May return <= 0; callers reject non-positive values.
double decrease_constant(double alpha, double lambda, bool phi1_convex);

/// Dual constant C* for the strongly convex regime: C evaluated at
/// alpha = 1/(gamma*mu) on the convex branch. Requires gamma*mu > 1.
double dual_decrease_constant(double gamma, double mu, double lambda);

/// Largest stepsize with C > 0: 1/L (convex) or (2-lambda)/(2L) (nonconvex).
double max_stepsize_gamma(double L, double lambda, bool phi1_convex);

/// Smallest penalty with D > 0: L (convex) or 2L/(2-lambda); reciprocal of
/// max_stepsize_gamma under gamma = 1/beta.
double min_penalty_beta(double L_Af, double lambda, bool f_convex);

/// Dual image of a DRS triple: gamma* = 1/gamma, s* = -s/gamma,
/// u* = (u-s)/gamma, v* = (2u-s-v)/gamma. DRE*_{gamma*}(s*) = -DRE_gamma(s)
/// on convex pairs.
struct SelfDualImage {
  Vec s, u, v;
  double gamma;
};
SelfDualImage self_dual_transform(const Vec& s, const Vec& u, const Vec& v,
                                  double gamma);

/// Inverse of self_dual_transform (an involution up to the same map).
SelfDualImage self_dual_inverse(const SelfDualImage& img);

}  // namespace splitls

#endif
