#include "splitls/oracle.hpp"

#include <algorithm>

namespace splitls {

DrsPair drs_oracle(const SplitProblem& problem, const Vec& s, double gamma,
                   OracleCounters* counters) {
  if (gamma <= 0) throw ConfigError("drs_oracle: gamma must be positive");
  DrsPair out;
  out.u = problem.phi1.prox(s, gamma);
  if (!out.u.allFinite()) throw OracleError("phi1", "prox returned non-finite point");
  out.v = problem.phi2.prox(2.0 * out.u - s, gamma);
  if (!out.v.allFinite()) throw OracleError("phi2", "prox returned non-finite point");
  if (counters) {
    ++counters->prox1;
    ++counters->prox2;
  }
  return out;
}

double dre_eval(const SplitProblem& problem, const Vec& s, const Vec& u,
                const Vec& v, double gamma, OracleCounters* counters) {
  const double f1 = problem.phi1.value(u);
  const double f2 = problem.phi2.value(v);
  if (counters) {
    ++counters->value1;
    ++counters->value2;
  }
  check_finite(f1, "phi1(u)");
  check_finite(f2, "phi2(v)");
  if (f1 == kInf) throw OracleError("phi1", "value +inf at its own prox output");
  if (f2 == kInf) throw OracleError("phi2", "value +inf at its own prox output");
  const Vec d = v - u;
  const double dre = f1 + f2 + (s - u).dot(d) / gamma + d.squaredNorm() / (2.0 * gamma);
  check_finite(dre, "DRE");
  return dre;
}

double dre_eval_moreau(const SplitProblem& problem, const Vec& s, double gamma) {
  const Vec u = problem.phi1.prox(s, gamma);
  const Vec w = 2.0 * u - s;
  const Vec v = problem.phi2.prox(w, gamma);
  const double env1 = problem.phi1.value(u) + (u - s).squaredNorm() / (2.0 * gamma);
  const double env2 = problem.phi2.value(v) + (v - w).squaredNorm() / (2.0 * gamma);
  const double dre = env1 - (s - u).squaredNorm() / gamma + env2;
  check_finite(dre, "DRE (Moreau form)");
  return dre;
}

double auglag_from_residual(double f_val, double g_val, const Vec& y,
                            const Vec& r, double beta) {
  check_finite(f_val, "f(x)");
  check_finite(g_val, "g(z)");
  if (g_val == kInf) throw OracleError("z-step", "g(z) infeasible");
  const double L = f_val + g_val + y.dot(r) + 0.5 * beta * r.squaredNorm();
  check_finite(L, "augmented Lagrangian");
  return L;
}

double auglag_eval(double f_val, double g_val, const LinOp& A_apply,
                   const LinOp& B_apply, const Vec& b, const Vec& x,
                   const Vec& z, const Vec& y, double beta) {
  if (beta <= 0) throw ConfigError("auglag_eval: beta must be positive");
  const Vec r = A_apply(x) + B_apply(z) - b;
  return auglag_from_residual(f_val, g_val, y, r, beta);
}

double decrease_constant(double alpha, double lambda, bool phi1_convex) {
  const double m = phi1_convex ? std::max(alpha - 0.5 * lambda, 0.0) : 1.0;
  const double t = 1.0 + alpha;
  return lambda / (t * t) * (0.5 * (2.0 - lambda) - alpha * m);
}

double dual_decrease_constant(double gamma, double mu, double lambda) {
  if (gamma * mu <= 1.0)
    throw ConfigError("dual_decrease_constant: requires gamma*mu > 1");
  // The dual smooth term is convex with Lipschitz modulus 1/mu.
  return decrease_constant(1.0 / (gamma * mu), lambda, /*phi1_convex=*/true);
}

double max_stepsize_gamma(double L, double lambda, bool phi1_convex) {
  if (L <= 0) throw ConfigError("max_stepsize_gamma: L must be positive");
  return phi1_convex ? 1.0 / L : 0.5 * (2.0 - lambda) / L;
}

double min_penalty_beta(double L_Af, double lambda, bool f_convex) {
  if (L_Af <= 0) throw ConfigError("min_penalty_beta: L must be positive");
  return f_convex ? L_Af : 2.0 * L_Af / (2.0 - lambda);
}

SelfDualImage self_dual_transform(const Vec& s, const Vec& u, const Vec& v,
                                  double gamma) {
  SelfDualImage img;
  img.gamma = 1.0 / gamma;
  img.s = -s / gamma;
  img.u = (u - s) / gamma;
  img.v = (2.0 * u - s - v) / gamma;
  return img;
}

SelfDualImage self_dual_inverse(const SelfDualImage& img) {
  // The map is an involution: applying the same formulas to the starred
  // variables recovers the originals.
  return self_dual_transform(img.s, img.u, img.v, img.gamma);
}

}  // namespace splitls
