#ifndef SPLITLS_TESTKIT_HPP
#define SPLITLS_TESTKIT_HPP

#include <optional>

#include "splitls/problems.hpp"

namespace splitls {

/// Scalar prox by dense grid plus golden-section refinement: minimizes
/// h(w) + (w-x)^2/(2 gamma) on [x - R, x + R] with R = 10 gamma (1+|x|).
/// Throws if the bracket minimum sits on the boundary (bracket too narrow).
double bruteforce_scalar_prox(const std::function<double(double)>& h, double x,
                              double gamma, int grid_points = 10000,
                              double refine_tol = 1e-10);

/// Max deviation |DRE*_{1/gamma}(-s/gamma) + DRE_gamma(s)| over random s.
/// The dual envelope is evaluated through the Moreau conjugate-prox
/// identities with Fenchel-equality value recovery, entirely from the primal
/// oracles. Requires a strongly convex regime with gamma*mu > 1.
double run_selfdual_check(const SplitProblem& primal, double gamma, int samples,
                          std::uint64_t seed = 0, double radius = 2.0);

/// Runs the linesearch DRS and ADMM drivers side by side on the consensus
/// problem (gamma = 1/beta, s0 per the correspondence map) with identical
/// engine settings, and reports the worst per-iteration deviation of the
/// residual-norm and tau sequences.
struct EquivalenceReport {
  double max_res_dev = 0.0;
  double max_tau_dev = 0.0;
  long steps = 0;
};
EquivalenceReport run_equivalence_check(const ConsensusSpcaSpec& spec, double beta,
                                        double lambda, double c_fraction,
                                        long iters, const EngineSpec& engine);

/// Envelope-vs-cost invariant sweep over random s:
///   sandwich  phi(v) + (1-gamma L)/(2 gamma)|v-u|^2 <= DRE(s) <= phi(u),
///   QG        DRE(s) - phi(ubar) <= (1+gamma L)/(2 gamma)|u - ubar|^2,
/// and, when a reference minimizer is supplied (strongly convex instances),
///   Qlb       |x*-v|^2/(2 gamma) + (gamma mu-1)/(2 gamma)|x*-u|^2
///             <= inf phi - DRE(s).
/// Violations are relative to 1+|DRE(s)|.
struct QlbReference {
  Vec x_star;
  double inf_phi = 0.0;
};
struct InvariantReport {
  double worst_sandwich = 0.0;
  double worst_qg = 0.0;
  double worst_qlb = 0.0;
  int samples = 0;
};
InvariantReport sweep_invariants(const SplitProblem& problem, double gamma,
                                 int n_samples, std::uint64_t seed = 0,
                                 const std::optional<QlbReference>& qlb = {},
                                 double radius = 1.0,
                                 const Vec* center = nullptr);

/// Test-problem oracle factories (quadratics, separable penalties) used to
/// assemble small composite instances in the suites.
ProxOracle make_quadratic_oracle(const Mat& P, const Vec& q);  // 0.5 x'Px + q'x
ProxOracle make_abs_oracle(double weight);                     // weight |x|_1
ProxOracle make_huber_oracle(double delta, double weight);     // smoothed l1
ProxOracle make_box_oracle(double lo, double hi);              // indicator
ProxOracle make_zero_oracle();                                 // 0, prox = id

}  // namespace splitls

#endif
