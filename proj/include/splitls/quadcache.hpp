#ifndef SPLITLS_QUADCACHE_HPP
#define SPLITLS_QUADCACHE_HPP

#include "splitls/oracle.hpp"

namespace splitls {

/// Linesearch cache for a generalized-quadratic phi1: the prox is affine, so
/// every trial point's u-update is a blend of two prox evaluations, and
/// phi1 along the blend is the 1-D quadratic l(tau) = a + b tau + c tau^2.
/// Building the cache costs exactly two phi1-prox and two phi1-value calls.
struct LinesearchCache {
  Vec u_bar;  // prox_{gamma phi1}(sbar)
  Vec u0;     // prox_{gamma phi1}(s + d)
  double a = 0.0, b = 0.0, c = 0.0;
};

LinesearchCache make_linesearch_cache(const ProxOracle& phi1, const Vec& sbar,
                                      const Vec& s_plus_d, double gamma,
                                      OracleCounters* counters = nullptr);

/// (1-tau) u_bar + tau u0; equals prox_{gamma phi1}((1-tau) sbar + tau (s+d))
/// when the prox is affine. Misuse on a non-quadratic phi1 is a contract
/// violation caught by affinity_validate in tests.
Vec blend_prox(const Vec& u_bar, const Vec& u0, double tau);

/// phi1 value at the blended point, from the cached quadratic coefficients.
double quad_line_value(const LinesearchCache& cache, double tau);

/// Checks prox linearity on random convex combinations; guards the
/// is_generalized_quadratic flag declared by problem builders.
struct AffinityReport {
  bool pass = false;
  double worst = 0.0;  // worst relative violation seen
};
AffinityReport affinity_validate(const ProxOracle& oracle, double gamma,
                                 int trials, Eigen::Index dim,
                                 std::uint64_t seed = 0,
                                 double tol = 1e-8);

}  // namespace splitls

#endif
