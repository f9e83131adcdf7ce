#include "splitls/quadcache.hpp"

#include <random>

namespace splitls {

LinesearchCache make_linesearch_cache(const ProxOracle& phi1, const Vec& sbar,
                                      const Vec& s_plus_d, double gamma,
                                      OracleCounters* counters) {
  LinesearchCache cache;
  cache.u_bar = phi1.prox(sbar, gamma);
  cache.u0 = phi1.prox(s_plus_d, gamma);
  cache.a = phi1.value(cache.u_bar);
  // (sbar - u_bar)/gamma is a subgradient of phi1 at u_bar, so the slope of
  // l at 0 is <sbar - u_bar, u0 - u_bar>/gamma.
  cache.b = (sbar - cache.u_bar).dot(cache.u0 - cache.u_bar) / gamma;
  cache.c = phi1.value(cache.u0) - cache.a - cache.b;
  if (counters) {
    counters->prox1 += 2;
    counters->value1 += 2;
  }
  check_finite(cache.a, "phi1(u_bar)");
  check_finite(cache.b, "linesearch slope");
  check_finite(cache.c, "linesearch curvature");
  return cache;
}

Vec blend_prox(const Vec& u_bar, const Vec& u0, double tau) {
  return (1.0 - tau) * u_bar + tau * u0;
}

double quad_line_value(const LinesearchCache& cache, double tau) {
  return cache.a + tau * (cache.b + tau * cache.c);
}

AffinityReport affinity_validate(const ProxOracle& oracle, double gamma,
                                 int trials, Eigen::Index dim,
                                 std::uint64_t seed, double tol) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  AffinityReport rep;
  for (int t = 0; t < trials; ++t) {
    Vec x1(dim), x2(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      x1[i] = gauss(rng);
      x2[i] = gauss(rng);
    }
    const double alpha = unif(rng);
    const Vec lhs = oracle.prox(alpha * x1 + (1.0 - alpha) * x2, gamma);
    const Vec rhs = alpha * oracle.prox(x1, gamma) + (1.0 - alpha) * oracle.prox(x2, gamma);
    const double scale = 1.0 + lhs.norm() + rhs.norm();
    rep.worst = std::max(rep.worst, (lhs - rhs).norm() / scale);
  }
  rep.pass = rep.worst <= tol;
  return rep;
}

}  // namespace splitls
