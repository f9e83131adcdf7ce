#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "splitls/problems.hpp"
#include "splitls/quadcache.hpp"
#include "splitls/testkit.hpp"

using namespace splitls;

namespace {
Vec scalar_vec(double x) { return (Vec(1) << x).finished(); }
}

TEST_CASE("blend endpoints and the midpoint of an affine prox") {
  const Vec u_bar = scalar_vec(1.0), u0 = scalar_vec(2.0);
  CHECK(blend_prox(u_bar, u0, 0.0)[0] == 1.0);
  CHECK(blend_prox(u_bar, u0, 1.0)[0] == 2.0);

  // phi1 = 0.5 x^2, gamma = 1: prox(s) = s/2; blend at tau = 1/2 of the
  // proxes at 2 and 4 equals the prox at 3.
  ProxOracle quad = make_quadratic_oracle(Mat::Identity(1, 1), Vec::Zero(1));
  const Vec a = quad.prox(scalar_vec(2.0), 1.0);
  const Vec b = quad.prox(scalar_vec(4.0), 1.0);
  CHECK(blend_prox(a, b, 0.5)[0] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(blend_prox(a, b, 0.5)[0] ==
        doctest::Approx(quad.prox(scalar_vec(3.0), 1.0)[0]).epsilon(1e-15));
}

TEST_CASE("quadratic line coefficients from two value calls") {
  ProxOracle quad = make_quadratic_oracle(Mat::Identity(1, 1), Vec::Zero(1));
  OracleCounters counters;
  const LinesearchCache cache =
      make_linesearch_cache(quad, scalar_vec(2.0), scalar_vec(4.0), 1.0, &counters);
  CHECK(counters.prox1 == 2);
  CHECK(counters.value1 == 2);
  CHECK(cache.a == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(cache.b == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cache.c == doctest::Approx(0.5).epsilon(1e-15));
  // l(tau) = 0.5 (1+tau)^2
  CHECK(quad_line_value(cache, 0.0) == doctest::Approx(quad.value(cache.u_bar)));
  CHECK(quad_line_value(cache, 1.0) ==
        doctest::Approx(quad.value(cache.u0)).epsilon(1e-12));
  CHECK(quad_line_value(cache, 0.3) == doctest::Approx(0.5 * 1.3 * 1.3).epsilon(1e-13));
}

TEST_CASE("blended value matches a from-scratch evaluation along the segment") {
  const auto spec = make_sparse_lsq_spec(10, 16, 3, 0.1, 2);
  SplitProblem p = build_sparse_lsq(spec);
  const double gamma = 0.8 / p.regime.lipschitz;
  const Vec sbar = Vec::LinSpaced(p.dim, -1.0, 1.0);
  const Vec spd = Vec::LinSpaced(p.dim, 0.5, -2.0);
  const LinesearchCache cache = make_linesearch_cache(p.phi1, sbar, spd, gamma);
  for (double tau : {0.0, 0.125, 0.5, 0.75, 1.0}) {
    const Vec s_t = (1.0 - tau) * sbar + tau * spd;
    const Vec direct = p.phi1.prox(s_t, gamma);
    const Vec blended = blend_prox(cache.u_bar, cache.u0, tau);
    CHECK((direct - blended).norm() <= 1e-10 * (1.0 + direct.norm()));
    CHECK(quad_line_value(cache, tau) ==
          doctest::Approx(p.phi1.value(direct)).epsilon(1e-10));
  }
}

TEST_CASE("affinity_validate accepts quadratics and affine projections") {
  ProxOracle quad = make_quadratic_oracle(2.0 * Mat::Identity(3, 3), Vec::Ones(3));
  CHECK(affinity_validate(quad, 0.7, 50, 3, 1).pass);

  // Projection onto the affine subspace {x : sum(x) = 1} is affine.
  ProxOracle proj;
  proj.is_generalized_quadratic = true;
  proj.value = [](const Vec& x) {
    return std::abs(x.sum() - 1.0) <= 1e-9 ? 0.0 : kInf;
  };
  proj.prox = [](const Vec& x, double) {
    return Vec(x.array() - (x.sum() - 1.0) / static_cast<double>(x.size()));
  };
  CHECK(affinity_validate(proj, 1.3, 50, 4, 2).pass);
}

TEST_CASE("affinity_validate rejects the l-half prox") {
  ProxOracle lhalf;
  lhalf.value = [](const Vec& x) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) s += std::sqrt(std::abs(x[i]));
    return s;
  };
  lhalf.prox = [](const Vec& x, double gamma) { return prox_l_half(x, gamma); };
  const AffinityReport rep = affinity_validate(lhalf, 1.0, 100, 3, 3);
  CHECK_FALSE(rep.pass);
  CHECK(rep.worst > 1e-8);
}
