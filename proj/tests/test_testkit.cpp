#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "splitls/drs.hpp"
#include "splitls/testkit.hpp"

using namespace splitls;

TEST_CASE("bruteforce scalar prox baseline cases") {
  auto zero = [](double) { return 0.0; };
  CHECK(bruteforce_scalar_prox(zero, 1.7, 0.3) == doctest::Approx(1.7).epsilon(1e-9));

  // |.|: soft threshold.
  auto abs_fn = [](double w) { return std::abs(w); };
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(-5.0, 5.0);
  std::uniform_real_distribution<double> ug(0.1, 2.0);
  for (int t = 0; t < 100; ++t) {
    const double x = ux(rng), gamma = ug(rng);
    const double ref = std::copysign(std::max(std::abs(x) - gamma, 0.0), x);
    CHECK(bruteforce_scalar_prox(abs_fn, x, gamma) ==
          doctest::Approx(ref).epsilon(1e-8));
  }
}

TEST_CASE("bruteforce adjudicates the l-half prox") {
  auto sqrt_abs = [](double w) { return std::sqrt(std::abs(w)); };
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(-15.0, 15.0);
  std::uniform_real_distribution<double> ug(0.1, 1.5);
  for (int t = 0; t < 100; ++t) {
    const double x = ux(rng), gamma = ug(rng);
    CHECK(prox_l_half_scalar(x, gamma) ==
          doctest::Approx(bruteforce_scalar_prox(sqrt_abs, x, gamma)).epsilon(1e-8));
  }
}

TEST_CASE("self-dual check on a strongly convex 2-D pair") {
  SplitProblem p;
  p.dim = 2;
  Mat P(2, 2);
  P << 2.0, 0.4, 0.4, 1.0;
  p.phi1 = make_quadratic_oracle(P, (Vec(2) << -1.0, 0.5).finished());
  p.phi2 = make_box_oracle(-0.75, 0.75);
  p.regime = Regime::strongly_convex(0.8);  // lambda_min(P) > 0.8

  CHECK(run_selfdual_check(p, 2.0, 100, 7) <= 1e-10);

  // gamma mu <= 1 violates the precondition.
  CHECK_THROWS_AS(run_selfdual_check(p, 1.0, 10), ConfigError);
}

TEST_CASE("self-dual check is exact at a fixed point") {
  // phi1 = 0.5 x^2, phi2 = 0: fixed point s = 0.
  SplitProblem p;
  p.dim = 1;
  p.phi1 = make_quadratic_oracle(Mat::Identity(1, 1), Vec::Zero(1));
  p.phi2 = make_zero_oracle();
  p.regime = Regime::strongly_convex(1.0);
  const double gamma = 2.0;
  const Vec s = Vec::Zero(1);
  const DrsPair pair = drs_oracle(p, s, gamma);
  const double dre = dre_eval(p, s, pair.u, pair.v, gamma);
  CHECK(std::abs(dre) <= 1e-15);  // both sides vanish at the minimizer of 0.5x^2
}

TEST_CASE("equivalence check: zero iterations yields zero deviation") {
  const auto spec = make_consensus_spca_spec(12, 6, 2, 2, 1);
  const double L = build_consensus_spca(spec, 1e9).regime.lipschitz;
  EngineSpec nominal;
  const EquivalenceReport rep =
      run_equivalence_check(spec, 2.2 * L, 1.0, 0.5, 0, nominal);
  CHECK(rep.max_res_dev == 0.0);
  CHECK(rep.max_tau_dev == 0.0);
}

TEST_CASE("invariant sweep on a scalar quadratic includes the hand value") {
  SplitProblem p;
  p.dim = 1;
  p.phi1 = make_quadratic_oracle(Mat::Identity(1, 1), Vec::Zero(1));
  p.phi2 = make_zero_oracle();
  p.regime = Regime::smooth(1.0, true);
  const InvariantReport rep = sweep_invariants(p, 0.5, 200, 3);
  CHECK(rep.worst_sandwich <= 1e-9);
  CHECK(rep.worst_qg <= 1e-9);

  // At a fixed point the sandwich collapses: phi(u) = DRE = phi(v).
  const Vec s = Vec::Zero(1);
  const DrsPair pair = drs_oracle(p, s, 0.5);
  const double dre = dre_eval(p, s, pair.u, pair.v, 0.5);
  CHECK(dre == doctest::Approx(p.phi1.value(pair.u)).epsilon(1e-15));
  CHECK(dre == doctest::Approx(p.phi1.value(pair.v)).epsilon(1e-15));
}

TEST_CASE("invariant sweep on the l-half composite") {
  const auto spec = make_sparse_lsq_spec(15, 30, 4, 0.1, 19);
  SplitProblem p = build_sparse_lsq(spec);
  const double gamma = 0.9 / p.regime.lipschitz;
  const InvariantReport rep = sweep_invariants(p, gamma, 1000, 11);
  CHECK(rep.worst_sandwich <= 1e-9);
  CHECK(rep.worst_qg <= 1e-9);
}

TEST_CASE("Qlb holds around the minimizer of a strongly convex instance") {
  SplitProblem p;
  p.dim = 2;
  Mat P(2, 2);
  P << 1.5, 0.2, 0.2, 1.0;
  p.phi1 = make_quadratic_oracle(P, (Vec(2) << 0.3, -0.4).finished());
  p.phi2 = make_abs_oracle(0.5);
  p.regime = Regime::strongly_convex(0.9);

  DrsConfig cfg = DrsConfig::standard(p.regime);
  cfg.epsilon = 1e-12;
  cfg.max_iters = 100000;
  NominalEngine engine(cfg.lambda);
  const DrsSolveReport rep = drs_ls_solve(p, Vec::Zero(2), cfg, engine);
  REQUIRE(rep.status == SolveStatus::Converged);

  QlbReference ref;
  ref.x_star = rep.final_state.v;
  ref.inf_phi = rep.final_state.dre;  // sup DRE = inf phi in this regime
  const InvariantReport inv = sweep_invariants(p, cfg.gamma, 500, 13, ref);
  CHECK(inv.worst_qlb <= 1e-9);
}
