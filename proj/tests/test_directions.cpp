#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/SVD>
#include <random>

#include "splitls/directions.hpp"

using namespace splitls;

namespace {

Vec vec2(double a, double b) { return (Vec(2) << a, b).finished(); }

Vec random_vec(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = gauss(rng);
  return v;
}

}  // namespace

TEST_CASE("nominal direction") {
  NominalEngine e(1.0);
  CHECK(e.apply(Vec::Zero(2)).norm() == 0.0);
  CHECK((e.apply(vec2(1.0, 2.0)) - vec2(-1.0, -2.0)).norm() == 0.0);
  NominalEngine half(0.5);
  CHECK(half.apply((Vec(1) << 2.0).finished())[0] == doctest::Approx(-1.0));
}

TEST_CASE("nesterov DRS schedule") {
  NesterovDrsEngine e(1.0);
  const Vec r0 = vec2(1.0, 0.0);
  e.observe_drs(vec2(0.0, 0.0));
  CHECK((e.apply(r0) + r0).norm() == 0.0);  // k=0: -lambda r

  e.observe_drs(vec2(0.5, 0.0));
  const Vec r1 = vec2(0.5, 0.0);
  CHECK((e.apply(r1) + r1).norm() == 0.0);  // k=1: coefficient (k-1)/(k+2) = 0

  // k=2 with sbar difference 0.4 and r = 0.2: d = 0.25*0.4 - 0.2 = -0.1.
  e.observe_drs(vec2(0.9, 0.0));
  const Vec d2 = e.apply(vec2(0.2, 0.0));
  CHECK(d2[0] == doctest::Approx(0.25 * 0.4 - 0.2).epsilon(1e-15));
}

TEST_CASE("nesterov ADMM schedule") {
  const double beta = 2.0;
  NesterovAdmmEngine e(1.0, beta);
  e.observe_admm(vec2(0.0, 0.0), vec2(0.0, 0.0));
  const Vec r0 = vec2(1.0, 1.0);
  CHECK((e.apply(r0) + r0).norm() == 0.0);

  e.observe_admm(vec2(0.3, 0.0), vec2(0.1, 0.0));
  const Vec r1 = vec2(0.5, 0.5);
  CHECK((e.apply(r1) + r1).norm() == 0.0);  // zero coefficient at k=1

  e.observe_admm(vec2(0.7, 0.0), vec2(0.5, 0.0));
  const Vec d2 = e.apply(vec2(0.2, 0.0));
  // d = -r - (1/4)(dBz + dybar/beta), dBz = 0.4, dybar = 0.4.
  CHECK(d2[0] == doctest::Approx(-0.2 - 0.25 * (0.4 + 0.4 / beta)).epsilon(1e-14));
  CHECK(d2[1] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("lbfgs: identity on empty memory, secant on one pair") {
  LbfgsEngine e(5);
  const Vec r = vec2(1.0, 0.0);
  CHECK((e.apply(r) + r).norm() == 0.0);

  e.feed({vec2(1.0, 0.0), vec2(1.0, 0.0)});
  CHECK((e.apply(vec2(1.0, 0.0)) - vec2(-1.0, 0.0)).norm() <= 1e-15);
}

TEST_CASE("lbfgs skips non-curvature pairs") {
  LbfgsEngine e(5);
  e.feed({vec2(1.0, 0.0), vec2(-1.0, 0.0)});  // <p,q> < 0
  CHECK(e.stored_pairs() == 0);
  const Vec r = vec2(0.3, -0.4);
  CHECK((e.apply(r) + r).norm() == 0.0);  // still H0 = I
}

TEST_CASE("lbfgs secant property for the newest pair") {
  std::mt19937_64 rng(21);
  LbfgsEngine e(5);
  for (int t = 0; t < 8; ++t) {
    Vec p = random_vec(rng, 6), q = random_vec(rng, 6);
    if (p.dot(q) < 0) q = -q;  // ensure the pair is kept
    e.feed({p, q});
    const Vec Hq = -e.apply(q);  // apply returns -H r
    CHECK((Hq - p).norm() <= 1e-10 * (1.0 + p.norm()));
  }
}

TEST_CASE("broyden hand updates") {
  BroydenEngine e(0.2);
  // p = q: secant already satisfied, H stays the identity.
  e.apply(vec2(1.0, 1.0));
  e.feed({vec2(1.0, 2.0), vec2(1.0, 2.0)});
  CHECK((e.matrix() - Mat::Identity(2, 2)).norm() <= 1e-15);

  // H = I, p = (1,0), q = (2,0): delta = 2 -> theta = 1, H' = diag(1/2, 1).
  BroydenEngine e2(0.2);
  e2.apply(vec2(1.0, 0.0));
  e2.feed({vec2(1.0, 0.0), vec2(2.0, 0.0)});
  Mat expected(2, 2);
  expected << 0.5, 0.0, 0.0, 1.0;
  CHECK((e2.matrix() - expected).norm() <= 1e-14);
  CHECK((e2.matrix() * vec2(2.0, 0.0) - vec2(1.0, 0.0)).norm() <= 1e-14);

  // H = I, p = (1,0), q = (0,1): delta = 0 -> theta = (1-0.2)/1 = 0.8;
  // denominator (1/theta - 1)|p|^2 + <p,Hq> = 0.25.
  BroydenEngine e3(0.2);
  e3.apply(vec2(1.0, 0.0));
  e3.feed({vec2(1.0, 0.0), vec2(0.0, 1.0)});
  Mat damped(2, 2);
  damped << 1.0 + 4.0, 0.0, -4.0, 1.0;  // I + (p - Hq) p'H / 0.25
  CHECK((e3.matrix() - damped).norm() <= 1e-13);
}

TEST_CASE("broyden secant holds whenever the update is undamped") {
  std::mt19937_64 rng(33);
  BroydenEngine e(0.2);
  e.apply(random_vec(rng, 5));
  for (int t = 0; t < 20; ++t) {
    const Vec p = random_vec(rng, 5);
    const Vec q = random_vec(rng, 5);
    const Vec Hq = e.matrix().rows() ? Vec(e.matrix() * q) : q;
    const double delta = Hq.dot(p) / p.squaredNorm();
    e.feed({p, q});
    if (std::abs(delta) >= 0.2)
      CHECK((e.matrix() * q - p).norm() <= 1e-10 * (1.0 + p.norm()));
  }
}

TEST_CASE("broyden stays nonsingular under many random feeds") {
  std::mt19937_64 rng(44);
  BroydenEngine e(0.2);
  e.apply(random_vec(rng, 5));
  for (int t = 0; t < 1000; ++t) e.feed({random_vec(rng, 5), random_vec(rng, 5)});
  const Eigen::JacobiSVD<Mat> svd(e.matrix());
  CHECK(svd.singularValues()(4) > 0.0);
}

TEST_CASE("broyden skips a zero-p pair") {
  BroydenEngine e(0.2);
  e.apply(vec2(1.0, 0.0));
  e.feed({Vec::Zero(2), vec2(1.0, 1.0)});
  CHECK((e.matrix() - Mat::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("anderson: identity at k=0 and on a p=q pair") {
  AndersonEngine e(5);
  const Vec r = vec2(0.7, -0.1);
  CHECK((e.apply(r) + r).norm() == 0.0);
  e.feed({vec2(1.0, 2.0), vec2(1.0, 2.0)});
  CHECK((e.apply(r) + r).norm() <= 1e-14);  // P - Q = 0
}

TEST_CASE("anderson matches the dense pseudo-inverse oracle") {
  std::mt19937_64 rng(55);
  AndersonEngine e(5);
  Mat P(2, 2), Q(2, 2);
  for (int j = 0; j < 2; ++j) {
    const Vec p = random_vec(rng, 2), q = random_vec(rng, 2);
    P.col(j) = p;
    Q.col(j) = q;
    e.feed({p, q});
  }
  const Vec r = random_vec(rng, 2);
  const Vec t = (Q.transpose() * Q).ldlt().solve(Q.transpose() * r);
  const Vec expected = -(P * t) - (r - Q * t);
  CHECK((e.apply(r) - expected).norm() <= 1e-10);

  // Multisecant property: H q_j = p_j for a full-rank history.
  for (int j = 0; j < 2; ++j)
    CHECK((-e.apply(Q.col(j)) - P.col(j)).norm() <= 1e-10);
}

TEST_CASE("anderson handles rank-deficient history in the least-squares sense") {
  AndersonEngine e(5);
  e.feed({vec2(1.0, 0.0), vec2(1.0, 1.0)});
  e.feed({vec2(2.0, 0.0), vec2(2.0, 2.0)});  // duplicate direction
  const Vec d = e.apply(vec2(1.0, 1.0));
  CHECK(d.allFinite());
}

TEST_CASE("fresh engines map the zero residual to the zero direction") {
  std::mt19937_64 rng(66);
  const Vec zero = Vec::Zero(3);
  NominalEngine a(1.0);
  LbfgsEngine b(5);
  BroydenEngine c(0.2);
  AndersonEngine d(5);
  CHECK(a.apply(zero).norm() == 0.0);
  CHECK(b.apply(zero).norm() == 0.0);
  CHECK(c.apply(zero).norm() == 0.0);
  CHECK(d.apply(zero).norm() == 0.0);
  // Secant engines stay linear after history accumulates.
  for (int t = 0; t < 4; ++t) {
    Vec p = random_vec(rng, 3), q = random_vec(rng, 3);
    if (p.dot(q) < 0) q = -q;
    b.feed({p, q});
    c.feed({p, q});
    d.feed({p, q});
  }
  CHECK(b.apply(zero).norm() == 0.0);
  CHECK(c.apply(zero).norm() == 0.0);
  CHECK(d.apply(zero).norm() <= 1e-15);
}

TEST_CASE("engine factories") {
  EngineSpec spec;
  spec.kind = EngineSpec::Kind::Lbfgs;
  auto drs_engine = make_drs_engine(spec, 1.0);
  CHECK(std::string(drs_engine->name()) == "lbfgs");
  spec.kind = EngineSpec::Kind::Nesterov;
  auto admm_engine = make_admm_engine(spec, 1.0, 2.0);
  CHECK(std::string(admm_engine->name()) == "nesterov");
}
