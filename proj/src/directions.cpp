#include "splitls/directions.hpp"

#include <cmath>
#include <vector>

namespace splitls {

Vec NesterovDrsEngine::apply(const Vec& r) {
  Vec d;
  if (k_ == 0) {
    d = -(lambda_ * r);
  } else {
    const double coef = static_cast<double>(k_ - 1) / static_cast<double>(k_ + 2);
    d = coef * (sbar_cur_ - sbar_prev_) - lambda_ * r;
  }
  sbar_prev_ = sbar_cur_;
  ++k_;
  return d;
}

void NesterovDrsEngine::reset() {
  k_ = 0;
  sbar_cur_.resize(0);
  sbar_prev_.resize(0);
}

Vec NesterovAdmmEngine::apply(const Vec& r) {
  Vec d;
  if (k_ == 0) {
    d = -(lambda_ * r);
  } else {
    const double coef = static_cast<double>(k_ - 1) / static_cast<double>(k_ + 2);
    d = -lambda_ * r - coef * (Bz_cur_ - Bz_prev_ + (ybar_cur_ - ybar_prev_) / beta_);
  }
  Bz_prev_ = Bz_cur_;
  ybar_prev_ = ybar_cur_;
  ++k_;
  return d;
}

void NesterovAdmmEngine::reset() {
  k_ = 0;
  Bz_cur_.resize(0);
  Bz_prev_.resize(0);
  ybar_cur_.resize(0);
  ybar_prev_.resize(0);
}

Vec LbfgsEngine::apply(const Vec& r) {
  if (pairs_.empty()) return -r;
  const std::size_t m = pairs_.size();
  std::vector<double> alpha(m);
  Vec z = r;
  for (std::size_t i = m; i-- > 0;) {
    const Entry& e = pairs_[i];
    alpha[i] = e.rho * e.p.dot(z);
    z -= alpha[i] * e.q;
  }
  const Entry& newest = pairs_.back();
  const double scale = newest.p.dot(newest.q) / newest.q.squaredNorm();
  z *= scale;
  for (std::size_t i = 0; i < m; ++i) {
    const Entry& e = pairs_[i];
    const double beta = e.rho * e.q.dot(z);
    z += (alpha[i] - beta) * e.p;
  }
  return -z;
}

void LbfgsEngine::feed(const SecantPair& pair) {
  const double pq = pair.p.dot(pair.q);
  if (pq <= 1e-12 * pair.p.norm() * pair.q.norm()) return;  // curvature skip
  pairs_.push_back({pair.p, pair.q, 1.0 / pq});
  while (static_cast<int>(pairs_.size()) > memory_) pairs_.pop_front();
}

void BroydenEngine::ensure_init(Eigen::Index n) {
  if (H_.rows() != n) H_ = h0_scale_ * Mat::Identity(n, n);
}

Vec BroydenEngine::apply(const Vec& r) {
  ensure_init(r.size());
  return -(H_ * r);
}

void BroydenEngine::feed(const SecantPair& pair) {
  const double pn2 = pair.p.squaredNorm();
  if (pn2 == 0.0) return;  // degenerate pair, skip
  ensure_init(pair.p.size());
  const Vec Hq = H_ * pair.q;
  const double delta = Hq.dot(pair.p) / pn2;
  double theta;
  if (std::abs(delta) >= theta_bar_) {
    theta = 1.0;
  } else {
    const double sgn = delta >= 0.0 ? 1.0 : -1.0;  // sign 0 = 1
    theta = (1.0 - sgn * theta_bar_) / (1.0 - delta);
  }
  const double denom = (1.0 / theta - 1.0) * pn2 + pair.p.dot(Hq);
  if (std::abs(denom) < 1e-300) return;
  const Vec HTp = H_.transpose() * pair.p;
  H_ += ((pair.p - Hq) / denom) * HTp.transpose();
}

Vec AndersonEngine::apply(const Vec& r) {
  if (P_.empty()) return -r;
  const Eigen::Index n = r.size();
  const Eigen::Index M = static_cast<Eigen::Index>(P_.size());
  Mat P(n, M), Q(n, M);
  for (Eigen::Index j = 0; j < M; ++j) {
    P.col(j) = P_[static_cast<std::size_t>(j)];
    Q.col(j) = Q_[static_cast<std::size_t>(j)];
  }
  // t solves Q t ~ r in the least-squares sense; rank revealed with a
  // pivoted complete orthogonal decomposition, drop tolerance 1e-10.
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(Q);
  cod.setThreshold(1e-10);
  const Vec t = cod.solve(r);
  return -(r + (P - Q) * t);
}

void AndersonEngine::feed(const SecantPair& pair) {
  if (pair.p.size() == 0) return;
  P_.push_back(pair.p);
  Q_.push_back(pair.q);
  while (static_cast<int>(P_.size()) > memory_) {
    P_.pop_front();
    Q_.pop_front();
  }
}

std::unique_ptr<DirectionEngine> make_drs_engine(const EngineSpec& spec, double lambda) {
  switch (spec.kind) {
    case EngineSpec::Kind::Nominal:
      return std::make_unique<NominalEngine>(lambda);
    case EngineSpec::Kind::Nesterov:
      return std::make_unique<NesterovDrsEngine>(lambda);
    case EngineSpec::Kind::Lbfgs:
      return std::make_unique<LbfgsEngine>(spec.memory);
    case EngineSpec::Kind::Broyden:
      return std::make_unique<BroydenEngine>(spec.theta_bar, spec.h0_scale);
    case EngineSpec::Kind::Anderson:
      return std::make_unique<AndersonEngine>(spec.memory);
  }
  throw ConfigError("unknown engine kind");
}

std::unique_ptr<DirectionEngine> make_admm_engine(const EngineSpec& spec, double lambda,
                                                  double beta) {
  if (spec.kind == EngineSpec::Kind::Nesterov)
    return std::make_unique<NesterovAdmmEngine>(lambda, beta);
  return make_drs_engine(spec, lambda);
}

}  // namespace splitls
