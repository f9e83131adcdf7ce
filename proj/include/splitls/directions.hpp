#ifndef SPLITLS_DIRECTIONS_HPP
#define SPLITLS_DIRECTIONS_HPP

#include <deque>
#include <memory>

#include "splitls/types.hpp"

namespace splitls {

/// Secant pair of the linesearch protocol: p is the direction taken, q is the
/// residual computed in the FIRST linesearch trial minus the current residual
/// (regardless of the tau eventually accepted).
struct SecantPair {
  Vec p, q;
};

/// Stateful map r -> d. `feed` is called exactly once per outer iteration,
/// after the first trial residual is known and before the next `apply`.
/// The observe_* hooks supply nominal-step context to extrapolation engines
/// before `apply`; secant-based engines ignore them. Engines are owned by a
/// single solve and are not shareable.
class DirectionEngine {
 public:
  virtual ~DirectionEngine() = default;
  virtual Vec apply(const Vec& residual) = 0;
  virtual void feed(const SecantPair&) {}
  virtual void reset() = 0;
  virtual void observe_drs(const Vec& /*sbar_next*/) {}
  virtual void observe_admm(const Vec& /*Bz*/, const Vec& /*ybar_half*/) {}
  virtual const char* name() const = 0;
};

/// d = -lambda r: the candidate coincides with the nominal step, so the
/// trajectory equals plain DRS/ADMM.
class NominalEngine final : public DirectionEngine {
 public:
  explicit NominalEngine(double lambda) : lambda_(lambda) {}
  Vec apply(const Vec& r) override { return -(lambda_ * r); }
  void reset() override {}
  const char* name() const override { return "nominal"; }

 private:
  double lambda_;
};

/// Extrapolation for DRS: d^0 = -lambda r^0, then
/// d^k = ((k-1)/(k+2)) (sbar^{k+1} - sbar^k) - lambda r^k.
class NesterovDrsEngine final : public DirectionEngine {
 public:
  explicit NesterovDrsEngine(double lambda) : lambda_(lambda) {}
  Vec apply(const Vec& r) override;
  void reset() override;
  void observe_drs(const Vec& sbar_next) override { sbar_cur_ = sbar_next; }
  const char* name() const override { return "nesterov"; }

 private:
  double lambda_;
  long k_ = 0;
  Vec sbar_cur_, sbar_prev_;
};

/// Extrapolation for ADMM: d^0 = -lambda r^0, then
/// d^k = -lambda r^k - ((k-1)/(k+2)) (Bz^k - Bz^{k-1} + (ybar^{k+1/2} - ybar^{k-1/2})/beta).
class NesterovAdmmEngine final : public DirectionEngine {
 public:
  NesterovAdmmEngine(double lambda, double beta) : lambda_(lambda), beta_(beta) {}
  Vec apply(const Vec& r) override;
  void reset() override;
  void observe_admm(const Vec& Bz, const Vec& ybar_half) override {
    Bz_cur_ = Bz;
    ybar_cur_ = ybar_half;
  }
  void set_beta(double beta) { beta_ = beta; }
  const char* name() const override { return "nesterov"; }

 private:
  double lambda_, beta_;
  long k_ = 0;
  Vec Bz_cur_, Bz_prev_, ybar_cur_, ybar_prev_;
};

/// Two-loop L-BFGS on the residual map, H0 = (<p,q>/<q,q>) I from the newest
/// pair. Pairs with <p,q> <= 1e-12 |p||q| are skipped.
class LbfgsEngine final : public DirectionEngine {
 public:
  explicit LbfgsEngine(int memory = 5) : memory_(memory) {}
  Vec apply(const Vec& r) override;
  void feed(const SecantPair& pair) override;
  void reset() override { pairs_.clear(); }
  const char* name() const override { return "lbfgs"; }
  std::size_t stored_pairs() const { return pairs_.size(); }

 private:
  struct Entry {
    Vec p, q;
    double rho;  // 1/<p,q>
  };
  int memory_;
  std::deque<Entry> pairs_;
};

/// Full-matrix modified Broyden with Powell's theta damping; keeps every H_k
/// nonsingular. Stores H densely: O(p^2) memory, desk scale only.
class BroydenEngine final : public DirectionEngine {
 public:
  explicit BroydenEngine(double theta_bar = 0.2, double h0_scale = 1.0)
      : theta_bar_(theta_bar), h0_scale_(h0_scale) {}
  Vec apply(const Vec& r) override;
  void feed(const SecantPair& pair) override;
  void reset() override { H_.resize(0, 0); }
  const char* name() const override { return "broyden"; }
  const Mat& matrix() const { return H_; }

 private:
  void ensure_init(Eigen::Index n);
  double theta_bar_;
  double h0_scale_;
  Mat H_;
};

/// Anderson acceleration as an inverse multisecant update: H_k is the matrix
/// closest to the identity satisfying H_k Q = P over the last M = min(k,m)
/// pairs; rank deficiency handled in the least-squares sense.
class AndersonEngine final : public DirectionEngine {
 public:
  explicit AndersonEngine(int memory = 5) : memory_(memory) {}
  Vec apply(const Vec& r) override;
  void feed(const SecantPair& pair) override;
  void reset() override {
    P_.clear();
    Q_.clear();
  }
  const char* name() const override { return "anderson"; }

 private:
  int memory_;
  std::deque<Vec> P_, Q_;
};

/// Engine selection shared by the benchmark harness and test drivers.
struct EngineSpec {
  enum class Kind { Nominal, Nesterov, Lbfgs, Broyden, Anderson };
  Kind kind = Kind::Nominal;
  int memory = 5;          // lbfgs / anderson
  double theta_bar = 0.2;  // broyden damping threshold
  double h0_scale = 1.0;   // broyden initial matrix mu*I
};

std::unique_ptr<DirectionEngine> make_drs_engine(const EngineSpec& spec, double lambda);
std::unique_ptr<DirectionEngine> make_admm_engine(const EngineSpec& spec, double lambda,
                                                  double beta);

}  // namespace splitls

#endif
