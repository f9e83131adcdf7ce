#ifndef SPLITLS_ADMM_HPP
#define SPLITLS_ADMM_HPP

#include <optional>
#include <vector>

#include "splitls/directions.hpp"
#include "splitls/drs.hpp"
#include "splitls/oracle.hpp"

namespace splitls {

/// Problem f(x) + g(z) s.t. Ax + Bz = b through its ADMM subproblem oracles.
/// The argmin closures receive the penalty explicitly so the adaptive variant
/// can retune it; builders key their factorization caches on beta.
struct AdmmProblem {
  std::function<Vec(const Vec& y_tilde, const Vec& z_tilde, double beta)> argmin_x;
  std::function<Vec(const Vec& x, const Vec& y, double beta)> argmin_z;
  LinOp A_apply, B_apply;
  Vec b;
  std::function<double(const Vec&)> f_value, g_value;
  Regime regime;    // Smooth{L_Af, f_convex} or StronglyConvex{mu_f}
  double A_norm = 1.0;  // |A|, used by the strongly convex penalty bound
  double B_norm = 1.0;  // |B|, used by the certificate surrogate
  bool f_generalized_quadratic = false;
  Eigen::Index dim_x = 0, dim_y = 0, dim_z = 0;
};

/// Mirrors DrsConfig; epsilon is tested against beta |r^k|. Under Assumption
/// II (pi=+1) beta must exceed min_penalty_beta; under II* (pi=-1) beta must
/// stay below mu_f/|A|^2.
struct AdmmConfig {
  double lambda = 1.0;
  double beta = 0.0;
  double c = 0.0;
  int pi = +1;
  double epsilon = 1e-6;  // on beta |r|
  int i_max = 10;
  long max_iters = 100000;
  bool adaptive = false;
  std::optional<double> Phi_lb;
  bool use_quadcache = true;
  void validate(const AdmmProblem& problem) const;

  /// beta and c per the standard recipe: beta = beta_min/0.95 in the smooth
  /// regime, beta = 0.5 mu_f/|A|^2 in the strongly convex one; c = c_fraction*D.
  static AdmmConfig standard(const AdmmProblem& problem, double lambda = 1.0,
                             double c_fraction = 0.5);
};

/// Full per-iteration ADMM state; r = Ax + Bz - b matches (x,z) and auglag is
/// the beta-augmented Lagrangian in force.
struct AdmmTriple {
  Vec x, y, z;
  Vec r;
  double auglag = 0.0;
};

struct AdmmOracleOut {
  Vec x, y, z;
  Vec Ax, Bz;  // cached map applications
};

/// One ADMM oracle call: x in argmin L_beta(., y_tilde, z_tilde),
/// y = y_tilde + beta(Ax + Bz_tilde - b), z in argmin L_beta(x, y, .).
AdmmOracleOut admm_oracle(const AdmmProblem& problem, const Vec& y_tilde,
                          const Vec& z_tilde, const Vec& Bz_tilde, double beta,
                          OracleCounters* counters = nullptr);

struct AdmmCertificate {
  Vec x, y, z;
  double res_norm = 0.0;           // |Ax + Bz - b|, certified <= eps/beta
  double primal_bound = 0.0;       // eps/beta
  double dual_g_surrogate = 0.0;   // beta |B| |r|, bounds dist(-B'y, dg(z))
  double dual_g_bound = 0.0;       // |B| eps
  double beta = 0.0;
  double epsilon = 0.0;
  int pi = +1;
};

struct AdmmSolveReport {
  AdmmTriple final_state;
  double beta_final = 0.0;
  SolveStatus status = SolveStatus::MaxIters;
  std::vector<TraceRow> trace;  // merit column carries L_beta; step carries beta
  OracleCounters counters;      // prox1/value1 = x-step/f, prox2/value2 = z-step/g
  int step_adjustments = 0;
  std::vector<long> adjustment_iters;
  std::optional<AdmmCertificate> certificate;
  long iterations() const { return trace.empty() ? 0 : trace.back().k; }
};

/// Linesearch ADMM driver. The initialization performs the prescribed block:
/// r^{-1} = Ax^{-1}+Bz^{-1}-b, y^{-1/2} = y^{-1} - beta(1-lambda) r^{-1}, one
/// oracle call, then iterations with candidate y^{k+1/2} blending.
AdmmSolveReport admm_ls_solve(const AdmmProblem& problem, const Vec& x_init,
                              const Vec& y_init, const Vec& z_init,
                              const AdmmConfig& config, DirectionEngine& engine);

/// Plain (nominal) ADMM baseline.
AdmmSolveReport admm_solve_plain(const AdmmProblem& problem, const Vec& x_init,
                                 const Vec& y_init, const Vec& z_init,
                                 double beta, double lambda, double epsilon,
                                 long max_iters, int pi = +1);

/// Image of an ADMM triple in DRS variables: s = Ax - y/beta, u = Ax,
/// v = b - Bz; u - v = Ax + Bz - b.
struct DrsImage {
  Vec s, u, v;
};
DrsImage admm_to_drs_image(const Vec& x, const Vec& y, const Vec& z,
                           double beta, const LinOp& A_apply,
                           const LinOp& B_apply, const Vec& b);

AdmmCertificate certificate_admm(const AdmmTriple& final_state, double beta,
                                 const AdmmConfig& config, double B_norm,
                                 bool converged);

}  // namespace splitls

#endif
