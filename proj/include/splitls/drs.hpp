#ifndef SPLITLS_DRS_HPP
#define SPLITLS_DRS_HPP

#include <optional>
#include <vector>

#include "splitls/directions.hpp"
#include "splitls/oracle.hpp"
#include "splitls/quadcache.hpp"

namespace splitls {

/// Configuration of the linesearch DRS driver. Under Assumption I set
/// pi = +1 with gamma below max_stepsize_gamma and 0 < c < C(gamma L, lambda);
/// under Assumption I* set pi = -1 with gamma > 1/mu and 0 < c < C*.
struct DrsConfig {
  double lambda = 1.0;    // relaxation, in (0,2)
  double gamma = 0.0;     // stepsize (required)
  double c = 0.0;         // sufficient-decrease constant (required)
  int pi = +1;            // +1 smooth regime, -1 strongly convex regime
  double epsilon = 1e-6;  // tolerance on |r|/gamma
  int i_max = 10;         // max backtracks per iteration; -1 = unbounded
  long max_iters = 100000;
  bool adaptive = false;                // online gamma adjustment
  std::optional<double> phi_lb;         // merit escape bound for the guard
  bool use_quadcache = true;            // honored when phi1 is generalized quadratic
  bool keep_iterates = false;           // record s^k and d^k for diagnostics

  void validate(const Regime& regime) const;

  /// gamma and c per the standard recipe: gamma = gamma_fraction * gamma_max
  /// (smooth) or 1/(gamma_fraction * mu) (strongly convex); c = c_fraction * C.
  static DrsConfig standard(const Regime& regime, double lambda = 1.0,
                            double gamma_fraction = 0.95,
                            double c_fraction = 0.5);
};

enum class SolveStatus { Converged, MaxIters };

struct TraceRow {
  long k = 0;
  double res_norm = 0.0;  // |r^k|
  double merit = 0.0;     // DRE(s^k) (or L_beta for ADMM)
  double tau = 0.0;       // accepted tau_k; 0 on fallback/terminal rows
  int backtracks = 0;     // i_k
  long prox1_calls = 0;   // cumulative phi1-prox (or x-step) count
  double step = 0.0;      // gamma (or beta) in force at k
  double time_s = 0.0;    // cumulative wall time
};

/// Approximate-stationarity certificate recomputed from the final triple.
/// Under Assumption I the point z = v^K satisfies dist(0, d phi(z)) <= 2 eps;
/// under I* the triplet (x, y, z) = (u^K, (u^K-s^K)/gamma, v^K) satisfies
/// -y in d phi1(x), dist(y, d phi2(z)) <= eps, |x - z| <= gamma eps.
struct DrsCertificate {
  Vec z;  // v^K
  Vec x;  // u^K
  Vec y;  // (u^K - s^K)/gamma
  double res_norm = 0.0;           // |r^K| = |x - z|
  double res_over_gamma = 0.0;     // |r^K|/gamma, certified <= epsilon
  double stationarity_bound = 0.0; // 2 epsilon (Assumption I reading)
  double gamma = 0.0;
  double epsilon = 0.0;
  int pi = +1;
};

struct DrsSolveReport {
  DrsTriple final_state;
  double gamma_final = 0.0;
  SolveStatus status = SolveStatus::MaxIters;
  std::vector<TraceRow> trace;
  OracleCounters counters;
  int step_adjustments = 0;              // adaptive gamma changes
  std::vector<long> adjustment_iters;    // iteration index of each change
  std::optional<DrsCertificate> certificate;
  std::vector<Vec> s_iterates;  // filled when keep_iterates
  std::vector<Vec> d_directions;
  long iterations() const { return trace.empty() ? 0 : trace.back().k; }
};

/// Mutable per-solve state threaded through drs_ls_iterate.
struct DrsState {
  Vec s, u, v;
  double dre = 0.0;
  double gamma = 0.0;
  long k = 0;
  int adjustments = 0;
};

struct DrsStepInfo {
  double res_norm = 0.0;      // |r^k| at the step's gamma
  double merit_before = 0.0;  // DRE(s^k) at the step's gamma
  double gamma_used = 0.0;
  double tau = 0.0;
  int backtracks = 0;
  bool fallback = false;      // nominal step taken after i_max failures
  bool terminated = false;    // guard adjustment crossed tolerance; no step taken
  int gamma_adjustments = 0;  // guard restarts consumed by this step
  Vec direction;              // d^k actually used (kept only with keep_iterates)
};

/// One accepted iteration of the linesearch driver (adaptive guard included
/// when configured); requires |r^k|/gamma > epsilon.
DrsStepInfo drs_ls_iterate(DrsState& state, const SplitProblem& problem,
                           const DrsConfig& config, DirectionEngine& engine,
                           OracleCounters& counters);

/// Full solve: terminates when |r^k|/gamma <= epsilon or max_iters.
DrsSolveReport drs_ls_solve(const SplitProblem& problem, const Vec& s0,
                            const DrsConfig& config, DirectionEngine& engine);

/// Plain (nominal) DRS, used as benchmark baseline and test oracle.
DrsSolveReport drs_solve_plain(const SplitProblem& problem, const Vec& s0,
                               double gamma, double lambda, double epsilon,
                               long max_iters, int pi = +1);

/// Certificate from a converged final state; throws CertificateUnavailable
/// otherwise.
DrsCertificate certificate_drs(const DrsTriple& final_state, double gamma,
                               const DrsConfig& config, bool converged);

/// Outcome of the adaptive stepsize guard for one nominal triple.
enum class GuardDecision { Keep, Adjusted };

/// Applies the inserted adaptive steps: if the nominal update fails the
/// pi-signed decrease test (or escapes phi_lb), gamma <- 2^{-pi} gamma, the
/// current triple is recomputed at the new gamma and the iteration restarts.
GuardDecision adaptive_gamma_guard(DrsState& state, const SplitProblem& problem,
                                   const DrsConfig& config, const Vec& sbar,
                                   const DrsPair& nominal_pair,
                                   double nominal_dre,
                                   OracleCounters& counters);

/// Tail convergence diagnostics from a recorded trace (keep_iterates runs).
struct SuperlinearDiagnostics {
  std::vector<double> direction_ratios;  // |s^k + d^k - s*| / |s^k - s*|
  std::vector<double> step_ratios;       // |s^{k+1} - s*| / |s^k - s*|
  std::vector<double> tau;
  double tail_tau1_fraction = 0.0;       // fraction of tail iterations at tau=1
};
SuperlinearDiagnostics superlinear_diagnostics(const DrsSolveReport& report,
                                               const Vec* s_star = nullptr,
                                               int tail = 10);

}  // namespace splitls

#endif
