#include "splitls/drs.hpp"

#include <chrono>
#include <cmath>

namespace splitls {

namespace {

double dre_from_parts(double f1, double f2, const Vec& s, const Vec& u,
                      const Vec& v, double gamma) {
  check_finite(f1, "phi1 value");
  check_finite(f2, "phi2 value");
  if (f1 == kInf) throw OracleError("phi1", "value +inf at its own prox output");
  if (f2 == kInf) throw OracleError("phi2", "value +inf at its own prox output");
  const Vec d = v - u;
  const double dre = f1 + f2 + (s - u).dot(d) / gamma + d.squaredNorm() / (2.0 * gamma);
  check_finite(dre, "DRE");
  return dre;
}

struct NominalEval {
  Vec u, v;
  double f1 = 0.0, f2 = 0.0, dre = 0.0;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

void DrsConfig::validate(const Regime& regime) const {
  if (!(lambda > 0.0 && lambda < 2.0))
    throw ConfigError("lambda must lie in (0,2)");
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (epsilon < 0.0) throw ConfigError("epsilon must be nonnegative");
  if (i_max < -1) throw ConfigError("i_max must be >= 0 (or -1 for unbounded)");
  if (pi != 1 && pi != -1) throw ConfigError("pi must be +1 or -1");
  if (pi == +1 && !regime.is_smooth())
    throw ConfigError("pi=+1 requires the smooth regime");
  if (pi == -1 && regime.is_smooth())
    throw ConfigError("pi=-1 requires the strongly convex regime");
  if (adaptive) {
    // gamma is allowed to start out of range; the guard fixes it online, but
    // c must stay below the alpha->0 limit of C for the halving to terminate.
    const double c_limit = 0.5 * lambda * (2.0 - lambda);
    if (!(c > 0.0 && c < c_limit))
      throw ConfigError("adaptive runs require 0 < c < lambda(2-lambda)/2");
    return;
  }
  if (pi == +1) {
    const double gmax = max_stepsize_gamma(regime.lipschitz, lambda, regime.convex);
    if (!(gamma < gmax)) throw ConfigError("gamma violates the stepsize bound");
    const double C = decrease_constant(gamma * regime.lipschitz, lambda, regime.convex);
    if (!(c > 0.0 && c < C)) throw ConfigError("need 0 < c < C(gamma L, lambda)");
  } else {
    if (!(gamma * regime.mu > 1.0)) throw ConfigError("need gamma > 1/mu");
    const double C = dual_decrease_constant(gamma, regime.mu, lambda);
    if (!(c > 0.0 && c < C)) throw ConfigError("need 0 < c < C*(1/(gamma mu), lambda)");
  }
}

DrsConfig DrsConfig::standard(const Regime& regime, double lambda,
                              double gamma_fraction, double c_fraction) {
  DrsConfig cfg;
  cfg.lambda = lambda;
  if (regime.is_smooth()) {
    cfg.pi = +1;
    cfg.gamma = gamma_fraction * max_stepsize_gamma(regime.lipschitz, lambda, regime.convex);
    cfg.c = c_fraction * decrease_constant(cfg.gamma * regime.lipschitz, lambda, regime.convex);
  } else {
    cfg.pi = -1;
    cfg.gamma = 1.0 / (gamma_fraction * regime.mu);
    cfg.c = c_fraction * dual_decrease_constant(cfg.gamma, regime.mu, lambda);
  }
  return cfg;
}

GuardDecision adaptive_gamma_guard(DrsState& state, const SplitProblem& problem,
                                   const DrsConfig& config, const Vec& /*sbar*/,
                                   const DrsPair& /*nominal_pair*/,
                                   double nominal_dre,
                                   OracleCounters& counters) {
  const double pi = static_cast<double>(config.pi);
  const double rn2 = (state.u - state.v).squaredNorm();
  const bool no_decrease =
      pi * nominal_dre >= pi * state.dre - (config.c / state.gamma) * rn2;
  const bool escaped =
      config.phi_lb.has_value() && pi * nominal_dre < pi * (*config.phi_lb);
  if (!no_decrease && !escaped) return GuardDecision::Keep;

  state.gamma = (config.pi == +1) ? 0.5 * state.gamma : 2.0 * state.gamma;
  if (state.gamma < 1e-12)
    throw StepRangeError("adaptive gamma underflow: regime declaration inconsistent");
  if (state.gamma > 1e12)
    throw StepRangeError("adaptive gamma overflow: regime declaration inconsistent");
  const DrsPair refreshed = drs_oracle(problem, state.s, state.gamma, &counters);
  state.u = refreshed.u;
  state.v = refreshed.v;
  state.dre = dre_eval(problem, state.s, state.u, state.v, state.gamma, &counters);
  ++state.adjustments;
  return GuardDecision::Adjusted;
}

DrsStepInfo drs_ls_iterate(DrsState& state, const SplitProblem& problem,
                           const DrsConfig& config, DirectionEngine& engine,
                           OracleCounters& counters) {
  const double pi = static_cast<double>(config.pi);
  DrsStepInfo info;

  for (;;) {
    const Vec r = state.u - state.v;
    const double rn2 = r.squaredNorm();
    const double rn = std::sqrt(rn2);
    check_finite(rn, "residual norm");
    if (rn / state.gamma <= config.epsilon) {
      info.res_norm = rn;
      info.terminated = true;
      return info;
    }

    Vec sbar = state.s - config.lambda * r;
    std::optional<NominalEval> nominal;
    if (config.adaptive) {
      NominalEval ne;
      const DrsPair np = drs_oracle(problem, sbar, state.gamma, &counters);
      ne.u = np.u;
      ne.v = np.v;
      ne.f1 = problem.phi1.value(ne.u);
      ne.f2 = problem.phi2.value(ne.v);
      counters.value1++;
      counters.value2++;
      ne.dre = dre_from_parts(ne.f1, ne.f2, sbar, ne.u, ne.v, state.gamma);
      if (adaptive_gamma_guard(state, problem, config, sbar, np, ne.dre, counters) ==
          GuardDecision::Adjusted) {
        ++info.gamma_adjustments;
        continue;  // back to the termination check with the new gamma
      }
      nominal = std::move(ne);
    }

    info.res_norm = rn;
    info.merit_before = state.dre;
    info.gamma_used = state.gamma;
    const double gamma = state.gamma;
    const double threshold = pi * state.dre - (config.c / gamma) * rn2;

    engine.observe_drs(sbar);
    Vec d = engine.apply(r);
    if (!d.allFinite()) throw NonFiniteMerit("direction engine returned non-finite d");
    const Vec spd = state.s + d;

    const bool cached = config.use_quadcache && problem.phi1.is_generalized_quadratic;
    LinesearchCache cache;
    if (cached) {
      cache.u_bar = nominal ? nominal->u : problem.phi1.prox(sbar, gamma);
      cache.u0 = problem.phi1.prox(spd, gamma);
      counters.prox1 += nominal ? 1 : 2;
      cache.a = nominal ? nominal->f1 : problem.phi1.value(cache.u_bar);
      cache.b = (sbar - cache.u_bar).dot(cache.u0 - cache.u_bar) / gamma;
      cache.c = problem.phi1.value(cache.u0) - cache.a - cache.b;
      counters.value1 += nominal ? 1 : 2;
    }

    double tau = 1.0;
    int backtracks = 0;
    Vec r_first;
    bool have_first = false;
    bool done = false;

    while (!done) {
      Vec s_t = (1.0 - tau) * sbar + tau * spd;
      Vec u_t;
      double f1;
      if (cached) {
        u_t = blend_prox(cache.u_bar, cache.u0, tau);
        f1 = quad_line_value(cache, tau);
      } else {
        u_t = problem.phi1.prox(s_t, gamma);
        ++counters.prox1;
        f1 = problem.phi1.value(u_t);
        ++counters.value1;
      }
      Vec v_t = problem.phi2.prox(2.0 * u_t - s_t, gamma);
      ++counters.prox2;
      const double f2 = problem.phi2.value(v_t);
      ++counters.value2;
      const double dre_t = dre_from_parts(f1, f2, s_t, u_t, v_t, gamma);

      if (!have_first) {
        r_first = u_t - v_t;  // residual of the tau=1 trial feeds the engine
        have_first = true;
      }

      if (pi * dre_t <= threshold) {
        state.s = std::move(s_t);
        state.u = std::move(u_t);
        state.v = std::move(v_t);
        state.dre = dre_t;
        info.tau = tau;
        info.backtracks = backtracks;
        done = true;
      } else if (backtracks == config.i_max) {
        // Nominal fallback; reuse whatever the cache / guard already computed.
        Vec u_fb;
        double f1_fb;
        if (cached) {
          u_fb = cache.u_bar;
          f1_fb = cache.a;
        } else if (nominal) {
          u_fb = nominal->u;
          f1_fb = nominal->f1;
        } else {
          u_fb = problem.phi1.prox(sbar, gamma);
          ++counters.prox1;
          f1_fb = problem.phi1.value(u_fb);
          ++counters.value1;
        }
        Vec v_fb;
        double f2_fb;
        if (nominal) {
          v_fb = nominal->v;
          f2_fb = nominal->f2;
        } else {
          v_fb = problem.phi2.prox(2.0 * u_fb - sbar, gamma);
          ++counters.prox2;
          f2_fb = problem.phi2.value(v_fb);
          ++counters.value2;
        }
        state.dre = dre_from_parts(f1_fb, f2_fb, sbar, u_fb, v_fb, gamma);
        state.s = std::move(sbar);
        state.u = std::move(u_fb);
        state.v = std::move(v_fb);
        info.tau = 0.0;
        info.backtracks = backtracks;
        info.fallback = true;
        done = true;
      } else {
        tau *= 0.5;
        ++backtracks;
        if (tau == 0.0)
          throw BacktrackOverflow(
              "tau underflow with unbounded backtracking; c >= C or gamma out of range");
      }
    }

    engine.feed({d, r_first - r});
    if (config.keep_iterates) info.direction = std::move(d);
    ++state.k;
    return info;
  }
}

DrsSolveReport drs_ls_solve(const SplitProblem& problem, const Vec& s0,
                            const DrsConfig& config, DirectionEngine& engine) {
  config.validate(problem.regime);
  engine.reset();
  const auto t0 = std::chrono::steady_clock::now();

  DrsSolveReport report;
  DrsState state;
  state.s = s0;
  state.gamma = config.gamma;
  const DrsPair init = drs_oracle(problem, s0, state.gamma, &report.counters);
  state.u = init.u;
  state.v = init.v;
  state.dre = dre_eval(problem, s0, state.u, state.v, state.gamma, &report.counters);

  if (config.keep_iterates) report.s_iterates.push_back(state.s);

  for (;;) {
    const double rn = (state.u - state.v).norm();
    check_finite(rn, "residual norm");
    if (rn / state.gamma <= config.epsilon) {
      report.status = SolveStatus::Converged;
      report.trace.push_back({state.k, rn, state.dre, 0.0, 0, report.counters.prox1,
                              state.gamma, seconds_since(t0)});
      break;
    }
    if (state.k >= config.max_iters) {
      report.status = SolveStatus::MaxIters;
      report.trace.push_back({state.k, rn, state.dre, 0.0, 0, report.counters.prox1,
                              state.gamma, seconds_since(t0)});
      break;
    }

    const long k_before = state.k;
    DrsStepInfo step = drs_ls_iterate(state, problem, config, engine, report.counters);
    for (int a = 0; a < step.gamma_adjustments; ++a)
      report.adjustment_iters.push_back(k_before);
    report.step_adjustments += step.gamma_adjustments;
    if (step.terminated) continue;  // guard pushed the state under tolerance

    report.trace.push_back({k_before, step.res_norm, step.merit_before, step.tau,
                            step.backtracks, report.counters.prox1, step.gamma_used,
                            seconds_since(t0)});
    if (config.keep_iterates) {
      report.s_iterates.push_back(state.s);
      report.d_directions.push_back(std::move(step.direction));
    }
  }

  report.final_state = {state.s, state.u, state.v, state.dre};
  report.gamma_final = state.gamma;
  if (report.status == SolveStatus::Converged)
    report.certificate = certificate_drs(report.final_state, state.gamma, config, true);
  return report;
}

DrsSolveReport drs_solve_plain(const SplitProblem& problem, const Vec& s0,
                               double gamma, double lambda, double epsilon,
                               long max_iters, int pi) {
  const auto t0 = std::chrono::steady_clock::now();
  DrsSolveReport report;
  Vec s = s0;
  DrsPair pair = drs_oracle(problem, s, gamma, &report.counters);
  double dre = dre_eval(problem, s, pair.u, pair.v, gamma, &report.counters);
  long k = 0;
  for (;;) {
    const Vec r = pair.u - pair.v;
    const double rn = r.norm();
    check_finite(rn, "residual norm");
    report.trace.push_back({k, rn, dre, 1.0, 0, report.counters.prox1,
                            gamma, seconds_since(t0)});
    if (rn / gamma <= epsilon) {
      report.status = SolveStatus::Converged;
      break;
    }
    if (k >= max_iters) {
      report.status = SolveStatus::MaxIters;
      break;
    }
    s -= lambda * r;
    pair = drs_oracle(problem, s, gamma, &report.counters);
    dre = dre_eval(problem, s, pair.u, pair.v, gamma, &report.counters);
    ++k;
  }
  report.final_state = {s, pair.u, pair.v, dre};
  report.gamma_final = gamma;
  if (report.status == SolveStatus::Converged) {
    DrsConfig cfg;
    cfg.gamma = gamma;
    cfg.lambda = lambda;
    cfg.epsilon = epsilon;
    cfg.pi = pi;
    report.certificate = certificate_drs(report.final_state, gamma, cfg, true);
  }
  return report;
}

DrsCertificate certificate_drs(const DrsTriple& final_state, double gamma,
                               const DrsConfig& config, bool converged) {
  if (!converged)
    throw CertificateUnavailable("certificate requires a converged solve");
  DrsCertificate cert;
  cert.z = final_state.v;
  cert.x = final_state.u;
  cert.y = (final_state.u - final_state.s) / gamma;
  cert.res_norm = (final_state.u - final_state.v).norm();
  cert.res_over_gamma = cert.res_norm / gamma;
  cert.stationarity_bound = 2.0 * config.epsilon;
  cert.gamma = gamma;
  cert.epsilon = config.epsilon;
  cert.pi = config.pi;
  return cert;
}

SuperlinearDiagnostics superlinear_diagnostics(const DrsSolveReport& report,
                                               const Vec* s_star, int tail) {
  SuperlinearDiagnostics diag;
  const auto& S = report.s_iterates;
  const auto& D = report.d_directions;
  if (S.size() < 2 || D.empty()) return diag;
  const Vec star = s_star ? *s_star : S.back();
  const std::size_t steps = D.size();
  for (std::size_t k = 0; k < steps; ++k) {
    const double den = (S[k] - star).norm();
    if (den == 0.0) continue;
    diag.direction_ratios.push_back((S[k] + D[k] - star).norm() / den);
    diag.step_ratios.push_back((S[k + 1] - star).norm() / den);
  }
  for (const auto& row : report.trace)
    if (row.k < static_cast<long>(steps)) diag.tau.push_back(row.tau);
  const std::size_t n = diag.tau.size();
  const std::size_t t = std::min<std::size_t>(static_cast<std::size_t>(tail), n);
  if (t > 0) {
    std::size_t unit = 0;
    for (std::size_t i = n - t; i < n; ++i)
      if (diag.tau[i] == 1.0) ++unit;
    diag.tail_tau1_fraction = static_cast<double>(unit) / static_cast<double>(t);
  }
  return diag;
}

}  // namespace splitls
