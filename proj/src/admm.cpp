#include "splitls/admm.hpp"

#include <chrono>
#include <cmath>

namespace splitls {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Evaluated {
  Vec x, y, z, Ax, Bz, r;
  double f = 0.0, g = 0.0, L = 0.0;
};

double lagrangian_from_parts(double f, double g, const Vec& y, const Vec& r,
                             double beta) {
  check_finite(f, "f(x)");
  check_finite(g, "g(z)");
  if (f == kInf) throw OracleError("x-step", "f(x) +inf at its own argmin");
  if (g == kInf) throw OracleError("z-step", "g(z) +inf at its own argmin");
  const double L = f + g + y.dot(r) + 0.5 * beta * r.squaredNorm();
  check_finite(L, "augmented Lagrangian");
  return L;
}

Evaluated oracle_eval(const AdmmProblem& problem, const Vec& y_tilde,
                      const Vec& z_tilde, const Vec& Bz_tilde, double beta,
                      OracleCounters& counters) {
  AdmmOracleOut out = admm_oracle(problem, y_tilde, z_tilde, Bz_tilde, beta, &counters);
  Evaluated ev;
  ev.x = std::move(out.x);
  ev.y = std::move(out.y);
  ev.z = std::move(out.z);
  ev.Ax = std::move(out.Ax);
  ev.Bz = std::move(out.Bz);
  ev.r = ev.Ax + ev.Bz - problem.b;
  ev.f = problem.f_value(ev.x);
  ev.g = problem.g_value(ev.z);
  ++counters.value1;
  ++counters.value2;
  ev.L = lagrangian_from_parts(ev.f, ev.g, ev.y, ev.r, beta);
  return ev;
}

}  // namespace

AdmmOracleOut admm_oracle(const AdmmProblem& problem, const Vec& y_tilde,
                          const Vec& z_tilde, const Vec& Bz_tilde, double beta,
                          OracleCounters* counters) {
  if (beta <= 0) throw ConfigError("admm_oracle: beta must be positive");
  AdmmOracleOut out;
  try {
    out.x = problem.argmin_x(y_tilde, z_tilde, beta);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw OracleError("x-step", e.what());
  }
  if (!out.x.allFinite()) throw OracleError("x-step", "non-finite solution");
  out.Ax = problem.A_apply(out.x);
  out.y = y_tilde + beta * (out.Ax + Bz_tilde - problem.b);
  try {
    out.z = problem.argmin_z(out.x, out.y, beta);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw OracleError("z-step", e.what());
  }
  if (!out.z.allFinite()) throw OracleError("z-step", "non-finite solution");
  out.Bz = problem.B_apply(out.z);
  if (counters) {
    ++counters->prox1;
    ++counters->prox2;
  }
  return out;
}

void AdmmConfig::validate(const AdmmProblem& problem) const {
  if (!(lambda > 0.0 && lambda < 2.0)) throw ConfigError("lambda must lie in (0,2)");
  if (!(beta > 0.0)) throw ConfigError("beta must be positive");
  if (epsilon < 0.0) throw ConfigError("epsilon must be nonnegative");
  if (i_max < -1) throw ConfigError("i_max must be >= 0 (or -1 for unbounded)");
  if (pi != 1 && pi != -1) throw ConfigError("pi must be +1 or -1");
  const Regime& regime = problem.regime;
  if (pi == +1 && !regime.is_smooth())
    throw ConfigError("pi=+1 requires the smooth regime");
  if (pi == -1 && regime.is_smooth())
    throw ConfigError("pi=-1 requires the strongly convex regime");
  if (adaptive) {
    const double c_limit = 0.5 * lambda * (2.0 - lambda);
    if (!(c > 0.0 && c < c_limit))
      throw ConfigError("adaptive runs require 0 < c < lambda(2-lambda)/2");
    return;
  }
  if (pi == +1) {
    const double bmin = min_penalty_beta(regime.lipschitz, lambda, regime.convex);
    if (!(beta > bmin)) throw ConfigError("beta violates the penalty bound");
    const double D = decrease_constant(regime.lipschitz / beta, lambda, regime.convex);
    if (!(c > 0.0 && c < D)) throw ConfigError("need 0 < c < D(L/beta, lambda)");
  } else {
    const double mu_epi = regime.mu / (problem.A_norm * problem.A_norm);
    if (!(beta < mu_epi)) throw ConfigError("need beta < mu_f/|A|^2");
    const double D = dual_decrease_constant(1.0 / beta, mu_epi, lambda);
    if (!(c > 0.0 && c < D)) throw ConfigError("need 0 < c < D*");
  }
}

AdmmConfig AdmmConfig::standard(const AdmmProblem& problem, double lambda,
                                double c_fraction) {
  AdmmConfig cfg;
  cfg.lambda = lambda;
  const Regime& regime = problem.regime;
  if (regime.is_smooth()) {
    cfg.pi = +1;
    cfg.beta = min_penalty_beta(regime.lipschitz, lambda, regime.convex) / 0.95;
    cfg.c = c_fraction * decrease_constant(regime.lipschitz / cfg.beta, lambda, regime.convex);
  } else {
    cfg.pi = -1;
    const double mu_epi = regime.mu / (problem.A_norm * problem.A_norm);
    cfg.beta = 0.5 * mu_epi;
    cfg.c = c_fraction * dual_decrease_constant(1.0 / cfg.beta, mu_epi, lambda);
  }
  return cfg;
}

AdmmSolveReport admm_ls_solve(const AdmmProblem& problem, const Vec& x_init,
                              const Vec& y_init, const Vec& z_init,
                              const AdmmConfig& config, DirectionEngine& engine) {
  config.validate(problem);
  engine.reset();
  const auto t0 = std::chrono::steady_clock::now();
  const double pi = static_cast<double>(config.pi);

  AdmmSolveReport report;
  double beta = config.beta;

  // Initialize block: one oracle call from the (-1)-indexed triple.
  Vec y_half_prev, z_prev, Bz_prev;
  {
    const Vec Ax_init = problem.A_apply(x_init);
    Bz_prev = problem.B_apply(z_init);
    const Vec r_init = Ax_init + Bz_prev - problem.b;
    y_half_prev = y_init - beta * (1.0 - config.lambda) * r_init;
    z_prev = z_init;
  }
  Evaluated cur = oracle_eval(problem, y_half_prev, z_prev, Bz_prev, beta,
                              report.counters);

  long k = 0;
  for (;;) {
    const double rn = cur.r.norm();
    check_finite(rn, "residual norm");
    if (beta * rn <= config.epsilon) {
      report.status = SolveStatus::Converged;
      report.trace.push_back({k, rn, cur.L, 0.0, 0, report.counters.prox1, beta,
                              seconds_since(t0)});
      break;
    }
    if (k >= config.max_iters) {
      report.status = SolveStatus::MaxIters;
      report.trace.push_back({k, rn, cur.L, 0.0, 0, report.counters.prox1, beta,
                              seconds_since(t0)});
      break;
    }

    const double rn2 = rn * rn;
    Vec ybar_half = cur.y - beta * (1.0 - config.lambda) * cur.r;

    std::optional<Evaluated> nominal;
    if (config.adaptive) {
      Evaluated ne = oracle_eval(problem, ybar_half, cur.z, cur.Bz, beta,
                                 report.counters);
      const bool no_decrease = pi * ne.L >= pi * cur.L - beta * config.c * rn2;
      const bool escaped =
          config.Phi_lb.has_value() && pi * ne.L < pi * (*config.Phi_lb);
      if (no_decrease || escaped) {
        beta = (config.pi == +1) ? 2.0 * beta : 0.5 * beta;
        if (beta < 1e-12)
          throw StepRangeError("adaptive beta underflow: regime declaration inconsistent");
        if (beta > 1e12)
          throw StepRangeError("adaptive beta overflow: regime declaration inconsistent");
        cur = oracle_eval(problem, y_half_prev, z_prev, Bz_prev, beta,
                          report.counters);
        ++report.step_adjustments;
        report.adjustment_iters.push_back(k);
        continue;  // back to the termination check with the new beta
      }
      nominal = std::move(ne);
    }

    engine.observe_admm(cur.Bz, ybar_half);
    Vec d = engine.apply(cur.r);
    if (!d.allFinite()) throw NonFiniteMerit("direction engine returned non-finite d");
    const Vec y_end = cur.y - beta * (cur.r + d);  // tau=1 endpoint

    const bool cached = config.use_quadcache && problem.f_generalized_quadratic;
    Vec x_bar, Ax_bar, x0, Ax0, ybar_new;
    double f_bar = 0.0, b_coef = 0.0, c_coef = 0.0;
    if (cached) {
      if (nominal) {
        x_bar = nominal->x;
        Ax_bar = nominal->Ax;
        f_bar = nominal->f;
      } else {
        try {
          x_bar = problem.argmin_x(ybar_half, cur.z, beta);
        } catch (const std::exception& e) {
          throw OracleError("x-step", e.what());
        }
        ++report.counters.prox1;
        Ax_bar = problem.A_apply(x_bar);
        f_bar = problem.f_value(x_bar);
        ++report.counters.value1;
      }
      try {
        x0 = problem.argmin_x(y_end, cur.z, beta);
      } catch (const std::exception& e) {
        throw OracleError("x-step", e.what());
      }
      ++report.counters.prox1;
      Ax0 = problem.A_apply(x0);
      const double f0 = problem.f_value(x0);
      ++report.counters.value1;
      // -A'ybar_new is a subgradient of f at x_bar, so the slope of f along
      // the blend is -<ybar_new, A(x0 - x_bar)>.
      ybar_new = ybar_half + beta * (Ax_bar + cur.Bz - problem.b);
      b_coef = -ybar_new.dot(Ax0 - Ax_bar);
      c_coef = f0 - f_bar - b_coef;
    }

    const double threshold = pi * cur.L - beta * config.c * rn2;
    const long k_now = k;
    const double merit_before = cur.L;
    const Vec r_k = cur.r;  // residual fed to the secant pair

    double tau = 1.0;
    int backtracks = 0;
    Vec r_first;
    bool have_first = false;
    double tau_accepted = 0.0;
    bool done = false;
    Vec y_half_used;

    while (!done) {
      Vec y_half_t = (1.0 - tau) * ybar_half + tau * y_end;
      Evaluated trial;
      if (cached) {
        trial.x = (1.0 - tau) * x_bar + tau * x0;
        trial.Ax = (1.0 - tau) * Ax_bar + tau * Ax0;
        trial.f = f_bar + tau * (b_coef + tau * c_coef);
        trial.y = y_half_t + beta * (trial.Ax + cur.Bz - problem.b);
        try {
          trial.z = problem.argmin_z(trial.x, trial.y, beta);
        } catch (const std::exception& e) {
          throw OracleError("z-step", e.what());
        }
        ++report.counters.prox2;
        trial.Bz = problem.B_apply(trial.z);
        trial.g = problem.g_value(trial.z);
        ++report.counters.value2;
        trial.r = trial.Ax + trial.Bz - problem.b;
        trial.L = lagrangian_from_parts(trial.f, trial.g, trial.y, trial.r, beta);
      } else {
        trial = oracle_eval(problem, y_half_t, cur.z, cur.Bz, beta, report.counters);
      }

      if (!have_first) {
        r_first = trial.r;
        have_first = true;
      }

      if (pi * trial.L <= threshold) {
        y_half_used = std::move(y_half_t);
        z_prev = cur.z;
        Bz_prev = cur.Bz;
        cur = std::move(trial);
        tau_accepted = tau;
        done = true;
      } else if (backtracks == config.i_max) {
        // Nominal ADMM fallback.
        Evaluated fb;
        if (nominal) {
          fb = std::move(*nominal);
          nominal.reset();
        } else if (cached) {
          fb.x = x_bar;
          fb.Ax = Ax_bar;
          fb.f = f_bar;
          fb.y = ybar_new;
          try {
            fb.z = problem.argmin_z(fb.x, fb.y, beta);
          } catch (const std::exception& e) {
            throw OracleError("z-step", e.what());
          }
          ++report.counters.prox2;
          fb.Bz = problem.B_apply(fb.z);
          fb.g = problem.g_value(fb.z);
          ++report.counters.value2;
          fb.r = fb.Ax + fb.Bz - problem.b;
          fb.L = lagrangian_from_parts(fb.f, fb.g, fb.y, fb.r, beta);
        } else {
          fb = oracle_eval(problem, ybar_half, cur.z, cur.Bz, beta, report.counters);
        }
        y_half_used = ybar_half;
        z_prev = cur.z;
        Bz_prev = cur.Bz;
        cur = std::move(fb);
        tau_accepted = 0.0;
        done = true;
      } else {
        tau *= 0.5;
        ++backtracks;
        if (tau == 0.0)
          throw BacktrackOverflow(
              "tau underflow with unbounded backtracking; c >= D or beta out of range");
      }
    }

    y_half_prev = std::move(y_half_used);
    engine.feed({d, r_first - r_k});
    report.trace.push_back({k_now, rn, merit_before, tau_accepted, backtracks,
                            report.counters.prox1, beta, seconds_since(t0)});
    ++k;
  }

  report.final_state = {cur.x, cur.y, cur.z, cur.r, cur.L};
  report.beta_final = beta;
  if (report.status == SolveStatus::Converged)
    report.certificate = certificate_admm(report.final_state, beta, config,
                                          problem.B_norm, true);
  return report;
}

AdmmSolveReport admm_solve_plain(const AdmmProblem& problem, const Vec& x_init,
                                 const Vec& y_init, const Vec& z_init,
                                 double beta, double lambda, double epsilon,
                                 long max_iters, int pi) {
  const auto t0 = std::chrono::steady_clock::now();
  AdmmSolveReport report;

  Vec Bz_tilde = problem.B_apply(z_init);
  Vec r_prev = problem.A_apply(x_init) + Bz_tilde - problem.b;
  Vec y_half = y_init - beta * (1.0 - lambda) * r_prev;
  Evaluated cur = oracle_eval(problem, y_half, z_init, Bz_tilde, beta,
                              report.counters);

  long k = 0;
  for (;;) {
    const double rn = cur.r.norm();
    check_finite(rn, "residual norm");
    report.trace.push_back({k, rn, cur.L, 1.0, 0,
                            report.counters.prox1, beta, seconds_since(t0)});
    if (beta * rn <= epsilon) {
      report.status = SolveStatus::Converged;
      break;
    }
    if (k >= max_iters) {
      report.status = SolveStatus::MaxIters;
      break;
    }
    y_half = cur.y - beta * (1.0 - lambda) * cur.r;
    const Vec z_tilde = cur.z;
    const Vec Bz = cur.Bz;
    cur = oracle_eval(problem, y_half, z_tilde, Bz, beta, report.counters);
    ++k;
  }

  report.final_state = {cur.x, cur.y, cur.z, cur.r, cur.L};
  report.beta_final = beta;
  if (report.status == SolveStatus::Converged) {
    AdmmConfig cfg;
    cfg.beta = beta;
    cfg.lambda = lambda;
    cfg.epsilon = epsilon;
    cfg.pi = pi;
    report.certificate = certificate_admm(report.final_state, beta, cfg,
                                          problem.B_norm, true);
  }
  return report;
}

DrsImage admm_to_drs_image(const Vec& x, const Vec& y, const Vec& z,
                           double beta, const LinOp& A_apply,
                           const LinOp& B_apply, const Vec& b) {
  DrsImage img;
  const Vec Ax = A_apply(x);
  img.s = Ax - y / beta;
  img.u = Ax;
  img.v = b - B_apply(z);
  return img;
}

AdmmCertificate certificate_admm(const AdmmTriple& final_state, double beta,
                                 const AdmmConfig& config, double B_norm,
                                 bool converged) {
  if (!converged)
    throw CertificateUnavailable("certificate requires a converged solve");
  AdmmCertificate cert;
  cert.x = final_state.x;
  cert.y = final_state.y;
  cert.z = final_state.z;
  cert.res_norm = final_state.r.norm();
  cert.primal_bound = config.epsilon / beta;
  cert.dual_g_surrogate = beta * B_norm * cert.res_norm;
  cert.dual_g_bound = B_norm * config.epsilon;
  cert.beta = beta;
  cert.epsilon = config.epsilon;
  cert.pi = config.pi;
  return cert;
}

}  // namespace splitls
