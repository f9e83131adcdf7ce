#include "splitls/problems.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numeric>
#include <random>

namespace splitls {

namespace {

/// Factorization cache keyed on the step parameter. Rebuilds are rare (only
/// adaptive runs change the key) and guarded for shared use. LU rather than
/// Cholesky: adaptive runs may transiently visit steps where the system is
/// indefinite, and the stationary-point solve is what lets the guard detect
/// the missing decrease and retune.
struct LltCache {
  std::mutex mutex;
  double key = -1.0;
  Eigen::PartialPivLU<Mat> lu;
};

Vec solve_cached(const std::shared_ptr<LltCache>& cache, double key,
                 const std::function<Mat(double)>& matrix_for, const Vec& rhs,
                 const char* stage) {
  std::lock_guard<std::mutex> lock(cache->mutex);
  if (cache->key != key) {
    cache->lu.compute(matrix_for(key));
    cache->key = key;
  }
  const Vec out = cache->lu.solve(rhs);
  if (!out.allFinite()) throw OracleError(stage, "linear solve failed (singular system)");
  return out;
}

long nonzeros(const Vec& x) {
  long nnz = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x[i] != 0.0) ++nnz;
  return nnz;
}

bool on_sparse_sphere(const Vec& x, Eigen::Index k, double tol = 1e-7) {
  return std::abs(x.norm() - 1.0) <= tol && nonzeros(x) <= k;
}

std::vector<Eigen::Index> block_offsets(const std::vector<Eigen::Index>& sizes) {
  std::vector<Eigen::Index> off(sizes.size() + 1, 0);
  for (std::size_t i = 0; i < sizes.size(); ++i) off[i + 1] = off[i] + sizes[i];
  return off;
}

}  // namespace

double spectral_norm(const Mat& A) {
  return Eigen::BDCSVD<Mat>(A).singularValues()(0);
}

SplitProblem build_sparse_lsq(const SparseLsqSpec& spec) {
  const Eigen::Index n = spec.A.cols();
  auto A = std::make_shared<Mat>(spec.A);
  auto b = std::make_shared<Vec>(spec.b);
  auto AtA = std::make_shared<Mat>(spec.A.transpose() * spec.A);
  auto Atb = std::make_shared<Vec>(spec.A.transpose() * spec.b);
  auto cache = std::make_shared<LltCache>();
  const double L = spectral_norm(spec.A);
  const double reg = spec.reg;

  SplitProblem p;
  p.dim = n;
  p.regime = Regime::smooth(L * L, /*phi1_convex=*/true);

  p.phi1.is_generalized_quadratic = true;
  p.phi1.value = [A, b](const Vec& x) { return 0.5 * (*A * x - *b).squaredNorm(); };
  p.phi1.prox = [AtA, Atb, cache, n](const Vec& x, double gamma) {
    auto matrix_for = [&](double g) { return Mat(*AtA + Mat::Identity(n, n) / g); };
    return solve_cached(cache, gamma, matrix_for, *Atb + x / gamma, "phi1");
  };

  p.phi2.value = [reg](const Vec& x) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) s += std::sqrt(std::abs(x[i]));
    return reg * s;
  };
  p.phi2.prox = [reg](const Vec& x, double gamma) {
    return prox_l_half(x, gamma * reg);
  };
  return p;
}

SplitProblem build_spca(const SpcaSpec& spec, double gamma_hint) {
  const Eigen::Index m = spec.W.rows();
  const Eigen::Index n = spec.W.cols();
  const double W_norm = spectral_norm(spec.W);
  const double L = W_norm * W_norm / static_cast<double>(m);
  if (gamma_hint >= 1.0 / L)
    throw ConfigError("build_spca: gamma_hint >= m/|W|^2, prox system not PD");

  auto W = std::make_shared<Mat>(spec.W);
  auto cache = std::make_shared<LltCache>();
  const bool woodbury = m <= n;
  const Eigen::Index k = spec.k;
  const double md = static_cast<double>(m);

  SplitProblem p;
  p.dim = n;
  p.regime = Regime::smooth(L, /*phi1_convex=*/false);

  p.phi1.is_generalized_quadratic = true;
  p.phi1.value = [W, md](const Vec& x) { return -0.5 / md * (*W * x).squaredNorm(); };
  if (woodbury) {
    p.phi1.prox = [W, cache, md, m](const Vec& x, double gamma) {
      auto matrix_for = [&](double g) {
        return Mat((md / g) * Mat::Identity(m, m) - *W * W->transpose());
      };
      const Vec Wx = *W * x;
      return Vec(x + W->transpose() * solve_cached(cache, gamma, matrix_for, Wx, "phi1"));
    };
  } else {
    p.phi1.prox = [W, cache, md, n](const Vec& x, double gamma) {
      auto matrix_for = [&](double g) {
        return Mat(Mat::Identity(n, n) - (g / md) * (W->transpose() * *W));
      };
      return solve_cached(cache, gamma, matrix_for, x, "phi1");
    };
  }
  p.phi1.prox(Vec::Zero(n), gamma_hint);  // prebuild the factorization

  p.phi2.value = [k](const Vec& x) { return on_sparse_sphere(x, k) ? 0.0 : kInf; };
  p.phi2.prox = [k](const Vec& x, double) { return project_sparse_sphere(x, k); };
  return p;
}

namespace {

struct ConsensusData {
  std::vector<Mat> W;                       // per-agent row blocks
  std::vector<std::shared_ptr<LltCache>> caches;
  std::vector<Eigen::Index> offsets;
  Eigen::Index n = 0;
  double m_total = 0.0;
  double L_Af = 0.0;

  Vec agent_solve(int i, const Vec& rhs, double step_key, bool as_beta) const {
    // Solves (I - (1/(m beta)) Wi' Wi) x = rhs via the smaller-side system;
    // with gamma = 1/beta the same factorization serves the DRS formulation.
    const Mat& Wi = W[static_cast<std::size_t>(i)];
    const double mb = as_beta ? m_total * step_key : m_total / step_key;
    const Eigen::Index mi = Wi.rows();
    auto matrix_for = [&](double) {
      return Mat(mb * Mat::Identity(mi, mi) - Wi * Wi.transpose());
    };
    const Vec Wr = Wi * rhs;
    return rhs + Wi.transpose() *
                     solve_cached(caches[static_cast<std::size_t>(i)], mb,
                                  matrix_for, Wr, "x-step");
  }
};

std::shared_ptr<ConsensusData> make_consensus_data(const ConsensusSpcaSpec& spec) {
  auto data = std::make_shared<ConsensusData>();
  data->n = spec.base.W.cols();
  data->m_total = static_cast<double>(spec.base.W.rows());
  std::vector<Eigen::Index> sizes = spec.rows_per_agent;
  if (sizes.empty()) {
    const Eigen::Index m = spec.base.W.rows();
    const Eigen::Index base = m / spec.agents;
    for (int i = 0; i < spec.agents; ++i)
      sizes.push_back(base + (i < m % spec.agents ? 1 : 0));
  }
  Eigen::Index row = 0;
  for (Eigen::Index sz : sizes) {
    data->W.push_back(spec.base.W.middleRows(row, sz));
    data->caches.push_back(std::make_shared<LltCache>());
    const double norm = spectral_norm(data->W.back());
    data->L_Af = std::max(data->L_Af, norm * norm / data->m_total);
    row += sz;
  }
  if (row != spec.base.W.rows())
    throw ConfigError("consensus row partition does not cover W");
  data->offsets = block_offsets(sizes);
  return data;
}

}  // namespace

AdmmProblem build_consensus_spca(const ConsensusSpcaSpec& spec, double beta) {
  auto data = make_consensus_data(spec);
  if (beta <= data->L_Af)
    throw ConfigError("build_consensus_spca: beta <= L_Af violates the penalty bound");
  const int N = static_cast<int>(data->W.size());
  const Eigen::Index n = data->n;
  const Eigen::Index k = spec.base.k;
  const double md = data->m_total;

  AdmmProblem p;
  p.dim_x = n * N;
  p.dim_y = n * N;
  p.dim_z = n;
  p.b = Vec::Zero(n * N);
  p.regime = Regime::smooth(data->L_Af, /*f_convex=*/false);
  p.A_norm = 1.0;
  p.B_norm = std::sqrt(static_cast<double>(N));
  p.f_generalized_quadratic = true;

  p.A_apply = [](const Vec& x) { return x; };
  p.B_apply = [N, n](const Vec& z) {
    Vec out(n * N);
    for (int i = 0; i < N; ++i) out.segment(i * n, n) = -z;
    return out;
  };

  p.f_value = [data, md, n, N](const Vec& x) {
    double val = 0.0;
    for (int i = 0; i < N; ++i)
      val += -0.5 / md * (data->W[static_cast<std::size_t>(i)] * x.segment(i * n, n))
                              .squaredNorm();
    return val;
  };
  p.g_value = [k](const Vec& z) { return on_sparse_sphere(z, k) ? 0.0 : kInf; };

  // Agent subproblems are independent given (y, z); order is immaterial and
  // results are merged by agent index.
  p.argmin_x = [data, n, N](const Vec& y, const Vec& z, double beta_now) {
    Vec x(n * N);
    for (int i = 0; i < N; ++i) {
      const Vec rhs = z - y.segment(i * n, n) / beta_now;
      x.segment(i * n, n) = data->agent_solve(i, rhs, beta_now, /*as_beta=*/true);
    }
    return x;
  };
  p.argmin_z = [k, n, N](const Vec& x, const Vec& y, double beta_now) {
    Vec avg = Vec::Zero(n);
    for (int i = 0; i < N; ++i)
      avg += x.segment(i * n, n) + y.segment(i * n, n) / beta_now;
    avg /= static_cast<double>(N);
    return project_sparse_sphere(avg, k);
  };
  return p;
}

SplitProblem build_consensus_spca_drs(const ConsensusSpcaSpec& spec,
                                      double gamma_hint) {
  auto data = make_consensus_data(spec);
  if (gamma_hint >= 1.0 / data->L_Af)
    throw ConfigError("build_consensus_spca_drs: gamma_hint >= 1/L_Af");
  const int N = static_cast<int>(data->W.size());
  const Eigen::Index n = data->n;
  const Eigen::Index k = spec.base.k;
  const double md = data->m_total;

  SplitProblem p;
  p.dim = n * N;
  p.regime = Regime::smooth(data->L_Af, /*phi1_convex=*/false);

  p.phi1.is_generalized_quadratic = true;
  p.phi1.value = [data, md, n, N](const Vec& s) {
    double val = 0.0;
    for (int i = 0; i < N; ++i)
      val += -0.5 / md * (data->W[static_cast<std::size_t>(i)] * s.segment(i * n, n))
                              .squaredNorm();
    return val;
  };
  p.phi1.prox = [data, n, N](const Vec& s, double gamma) {
    Vec u(n * N);
    for (int i = 0; i < N; ++i)
      u.segment(i * n, n) =
          data->agent_solve(i, s.segment(i * n, n), gamma, /*as_beta=*/false);
    return u;
  };

  // phi2 is the indicator of {s : all blocks equal, block in the sparse sphere}.
  p.phi2.value = [k, n, N](const Vec& s) {
    const Vec z = s.segment(0, n);
    for (int i = 1; i < N; ++i)
      if ((s.segment(i * n, n) - z).norm() > 1e-7 * (1.0 + z.norm())) return kInf;
    return on_sparse_sphere(z, k) ? 0.0 : kInf;
  };
  p.phi2.prox = [k, n, N](const Vec& s, double) {
    Vec avg = Vec::Zero(n);
    for (int i = 0; i < N; ++i) avg += s.segment(i * n, n);
    avg /= static_cast<double>(N);
    const Vec z = project_sparse_sphere(avg, k);
    Vec out(n * N);
    for (int i = 0; i < N; ++i) out.segment(i * n, n) = z;
    return out;
  };
  return p;
}

SplitProblem build_mpc(const MpcSpec& spec, MpcArtifacts* artifacts) {
  const Eigen::Index n_x = spec.A_d.rows();
  const Eigen::Index n_u = spec.B_d.cols();
  const int N = spec.horizon;
  const Eigen::Index dim = N * (n_u + n_x);
  if (spec.B_d.rows() != n_x || spec.A_d.cols() != n_x)
    throw ConfigError("build_mpc: dynamics dimensions inconsistent");
  if (spec.Q_diag.size() != n_x || spec.R_diag.size() != n_u)
    throw ConfigError("build_mpc: Q/R diagonal sizes inconsistent");
  if ((spec.Q_diag.array() <= 0).any() || (spec.R_diag.array() <= 0).any())
    throw ConfigError("build_mpc: Q and R must be positive definite");
  if (spec.soft_kappa.size() != n_x || spec.soft_rho.size() != n_x)
    throw ConfigError("build_mpc: soft constraint sizes inconsistent");

  // Variable layout: z = (u_0..u_{N-1}, x_1..x_N). Scale w = D z so the
  // quadratic cost becomes 0.5|w|^2 (identity Hessian, mu = 1).
  Vec D(dim), h = Vec::Zero(dim);
  for (int i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < n_u; ++j)
      D[i * n_u + j] = std::sqrt(2.0 * spec.R_diag[j]);
  const Eigen::Index x_base = N * n_u;
  double c0 = 0.0;
  for (int i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < n_x; ++j) {
      const Eigen::Index idx = x_base + i * n_x + j;
      D[idx] = std::sqrt(2.0 * spec.Q_diag[j]);
      h[idx] = -2.0 * spec.Q_diag[j] * spec.x_ref[j] / D[idx];
    }
  c0 = static_cast<double>(N) * spec.x_ref.dot(spec.Q_diag.cwiseProduct(spec.x_ref));

  // Dynamics x_{i+1} = A x_i + B u_i as G z = e, then scaled G <- G D^{-1}.
  Mat G = Mat::Zero(N * n_x, dim);
  Vec e = Vec::Zero(N * n_x);
  for (int i = 0; i < N; ++i) {
    G.block(i * n_x, x_base + i * n_x, n_x, n_x) = Mat::Identity(n_x, n_x);
    G.block(i * n_x, i * n_u, n_x, n_u) = -spec.B_d;
    if (i == 0)
      e.segment(0, n_x) = spec.A_d * spec.x0;
    else
      G.block(i * n_x, x_base + (i - 1) * n_x, n_x, n_x) = -spec.A_d;
  }
  for (Eigen::Index j = 0; j < dim; ++j) G.col(j) /= D[j];

  auto Gs = std::make_shared<Mat>(G);
  auto es = std::make_shared<Vec>(e);
  auto hs = std::make_shared<Vec>(h);
  auto schur = std::make_shared<Eigen::LLT<Mat>>();
  schur->compute(G * G.transpose());
  if (schur->info() != Eigen::Success)
    throw OracleError("phi1", "singular KKT system (dynamics constraints rank-deficient)");

  SplitProblem p;
  p.dim = dim;
  p.regime = Regime::strongly_convex(1.0);

  p.phi1.is_generalized_quadratic = true;
  p.phi1.value = [Gs, es, hs, c0](const Vec& w) {
    if ((*Gs * w - *es).norm() > 1e-8 * (1.0 + es->norm())) return kInf;
    return 0.5 * w.squaredNorm() + hs->dot(w) + c0;
  };
  p.phi1.prox = [Gs, es, hs, schur](const Vec& pnt, double gamma) {
    // Equality-constrained proximal QP via the cached Schur complement of the
    // KKT system; G G' is gamma-independent.
    const Vec rhs = (*Gs * (pnt - gamma * *hs) - (1.0 + gamma) * *es) / gamma;
    const Vec nu = schur->solve(rhs);
    return Vec((pnt - gamma * *hs - gamma * (Gs->transpose() * nu)) / (1.0 + gamma));
  };

  struct SoftSpec {
    Vec lo, hi;        // scaled input box per coordinate (inf elsewhere)
    Vec rho, kappa;    // scaled corridor per coordinate (0 kappa disables)
    Eigen::Index u_count = 0;
  };
  auto soft = std::make_shared<SoftSpec>();
  soft->lo = Vec::Constant(dim, -kInf);
  soft->hi = Vec::Constant(dim, kInf);
  soft->rho = Vec::Zero(dim);
  soft->kappa = Vec::Zero(dim);
  soft->u_count = x_base;
  for (Eigen::Index j = 0; j < x_base; ++j) {
    soft->lo[j] = spec.u_lo * D[j];
    soft->hi[j] = spec.u_hi * D[j];
  }
  for (int i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < n_x; ++j) {
      const Eigen::Index idx = x_base + i * n_x + j;
      soft->rho[idx] = spec.soft_rho[j] * D[idx];
      soft->kappa[idx] = spec.soft_kappa[j] / D[idx];
    }

  p.phi2.value = [soft](const Vec& w) {
    double val = 0.0;
    for (Eigen::Index j = 0; j < soft->u_count; ++j) {
      const double slack = 1e-12 * (1.0 + std::abs(soft->hi[j]) + std::abs(soft->lo[j]));
      if (w[j] < soft->lo[j] - slack || w[j] > soft->hi[j] + slack) return kInf;
    }
    for (Eigen::Index j = soft->u_count; j < w.size(); ++j)
      val += soft->kappa[j] * std::max(0.0, std::abs(w[j]) - soft->rho[j]);
    return val;
  };
  p.phi2.prox = [soft](const Vec& w, double gamma) {
    Vec out(w.size());
    for (Eigen::Index j = 0; j < soft->u_count; ++j)
      out[j] = prox_box_scalar(w[j], soft->lo[j], soft->hi[j]);
    for (Eigen::Index j = soft->u_count; j < w.size(); ++j)
      out[j] = prox_soft_corridor_scalar(w[j], soft->rho[j], soft->kappa[j], gamma);
    return out;
  };

  if (artifacts) {
    artifacts->G = G;
    artifacts->e = e;
    artifacts->h = h;
    artifacts->D = D;
    artifacts->c0 = c0;
    artifacts->n_u = n_u;
    artifacts->n_x = n_x;
    artifacts->horizon = N;
  }
  return p;
}

SparseLsqSpec make_sparse_lsq_spec(Eigen::Index m, Eigen::Index n,
                                   Eigen::Index k_nonzeros, double reg,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  SparseLsqSpec spec;
  spec.seed = seed;
  spec.reg = reg;
  spec.A.resize(m, n);
  const double sigma = 1.0 / std::sqrt(static_cast<double>(m));
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) spec.A(i, j) = sigma * gauss(rng);
  std::vector<Eigen::Index> support(static_cast<std::size_t>(n));
  std::iota(support.begin(), support.end(), 0);
  std::shuffle(support.begin(), support.end(), rng);
  Vec xhat = Vec::Zero(n);
  for (Eigen::Index j = 0; j < k_nonzeros; ++j)
    xhat[support[static_cast<std::size_t>(j)]] = gauss(rng);
  spec.b = spec.A * xhat;
  return spec;
}

SpcaSpec make_spca_spec(Eigen::Index m, Eigen::Index n, Eigen::Index k,
                        std::uint64_t seed) {
  // Gaussian noise plus a planted sparse leading direction, columns centered.
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  SpcaSpec spec;
  spec.seed = seed;
  spec.k = k;
  Vec v = Vec::Zero(n);
  std::vector<Eigen::Index> support(static_cast<std::size_t>(n));
  std::iota(support.begin(), support.end(), 0);
  std::shuffle(support.begin(), support.end(), rng);
  for (Eigen::Index j = 0; j < k; ++j)
    v[support[static_cast<std::size_t>(j)]] = gauss(rng);
  v.normalize();
  spec.W.resize(m, n);
  const double noise = 1.0 / std::sqrt(static_cast<double>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    const double gi = gauss(rng);
    for (Eigen::Index j = 0; j < n; ++j)
      spec.W(i, j) = gi * v[j] + noise * gauss(rng);
  }
  spec.W.rowwise() -= spec.W.colwise().mean();
  return spec;
}

ConsensusSpcaSpec make_consensus_spca_spec(Eigen::Index m, Eigen::Index n,
                                           Eigen::Index k, int agents,
                                           std::uint64_t seed) {
  ConsensusSpcaSpec spec;
  spec.base = make_spca_spec(m, n, k, seed);
  spec.agents = agents;
  return spec;
}

MpcSpec make_double_integrator_mpc(int horizon) {
  const double dt = 0.1;
  MpcSpec spec;
  spec.A_d.resize(2, 2);
  spec.A_d << 1.0, dt, 0.0, 1.0;
  spec.B_d.resize(2, 1);
  spec.B_d << 0.5 * dt * dt, dt;
  spec.Q_diag = (Vec(2) << 1.0, 0.1).finished();
  spec.R_diag = (Vec(1) << 0.1).finished();
  spec.x_ref = Vec::Zero(2);
  spec.horizon = horizon;
  spec.u_lo = -1.0;
  spec.u_hi = 1.0;
  spec.soft_kappa = (Vec(2) << 5.0, 0.0).finished();
  spec.soft_rho = (Vec(2) << 1.5, 1.0).finished();
  spec.x0 = (Vec(2) << 1.8, 0.0).finished();
  return spec;
}

}  // namespace splitls
