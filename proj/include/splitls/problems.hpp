#ifndef SPLITLS_PROBLEMS_HPP
#define SPLITLS_PROBLEMS_HPP

#include <cstdint>
#include <vector>

#include "splitls/admm.hpp"
#include "splitls/oracle.hpp"
#include "splitls/scalar_prox.hpp"

namespace splitls {

/// min 0.5|Ax-b|^2 + reg |x|_{1/2}^{1/2}
struct SparseLsqSpec {
  Mat A;
  Vec b;
  double reg = 0.1;
  std::uint64_t seed = 0;
};

/// max (1/2m)|Wx|^2 s.t. |x|=1, nnz(x) <= k, solved as the minimization of
/// -(1/2m)|Wx|^2 + indicator of the sparse sphere.
struct SpcaSpec {
  Mat W;  // zero-mean columns
  Eigen::Index k = 1;
  std::uint64_t seed = 0;
};

/// Consensus form of SpcaSpec: W split into `agents` row blocks.
struct ConsensusSpcaSpec {
  SpcaSpec base;
  int agents = 1;
  std::vector<Eigen::Index> rows_per_agent;  // sums to W.rows()
};

/// Finite-horizon linear-quadratic tracking with a hard input box and a soft
/// state corridor. Q and R are kept diagonal: the identity-Hessian scaling is
/// a diagonal change of variables, which preserves separability of the
/// constraint term.
struct MpcSpec {
  Mat A_d, B_d;       // discrete dynamics
  Vec Q_diag, R_diag; // diagonal cost weights, > 0
  Vec x_ref;
  int horizon = 10;
  double u_lo = -1.0, u_hi = 1.0;
  Vec soft_kappa;  // per state coordinate; 0 disables the penalty
  Vec soft_rho;    // corridor half-width per state coordinate
  Vec x0;
};

SplitProblem build_sparse_lsq(const SparseLsqSpec& spec);

/// gamma_hint prebuilds the factorization cache and is rejected when the
/// factorized matrix would lose positive definiteness (gamma_hint >= m/|W|^2).
SplitProblem build_spca(const SpcaSpec& spec, double gamma_hint);

/// ADMM oracles for the consensus form: per-agent x-systems with cached
/// factorizations, z-step = sparse-sphere projection of the agent average of
/// x_i + y_i/beta. Rejects beta <= L_Af.
AdmmProblem build_consensus_spca(const ConsensusSpcaSpec& spec, double beta);

/// The same consensus problem in DRS variables (phi1 = blockwise quadratic,
/// phi2 = consensus-and-sphere indicator); used by the equivalence harness.
SplitProblem build_consensus_spca_drs(const ConsensusSpcaSpec& spec,
                                      double gamma_hint);

/// Pieces of the scaled MPC problem exposed for testing: the scaled equality
/// system G w = e, the linear cost term h, the diagonal scaling D, and slot
/// layout. phi1(w) = 0.5|w|^2 + <h,w> + c0 + indicator(Gw = e).
struct MpcArtifacts {
  Mat G;
  Vec e, h, D;
  double c0 = 0.0;
  Eigen::Index n_u = 0, n_x = 0;
  int horizon = 0;
};

SplitProblem build_mpc(const MpcSpec& spec, MpcArtifacts* artifacts = nullptr);

// Synthetic generators; reproducible from the seed.
SparseLsqSpec make_sparse_lsq_spec(Eigen::Index m, Eigen::Index n,
                                   Eigen::Index k_nonzeros, double reg,
                                   std::uint64_t seed);
SpcaSpec make_spca_spec(Eigen::Index m, Eigen::Index n, Eigen::Index k,
                        std::uint64_t seed);
ConsensusSpcaSpec make_consensus_spca_spec(Eigen::Index m, Eigen::Index n,
                                           Eigen::Index k, int agents,
                                           std::uint64_t seed);
/// Double integrator (dt = 0.1) with box inputs and a soft position corridor.
MpcSpec make_double_integrator_mpc(int horizon = 10);

/// Largest singular value (dense, desk scale).
double spectral_norm(const Mat& A);

}  // namespace splitls

#endif
