#ifndef SPLITLS_TYPES_HPP
#define SPLITLS_TYPES_HPP

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace splitls {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using LinOp = std::function<Vec(const Vec&)>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A prox or argmin sub-oracle failed; `stage` names the offending oracle
/// ("phi1", "phi2", "x-step", "z-step").
struct OracleError : Error {
  OracleError(std::string stage_, const std::string& what_)
      : Error(stage_ + ": " + what_), stage(std::move(stage_)) {}
  std::string stage;
};

/// The merit function (DRE or augmented Lagrangian) evaluated to NaN/inf.
struct NonFiniteMerit : Error {
  using Error::Error;
};

/// tau underflowed to zero with unbounded backtracking; signals a violated
/// assumption (c >= C, or a stepsize outside its regime bound).
struct BacktrackOverflow : Error {
  using Error::Error;
};

/// Adaptive gamma/beta left [1e-12, 1e12]; the declared regime is inconsistent.
struct StepRangeError : Error {
  using Error::Error;
};

struct CertificateUnavailable : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

/// Regime metadata of the smooth term: Assumption-I symbols (L, convexity)
/// or Assumption-I* symbol (mu).
struct Regime {
  enum class Kind { Smooth, StronglyConvex };
  Kind kind = Kind::Smooth;
  double lipschitz = 0.0;  // L of the gradient (Smooth)
  bool convex = false;     // whether the smooth term is convex (Smooth)
  double mu = 0.0;         // strong convexity modulus (StronglyConvex)

  static Regime smooth(double L, bool phi1_convex) {
    Regime r;
    r.kind = Kind::Smooth;
    r.lipschitz = L;
    r.convex = phi1_convex;
    return r;
  }
  static Regime strongly_convex(double mu) {
    Regime r;
    r.kind = Kind::StronglyConvex;
    r.mu = mu;
    r.convex = true;
    return r;
  }
  bool is_smooth() const { return kind == Kind::Smooth; }
};

/// Per-solve oracle call counters. prox1/value1 refer to the phi1 side of a
/// DRS solve or the x-step/f side of an ADMM solve; prox2/value2 to phi2 / z,g.
struct OracleCounters {
  long prox1 = 0;
  long prox2 = 0;
  long value1 = 0;
  long value2 = 0;
};

inline void check_finite(double x, const char* what) {
  if (std::isnan(x)) throw NonFiniteMerit(std::string(what) + " is NaN");
}

}  // namespace splitls

#endif
