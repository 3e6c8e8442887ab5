#pragma once

// Covariance functions of q-Gaussian processes X_t = omega(f_t), the Markov
// and martingale criteria, the Hilbert-space embedding t -> f_t, and the
// normalized quantities lambda_t, lambda_{s,t}.

#include <array>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qgauss/fock.hpp"
#include "qgauss/qhermite.hpp"

namespace qgauss {

enum class CovarianceKind { bm, bridge, ou, custom };

std::string to_string(CovarianceKind kind);
/// "bm", "bridge", "ou"; DomainError otherwise.
CovarianceKind parse_covariance_kind(const std::string& name);

/// Builtin covariances: min(s,t) on [0,inf), s(1-t) (s <= t) on [0,1] and
/// exp(-|t-s|) on R. DomainError for out-of-domain times or kind custom.
double builtin_covariance(CovarianceKind kind, double s, double t);

/// Symmetric covariance c(s,t) with a time domain.
class Covariance {
public:
  using Evaluator = std::function<double(double, double)>;

  static Covariance builtin(CovarianceKind kind);
  static Covariance custom(std::string name, Evaluator eval, double t_min, double t_max);
  /// Sampled grid of (t_i, t_j, c) triples; symmetric completion is applied
  /// and lookups of times not on the grid throw DomainError.
  static Covariance from_grid(std::string name, const std::vector<std::array<double, 3>>& entries);
  /// Reads a grid CSV: optional '#' comment lines, optional header line
  /// "t_i,t_j,c", then one triple per line. Throws DomainError on malformed
  /// input.
  static Covariance read_grid_csv(std::istream& in, std::string name = "grid");

  double operator()(double s, double t) const;
  CovarianceKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  double t_min() const noexcept { return t_min_; }
  double t_max() const noexcept { return t_max_; }
  /// Grid times of a grid covariance (empty otherwise).
  const std::vector<double>& grid_times() const noexcept { return grid_times_; }

private:
  Covariance(CovarianceKind kind, std::string name, Evaluator eval, double t_min, double t_max)
      : kind_(kind), name_(std::move(name)), eval_(std::move(eval)), t_min_(t_min), t_max_(t_max) {}

  CovarianceKind kind_;
  std::string name_;
  Evaluator eval_;
  double t_min_;
  double t_max_;
  std::vector<double> grid_times_;
};

struct MarkovReport {
  bool markov = true;
  double max_violation = 0.0;  ///< relative violation of c(t,s)c(u,u) = c(t,u)c(u,s)
  std::array<double, 3> worst{};  ///< (s, u, t) attaining max_violation
};

/// Checks c(t,s) c(u,u) = c(t,u) c(u,s) on all s <= u <= t drawn from the
/// sorted grid (length >= 3).
MarkovReport is_markov(const Covariance& c, std::span<const double> grid, double tol = 1e-10);

/// c(s,t) = c(s,s) for all grid s <= t.
bool is_martingale(const Covariance& c, std::span<const double> grid, double tol = 1e-10);

struct LambdaTriple {
  double lambda_s = 0.0;
  double lambda_t = 0.0;
  double lambda_st = 0.0;
};

/// lambda_t = sqrt(c(t,t)), lambda_{s,t} = c(t,s)/(lambda_s lambda_t).
/// DegenerateMarginalError when c(s,s) or c(t,t) vanishes.
LambdaTriple lambdas(const Covariance& c, double s, double t);

/// Vectors f_t with <f_{t_i}, f_{t_j}> = c(t_i, t_j), from the eigen-
/// decomposition of the Gram matrix scaled by its largest diagonal entry.
/// Scaled eigenvalues in (-1e-10, 0) are clipped to zero and directions with
/// scaled eigenvalue below 1e-13 are dropped, so the vectors live in R^rank
/// (rank >= 1), ordered by decreasing eigenvalue. NotCovarianceError below
/// -1e-10.
std::vector<Vector> embed(const Covariance& c, std::span<const double> times);
std::vector<Vector> embed_gram(const Matrix& gram);

/// c(s,t) = g(s) f(t) for s <= t.
struct Factorization {
  std::function<double(double)> g;
  std::function<double(double)> f;
};

/// bm: (s, 1); ou: (e^s, e^{-t}); bridge: (s, 1-t).
Factorization factorize(CovarianceKind kind);

/// sup over quadrature nodes x of the source marginal of
/// |int H_n(y/lambda_t) k_{s,t}(x, dy) - lambda_{s,t}^n H_n(x/lambda_s)|.
double martingale_family_residual(CovarianceKind kind, QParam q, unsigned n, double s, double t,
                                  const QuadratureRule& rule);

}  // namespace qgauss
