#pragma once

// Classical versions of Markov q-Gaussian processes: inverse-CDF sampling of
// the marginals nu_q(dx/lambda) and of the transition kernels, Markov-chain
// path ensembles, and the comparison of time-ordered moments computed in the
// Fock space, by nested quadrature and by Monte Carlo.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qgauss/kernels.hpp"
#include "qgauss/processes.hpp"

namespace qgauss {

/// Engine for stream `index` of the master seed (seed_seq of both words).
std::mt19937_64 stream_engine(std::uint64_t master_seed, std::uint64_t index);
/// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform01(std::mt19937_64& engine);

/// Quantile function of nu_q(dx/lambda). The marginal is parametrized by the
/// angle psi in [0, pi], x = lambda 2 cos(psi)/sqrt(1-q); the CDF in psi is
/// tabulated at kPoints equally spaced angles (8-point Gauss-Legendre per
/// interval) and inverted with a monotone cubic (PCHIP) interpolant.
class InverseCdfTable {
public:
  static constexpr std::size_t kPoints = 2049;

  InverseCdfTable(QParam q, double lambda);

  /// Quantile of the scaled marginal at u in [0, 1].
  double operator()(double u) const;
  /// Angle psi with nu_q([edge cos(psi), edge]) = u, so that the quantile at
  /// u is -edge cos(psi).
  double angle(double u) const;

  const std::vector<double>& angles() const noexcept { return angles_; }
  const std::vector<double>& cumulative() const noexcept { return cumulative_; }
  double edge() const noexcept { return edge_; }

private:
  double edge_;
  std::vector<double> angles_;
  std::vector<double> cumulative_;
  std::function<double(double)> quantile_;  // PCHIP in (cumulative, angle)
};

/// CDF of nu_q(dx/lambda) at x, by composite Gauss-Legendre in the angle.
double marginal_cdf(QParam q, double lambda, double x);

std::vector<double> sample_marginal(QParam q, double lambda, std::size_t n, std::uint64_t seed);

/// Exact inverse-CDF sampling of y -> k(x, dy) for one transition. The
/// conditional density in the target angle is integrated per x with
/// composite 8-point Gauss-Legendre (panel count growing like 1/(1-|r|)) and
/// inverted inside the selected panel through the degree-7 interpolant.
class ConditionalSampler {
public:
  ConditionalSampler(QParam q, const LambdaTriple& lambdas);

  const LambdaTriple& lambdas() const noexcept { return lambdas_; }
  std::size_t panels() const noexcept { return panels_; }
  /// Draw for uniform u in [0, 1); x must lie in the source support.
  double operator()(double x, double u) const;

private:
  QParam q_;
  LambdaTriple lambdas_;
  MehlerKernel mehler_;
  double source_edge_;
  double target_edge_;
  std::size_t panels_;
  std::vector<double> cos_;     // per panel node
  std::vector<double> sin_;
  std::vector<double> weight_;  // GL weight times angle density, panel-local scale
};

std::vector<double> sample_transition(double x, const TransitionKernel& kernel, std::size_t n, std::uint64_t seed);

struct PathEnsemble {
  std::vector<double> times;
  Matrix paths;  ///< n_paths x n_times
  std::uint64_t seed = 0;
  std::string kind;
  double q = 0.0;

  std::size_t n_paths() const noexcept { return static_cast<std::size_t>(paths.rows()); }
  /// Header comment, column header t_0..t_{n-1}, one row per path.
  void write_csv(std::ostream& out) const;
};

/// Markov-chain sampling: the marginal at the first positive-variance time,
/// then the transition kernel from the last positive-variance time. Times
/// with zero variance are exact zeros. When `prepend_origin` is set a t = 0
/// column of zeros is added in front (BM only). Path i uses
/// stream_engine(seed, i). NotMarkovError for covariances failing is_markov
/// on the grid.
PathEnsemble sample_paths(const Covariance& c, QParam q, std::span<const double> times, std::size_t n_paths,
                          std::uint64_t seed, bool prepend_origin = false);

struct MomentEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

/// Sample mean and standard error of prod_i X_{t_i}^{k_i} over the ensemble.
MomentEstimate empirical_moment(const PathEnsemble& ensemble, std::span<const unsigned> exponents);

struct ClassicalVersionReport {
  std::string kind;
  double q = 0.0;
  std::vector<double> times;
  std::vector<unsigned> exponents;
  double fock = 0.0;
  double quadrature = 0.0;
  double mc = 0.0;
  double mc_stderr = 0.0;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;

  double quadrature_error() const noexcept { return std::abs(fock - quadrature); }
  /// |fock - mc| / mc_stderr (0 when both vanish).
  double mc_z() const noexcept;
};

/// Time-ordered moment E[X_{t_1}^{k_1} ... X_{t_n}^{k_n}] three ways: Fock
/// vacuum moment of the embedded process, nested kernel quadrature, and a
/// path ensemble (skipped for n_paths = 0).
ClassicalVersionReport classical_version_report(const Covariance& c, QParam q, std::span<const double> times,
                                                std::span<const unsigned> exponents, std::size_t n_paths,
                                                std::uint64_t seed, unsigned quad_points = kDefaultQuadPoints);

/// One-sample Kolmogorov-Smirnov statistic sup |F_n - F|.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);
/// Asymptotic 1% critical value 1.628/sqrt(n).
double ks_critical_1pct(std::size_t n);

}  // namespace qgauss
