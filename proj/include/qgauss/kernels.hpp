#pragma once

// Transition kernels k_{s,t}(x, dy) = p_{lambda_st}(x/lambda_s, y/lambda_t) nu_q(dy/lambda_t)
// of the classical version of a Markov q-Gaussian process, where nu_q(dy/lambda)
// is the image of nu_q under y -> lambda y. Also: closed forms for q = 0 and
// q = -1, Chapman-Kolmogorov residuals, time-ordered moments by nested
// quadrature, the free OU generator and the ultracontractivity constant.

#include <array>
#include <functional>
#include <span>

#include <Eigen/Dense>

#include "qgauss/processes.hpp"
#include "qgauss/qhermite.hpp"

namespace qgauss {

inline constexpr unsigned kDefaultQuadPoints = 200;

/// 2 lambda / sqrt(1-q): right edge of the support of nu_q(dx/lambda).
double marginal_edge(QParam q, double lambda);

class TransitionKernel {
public:
  /// `rule` is a Gauss rule for the standard nu_q (same q). DomainError for
  /// a mismatched rule or lambda_s, lambda_t <= 0.
  TransitionKernel(QParam q, const LambdaTriple& lambdas, QuadratureRule rule);
  TransitionKernel(QParam q, const LambdaTriple& lambdas, unsigned quad_points = kDefaultQuadPoints);

  static TransitionKernel from_covariance(QParam q, const Covariance& c, double s, double t,
                                          unsigned quad_points = kDefaultQuadPoints);

  QParam q() const noexcept { return q_; }
  const LambdaTriple& lambdas() const noexcept { return lambdas_; }
  const QuadratureRule& rule() const noexcept { return rule_; }
  double source_edge() const noexcept { return source_edge_; }
  double target_edge() const noexcept { return target_edge_; }

  /// |lambda_st| = 1: the kernel is the point mass at deterministic_image(x).
  bool degenerate() const noexcept { return std::abs(lambdas_.lambda_st) == 1.0; }
  /// lambda_st x lambda_t / lambda_s
  double deterministic_image(double x) const noexcept;

  /// Lebesgue density in y; 0 outside the supports. DomainError when degenerate.
  double density(double x, double y) const;

  /// int h(y) k(x, dy) by the kernel's quadrature rule. x is clamped into the
  /// source support when it overshoots by at most 1e-9 (relative), otherwise
  /// DomainError.
  double apply(const std::function<double(double)>& h, double x) const;

  /// M(k, j) = w_j p(u_k, u_j) on the nodes u of the standard rule, so that
  /// (K h)(lambda_s u_k) ~ sum_j M(k, j) h(lambda_t u_j). Degenerate kernels
  /// give the identity or the node reversal.
  Matrix node_matrix() const;

private:
  QParam q_;
  LambdaTriple lambdas_;
  QuadratureRule rule_;
  MehlerKernel mehler_;
  double source_edge_;
  double target_edge_;
  std::vector<double> node_cos_;  // cos(psi_j) of the rule nodes
  std::vector<double> node_sin_;
};

/// Density of k_{s,t}(x, dy) for the covariance c. DomainError when
/// lambda_st = +-1.
double kernel_density(QParam q, const Covariance& c, double s, double t, double x, double y);

/// Free closed forms. DomainError outside the stated supports and time ranges.
double free_bm_kernel(double s, double t, double x, double y);
double free_ou_kernel(double t, double x, double y);
double free_bridge_kernel(double s, double t, double x, double y);

/// q = -1 two-state kernel on {+-sqrt c(s,s)} -> {+-sqrt c(t,t)}.
struct FermionicKernel {
  double source_state = 0.0;  ///< +sqrt c(s,s)
  double target_state = 0.0;  ///< +sqrt c(t,t)
  /// transition(i, j) = P(target j | source i), index 0 = +, 1 = -.
  Eigen::Matrix2d transition;
};

/// P(+|+) = (1 + lambda_st)/2. DomainError for s > t, degenerate marginals,
/// or entries outside [0, 1].
FermionicKernel fermionic_kernel(const Covariance& c, double s, double t);
FermionicKernel fermionic_kernel(CovarianceKind kind, double s, double t);

/// sup over `target_points` equally spaced interior y of
/// |int rho_{s,u}(x,z) rho_{u,t}(z,y) dz - rho_{s,t}(x,y)|.
double chapman_kolmogorov_residual(QParam q, const Covariance& c, double s, double u, double t, double x,
                                   unsigned quad_points = kDefaultQuadPoints, unsigned target_points = 101);

/// E[h_1(X_{t_1}) ... h_n(X_{t_n})] for sorted times by nested quadrature.
/// Each transition acts on node values through the Mehler series truncated at
/// the rule size, which is exact for polynomials up to that degree (the rule
/// grows to total degree + 1 if needed). Times with zero variance contribute
/// h_i(0) and split the chain.
double moment_via_kernels(QParam q, const Covariance& c, std::span<const double> times,
                          std::span<const Polynomial> hs, unsigned quad_points = kDefaultQuadPoints);

/// (N h)(x) = x h'(x) - 2 int (h(y) - h(x) - h'(x)(y-x))/(y-x)^2 nu_0(dy),
/// x in (-2, 2).
double free_ou_generator(const Polynomial& h, double x);

struct AlphaResult {
  double alpha = 0.0;
  double x = 0.0;  ///< maximizer
  double y = 0.0;
};

/// sup_{x,y} p_{e^{-t}}(x, y) by grid search in angle coordinates with three
/// rounds of factor-4 refinement around the running maximizer.
AlphaResult alpha_search(double t, QParam q, unsigned grid_density = 64);
double alpha(double t, QParam q, unsigned grid_density = 64);

}  // namespace qgauss
