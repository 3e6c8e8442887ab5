#include "qgauss/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace qgauss {

namespace {

constexpr double kSupportSlack = 1e-9;
constexpr double kClosedFormSlack = 1e-12;

double clamp_to_support(double u, double edge, const char* what) {
  if (std::abs(u) > edge * (1.0 + kSupportSlack)) {
    throw DomainError(std::string(what) + ": point " + std::to_string(u) + " outside the support [-" +
                      std::to_string(edge) + ", " + std::to_string(edge) + "]");
  }
  return std::clamp(u, -edge, edge);
}

void require_closed(double v, double edge, const char* what) {
  if (std::abs(v) > edge * (1.0 + kClosedFormSlack)) {
    throw DomainError(std::string(what) + ": point " + std::to_string(v) + " outside [-" + std::to_string(edge) +
                      ", " + std::to_string(edge) + "]");
  }
}

double semicircle_root(double radius_sq, double y) { return std::sqrt(std::max(radius_sq - y * y, 0.0)); }

double safe_r(const LambdaTriple& l) { return std::abs(l.lambda_st) < 1.0 ? l.lambda_st : 0.0; }

}  // namespace

double marginal_edge(QParam q, double lambda) { return lambda * support_edge(q); }

TransitionKernel::TransitionKernel(QParam q, const LambdaTriple& lambdas, QuadratureRule rule)
    : q_(q), lambdas_(lambdas), rule_(std::move(rule)), mehler_(q, safe_r(lambdas)) {
  if (rule_.q != q.value() || rule_.size() == 0) {
    throw DomainError("TransitionKernel: quadrature rule does not belong to nu_q");
  }
  if (!(lambdas_.lambda_s > 0.0) || !(lambdas_.lambda_t > 0.0)) {
    throw DegenerateMarginalError("TransitionKernel: marginal scales must be positive");
  }
  if (!(std::abs(lambdas_.lambda_st) <= 1.0)) throw DomainError("TransitionKernel: |lambda_st| exceeds 1");
  source_edge_ = marginal_edge(q, lambdas_.lambda_s);
  target_edge_ = marginal_edge(q, lambdas_.lambda_t);
  node_cos_.reserve(rule_.size());
  node_sin_.reserve(rule_.size());
  for (double u : rule_.nodes) {
    const double psi = support_angle(q, u);
    node_cos_.push_back(std::cos(psi));
    node_sin_.push_back(std::sin(psi));
  }
}

TransitionKernel::TransitionKernel(QParam q, const LambdaTriple& lambdas, unsigned quad_points)
    : TransitionKernel(q, lambdas, gauss_quadrature(q, quad_points)) {}

TransitionKernel TransitionKernel::from_covariance(QParam q, const Covariance& c, double s, double t,
                                                   unsigned quad_points) {
  return TransitionKernel(q, qgauss::lambdas(c, s, t), quad_points);
}

double TransitionKernel::deterministic_image(double x) const noexcept {
  return lambdas_.lambda_st * x * lambdas_.lambda_t / lambdas_.lambda_s;
}

double TransitionKernel::density(double x, double y) const {
  if (degenerate()) throw DomainError("TransitionKernel::density: degenerate kernel has no density");
  if (std::abs(x) > source_edge_ || std::abs(y) > target_edge_) return 0.0;
  const double v = y / lambdas_.lambda_t;
  return mehler_(x / lambdas_.lambda_s, v) * nu_density(q_, v) / lambdas_.lambda_t;
}

double TransitionKernel::apply(const std::function<double(double)>& h, double x) const {
  const double xs = clamp_to_support(x, source_edge_, "TransitionKernel::apply");
  if (degenerate()) return h(deterministic_image(xs));
  const double phi = support_angle(q_, xs / lambdas_.lambda_s);
  const double cp = std::cos(phi);
  const double sp = std::sin(phi);
  double sum = 0.0;
  for (std::size_t j = 0; j < rule_.size(); ++j) {
    const double a = cp * node_cos_[j];
    const double b = sp * node_sin_[j];
    sum += rule_.weights[j] * h(lambdas_.lambda_t * rule_.nodes[j]) * mehler_.from_cosines(a - b, a + b);
  }
  return sum;
}

Matrix TransitionKernel::node_matrix() const {
  const Eigen::Index m = static_cast<Eigen::Index>(rule_.size());
  if (degenerate()) {
    Matrix id = Matrix::Identity(m, m);
    return lambdas_.lambda_st > 0.0 ? id : Matrix(id.rowwise().reverse());
  }
  Matrix out(m, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double a = node_cos_[k] * node_cos_[j];
      const double b = node_sin_[k] * node_sin_[j];
      out(k, j) = rule_.weights[j] * mehler_.from_cosines(a - b, a + b);
    }
  }
  return out;
}

double kernel_density(QParam q, const Covariance& c, double s, double t, double x, double y) {
  const LambdaTriple l = lambdas(c, s, t);
  if (std::abs(l.lambda_st) >= 1.0) {
    throw DomainError("kernel_density: lambda_st = +-1, use the deterministic branch");
  }
  const double u = x / l.lambda_s;
  const double v = y / l.lambda_t;
  const double edge = support_edge(q);
  if (std::abs(u) > edge || std::abs(v) > edge) return 0.0;
  return mehler_product(q, l.lambda_st, u, v) * nu_density(q, v) / l.lambda_t;
}

double free_bm_kernel(double s, double t, double x, double y) {
  if (!(0.0 < s && s < t)) throw DomainError("free_bm_kernel: requires 0 < s < t");
  require_closed(x, 2.0 * std::sqrt(s), "free_bm_kernel");
  require_closed(y, 2.0 * std::sqrt(t), "free_bm_kernel");
  const double d = t - s;
  return d / (d * d - (t + s) * x * y + x * x * t + y * y * s) * semicircle_root(4.0 * t, y) /
         (2.0 * std::numbers::pi);
}

double free_ou_kernel(double t, double x, double y) {
  if (!(t > 0.0)) throw DomainError("free_ou_kernel: requires t > 0");
  require_closed(x, 2.0, "free_ou_kernel");
  require_closed(y, 2.0, "free_ou_kernel");
  const double sh = std::sinh(t);
  return std::expm1(2.0 * t) / (4.0 * sh * sh - 2.0 * x * y * std::cosh(t) + x * x + y * y) *
         semicircle_root(4.0, y) / (2.0 * std::numbers::pi);
}

double free_bridge_kernel(double s, double t, double x, double y) {
  if (!(0.0 < s && s < t && t < 1.0)) throw DomainError("free_bridge_kernel: requires 0 < s < t < 1");
  require_closed(x, 2.0 * std::sqrt(s * (1.0 - s)), "free_bridge_kernel");
  require_closed(y, 2.0 * std::sqrt(t * (1.0 - t)), "free_bridge_kernel");
  const double d = t - s;
  const double denom = d * d - (s + t - 2.0 * s * t) * x * y + t * (1.0 - t) * x * x + s * (1.0 - s) * y * y;
  return (1.0 - s) / (1.0 - t) * d / denom * semicircle_root(4.0 * t * (1.0 - t), y) / (2.0 * std::numbers::pi);
}

FermionicKernel fermionic_kernel(const Covariance& c, double s, double t) {
  if (s > t) throw DomainError("fermionic_kernel: requires s <= t");
  const LambdaTriple l = lambdas(c, s, t);
  const double stay = 0.5 * (1.0 + l.lambda_st);
  if (!(stay >= 0.0 && stay <= 1.0)) {
    throw DomainError("fermionic_kernel: transition probabilities leave [0, 1]; not a q = -1 covariance here");
  }
  FermionicKernel k;
  k.source_state = l.lambda_s;
  k.target_state = l.lambda_t;
  const double flip = 1.0 - stay;
  k.transition << stay, flip, flip, stay;
  return k;
}

FermionicKernel fermionic_kernel(CovarianceKind kind, double s, double t) {
  return fermionic_kernel(Covariance::builtin(kind), s, t);
}

double chapman_kolmogorov_residual(QParam q, const Covariance& c, double s, double u, double t, double x,
                                   unsigned quad_points, unsigned target_points) {
  if (!(s <= u && u <= t)) throw DomainError("chapman_kolmogorov_residual: requires s <= u <= t");
  if (target_points == 0) throw DomainError("chapman_kolmogorov_residual: empty target grid");
  const QuadratureRule rule = gauss_quadrature(q, quad_points);
  const TransitionKernel k_su(q, lambdas(c, s, u), rule);
  const TransitionKernel k_ut(q, lambdas(c, u, t), rule);
  const TransitionKernel k_st(q, lambdas(c, s, t), rule);
  const double xs = clamp_to_support(x, k_st.source_edge(), "chapman_kolmogorov_residual");

  if (k_st.degenerate()) {
    const double direct = k_st.deterministic_image(xs);
    if (!k_su.degenerate() || !k_ut.degenerate()) return std::abs(1.0 - std::abs(k_su.lambdas().lambda_st * k_ut.lambdas().lambda_st));
    return std::abs(k_ut.deterministic_image(k_su.deterministic_image(xs)) - direct);
  }

  const double edge = k_st.target_edge();
  double worst = 0.0;
  // int rho_{s,u}(x, z) g(z) dz = int p_{s,u}(x/ls, v) g(lu v) nu_q(dv)
  std::vector<double> first;
  if (!k_su.degenerate() && !k_ut.degenerate()) {
    const MehlerKernel p_su(q, k_su.lambdas().lambda_st);
    const double xu = xs / k_su.lambdas().lambda_s;
    first.reserve(rule.size());
    for (double v : rule.nodes) first.push_back(p_su(xu, v));
  }
  for (unsigned k = 0; k < target_points; ++k) {
    const double y = edge * (-1.0 + 2.0 * (k + 1.0) / (target_points + 1.0));
    const double direct = k_st.density(xs, y);
    double composed = 0.0;
    if (k_su.degenerate()) {
      composed = k_ut.density(k_su.deterministic_image(xs), y);
    } else if (k_ut.degenerate()) {
      // y = m z with m = lambda_ut lambda_t / lambda_u; change of variables.
      const double m = k_ut.deterministic_image(1.0);
      composed = k_su.density(xs, y / m) / std::abs(m);
    } else {
      const double lu = k_su.lambdas().lambda_t;
      for (std::size_t j = 0; j < rule.size(); ++j) {
        composed += rule.weights[j] * first[j] * k_ut.density(lu * rule.nodes[j], y);
      }
    }
    worst = std::max(worst, std::abs(composed - direct));
  }
  return worst;
}

namespace {

// basis(k, n) = sqrt(w_k) H_n(u_k) / sqrt([n]_q!): an orthogonal matrix by
// discrete orthogonality of the Gauss rule.
Matrix orthonormal_hermite_basis(QParam q, const QuadratureRule& rule) {
  const Eigen::Index m = static_cast<Eigen::Index>(rule.size());
  Matrix basis(m, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double u = rule.nodes[k];
    double prev = 0.0;
    double cur = std::sqrt(rule.weights[k]);
    double root_prev = 0.0;
    for (Eigen::Index n = 0; n < m; ++n) {
      basis(k, n) = cur;
      const double root_next = std::sqrt(q_int(static_cast<unsigned>(n + 1), q));
      const double next = (u * cur - root_prev * prev) / root_next;
      prev = cur;
      cur = next;
      root_prev = root_next;
    }
  }
  return basis;
}

}  // namespace

double moment_via_kernels(QParam q, const Covariance& c, std::span<const double> times,
                          std::span<const Polynomial> hs, unsigned quad_points) {
  if (times.size() != hs.size()) throw DomainError("moment_via_kernels: one polynomial per time required");
  if (times.empty()) return 1.0;
  if (!std::is_sorted(times.begin(), times.end())) throw DomainError("moment_via_kernels: times must be sorted");
  std::size_t total_degree = 0;
  for (const Polynomial& h : hs) total_degree += h.degree();
  const QuadratureRule rule =
      gauss_quadrature(q, std::max<unsigned>(quad_points, static_cast<unsigned>(total_degree) + 1));
  const Eigen::Index m = static_cast<Eigen::Index>(rule.size());
  const Vector weights = Eigen::Map<const Vector>(rule.weights.data(), m);
  const Vector root_w = weights.cwiseSqrt();
  const Matrix basis = orthonormal_hermite_basis(q, rule);

  auto values_at = [&](const Polynomial& h, double lambda) {
    Vector v(m);
    for (Eigen::Index k = 0; k < m; ++k) v[k] = h(lambda * rule.nodes[k]);
    return v;
  };
  // Node values of K g from node values of g, g a polynomial of degree <= m:
  // the Mehler series truncated at the rule size is exact there.
  auto transition = [&](double r, const Vector& g) {
    Vector coeffs = basis.transpose() * root_w.cwiseProduct(g);
    double rn = 1.0;
    for (Eigen::Index n = 0; n < m; ++n, rn *= r) coeffs[n] *= rn;
    return Vector((basis * coeffs).cwiseQuotient(root_w));
  };

  // Innermost-out over maximal runs of positive-variance times.
  double total = 1.0;
  std::size_t i = 0;
  const std::size_t n = times.size();
  while (i < n) {
    const double var = c(times[i], times[i]);
    if (var < 0.0) throw NotCovarianceError("moment_via_kernels: negative variance");
    if (var == 0.0) {
      total *= hs[i](0.0);
      ++i;
      continue;
    }
    std::size_t end = i + 1;
    while (end < n && c(times[end], times[end]) > 0.0) ++end;
    Vector v = values_at(hs[end - 1], std::sqrt(c(times[end - 1], times[end - 1])));
    for (std::size_t k = end - 1; k-- > i;) {
      const LambdaTriple l = lambdas(c, times[k], times[k + 1]);
      v = values_at(hs[k], l.lambda_s).cwiseProduct(transition(l.lambda_st, v));
    }
    total *= weights.dot(v);
    i = end;
  }
  return total;
}

double free_ou_generator(const Polynomial& h, double x) {
  if (!(std::abs(x) < 2.0)) throw DomainError("free_ou_generator: x must lie in (-2, 2)");
  // Two synthetic divisions by (y - x) turn the subtracted integrand into the
  // polynomial Q2(y) with h(y) = h(x) + h'(x)(y-x) + (y-x)^2 Q2(y).
  std::vector<double> c = h.coeffs;
  auto deflate = [x](const std::vector<double>& p) {
    if (p.size() <= 1) return std::vector<double>{};
    std::vector<double> out(p.size() - 1);
    double acc = 0.0;
    for (std::size_t k = p.size(); k-- > 1;) {
      acc = p[k] + x * acc;
      out[k - 1] = acc;
    }
    return out;
  };
  const Polynomial q2{deflate(deflate(c))};
  double integral = 0.0;
  if (!q2.coeffs.empty()) {
    const unsigned nodes = static_cast<unsigned>(q2.coeffs.size() / 2 + 1);
    integral = gauss_quadrature(QParam(0.0), nodes).integrate([&](double y) { return q2(y); });
  }
  return x * h.derivative(x) - 2.0 * integral;
}

AlphaResult alpha_search(double t, QParam q, unsigned grid_density) {
  if (!(t > 0.0)) throw DomainError("alpha: requires t > 0");
  if (grid_density < 2) throw DomainError("alpha: grid density must be at least 2");
  const MehlerKernel kernel(q, std::exp(-t));
  const double pi = std::numbers::pi;
  double best = -1.0;
  double best_phi = 0.0;
  double best_psi = 0.0;
  auto scan = [&](double phi_lo, double phi_hi, double psi_lo, double psi_hi, unsigned steps) {
    for (unsigned i = 0; i <= steps; ++i) {
      const double phi = phi_lo + (phi_hi - phi_lo) * i / steps;
      for (unsigned j = 0; j <= steps; ++j) {
        const double psi = psi_lo + (psi_hi - psi_lo) * j / steps;
        const double value = kernel.from_angles(phi, psi);
        if (value > best) {
          best = value;
          best_phi = phi;
          best_psi = psi;
        }
      }
    }
  };
  scan(0.0, pi, 0.0, pi, grid_density);
  double h = pi / grid_density;
  for (int round = 0; round < 3; ++round) {
    const double phi = best_phi;
    const double psi = best_psi;
    scan(std::max(phi - h, 0.0), std::min(phi + h, pi), std::max(psi - h, 0.0), std::min(psi + h, pi), 8);
    h /= 4.0;
  }
  const double edge = support_edge(q);
  return {best, edge * std::cos(best_phi), edge * std::cos(best_psi)};
}

double alpha(double t, QParam q, unsigned grid_density) { return alpha_search(t, q, grid_density).alpha; }

}  // namespace qgauss
