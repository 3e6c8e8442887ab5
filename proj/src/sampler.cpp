#include "qgauss/sampler.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>

// Boost 1.74's pchip.hpp calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "qgauss/fock.hpp"

namespace qgauss {

namespace {

constexpr int kGl = 8;

// 8-point Gauss-Legendre on [-1, 1], ascending nodes.
struct GaussLegendre {
  std::array<double, kGl> nodes{};
  std::array<double, kGl> weights{};
  // transform(k, i) = (2k+1)/2 w_i P_k(x_i): nodal values -> Legendre coefficients
  std::array<std::array<double, kGl>, kGl> transform{};

  GaussLegendre() {
    using rule = boost::math::quadrature::gauss<double, kGl>;
    const auto& x = rule::abscissa();
    const auto& w = rule::weights();
    for (int i = 0; i < kGl / 2; ++i) {
      nodes[kGl / 2 - 1 - i] = -x[i];
      nodes[kGl / 2 + i] = x[i];
      weights[kGl / 2 - 1 - i] = w[i];
      weights[kGl / 2 + i] = w[i];
    }
    for (int i = 0; i < kGl; ++i) {
      double prev = 1.0;
      double cur = nodes[i];
      transform[0][i] = 0.5 * weights[i];
      for (int k = 1; k < kGl; ++k) {
        transform[k][i] = (2.0 * k + 1.0) / 2.0 * weights[i] * cur;
        const double next = ((2.0 * k + 1.0) * nodes[i] * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
      }
    }
  }
};

const GaussLegendre& gl() {
  static const GaussLegendre rule;
  return rule;
}

// P_0..P_kGl at x.
std::array<double, kGl + 1> legendre_values(double x) {
  std::array<double, kGl + 1> p{};
  p[0] = 1.0;
  p[1] = x;
  for (int k = 1; k < kGl; ++k) p[k + 1] = ((2.0 * k + 1.0) * x * p[k] - k * p[k - 1]) / (k + 1.0);
  return p;
}

// Solves int_{-1}^{xi} g = target for the degree-7 polynomial g with Legendre
// coefficients c, where int_{-1}^{1} g = total > 0.
double invert_panel(const std::array<double, kGl>& c, double target, double total) {
  double lo = -1.0;
  double hi = 1.0;
  double xi = std::clamp(-1.0 + 2.0 * target / total, -1.0, 1.0);
  for (int iter = 0; iter < 100; ++iter) {
    const auto p = legendre_values(xi);
    double value = c[0] * (xi + 1.0);
    double slope = c[0];
    for (int k = 1; k < kGl; ++k) {
      value += c[k] * (p[k + 1] - p[k - 1]) / (2.0 * k + 1.0);
      slope += c[k] * p[k];
    }
    const double f = value - target;
    if (f > 0.0) hi = xi;
    else lo = xi;
    double next = slope > 0.0 ? xi - f / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - xi) < 1e-15 || hi - lo < 1e-15) return next;
    xi = next;
  }
  return xi;
}

// Shortest representation that round-trips.
std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

}  // namespace

std::mt19937_64 stream_engine(std::uint64_t master_seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

double uniform01(std::mt19937_64& engine) { return static_cast<double>(engine() >> 11) * 0x1.0p-53; }

InverseCdfTable::InverseCdfTable(QParam q, double lambda) {
  if (!(lambda > 0.0)) throw DegenerateMarginalError("InverseCdfTable: lambda must be positive");
  edge_ = marginal_edge(q, lambda);
  const double pi = std::numbers::pi;
  const double h = pi / static_cast<double>(kPoints - 1);
  const auto& rule = gl();
  angles_.resize(kPoints);
  cumulative_.resize(kPoints);
  angles_[0] = 0.0;
  cumulative_[0] = 0.0;
  for (std::size_t k = 1; k < kPoints; ++k) {
    angles_[k] = k == kPoints - 1 ? pi : h * static_cast<double>(k);
    const double mid = 0.5 * (angles_[k - 1] + angles_[k]);
    const double half = 0.5 * (angles_[k] - angles_[k - 1]);
    double mass = 0.0;
    for (int i = 0; i < kGl; ++i) mass += rule.weights[i] * nu_angle_density(q, mid + half * rule.nodes[i]);
    cumulative_[k] = cumulative_[k - 1] + half * mass;
  }
  const double total = cumulative_.back();
  for (double& c : cumulative_) c /= total;
  cumulative_.back() = 1.0;
  // For q near 1 the density is extremely flat at the edges and increments
  // near u = 1 fall below the resolution of doubles; such ties are skipped in
  // the interpolant (they carry less than 1e-16 of the mass).
  std::vector<double> x{cumulative_.front()};
  std::vector<double> y{angles_.front()};
  for (std::size_t k = 1; k < kPoints; ++k) {
    if (cumulative_[k] < cumulative_[k - 1]) throw Error("InverseCdfTable: cumulative values decrease");
    if (cumulative_[k] > x.back()) {
      x.push_back(cumulative_[k]);
      y.push_back(angles_[k]);
    }
  }
  y.back() = std::numbers::pi;
  auto interpolant =
      std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(std::move(x), std::move(y));
  quantile_ = [interpolant](double u) { return (*interpolant)(u); };
}

double InverseCdfTable::angle(double u) const {
  return std::clamp(quantile_(std::clamp(u, 0.0, 1.0)), 0.0, std::numbers::pi);
}

double InverseCdfTable::operator()(double u) const { return -edge_ * std::cos(angle(u)); }

double marginal_cdf(QParam q, double lambda, double x) {
  if (!(lambda > 0.0)) throw DegenerateMarginalError("marginal_cdf: lambda must be positive");
  const double edge = marginal_edge(q, lambda);
  if (x <= -edge) return 0.0;
  if (x >= edge) return 1.0;
  // F(x) = nu_q(psi > angle(x)) = int_{psi_x}^{pi} angle density.
  const double psi_x = support_angle(q, x / lambda);
  constexpr int panels = 256;
  const double width = (std::numbers::pi - psi_x) / panels;
  const auto& rule = gl();
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = psi_x + (p + 0.5) * width;
    double mass = 0.0;
    for (int i = 0; i < kGl; ++i) mass += rule.weights[i] * nu_angle_density(q, mid + 0.5 * width * rule.nodes[i]);
    sum += 0.5 * width * mass;
  }
  return std::clamp(sum, 0.0, 1.0);
}

std::vector<double> sample_marginal(QParam q, double lambda, std::size_t n, std::uint64_t seed) {
  const InverseCdfTable table(q, lambda);
  auto engine = stream_engine(seed, 0);
  std::vector<double> out(n);
  for (double& v : out) v = table(uniform01(engine));
  return out;
}

ConditionalSampler::ConditionalSampler(QParam q, const LambdaTriple& lambdas)
    : q_(q), lambdas_(lambdas), mehler_(q, std::abs(lambdas.lambda_st) < 1.0 ? lambdas.lambda_st : 0.0) {
  if (!(lambdas.lambda_s > 0.0) || !(lambdas.lambda_t > 0.0)) {
    throw DegenerateMarginalError("ConditionalSampler: marginal scales must be positive");
  }
  source_edge_ = marginal_edge(q, lambdas.lambda_s);
  target_edge_ = marginal_edge(q, lambdas.lambda_t);
  const double r = std::abs(lambdas.lambda_st);
  panels_ = r < 1.0 ? static_cast<std::size_t>(std::clamp(std::ceil(8.0 / (1.0 - r)), 32.0, 1024.0)) : 0;
  const double width = std::numbers::pi / static_cast<double>(std::max<std::size_t>(panels_, 1));
  const auto& rule = gl();
  for (std::size_t p = 0; p < panels_; ++p) {
    const double mid = (static_cast<double>(p) + 0.5) * width;
    for (int i = 0; i < kGl; ++i) {
      const double psi = mid + 0.5 * width * rule.nodes[i];
      cos_.push_back(std::cos(psi));
      sin_.push_back(std::sin(psi));
      weight_.push_back(nu_angle_density(q, psi));
    }
  }
}

double ConditionalSampler::operator()(double x, double u) const {
  if (std::abs(x) > source_edge_ * (1.0 + 1e-9)) {
    throw DomainError("ConditionalSampler: x = " + std::to_string(x) + " outside the source support");
  }
  if (panels_ == 0) return lambdas_.lambda_st * x * lambdas_.lambda_t / lambdas_.lambda_s;
  const double phi = support_angle(q_, x / lambdas_.lambda_s);
  const double cp = std::cos(phi);
  const double sp = std::sin(phi);
  const auto& rule = gl();
  const double width = std::numbers::pi / static_cast<double>(panels_);

  std::vector<double> values(panels_ * kGl);
  std::vector<double> masses(panels_);
  double total = 0.0;
  for (std::size_t p = 0; p < panels_; ++p) {
    double mass = 0.0;
    for (int i = 0; i < kGl; ++i) {
      const std::size_t k = p * kGl + i;
      const double a = cp * cos_[k];
      const double b = sp * sin_[k];
      values[k] = mehler_.from_cosines(a - b, a + b) * weight_[k];
      mass += rule.weights[i] * values[k];
    }
    masses[p] = 0.5 * width * mass;
    total += masses[p];
  }

  double target = u * total;
  std::size_t panel = 0;
  while (panel + 1 < panels_ && target > masses[panel]) {
    target -= masses[panel];
    ++panel;
  }
  std::array<double, kGl> coeffs{};
  for (int k = 0; k < kGl; ++k) {
    double c = 0.0;
    for (int i = 0; i < kGl; ++i) c += rule.transform[k][i] * values[panel * kGl + i];
    coeffs[k] = c;
  }
  double xi = -1.0;
  if (masses[panel] > 0.0) {
    // In the local variable the panel integral is (width/2) int g d(xi).
    const double scale = 0.5 * width;
    xi = invert_panel(coeffs, std::clamp(target, 0.0, masses[panel]) / scale, masses[panel] / scale);
  }
  const double psi = (static_cast<double>(panel) + 0.5 * (xi + 1.0)) * width;
  return target_edge_ * std::cos(psi);
}

std::vector<double> sample_transition(double x, const TransitionKernel& kernel, std::size_t n, std::uint64_t seed) {
  const ConditionalSampler sampler(kernel.q(), kernel.lambdas());
  auto engine = stream_engine(seed, 0);
  std::vector<double> out(n);
  for (double& v : out) v = sampler(x, uniform01(engine));
  return out;
}

void PathEnsemble::write_csv(std::ostream& out) const {
  out << "# qgauss paths v1; kind=" << kind << "; q=" << format_double(q) << "; seed=" << seed
      << "; n_paths=" << n_paths() << "\n";
  out << "# times:";
  for (std::size_t j = 0; j < times.size(); ++j) out << (j ? "," : " ") << format_double(times[j]);
  out << "\n";
  for (std::size_t j = 0; j < times.size(); ++j) out << (j ? "," : "") << "t_" << j;
  out << "\n";
  for (Eigen::Index i = 0; i < paths.rows(); ++i) {
    for (Eigen::Index j = 0; j < paths.cols(); ++j) out << (j ? "," : "") << format_double(paths(i, j));
    out << "\n";
  }
}

PathEnsemble sample_paths(const Covariance& c, QParam q, std::span<const double> times, std::size_t n_paths,
                          std::uint64_t seed, bool prepend_origin) {
  if (!std::is_sorted(times.begin(), times.end())) throw DomainError("sample_paths: times must be sorted");
  if (prepend_origin && c.kind() != CovarianceKind::bm) {
    throw DomainError("sample_paths: the origin can only be prepended for bm");
  }
  if (times.size() >= 3) {
    const MarkovReport report = is_markov(c, times);
    if (!report.markov) {
      throw NotMarkovError("sample_paths: covariance '" + c.name() + "' is not Markov on this grid (violation " +
                           std::to_string(report.max_violation) +
                           "); use moment_via_kernels or the Fock moments instead of path sampling");
    }
  }
  PathEnsemble ens;
  ens.seed = seed;
  ens.kind = c.name();
  ens.q = q.value();
  if (prepend_origin) ens.times.push_back(0.0);
  ens.times.insert(ens.times.end(), times.begin(), times.end());
  const std::size_t offset = prepend_origin ? 1 : 0;
  const std::size_t n_times = times.size();
  ens.paths = Matrix::Zero(static_cast<Eigen::Index>(n_paths), static_cast<Eigen::Index>(ens.times.size()));
  if (n_paths == 0 || n_times == 0) return ens;

  // Chain plan: for each time the index of the previous positive-variance
  // time (or npos), with the marginal table or conditional sampler to use.
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::vector<double> variance(n_times);
  for (std::size_t j = 0; j < n_times; ++j) {
    variance[j] = c(times[j], times[j]);
    if (variance[j] < 0.0) throw NotCovarianceError("sample_paths: negative variance");
  }
  std::vector<std::size_t> source(n_times, npos);
  std::vector<std::unique_ptr<InverseCdfTable>> marginals(n_times);
  std::vector<std::unique_ptr<ConditionalSampler>> transitions(n_times);
  std::size_t last = npos;
  for (std::size_t j = 0; j < n_times; ++j) {
    if (variance[j] == 0.0) continue;
    if (last == npos) {
      marginals[j] = std::make_unique<InverseCdfTable>(q, std::sqrt(variance[j]));
    } else {
      source[j] = last;
      transitions[j] = std::make_unique<ConditionalSampler>(q, lambdas(c, times[last], times[j]));
    }
    last = j;
  }

  for (std::size_t i = 0; i < n_paths; ++i) {
    auto engine = stream_engine(seed, i);
    for (std::size_t j = 0; j < n_times; ++j) {
      double value = 0.0;
      if (marginals[j]) {
        value = (*marginals[j])(uniform01(engine));
      } else if (transitions[j]) {
        const double from = ens.paths(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(source[j] + offset));
        value = (*transitions[j])(from, uniform01(engine));
      }
      ens.paths(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j + offset)) = value;
    }
  }
  return ens;
}

MomentEstimate empirical_moment(const PathEnsemble& ensemble, std::span<const unsigned> exponents) {
  if (exponents.size() != ensemble.times.size()) {
    throw DomainError("empirical_moment: one exponent per time column required");
  }
  const Eigen::Index n = ensemble.paths.rows();
  MomentEstimate est;
  if (n == 0) return est;
  Vector values = Vector::Ones(n);
  for (std::size_t j = 0; j < exponents.size(); ++j) {
    if (exponents[j] == 0) continue;
    values = values.cwiseProduct(ensemble.paths.col(static_cast<Eigen::Index>(j)).array().pow(exponents[j]).matrix());
  }
  est.mean = values.mean();
  if (n > 1) {
    const double var = (values.array() - est.mean).square().sum() / static_cast<double>(n - 1);
    est.standard_error = std::sqrt(var / static_cast<double>(n));
  }
  return est;
}

double ClassicalVersionReport::mc_z() const noexcept {
  const double diff = std::abs(fock - mc);
  if (mc_stderr == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / mc_stderr;
}

ClassicalVersionReport classical_version_report(const Covariance& c, QParam q, std::span<const double> times,
                                                std::span<const unsigned> exponents, std::size_t n_paths,
                                                std::uint64_t seed, unsigned quad_points) {
  if (times.size() != exponents.size() || times.empty()) {
    throw DomainError("classical_version_report: one exponent per time required");
  }
  ClassicalVersionReport report;
  report.kind = c.name();
  report.q = q.value();
  report.times.assign(times.begin(), times.end());
  report.exponents.assign(exponents.begin(), exponents.end());
  report.n_paths = n_paths;
  report.seed = seed;

  const std::vector<Vector> fs = embed(c, times);
  std::vector<Vector> word;
  for (std::size_t j = 0; j < times.size(); ++j)
    for (unsigned k = 0; k < exponents[j]; ++k) word.push_back(fs[j]);
  const FockBasis basis(static_cast<int>(fs.front().size()), std::max<int>(static_cast<int>(word.size()), 1));
  report.fock = moment(word, basis, q);

  std::vector<Polynomial> hs;
  for (unsigned k : exponents) hs.push_back(Polynomial::monomial(k));
  report.quadrature = moment_via_kernels(q, c, times, hs, quad_points);

  if (n_paths > 0) {
    const PathEnsemble ens = sample_paths(c, q, times, n_paths, seed);
    const MomentEstimate est = empirical_moment(ens, exponents);
    report.mc = est.mean;
    report.mc_stderr = est.standard_error;
  }
  return report;
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) return 0.0;
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_critical_1pct(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

}  // namespace qgauss
