#include "qgauss/processes.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "qgauss/kernels.hpp"

namespace qgauss {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPsdTol = 1e-10;
constexpr double kRankTol = 1e-13;

void require_in(double t, double lo, double hi, const char* kind) {
  if (!(t >= lo && t <= hi)) {
    throw DomainError(std::string(kind) + " covariance: time " + std::to_string(t) + " outside [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string to_string(CovarianceKind kind) {
  switch (kind) {
    case CovarianceKind::bm: return "bm";
    case CovarianceKind::bridge: return "bridge";
    case CovarianceKind::ou: return "ou";
    case CovarianceKind::custom: return "custom";
  }
  return "custom";
}

CovarianceKind parse_covariance_kind(const std::string& name) {
  if (name == "bm") return CovarianceKind::bm;
  if (name == "bridge") return CovarianceKind::bridge;
  if (name == "ou") return CovarianceKind::ou;
  throw DomainError("unknown covariance kind '" + name + "' (expected bm, bridge or ou)");
}

double builtin_covariance(CovarianceKind kind, double s, double t) {
  switch (kind) {
    case CovarianceKind::bm:
      require_in(s, 0.0, kInf, "bm");
      require_in(t, 0.0, kInf, "bm");
      return std::min(s, t);
    case CovarianceKind::bridge: {
      require_in(s, 0.0, 1.0, "bridge");
      require_in(t, 0.0, 1.0, "bridge");
      return std::min(s, t) * (1.0 - std::max(s, t));
    }
    case CovarianceKind::ou:
      require_in(s, -kInf, kInf, "ou");
      require_in(t, -kInf, kInf, "ou");
      return std::exp(-std::abs(t - s));
    case CovarianceKind::custom: break;
  }
  throw DomainError("builtin_covariance: kind must be bm, bridge or ou");
}

Covariance Covariance::builtin(CovarianceKind kind) {
  double lo = 0.0;
  double hi = kInf;
  if (kind == CovarianceKind::bridge) hi = 1.0;
  if (kind == CovarianceKind::ou) lo = -kInf;
  if (kind == CovarianceKind::custom) throw DomainError("Covariance::builtin: kind must be bm, bridge or ou");
  return Covariance(kind, to_string(kind), [kind](double s, double t) { return builtin_covariance(kind, s, t); },
                    lo, hi);
}

Covariance Covariance::custom(std::string name, Evaluator eval, double t_min, double t_max) {
  if (!eval) throw DomainError("Covariance::custom: empty evaluator");
  if (!(t_min <= t_max)) throw DomainError("Covariance::custom: empty time domain");
  auto checked = [eval = std::move(eval), t_min, t_max](double s, double t) {
    require_in(s, t_min, t_max, "custom");
    require_in(t, t_min, t_max, "custom");
    return eval(s, t);
  };
  return Covariance(CovarianceKind::custom, std::move(name), std::move(checked), t_min, t_max);
}

Covariance Covariance::from_grid(std::string name, const std::vector<std::array<double, 3>>& entries) {
  if (entries.empty()) throw DomainError("covariance grid is empty");
  auto table = std::make_shared<std::map<std::pair<double, double>, double>>();
  std::vector<double> times;
  for (const auto& [ti, tj, c] : entries) {
    if (!std::isfinite(ti) || !std::isfinite(tj) || !std::isfinite(c)) {
      throw DomainError("covariance grid contains a non-finite entry");
    }
    for (const auto& key : {std::pair{ti, tj}, std::pair{tj, ti}}) {
      auto [it, inserted] = table->emplace(key, c);
      if (!inserted && std::abs(it->second - c) > 1e-12 * std::max(1.0, std::abs(c))) {
        throw DomainError("covariance grid is not symmetric at (" + std::to_string(ti) + ", " +
                          std::to_string(tj) + ")");
      }
    }
    times.push_back(ti);
    times.push_back(tj);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  for (double s : times) {
    for (double t : times) {
      if (!table->contains({s, t})) {
        throw DomainError("covariance grid is missing the entry (" + std::to_string(s) + ", " +
                          std::to_string(t) + ")");
      }
    }
  }
  auto eval = [table](double s, double t) {
    const auto it = table->find({s, t});
    if (it == table->end()) {
      throw DomainError("covariance grid has no entry for (" + std::to_string(s) + ", " + std::to_string(t) + ")");
    }
    return it->second;
  };
  Covariance cov(CovarianceKind::custom, std::move(name), std::move(eval), times.front(), times.back());
  cov.grid_times_ = std::move(times);
  return cov;
}

Covariance Covariance::read_grid_csv(std::istream& in, std::string name) {
  std::vector<std::array<double, 3>> entries;
  std::string line;
  std::size_t line_no = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    std::array<double, 3> row{};
    std::stringstream fields(text);
    std::string field;
    int count = 0;
    bool numeric = true;
    while (std::getline(fields, field, ',')) {
      if (count >= 3) {
        count = 4;
        break;
      }
      const std::string f = trim(field);
      std::size_t used = 0;
      try {
        row[count] = std::stod(f, &used);
      } catch (const std::exception&) {
        numeric = false;
      }
      if (numeric && used != f.size()) numeric = false;
      ++count;
    }
    if (!numeric && !seen_data && entries.empty()) {
      seen_data = true;  // header line
      continue;
    }
    if (!numeric || count != 3) {
      throw DomainError("covariance grid line " + std::to_string(line_no) + ": expected 't_i,t_j,c'");
    }
    seen_data = true;
    entries.push_back(row);
  }
  return from_grid(std::move(name), entries);
}

double Covariance::operator()(double s, double t) const { return eval_(s, t); }

MarkovReport is_markov(const Covariance& c, std::span<const double> grid, double tol) {
  if (grid.size() < 3) throw DomainError("is_markov: grid needs at least 3 times");
  if (!std::is_sorted(grid.begin(), grid.end())) throw DomainError("is_markov: grid must be sorted");
  MarkovReport report;
  const std::size_t n = grid.size();
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = c(grid[i], grid[i]);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        const double s = grid[i], u = grid[j], t = grid[k];
        const double lhs = c(t, s) * diag[j];
        const double rhs = c(t, u) * c(u, s);
        // Both products are bounded by sqrt(c(s,s) c(t,t)) c(u,u).
        const double scale = std::sqrt(std::max(diag[i] * diag[k], 0.0)) * diag[j];
        const double violation = scale > 0.0 ? std::abs(lhs - rhs) / scale : std::abs(lhs - rhs);
        if (violation > report.max_violation) {
          report.max_violation = violation;
          report.worst = {s, u, t};
        }
      }
    }
  }
  report.markov = report.max_violation <= tol;
  return report;
}

bool is_martingale(const Covariance& c, std::span<const double> grid, double tol) {
  if (!std::is_sorted(grid.begin(), grid.end())) throw DomainError("is_martingale: grid must be sorted");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double css = c(grid[i], grid[i]);
    for (std::size_t j = i + 1; j < grid.size(); ++j) {
      if (std::abs(c(grid[i], grid[j]) - css) > tol * std::max(1.0, std::abs(css))) return false;
    }
  }
  return true;
}

LambdaTriple lambdas(const Covariance& c, double s, double t) {
  const double css = c(s, s);
  const double ctt = c(t, t);
  if (!(css > 0.0) || !(ctt > 0.0)) {
    throw DegenerateMarginalError("lambdas: zero marginal variance at time " + std::to_string(css > 0.0 ? t : s));
  }
  LambdaTriple l;
  l.lambda_s = std::sqrt(css);
  l.lambda_t = std::sqrt(ctt);
  l.lambda_st = c(t, s) / (l.lambda_s * l.lambda_t);
  if (std::abs(l.lambda_st) > 1.0) {
    if (std::abs(l.lambda_st) - 1.0 > 1e-12) {
      throw NotCovarianceError("lambdas: |c(s,t)| exceeds sqrt(c(s,s) c(t,t))");
    }
    l.lambda_st = std::copysign(1.0, l.lambda_st);
  } else if (1.0 - std::abs(l.lambda_st) <= 1e-12) {
    l.lambda_st = std::copysign(1.0, l.lambda_st);
  }
  return l;
}

std::vector<Vector> embed_gram(const Matrix& gram) {
  if (gram.rows() != gram.cols() || gram.rows() == 0) throw DomainError("embed: Gram matrix must be square");
  const Eigen::Index n = gram.rows();
  if (!gram.isApprox(gram.transpose(), 1e-12) && (gram - gram.transpose()).norm() > 1e-12) {
    throw NotCovarianceError("embed: Gram matrix is not symmetric");
  }
  const double scale = std::max(gram.diagonal().maxCoeff(), 0.0);
  if (scale == 0.0) {
    if (gram.norm() != 0.0) throw NotCovarianceError("embed: zero diagonal with nonzero off-diagonal entries");
    return std::vector<Vector>(n, Vector::Zero(1));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram / scale);
  if (solver.info() != Eigen::Success) throw Error("embed: eigen-solver failed");
  const Vector& values = solver.eigenvalues();
  if (values.minCoeff() < -kPsdTol) {
    throw NotCovarianceError("embed: Gram matrix has eigenvalue " + std::to_string(values.minCoeff() * scale));
  }
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = n - 1; k >= 0; --k)
    if (values[k] > kRankTol) keep.push_back(k);
  if (keep.empty()) keep.push_back(n - 1);
  std::vector<Vector> out(n, Vector::Zero(static_cast<Eigen::Index>(keep.size())));
  for (std::size_t col = 0; col < keep.size(); ++col) {
    const double root = std::sqrt(std::max(values[keep[col]], 0.0) * scale);
    for (Eigen::Index i = 0; i < n; ++i) out[i][col] = solver.eigenvectors()(i, keep[col]) * root;
  }
  return out;
}

std::vector<Vector> embed(const Covariance& c, std::span<const double> times) {
  const Eigen::Index n = static_cast<Eigen::Index>(times.size());
  Matrix gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) gram(i, j) = gram(j, i) = c(times[i], times[j]);
  return embed_gram(gram);
}

Factorization factorize(CovarianceKind kind) {
  switch (kind) {
    case CovarianceKind::bm: return {[](double s) { return s; }, [](double) { return 1.0; }};
    case CovarianceKind::ou:
      return {[](double s) { return std::exp(s); }, [](double t) { return std::exp(-t); }};
    case CovarianceKind::bridge: return {[](double s) { return s; }, [](double t) { return 1.0 - t; }};
    case CovarianceKind::custom: break;
  }
  throw DomainError("factorize: kind must be bm, bridge or ou");
}

double martingale_family_residual(CovarianceKind kind, QParam q, unsigned n, double s, double t,
                                  const QuadratureRule& rule) {
  const Covariance c = Covariance::builtin(kind);
  const TransitionKernel kernel(q, lambdas(c, s, t), rule);
  const LambdaTriple& l = kernel.lambdas();
  const double scale = std::pow(l.lambda_st, static_cast<double>(n));
  double worst = 0.0;
  for (double u : rule.nodes) {
    const double x = l.lambda_s * u;
    const double lhs = kernel.apply([&](double y) { return hermite(n, q, y / l.lambda_t); }, x);
    worst = std::max(worst, std::abs(lhs - scale * hermite(n, q, u)));
  }
  return worst;
}

}  // namespace qgauss
