#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "cli.hpp"
#include "qgauss/fock.hpp"
#include "qgauss/kernels.hpp"
#include "qgauss/processes.hpp"
#include "qgauss/qcore.hpp"
#include "qgauss/qhermite.hpp"
#include "qgauss/sampler.hpp"
#include "qgauss/wick.hpp"

namespace qgauss::cli {

namespace {

std::string sci(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

class Suite {
public:
  void add(std::string group, std::string name, bool passed, std::string detail) {
    results_.push_back({std::move(group), std::move(name), passed, std::move(detail)});
  }
  // Records `value <= bound`.
  void bound(const std::string& group, const std::string& name, double value, double bound) {
    add(group, name, value <= bound, "max " + sci(value) + " (bound " + sci(bound) + ")");
  }
  // Runs `body`; library errors become failures of the check.
  template <class F>
  void guarded(const std::string& group, const std::string& name, F&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      add(group, name, false, std::string("error: ") + e.what());
    }
  }
  std::vector<CheckResult> take() { return std::move(results_); }

private:
  std::vector<CheckResult> results_;
};

Vector random_vector(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> normal;
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = normal(rng);
  return v;
}

}  // namespace

std::vector<CheckResult> run_verify_suite(const RunConfig& config) {
  Suite suite;
  const double qv = config.q.value_or(0.5);
  const QParam q(qv);
  const double tol = config.tol.value_or(1e-10);
  std::mt19937_64 rng(config.seed);

  suite.guarded("qcore", "inversion generating function", [&] {
    double worst = 0.0;
    for (unsigned n = 1; n <= 6; ++n) {
      double sum = 0.0;
      for_each_permutation(n, [&](const Permutation& p) { sum += std::pow(qv, static_cast<double>(inversions(p))); });
      worst = std::max(worst, std::abs(sum - q_factorial(n, q)));
    }
    suite.bound("qcore", "inversion generating function", worst, 1e-12);
  });
  suite.guarded("qcore", "q-Pascal rule", [&] {
    double worst = 0.0;
    for (unsigned n = 0; n <= 10; ++n)
      for (unsigned k = 0; k < n; ++k)
        worst = std::max(worst, std::abs(q_binomial(n, k, q) + std::pow(qv, k + 1.0) * q_binomial(n, k + 1, q) -
                                         q_binomial(n + 1, k + 1, q)));
    suite.bound("qcore", "q-Pascal rule", worst, 1e-12);
  });

  const FockBasis basis(config.d, config.N);
  suite.guarded("fock", "Gram positivity", [&] {
    double smallest = std::numeric_limits<double>::infinity();
    for (int n = 0; n <= basis.max_degree(); ++n) {
      Eigen::SelfAdjointEigenSolver<Matrix> solver(gram_block(basis, q, n), Eigen::EigenvaluesOnly);
      smallest = std::min(smallest, solver.eigenvalues().minCoeff());
    }
    suite.add("fock", "Gram positivity", smallest > 0.0, "min eigenvalue " + sci(smallest));
  });
  suite.guarded("fock", "q-commutation relations", [&] {
    double worst = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
      worst = std::max(worst, q_relation_residual(random_vector(rng, basis.dim()), random_vector(rng, basis.dim()),
                                                  basis, q));
    }
    suite.bound("fock", "q-commutation relations", worst, 1e-12);
  });

  suite.guarded("wick", "normal order = recursion = power", [&] {
    const FockBasis small(std::min(config.d, 2), std::min(config.N, 4));
    double worst = 0.0;
    for (int n = 1; n <= small.max_degree(); ++n) {
      std::vector<Vector> word;
      for (int i = 0; i < n; ++i) word.push_back(random_vector(rng, small.dim()));
      worst = std::max(worst, zero_norm(wick_from_splittings(word, small, q) - wick_recursive(word, small, q)));
      Vector f = random_vector(rng, small.dim());
      f.normalize();
      worst = std::max(worst, zero_norm(wick_power(f, n, small, q) - wick_recursive(std::vector<Vector>(n, f), small, q)));
      worst = std::max(worst, hermite_identity_residual(f, n, small, q));
    }
    suite.bound("wick", "normal order = recursion = power", worst, tol);
  });

  suite.guarded("qhermite", "orthogonality n, m <= 10", [&] {
    const QuadratureRule rule = gauss_quadrature(q, 16);
    double worst = 0.0;
    for (unsigned n = 0; n <= 10; ++n)
      for (unsigned m = 0; m <= 10; ++m) worst = std::max(worst, orthogonality_residual(n, m, q, rule));
    suite.bound("qhermite", "orthogonality n, m <= 10", worst, 1e-8);
  });
  suite.guarded("qhermite", "Mehler series = product", [&] {
    double worst = 0.0;
    const double edge = support_edge(q);
    for (double r : {-0.6, 0.3, 0.7})
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
          const MehlerEval e = mehler_eval(q, r, edge * (-0.9 + 0.45 * i), edge * (-0.9 + 0.45 * j));
          worst = std::max(worst, std::abs(e.series - e.product));
        }
    suite.bound("qhermite", "Mehler series = product", worst, 1e-10);
  });

  // Covariance under test.
  Covariance cov = Covariance::builtin(CovarianceKind::bm);
  if (!config.cov_grid.empty()) {
    std::ifstream in(config.cov_grid);
    if (!in) throw DomainError("cannot open covariance grid '" + config.cov_grid + "'");
    cov = Covariance::read_grid_csv(in, config.cov_grid);
  } else {
    cov = Covariance::builtin(parse_covariance_kind(config.kind));
  }
  std::vector<double> times = config.times;
  if (times.empty()) {
    switch (cov.kind()) {
      case CovarianceKind::bm: times = {0.5, 1.0, 2.0}; break;
      case CovarianceKind::bridge: times = {0.25, 0.5, 0.75}; break;
      case CovarianceKind::ou: times = {0.0, 0.5, 1.5}; break;
      case CovarianceKind::custom: times = cov.grid_times(); break;
    }
  }
  std::sort(times.begin(), times.end());

  bool markov = true;
  suite.guarded("processes", "embedding reproduces covariance", [&] {
    const std::vector<Vector> fs = embed(cov, times);
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i)
      for (std::size_t j = 0; j < times.size(); ++j)
        worst = std::max(worst, std::abs(fs[i].dot(fs[j]) - cov(times[i], times[j])));
    suite.bound("processes", "embedding reproduces covariance", worst, 1e-10);
  });
  suite.guarded("processes", "builtins are Markov", [&] {
    bool ok = true;
    const std::vector<double> grid{0.1, 0.2, 0.35, 0.5, 0.8, 0.9};
    for (auto kind : {CovarianceKind::bm, CovarianceKind::bridge, CovarianceKind::ou})
      ok = ok && is_markov(Covariance::builtin(kind), grid).markov;
    ok = ok && is_martingale(Covariance::builtin(CovarianceKind::bm), grid);
    suite.add("processes", "builtins are Markov", ok, "bm, bridge, ou; bm martingale");
  });
  suite.guarded("processes", "Markov criterion for " + cov.name(), [&] {
    if (times.size() < 3) {
      suite.add("processes", "Markov criterion for " + cov.name(), true, "fewer than 3 times");
      return;
    }
    const MarkovReport report = is_markov(cov, times);
    markov = report.markov;
    const std::string detail = std::string(report.markov ? "Markov" : "not Markov") + ", violation " +
                               sci(report.max_violation) + (config.expect_markov ? " (expected Markov)" : "");
    suite.add("processes", "Markov criterion for " + cov.name(), report.markov || !config.expect_markov, detail);
  });

  std::vector<double> positive;
  for (double t : times)
    if (cov(t, t) > 0.0) positive.push_back(t);
  if (!markov) {
    suite.add("kernels", "kernel checks", true, "skipped: covariance is not Markov");
  } else if (positive.size() >= 2) {
    suite.guarded("kernels", "normalization and Hermite eigen-identity", [&] {
      const QuadratureRule rule = gauss_quadrature(q, config.quad_points);
      double norm_err = 0.0, eig_err = 0.0;
      for (std::size_t k = 0; k + 1 < positive.size(); ++k) {
        const TransitionKernel kernel(q, lambdas(cov, positive[k], positive[k + 1]), rule);
        const LambdaTriple& l = kernel.lambdas();
        for (double u : {-1.2, -0.3, 0.0, 0.8}) {
          norm_err = std::max(norm_err, std::abs(kernel.apply([](double) { return 1.0; }, u * l.lambda_s) - 1.0));
          for (unsigned n = 1; n <= 6; ++n) {
            const double lhs = kernel.apply([&](double y) { return hermite(n, q, y / l.lambda_t); }, u * l.lambda_s);
            eig_err = std::max(eig_err, std::abs(lhs - std::pow(l.lambda_st, n) * hermite(n, q, u)));
          }
        }
      }
      suite.add("kernels", "normalization and Hermite eigen-identity", norm_err <= 1e-9 && eig_err <= 1e-7,
                "normalization " + sci(norm_err) + ", eigen-identity " + sci(eig_err));
    });
    if (positive.size() >= 3) {
      suite.guarded("kernels", "Chapman-Kolmogorov", [&] {
        const double s = positive[0], u = positive[1], t = positive[2];
        const double x = 0.3 * std::sqrt(cov(s, s));
        suite.bound("kernels", "Chapman-Kolmogorov",
                    chapman_kolmogorov_residual(q, cov, s, u, t, x, config.quad_points), 1e-6);
      });
    }
    suite.guarded("sampler", "moments: Fock vs quadrature vs paths", [&] {
      std::vector<unsigned> exponents(times.size(), 0);
      for (std::size_t j = 0; j < times.size() && j < 3; ++j) exponents[j] = j == 1 ? 2 : 1;
      const ClassicalVersionReport r =
          classical_version_report(cov, q, times, exponents, config.paths, config.seed, config.quad_points);
      const bool ok = r.quadrature_error() <= 1e-6 && (config.paths == 0 || r.mc_z() <= 4.0);
      suite.add("sampler", "moments: Fock vs quadrature vs paths", ok,
                "fock " + sci(r.fock) + ", |fock-quad| " + sci(r.quadrature_error()) + ", mc z " + sci(r.mc_z()));
    });
  }
  return suite.take();
}

}  // namespace qgauss::cli
