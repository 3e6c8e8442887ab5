#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "qgauss/error.hpp"
#include "qgauss/fock.hpp"
#include "qgauss/processes.hpp"
#include "qgauss/qhermite.hpp"

using namespace qgauss;
using doctest::Approx;

namespace {

Covariance fractional() {
  return Covariance::custom(
      "fractional",
      [](double s, double t) { return 0.5 * (std::pow(s, 1.5) + std::pow(t, 1.5) - std::pow(std::abs(t - s), 1.5)); },
      0.0, 10.0);
}

const CovarianceKind kBuiltins[] = {CovarianceKind::bm, CovarianceKind::bridge, CovarianceKind::ou};

}  // namespace

TEST_CASE("builtin covariances") {
  CHECK(builtin_covariance(CovarianceKind::bm, 1.0, 2.0) == 1.0);
  CHECK(builtin_covariance(CovarianceKind::bridge, 0.25, 0.5) == Approx(0.125));
  CHECK(builtin_covariance(CovarianceKind::bridge, 0.5, 0.25) == Approx(0.125));
  CHECK(builtin_covariance(CovarianceKind::ou, 0.7, 0.7) == 1.0);
  CHECK(builtin_covariance(CovarianceKind::ou, -1.0, 1.5) == Approx(std::exp(-2.5)));
  CHECK_THROWS_AS(builtin_covariance(CovarianceKind::bm, -0.1, 1.0), DomainError);
  CHECK_THROWS_AS(builtin_covariance(CovarianceKind::bridge, 0.5, 1.2), DomainError);
  CHECK(parse_covariance_kind("ou") == CovarianceKind::ou);
  CHECK(to_string(CovarianceKind::bridge) == "bridge");
  CHECK_THROWS_AS(parse_covariance_kind("fbm"), DomainError);
}

TEST_CASE("Markov criterion") {
  oracle::Gen gen(51);
  for (int trial = 0; trial < 20; ++trial) {
    const auto ts = gen.grid(6, 0.01, 0.99);
    for (auto kind : kBuiltins) CHECK(is_markov(Covariance::builtin(kind), ts).markov);
  }
  const std::vector<double> grid{1.0, 2.0, 3.0};
  const MarkovReport report = is_markov(fractional(), grid);
  CHECK_FALSE(report.markov);
  const Covariance c = fractional();
  CHECK(c(3.0, 1.0) * c(2.0, 2.0) == Approx(4.763).epsilon(1e-3));
  CHECK(c(3.0, 2.0) * c(2.0, 1.0) == Approx(4.966).epsilon(1e-3));
  CHECK(report.worst[0] == 1.0);
  CHECK(report.worst[1] == 2.0);
  CHECK(report.worst[2] == 3.0);
  const Covariance constant = Covariance::custom("one", [](double, double) { return 1.0; }, 0.0, 1.0);
  CHECK(is_markov(constant, std::vector<double>{0.1, 0.4, 0.9}).markov);
  CHECK_THROWS_AS(is_markov(constant, std::vector<double>{0.1, 0.4}), DomainError);
  CHECK_THROWS_AS(is_markov(constant, std::vector<double>{0.4, 0.1, 0.9}), DomainError);
}

TEST_CASE("martingale criterion") {
  const std::vector<double> grid{0.1, 0.3, 0.5, 0.9};
  CHECK(is_martingale(Covariance::builtin(CovarianceKind::bm), grid));
  CHECK_FALSE(is_martingale(Covariance::builtin(CovarianceKind::ou), grid));
  CHECK_FALSE(is_martingale(Covariance::builtin(CovarianceKind::bridge), grid));
}

TEST_CASE("lambda quantities") {
  const LambdaTriple bm = lambdas(Covariance::builtin(CovarianceKind::bm), 1.0, 4.0);
  CHECK(bm.lambda_s == Approx(1.0));
  CHECK(bm.lambda_t == Approx(2.0));
  CHECK(bm.lambda_st == Approx(0.5));
  const LambdaTriple ou = lambdas(Covariance::builtin(CovarianceKind::ou), 0.3, 1.1);
  CHECK(ou.lambda_s == Approx(1.0));
  CHECK(ou.lambda_t == Approx(1.0));
  CHECK(ou.lambda_st == Approx(std::exp(-0.8)));
  const LambdaTriple br = lambdas(Covariance::builtin(CovarianceKind::bridge), 0.25, 0.75);
  CHECK(br.lambda_s == Approx(std::sqrt(0.1875)));
  CHECK(br.lambda_t == Approx(std::sqrt(0.1875)));
  CHECK(br.lambda_st == Approx(1.0 / 3.0));
  CHECK(lambdas(Covariance::builtin(CovarianceKind::ou), 0.5, 0.5).lambda_st == 1.0);
  CHECK_THROWS_AS(lambdas(Covariance::builtin(CovarianceKind::bm), 0.0, 1.0), DegenerateMarginalError);
  CHECK_THROWS_AS(lambdas(Covariance::builtin(CovarianceKind::bridge), 0.5, 1.0), DegenerateMarginalError);
  const Covariance bad = Covariance::custom("bad", [](double s, double t) { return s == t ? 1.0 : 2.0; }, 0.0, 1.0);
  CHECK_THROWS_AS(lambdas(bad, 0.2, 0.4), NotCovarianceError);
}

TEST_CASE("lambda quantities compose along Markov grids") {
  oracle::Gen gen(52);
  for (int trial = 0; trial < 30; ++trial) {
    const auto ts = gen.grid(3, 0.02, 0.98);
    for (auto kind : kBuiltins) {
      const Covariance c = Covariance::builtin(kind);
      const double lhs = lambdas(c, ts[0], ts[1]).lambda_st * lambdas(c, ts[1], ts[2]).lambda_st;
      CHECK(lhs == Approx(lambdas(c, ts[0], ts[2]).lambda_st).epsilon(1e-12));
    }
    const double h = gen.uniform(0.0, 2.0);
    const double s = gen.uniform(-3.0, 3.0);
    const Covariance ou = Covariance::builtin(CovarianceKind::ou);
    CHECK(lambdas(ou, s, s + h).lambda_st == Approx(lambdas(ou, 0.0, h).lambda_st).epsilon(1e-13));
  }
}

TEST_CASE("Hilbert space embedding") {
  const Covariance bm = Covariance::builtin(CovarianceKind::bm);
  const std::vector<double> single{2.5};
  const auto one = embed(bm, single);
  CHECK(one.size() == 1);
  CHECK(one[0].size() == 1);
  CHECK(std::abs(one[0][0]) == Approx(std::sqrt(2.5)));
  const std::vector<double> ts{1.0, 2.0, 3.0};
  const auto fs = embed(bm, ts);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(fs[i].dot(fs[j]) - std::min(ts[i], ts[j])) <= 1e-12);
  Matrix bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(embed_gram(bad), NotCovarianceError);
  // a zero-variance time has a zero vector
  const auto with_origin = embed(bm, std::vector<double>{0.0, 1.0, 2.0});
  CHECK(with_origin[0].norm() <= 1e-12);
  CHECK(with_origin[0].size() == 2);
}

TEST_CASE("embedded processes have the right Fock moments") {
  oracle::Gen gen(53);
  for (int trial = 0; trial < 10; ++trial) {
    const auto ts = gen.grid(4, 0.05, 0.95);
    for (auto kind : kBuiltins) {
      const Covariance c = Covariance::builtin(kind);
      const auto fs = embed(c, ts);
      const FockBasis basis(static_cast<int>(fs[0].size()), 2);
      const QParam q(gen.q());
      for (std::size_t i = 0; i < ts.size(); ++i)
        for (std::size_t j = 0; j < ts.size(); ++j) {
          const std::vector<Vector> pair{fs[i], fs[j]};
          CHECK(std::abs(moment(pair, basis, q) - c(ts[i], ts[j])) <= 1e-12);
        }
    }
  }
}

TEST_CASE("covariance grids") {
  std::istringstream in("# comment\nt_i,t_j,c\n1,1,1\n1,2,1\n2,1,1\n2,2,2\n");
  const Covariance c = Covariance::read_grid_csv(in, "g");
  CHECK(c.kind() == CovarianceKind::custom);
  CHECK(c.name() == "g");
  CHECK(c(1.0, 2.0) == 1.0);
  CHECK(c(2.0, 2.0) == 2.0);
  CHECK(c.grid_times() == std::vector<double>{1.0, 2.0});
  CHECK_THROWS_AS(c(1.5, 2.0), DomainError);
  std::istringstream malformed("1,1,1\n1,2\n");
  CHECK_THROWS_AS(Covariance::read_grid_csv(malformed), DomainError);
  std::istringstream asymmetric("1,1,1\n1,2,1\n2,1,0.5\n2,2,2\n");
  CHECK_THROWS_AS(Covariance::read_grid_csv(asymmetric), DomainError);
  std::istringstream incomplete("1,1,1\n2,2,2\n");
  CHECK_THROWS_AS(Covariance::read_grid_csv(incomplete), DomainError);
}

TEST_CASE("covariance factorizations") {
  const Factorization bm = factorize(CovarianceKind::bm);
  CHECK(bm.g(2.0) * bm.f(3.0) == Approx(2.0));
  const Factorization ou = factorize(CovarianceKind::ou);
  CHECK(ou.g(2.0) * ou.f(3.0) == Approx(std::exp(-1.0)));
  const Factorization br = factorize(CovarianceKind::bridge);
  CHECK(br.g(0.25) * br.f(0.5) == Approx(0.125));
  oracle::Gen gen(54);
  for (auto kind : kBuiltins) {
    const Factorization fac = factorize(kind);
    for (int trial = 0; trial < 20; ++trial) {
      const auto ts = gen.grid(2, 0.01, 0.99);
      CHECK(fac.g(ts[0]) * fac.f(ts[1]) == Approx(builtin_covariance(kind, ts[0], ts[1])).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(factorize(CovarianceKind::custom), DomainError);
}

TEST_CASE("martingale families") {
  const QuadratureRule rule = gauss_quadrature(QParam(0.5), 200);
  CHECK(martingale_family_residual(CovarianceKind::bm, QParam(0.5), 0, 1.0, 2.0, rule) <= 1e-10);
  CHECK(martingale_family_residual(CovarianceKind::bm, QParam(0.5), 1, 1.0, 2.0, rule) <= 1e-9);
  CHECK(martingale_family_residual(CovarianceKind::ou, QParam(0.5), 3, 0.0, 1.0, rule) <= 1e-7);
  for (double qv : {-0.5, 0.0, 0.7}) {
    const QuadratureRule r = gauss_quadrature(QParam(qv), 200);
    for (auto kind : kBuiltins)
      for (unsigned n = 0; n <= 4; ++n) CHECK(martingale_family_residual(kind, QParam(qv), n, 0.3, 0.6, r) <= 1e-7);
  }
  // the eigen-identity turns into the martingale property of (g/f)^{n/2} H_n(X_t/lambda_t)
  for (auto kind : kBuiltins) {
    const Factorization fac = factorize(kind);
    const double s = 0.3, t = 0.6;
    const double lst = lambdas(Covariance::builtin(kind), s, t).lambda_st;
    for (int n = 1; n <= 4; ++n)
      CHECK(std::pow(fac.g(t) / fac.f(t), 0.5 * n) * std::pow(lst, n) ==
            Approx(std::pow(fac.g(s) / fac.f(s), 0.5 * n)).epsilon(1e-12));
  }
}
