#include <array>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qgauss/error.hpp"
#include "qgauss/fock.hpp"
#include "qgauss/kernels.hpp"
#include "qgauss/processes.hpp"
#include "qgauss/qcore.hpp"
#include "qgauss/qhermite.hpp"
#include "qgauss/sampler.hpp"
#include "qgauss/wick.hpp"

namespace py = pybind11;
using namespace qgauss;

namespace {

std::vector<Polynomial> monomials(const std::vector<unsigned>& exponents) {
  std::vector<Polynomial> hs;
  for (unsigned e : exponents) hs.push_back(Polynomial::monomial(e));
  return hs;
}

py::dict report_dict(const ClassicalVersionReport& r) {
  py::dict d;
  d["kind"] = r.kind;
  d["q"] = r.q;
  d["times"] = r.times;
  d["exponents"] = r.exponents;
  d["fock"] = r.fock;
  d["quadrature"] = r.quadrature;
  d["mc"] = r.mc;
  d["mc_stderr"] = r.mc_stderr;
  d["n_paths"] = r.n_paths;
  d["seed"] = r.seed;
  return d;
}

}  // namespace

PYBIND11_MODULE(qgauss, m) {
  m.doc() = "q-Gaussian processes: q-Fock space, q-Hermite polynomials, transition kernels and path sampling";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", error);
  py::register_exception<CapacityError>(m, "CapacityError", error);
  py::register_exception<DegenerateMarginalError>(m, "DegenerateMarginalError", error);
  py::register_exception<NotCovarianceError>(m, "NotCovarianceError", error);
  py::register_exception<NotMarkovError>(m, "NotMarkovError", error);

  // q-combinatorics
  m.def("q_int", [](unsigned n, double q) { return q_int(n, QParam(q)); }, py::arg("n"), py::arg("q"));
  m.def("q_factorial", [](unsigned n, double q) { return q_factorial(n, QParam(q)); }, py::arg("n"), py::arg("q"));
  m.def("q_binomial", [](unsigned n, unsigned k, double q) { return q_binomial(n, k, QParam(q)); }, py::arg("n"),
        py::arg("k"), py::arg("q"));

  // Fock space
  m.def(
      "gram",
      [](int d, int max_degree, double q) { return gram(FockBasis(d, max_degree), QParam(q)).dense(); },
      py::arg("d"), py::arg("max_degree"), py::arg("q"), "Dense Gram matrix of the word basis.");
  m.def(
      "omega",
      [](const Vector& f, int max_degree, double q) {
        return omega(f, FockBasis(static_cast<int>(f.size()), max_degree), QParam(q)).dense();
      },
      py::arg("f"), py::arg("max_degree"), py::arg("q"), "Dense matrix of a(f) + a*(f) on the truncated space.");
  m.def(
      "moment",
      [](const std::vector<Vector>& fs, double q, int max_degree) {
        if (fs.empty()) return 1.0;
        const int n = max_degree > 0 ? max_degree : static_cast<int>(fs.size());
        return moment(fs, FockBasis(static_cast<int>(fs.front().size()), n), QParam(q));
      },
      py::arg("fs"), py::arg("q"), py::arg("max_degree") = 0,
      "Vacuum expectation of omega(f_1) ... omega(f_n).");
  m.def(
      "wick_power",
      [](const Vector& f, int n, int max_degree, double q) {
        return wick_power(f, n, FockBasis(static_cast<int>(f.size()), max_degree), QParam(q)).dense();
      },
      py::arg("f"), py::arg("n"), py::arg("max_degree"), py::arg("q"));

  // q-Hermite polynomials and the q-Gaussian measure
  m.def("support_edge", [](double q) { return support_edge(QParam(q)); }, py::arg("q"));
  m.def("hermite", [](unsigned n, double q, double x) { return hermite(n, QParam(q), x); }, py::arg("n"),
        py::arg("q"), py::arg("x"));
  m.def("nu_density", [](double q, double x) { return nu_density(QParam(q), x); }, py::arg("q"), py::arg("x"));
  m.def(
      "gauss_quadrature",
      [](double q, unsigned m_points) {
        const QuadratureRule rule = gauss_quadrature(QParam(q), m_points);
        return py::make_tuple(rule.nodes, rule.weights);
      },
      py::arg("q"), py::arg("points"), "Nodes and weights of the Gauss rule for nu_q.");
  m.def("mehler", [](double q, double r, double x, double y) { return mehler_product(QParam(q), r, x, y); },
        py::arg("q"), py::arg("r"), py::arg("x"), py::arg("y"));
  m.def(
      "mehler_series",
      [](double q, double r, double x, double y, unsigned terms) { return mehler_series(QParam(q), r, x, y, terms); },
      py::arg("q"), py::arg("r"), py::arg("x"), py::arg("y"), py::arg("terms"));

  // covariances
  py::class_<Covariance>(m, "Covariance")
      .def_static(
          "builtin", [](const std::string& kind) { return Covariance::builtin(parse_covariance_kind(kind)); },
          py::arg("kind"))
      .def_static("custom", &Covariance::custom, py::arg("name"), py::arg("eval"), py::arg("t_min"),
                  py::arg("t_max"))
      .def_static("from_grid", &Covariance::from_grid, py::arg("name"), py::arg("entries"))
      .def("__call__", &Covariance::operator(), py::arg("s"), py::arg("t"))
      .def_property_readonly("name", &Covariance::name)
      .def("__repr__", [](const Covariance& c) { return "<Covariance " + c.name() + ">"; });

  py::class_<MarkovReport>(m, "MarkovReport")
      .def_readonly("markov", &MarkovReport::markov)
      .def_readonly("max_violation", &MarkovReport::max_violation)
      .def_readonly("worst", &MarkovReport::worst);
  m.def(
      "is_markov", [](const Covariance& c, const std::vector<double>& grid, double tol) { return is_markov(c, grid, tol); },
      py::arg("c"), py::arg("grid"), py::arg("tol") = 1e-10);
  m.def(
      "is_martingale",
      [](const Covariance& c, const std::vector<double>& grid, double tol) { return is_martingale(c, grid, tol); },
      py::arg("c"), py::arg("grid"), py::arg("tol") = 1e-10);

  py::class_<LambdaTriple>(m, "LambdaTriple")
      .def(py::init([](double ls, double lt, double lst) { return LambdaTriple{ls, lt, lst}; }), py::arg("lambda_s"),
           py::arg("lambda_t"), py::arg("lambda_st"))
      .def_readonly("lambda_s", &LambdaTriple::lambda_s)
      .def_readonly("lambda_t", &LambdaTriple::lambda_t)
      .def_readonly("lambda_st", &LambdaTriple::lambda_st);
  m.def("lambdas", &lambdas, py::arg("c"), py::arg("s"), py::arg("t"));
  m.def(
      "embed", [](const Covariance& c, const std::vector<double>& times) { return embed(c, times); }, py::arg("c"),
      py::arg("times"), "Vectors f_t with <f_s, f_t> = c(s, t).");

  // kernels
  m.def(
      "kernel_density",
      [](double q, const Covariance& c, double s, double t, double x, double y) {
        return kernel_density(QParam(q), c, s, t, x, y);
      },
      py::arg("q"), py::arg("c"), py::arg("s"), py::arg("t"), py::arg("x"), py::arg("y"));
  m.def(
      "apply_kernel",
      [](double q, const Covariance& c, double s, double t, const std::function<double(double)>& h, double x,
         unsigned quad_points) { return TransitionKernel::from_covariance(QParam(q), c, s, t, quad_points).apply(h, x); },
      py::arg("q"), py::arg("c"), py::arg("s"), py::arg("t"), py::arg("h"), py::arg("x"),
      py::arg("quad_points") = kDefaultQuadPoints, "int h(y) k_{s,t}(x, dy).");
  m.def(
      "moment_via_kernels",
      [](double q, const Covariance& c, const std::vector<double>& times, const std::vector<unsigned>& exponents,
         unsigned quad_points) { return moment_via_kernels(QParam(q), c, times, monomials(exponents), quad_points); },
      py::arg("q"), py::arg("c"), py::arg("times"), py::arg("exponents"), py::arg("quad_points") = kDefaultQuadPoints,
      "E[X_{t_1}^{k_1} ... X_{t_n}^{k_n}] through the transition operators.");
  m.def(
      "fermionic_kernel",
      [](const std::string& kind, double s, double t) {
        const FermionicKernel k = fermionic_kernel(parse_covariance_kind(kind), s, t);
        return py::make_tuple(k.source_state, k.target_state, Matrix(k.transition));
      },
      py::arg("kind"), py::arg("s"), py::arg("t"), "Source state, target state and 2x2 transition matrix at q = -1.");
  m.def("alpha", [](double t, double q) { return alpha(t, QParam(q)); }, py::arg("t"), py::arg("q"),
        "Supremum of the Mehler kernel at r = exp(-t).");

  // sampling
  m.def(
      "sample_marginal",
      [](double q, double lambda, std::size_t n, std::uint64_t seed) {
        const std::vector<double> v = sample_marginal(QParam(q), lambda, n, seed);
        return Vector(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
      },
      py::arg("q"), py::arg("lambda_"), py::arg("n"), py::arg("seed"));
  m.def(
      "sample_paths",
      [](const Covariance& c, double q, const std::vector<double>& times, std::size_t n_paths, std::uint64_t seed,
         bool origin) {
        const PathEnsemble ens = sample_paths(c, QParam(q), times, n_paths, seed, origin);
        return py::make_tuple(ens.times, ens.paths);
      },
      py::arg("c"), py::arg("q"), py::arg("times"), py::arg("n_paths"), py::arg("seed"), py::arg("origin") = false,
      "Times and an n_paths x n_times matrix of sample paths.");
  m.def(
      "classical_version_report",
      [](const Covariance& c, double q, const std::vector<double>& times, const std::vector<unsigned>& exponents,
         std::size_t n_paths, std::uint64_t seed) {
        return report_dict(classical_version_report(c, QParam(q), times, exponents, n_paths, seed));
      },
      py::arg("c"), py::arg("q"), py::arg("times"), py::arg("exponents"), py::arg("n_paths") = 20000,
      py::arg("seed") = 1);
}
