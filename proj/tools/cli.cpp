#include "cli.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qgauss/kernels.hpp"
#include "qgauss/processes.hpp"
#include "qgauss/qhermite.hpp"
#include "qgauss/sampler.hpp"

namespace qgauss::cli {

namespace {

constexpr const char* kVersion = "v1";

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Shortest representation that round-trips.
std::string num(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

Covariance resolve_covariance(const RunConfig& config) {
  if (!config.cov_grid.empty()) {
    std::ifstream in(config.cov_grid);
    if (!in) throw UsageError("cannot open covariance grid '" + config.cov_grid + "'");
    return Covariance::read_grid_csv(in, config.cov_grid);
  }
  return Covariance::builtin(parse_covariance_kind(config.kind));
}

std::vector<double> resolve_times(const RunConfig& config, const Covariance& c) {
  std::vector<double> times = config.times;
  if (times.empty()) {
    switch (c.kind()) {
      case CovarianceKind::bm: times = {0.5, 1.0, 2.0}; break;
      case CovarianceKind::bridge: times = {0.25, 0.5, 0.75}; break;
      case CovarianceKind::ou: times = {0.0, 0.5, 1.5}; break;
      case CovarianceKind::custom: times = c.grid_times(); break;
    }
  }
  if (!std::is_sorted(times.begin(), times.end())) throw UsageError("--times must be sorted");
  for (double t : times) {
    if (t < c.t_min() || t > c.t_max()) throw UsageError("time " + num(t) + " outside the covariance domain");
  }
  return times;
}

QParam generic_q(const RunConfig& config, double fallback) {
  const double q = config.q.value_or(fallback);
  if (!(q > -1.0 && q < 1.0)) throw UsageError("--q must lie in (-1, 1) for this command");
  return QParam(q);
}

// Output sink: the --out file or the given stream.
class Sink {
public:
  Sink(const RunConfig& config, std::ostream& fallback) : stream_(&fallback) {
    if (!config.out.empty()) {
      file_ = std::make_unique<std::ofstream>(config.out);
      if (!*file_) throw UsageError("cannot write '" + config.out + "'");
      stream_ = file_.get();
    }
  }
  std::ostream& operator*() { return *stream_; }

private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

int cmd_density(const RunConfig& config, std::ostream& out) {
  const QParam q = generic_q(config, 0.0);
  const unsigned points = config.grid_points ? config.grid_points : 201;
  if (points < 2) throw UsageError("--grid-points must be at least 2");
  const double edge = support_edge(q);
  Sink sink(config, out);
  *sink << "# qgauss density " << kVersion << "; q=" << num(q) << "; points=" << points << "\n";
  *sink << "x,density\n";
  for (unsigned i = 0; i < points; ++i) {
    const double x = i + 1 == points ? edge : -edge + 2.0 * edge * i / (points - 1);
    *sink << num(x) << "," << num(nu_density(q, x)) << "\n";
  }
  return kSuccess;
}

int cmd_kernel(const RunConfig& config, std::ostream& out) {
  const QParam q = generic_q(config, 0.5);
  const Covariance c = resolve_covariance(config);
  const std::vector<double> times = resolve_times(config, c);
  if (times.size() < 2) throw UsageError("kernel needs two times s <= t");
  const double s = times[0];
  const double t = times[1];
  const TransitionKernel kernel(q, lambdas(c, s, t), config.quad_points);
  if (kernel.degenerate()) throw UsageError("lambda_st = +-1: the kernel is deterministic and has no density");
  const unsigned points = config.grid_points ? config.grid_points : 41;
  const LambdaTriple& l = kernel.lambdas();
  Sink sink(config, out);
  *sink << "# qgauss kernel " << kVersion << "; kind=" << c.name() << "; q=" << num(q) << "; s=" << num(s)
        << "; t=" << num(t) << "; lambda_s=" << num(l.lambda_s) << "; lambda_t=" << num(l.lambda_t)
        << "; lambda_st=" << num(l.lambda_st) << "\n";
  *sink << "x,y,density\n";
  for (unsigned i = 0; i < points; ++i) {
    const double x = kernel.source_edge() * (-1.0 + 2.0 * (i + 1.0) / (points + 1.0));
    for (unsigned j = 0; j < points; ++j) {
      const double y = kernel.target_edge() * (-1.0 + 2.0 * (j + 1.0) / (points + 1.0));
      *sink << num(x) << "," << num(y) << "," << num(kernel.density(x, y)) << "\n";
    }
  }
  return kSuccess;
}

int cmd_hyper(const RunConfig& config, std::ostream& out) {
  const QParam q = generic_q(config, 0.0);
  const unsigned points = config.grid_points ? config.grid_points : 21;
  if (!(config.tmin > 0.0 && config.tmin < config.tmax) || points < 2) {
    throw UsageError("hyper needs 0 < --tmin < --tmax and at least two points");
  }
  std::vector<double> ts, alphas;
  for (unsigned i = 0; i < points; ++i) {
    const double t = config.tmin * std::pow(config.tmax / config.tmin, static_cast<double>(i) / (points - 1));
    ts.push_back(t);
    alphas.push_back(alpha(t, q));
  }
  // Least-squares slope of log alpha^{1/2} against log t.
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mx += std::log(ts[i]);
    my += 0.5 * std::log(alphas[i]);
  }
  mx /= ts.size();
  my /= ts.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double dx = std::log(ts[i]) - mx;
    sxy += dx * (0.5 * std::log(alphas[i]) - my);
    sxx += dx * dx;
  }
  Sink sink(config, out);
  *sink << "# qgauss hyper " << kVersion << "; q=" << num(q) << "; tmin=" << num(config.tmin)
        << "; tmax=" << num(config.tmax) << "; slope=" << num(sxy / sxx) << "\n";
  *sink << "t,alpha,alpha_sqrt\n";
  for (std::size_t i = 0; i < ts.size(); ++i) {
    *sink << num(ts[i]) << "," << num(alphas[i]) << "," << num(std::sqrt(alphas[i])) << "\n";
  }
  return kSuccess;
}

int cmd_paths(const RunConfig& config, std::ostream& out) {
  const QParam q = generic_q(config, 0.5);
  const Covariance c = resolve_covariance(config);
  const std::vector<double> times = resolve_times(config, c);
  const PathEnsemble ens = sample_paths(c, q, times, config.paths, config.seed, config.origin);
  Sink sink(config, out);
  ens.write_csv(*sink);
  return kSuccess;
}

int cmd_moments(const RunConfig& config, std::ostream& out) {
  const QParam q = generic_q(config, 0.5);
  const Covariance c = resolve_covariance(config);
  const std::vector<double> times = resolve_times(config, c);
  std::vector<unsigned> exponents = config.exponents;
  if (exponents.empty()) exponents.assign(times.size(), 1);
  if (exponents.size() != times.size()) throw UsageError("--exponents needs one entry per time");
  const ClassicalVersionReport r =
      classical_version_report(c, q, times, exponents, config.paths, config.seed, config.quad_points);
  nlohmann::ordered_json j;
  j["schema"] = std::string("qgauss moments ") + kVersion;
  j["kind"] = r.kind;
  j["q"] = r.q;
  j["times"] = r.times;
  j["exponents"] = r.exponents;
  j["fock"] = r.fock;
  j["quadrature"] = r.quadrature;
  j["mc"] = r.mc;
  j["mc_stderr"] = r.mc_stderr;
  j["n_paths"] = r.n_paths;
  j["seed"] = r.seed;
  j["fock_minus_quadrature"] = r.fock - r.quadrature;
  j["fock_minus_mc"] = r.fock - r.mc;
  Sink sink(config, out);
  *sink << j.dump(2) << "\n";
  const double tol = config.tol.value_or(1e-6);
  const bool ok = r.quadrature_error() <= tol && (r.n_paths == 0 || r.mc_z() <= 4.0);
  return ok ? kSuccess : kVerificationFailed;
}

int cmd_fermionic(const RunConfig& config, std::ostream& out) {
  if (config.q && *config.q != -1.0) throw UsageError("fermionic tables are defined for q = -1 only");
  const Covariance c = resolve_covariance(config);
  const std::vector<double> times = resolve_times(config, c);
  if (times.size() < 2) throw UsageError("fermionic needs at least two times");
  Sink sink(config, out);
  *sink << "# qgauss fermionic " << kVersion << "; kind=" << c.name() << "; q=-1\n";
  *sink << "s,t,from,to,probability\n";
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const FermionicKernel fk = fermionic_kernel(c, times[k], times[k + 1]);
    const double from[2] = {fk.source_state, -fk.source_state};
    const double to[2] = {fk.target_state, -fk.target_state};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        *sink << num(times[k]) << "," << num(times[k + 1]) << "," << num(from[i]) << "," << num(to[j]) << ","
              << num(fk.transition(i, j)) << "\n";
  }
  return kSuccess;
}

int cmd_verify(const RunConfig& config, std::ostream& out) {
  const std::vector<CheckResult> results = run_verify_suite(config);
  Sink sink(config, out);
  bool all = true;
  *sink << std::left << std::setw(11) << "group" << std::setw(42) << "check" << std::setw(6) << "result"
        << "detail\n";
  for (const CheckResult& r : results) {
    *sink << std::left << std::setw(11) << r.group << std::setw(42) << r.name << std::setw(6)
          << (r.passed ? "PASS" : "FAIL") << r.detail << "\n";
    all = all && r.passed;
  }
  *sink << (all ? "all checks passed" : "verification FAILED") << "\n";
  return all ? kSuccess : kVerificationFailed;
}

void add_common(CLI::App* sub, RunConfig& config) {
  sub->add_option_function<double>("--q", [&config](double q) { config.q = q; }, "deformation parameter q");
  sub->add_option("--kind", config.kind, "builtin covariance")->check(CLI::IsMember({"bm", "bridge", "ou"}));
  sub->add_option("--cov-grid", config.cov_grid, "covariance grid CSV (t_i,t_j,c)");
  sub->add_option("--times", config.times, "comma-separated sorted times")->delimiter(',');
  sub->add_option("--d", config.d, "one-particle dimension")->check(CLI::Range(1, 8));
  sub->add_option("--N", config.N, "Fock truncation degree")->check(CLI::Range(1, 12));
  sub->add_option("--quad-points", config.quad_points, "Gauss nodes for kernel quadrature")
      ->check(CLI::Range(1u, 2000u));
  sub->add_option("--paths", config.paths, "number of sampled paths");
  sub->add_option("--seed", config.seed, "master seed");
  sub->add_option("--out", config.out, "output file (default: standard output)");
  sub->add_option_function<double>("--tol", [&config](double t) { config.tol = t; }, "tolerance override");
  sub->add_option("--exponents", config.exponents, "moment exponents, one per time")->delimiter(',');
  sub->add_option("--grid-points", config.grid_points, "table resolution");
  sub->add_option("--tmin", config.tmin, "smallest time (hyper)");
  sub->add_option("--tmax", config.tmax, "largest time (hyper)");
  sub->add_flag("--expect-markov", config.expect_markov, "fail verification when the covariance is not Markov");
  sub->add_flag("--origin", config.origin, "prepend X_0 = 0 (bm paths)");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"qgauss: q-Gaussian processes, kernels and classical versions"};
  app.set_config("--config", "", "optional TOML/INI file with default flag values");
  app.require_subcommand(1);
  RunConfig config;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"verify", "run the invariant suites"},
      {"density", "table of the nu_q density"},
      {"kernel", "table of the transition density k_{s,t}(x, dy)"},
      {"hyper", "ultracontractivity constant alpha(t, q)"},
      {"paths", "sample paths of the classical version"},
      {"moments", "three-way time-ordered moment report"},
      {"fermionic", "q = -1 two-state transition tables"}};
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), config);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "qgauss: " << e.what() << "\n";
    return kUsageError;
  }
  config.command = app.get_subcommands().front()->get_name();

  try {
    if (config.command == "verify") return cmd_verify(config, out);
    if (config.command == "density") return cmd_density(config, out);
    if (config.command == "kernel") return cmd_kernel(config, out);
    if (config.command == "hyper") return cmd_hyper(config, out);
    if (config.command == "paths") return cmd_paths(config, out);
    if (config.command == "moments") return cmd_moments(config, out);
    if (config.command == "fermionic") return cmd_fermionic(config, out);
  } catch (const UsageError& e) {
    err << "qgauss " << config.command << ": " << e.what() << "\n";
    return kUsageError;
  } catch (const Error& e) {
    err << "qgauss " << config.command << ": " << e.what() << "\n";
    return kUsageError;
  }
  err << "qgauss: unknown command\n";
  return kUsageError;
}

}  // namespace qgauss::cli
