#include "identities.hpp"
#include "reports.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using curv4::cli::CommandResult;
using curv4::cli::RunConfig;

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  return static_cast<bool>(f);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curv4: curvature conditions on 4-manifolds and stability of minimal 2-spheres"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::optional<int> threads;
  std::optional<std::string> quad;
  std::string out, csv, t_range, eps_range;
  bool no_bisection = false;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--threads", threads, "worker threads (default: CURV4_THREADS or 1)");
    sub->add_option("--out", out, "write the JSON report here instead of stdout");
    sub->add_option("--seed", cfg.seed, "seed for randomized checks");
    sub->add_option("--quad", quad, "quadrature nodes, e.g. 48x96");
    sub->add_flag("--timing", cfg.timing, "include wall-clock time in the report");
  };

  auto* analyze = app.add_subcommand("analyze", "curvature margins of a metric on a lattice grid");
  common(analyze);
  analyze->add_option("--metric", cfg.metric, "metric spec, e.g. product(a=1,b=1)")->required();
  analyze->add_option("--grid", cfg.grid, "lattice points per coordinate and chart (>= 8)");
  analyze->add_option("--csv", csv, "per-point margins as CSV");
  analyze->add_option("--sectional-starts", cfg.sectional_starts, "minimizer starts per point, 0 to skip");
  analyze->add_option("--tol", cfg.tol, "unused; accepted for symmetry");

  auto* scan = app.add_subcommand("scan-family", "sweep the twisted family over t and eps");
  common(scan);
  scan->add_option("--grid", cfg.grid, "lattice points per coordinate and chart (>= 8)");
  scan->add_option("--t", t_range, "t values: list or start:stop:step");
  scan->add_option("--eps", eps_range, "eps values: list or start:stop:step");
  scan->add_option("--csv", csv, "cell table as CSV");
  scan->add_option("--tol", cfg.tol, "positivity tolerance for the eps_max bisection");
  scan->add_option("--sectional-starts", cfg.sectional_starts, "minimizer starts per point, 0 to skip");
  scan->add_flag("--no-bisection", no_bisection, "skip the empirical eps_max search");

  auto* verify = app.add_subcommand("verify-identities", "run the identity suite on the built-in models");
  common(verify);
  verify->add_option("--tol", cfg.tol, "replace every identity tolerance");
  verify->add_option("--points", cfg.identity_points, "random points per metric");
  verify->add_option("--sections", cfg.identity_sections, "random sections per surface");
  verify->add_option("--spectra", cfg.identity_spectra, "synthetic curvature spectra");

  auto* surface = app.add_subcommand("surface", "geometry and stability of an immersed 2-sphere");
  common(surface);
  surface->add_option("--metric", cfg.metric, "ambient metric spec")->required();
  surface->add_option("--surface", cfg.surface, "surface spec, e.g. slice(factor=1)")->required();
  surface->add_option("--degree", cfg.degree_max, "largest harmonic degree for the index refinement");
  surface->add_option("--tol", cfg.tol, "unused; accepted for symmetry");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : curv4::cli::kParseError;
  }

  CommandResult res;
  try {
    cfg.threads = curv4::cli::resolve_threads(threads);
    if (quad) cfg.quad = curv4::cli::parse_quad(*quad);
    if (!t_range.empty()) cfg.t_values = curv4::cli::parse_value_list(t_range);
    if (!eps_range.empty()) cfg.eps_values = curv4::cli::parse_value_list(eps_range);
    cfg.eps_bisection = !no_bisection;
  } catch (const curv4::SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return curv4::cli::kParseError;
  }

  if (*analyze)
    res = curv4::cli::cmd_analyze(cfg, !csv.empty());
  else if (*scan)
    res = curv4::cli::cmd_scan_family(cfg);
  else if (*verify)
    res = curv4::cli::cmd_verify_identities(cfg);
  else
    res = curv4::cli::cmd_surface(cfg);

  const std::string text = curv4::cli::dump_json(res.report);
  if (out.empty()) {
    std::cout << text;
  } else if (!write_file(out, text)) {
    std::cerr << "error: cannot write " << out << "\n";
    return curv4::cli::kConstructionError;
  }
  if (!csv.empty() && !res.csv.empty() && !write_file(csv, res.csv)) {
    std::cerr << "error: cannot write " << csv << "\n";
    return curv4::cli::kConstructionError;
  }
  if (res.report.contains("error")) std::cerr << "error: " << res.report["error"]["message"].get<std::string>() << "\n";
  if (res.report.contains("violations"))
    for (const auto& v : res.report["violations"]) std::cerr << "violation: " << v.get<std::string>() << "\n";
  if (res.report.contains("warnings"))
    for (const auto& w : res.report["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
  return res.exit_code;
}
