#pragma once

// Command implementations behind the curv4 CLI. Each command produces a JSON
// report and an exit code; I/O is left to the caller.

#include "curv4/errors.hpp"
#include "curv4/metric_library.hpp"
#include "curv4/surface_lab.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace curv4::cli {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

enum ExitCode { kOk = 0, kViolation = 1, kParseError = 2, kConstructionError = 3 };

struct RunConfig {
  std::string metric = "round4(r=1)";
  std::string surface;
  int grid = 8;                          // lattice points per coordinate and chart
  std::optional<std::array<int, 2>> quad;
  int threads = 1;
  unsigned seed = 42;
  std::optional<double> tol;             // replaces every identity tolerance
  int sectional_starts = 16;             // 0 disables the sectional minimizer
  std::vector<double> t_values;
  std::vector<double> eps_values;
  bool eps_bisection = true;
  int degree_start = 2;
  int degree_max = 10;
  int identity_points = 20;
  int identity_sections = 20;
  int identity_spectra = 10000;
  bool timing = false;
};

struct CommandResult {
  nlohmann::ordered_json report;
  int exit_code = kOk;
  std::string csv;  // per-point dump, empty when not produced
};

CommandResult cmd_analyze(const RunConfig& cfg, bool with_csv = false);
CommandResult cmd_scan_family(const RunConfig& cfg);
CommandResult cmd_verify_identities(const RunConfig& cfg);
CommandResult cmd_surface(const RunConfig& cfg);

nlohmann::ordered_json report_header(const std::string& command, const RunConfig& cfg);

// Runs a command, mapping SpecError to exit 2 and GeometryError to exit 3.
template <typename F>
CommandResult guarded(const std::string& command, const RunConfig& cfg, F&& f) {
  auto fail = [&](int code, const char* kind, const std::exception& e) {
    CommandResult r;
    r.report = report_header(command, cfg);
    r.report["error"] = {{"kind", kind}, {"message", e.what()}};
    r.exit_code = code;
    return r;
  };
  try {
    return f();
  } catch (const SpecError& e) {
    return fail(kParseError, "parse", e);
  } catch (const GeometryError& e) {
    return fail(kConstructionError, "construction", e);
  }
}

// JSON with every float printed to 17 significant digits; NaN and ±inf as null.
std::string dump_json(const nlohmann::ordered_json& j, int indent = 2);

// "1,2,3" or "start:stop:step" (inclusive).
std::vector<double> parse_value_list(const std::string& text);
// "48x96" or "48,96".
std::array<int, 2> parse_quad(const std::string& text);

// Thread count: explicit flag, else CURV4_THREADS, else 1.
int resolve_threads(std::optional<int> flag);

// First ε in (0, ε_c] where self_dual_margin drops below
// −tolerance; ε_c when none does. Coarse scan, then bisection.
struct EmpiricalEpsMax {
  double construction = 0.0;
  double empirical = 0.0;
  bool violated = false;
  int evaluations = 0;
};
EmpiricalEpsMax empirical_eps_max(double t, int grid, double tolerance, int threads,
                                  const std::string& phi_id = "height-product");

// min eig(s/6 − W₊) over the lattice plus 4096 seeded random points.
double self_dual_margin(const MetricField& m, int grid, int threads);

nlohmann::ordered_json config_echo(const RunConfig& cfg);

}  // namespace curv4::cli
