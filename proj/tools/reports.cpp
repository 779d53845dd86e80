#include "reports.hpp"

#include "parallel.hpp"

#include "curv4/curvature_engine.hpp"
#include "curv4/stability_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <regex>
#include <sstream>

namespace curv4::cli {

using json = nlohmann::ordered_json;

namespace {

std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void dump_into(const json& j, int indent, int depth, std::string& out) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close_pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad + json(it.key()).dump() + (indent > 0 ? ": " : ":");
        dump_into(it.value(), indent, depth + 1, out);
      }
      out += nl + close_pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      out += nl;
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k > 0) {
          out += ",";
          out += nl;
        }
        out += pad;
        dump_into(j[k], indent, depth + 1, out);
      }
      out += nl + close_pad + "]";
      return;
    }
    case json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? fmt17(x) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

json margin_json(const Margin& m) {
  return {{"value", m.value},
          {"holds", m.holds},
          {"worst_chart", m.worst.chart},
          {"worst_point", {m.worst.x[0], m.worst.x[1], m.worst.x[2], m.worst.x[3]}}};
}

json condition_json(const ConditionReport& r) {
  json j;
  j["points"] = r.points;
  j["min_s"] = r.min_s;
  j["max_s"] = r.max_s;
  j["min_sectional"] = margin_json(r.min_sectional);
  j["s6_minus_wplus"] = margin_json(r.s6_minus_wplus);
  j["s6_minus_wminus"] = margin_json(r.s6_minus_wminus);
  j["s12_plus_wplus"] = margin_json(r.s12_plus_wplus);
  j["s12_plus_wminus"] = margin_json(r.s12_plus_wminus);
  j["curvature_operator"] = margin_json(r.r_op);
  j["max_trace_residual"] = r.max_trace_residual;
  j["max_block_residual"] = r.max_block_residual;
  j["max_bianchi_residual"] = r.max_bianchi_residual;
  return j;
}

json vec_json(const Vector3& v) { return {v[0], v[1], v[2]}; }

SectionalOptions sectional_options(const RunConfig& cfg) {
  SectionalOptions o;
  o.enabled = cfg.sectional_starts > 0;
  o.starts = std::max(cfg.sectional_starts, 1);
  return o;
}

void check_grid(int grid) {
  if (grid < 8) throw SpecError("grid resolution must be at least 8");
}

struct SpectralSummary {
  double max_weyl = 0.0;
  double max_einstein = 0.0;
  Vector3 wplus_min = Vector3::Constant(std::numeric_limits<double>::infinity());
  Vector3 wplus_max = Vector3::Constant(-std::numeric_limits<double>::infinity());
  Vector3 margin_min = Vector3::Constant(std::numeric_limits<double>::infinity());
  Vector3 margin_max = Vector3::Constant(-std::numeric_limits<double>::infinity());
};

SpectralSummary spectral_summary(const MetricField& m, const std::vector<SamplePoint>& grid, int threads) {
  std::vector<SpectralSummary> per(grid.size());
  parallel_chunks(grid.size(), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      const CurvatureFrameData c = riemann_at(m, grid[k].chart, grid[k].x);
      SpectralSummary& s = per[k];
      s.max_weyl = std::sqrt(c.w_plus.squaredNorm() + c.w_minus.squaredNorm());
      s.max_einstein = (c.ric - (c.s / 4.0) * Matrix4::Identity()).norm();
      s.wplus_min = s.wplus_max = sorted_eigenvalues(c.w_plus);
      s.margin_min = s.margin_max = sorted_eigenvalues((c.s / 6.0) * Matrix3::Identity() - c.w_plus);
    }
  });
  SpectralSummary out;
  for (const auto& s : per) {
    out.max_weyl = std::max(out.max_weyl, s.max_weyl);
    out.max_einstein = std::max(out.max_einstein, s.max_einstein);
    out.wplus_min = out.wplus_min.cwiseMin(s.wplus_min);
    out.wplus_max = out.wplus_max.cwiseMax(s.wplus_max);
    out.margin_min = out.margin_min.cwiseMin(s.margin_min);
    out.margin_max = out.margin_max.cwiseMax(s.margin_max);
  }
  return out;
}

QuadratureSpec volume_quadrature(const RunConfig& cfg) {
  QuadratureSpec q;
  if (cfg.quad) q = {(*cfg.quad)[0], (*cfg.quad)[1]};
  return q;
}

SurfaceQuadrature surface_quadrature(const RunConfig& cfg) {
  SurfaceQuadrature q;
  if (cfg.quad) q = {(*cfg.quad)[0], (*cfg.quad)[1]};
  return q;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::string dump_json(const json& j, int indent) {
  std::string out;
  dump_into(j, indent, 0, out);
  out += "\n";
  return out;
}

std::vector<double> parse_value_list(const std::string& text) {
  static const std::regex range(R"(^\s*([-+0-9.eE]+)\s*:\s*([-+0-9.eE]+)\s*:\s*([-+0-9.eE]+)\s*$)");
  std::smatch mt;
  std::vector<double> out;
  try {
    if (std::regex_match(text, mt, range)) {
      const double a = std::stod(mt[1]), b = std::stod(mt[2]), h = std::stod(mt[3]);
      if (!(h > 0.0) || b < a) throw SpecError("bad range '" + text + "'");
      const long n = std::lround(std::floor((b - a) / h + 1e-9));
      for (long k = 0; k <= n; ++k) out.push_back(std::round((a + static_cast<double>(k) * h) * 1e12) / 1e12);
      return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw SpecError("bad number '" + item + "'");
    }
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const SpecError*>(&e)) throw;
    throw SpecError("cannot parse value list '" + text + "'");
  }
  if (out.empty()) throw SpecError("empty value list");
  return out;
}

std::array<int, 2> parse_quad(const std::string& text) {
  static const std::regex pat(R"(^\s*(\d+)\s*[x,]\s*(\d+)\s*$)");
  std::smatch mt;
  if (!std::regex_match(text, mt, pat)) throw SpecError("quadrature must look like 48x96");
  return {std::stoi(mt[1]), std::stoi(mt[2])};
}

int resolve_threads(std::optional<int> flag) {
  if (flag) return std::max(*flag, 1);
  if (const char* env = std::getenv("CURV4_THREADS")) {
    try {
      return std::max(std::stoi(env), 1);
    } catch (const std::exception&) {
      throw SpecError("CURV4_THREADS must be an integer");
    }
  }
  return 1;
}

json config_echo(const RunConfig& cfg) {
  json c;
  c["metric"] = cfg.metric;
  c["surface"] = cfg.surface;
  c["grid"] = cfg.grid;
  c["quad"] = cfg.quad ? json{(*cfg.quad)[0], (*cfg.quad)[1]} : json(nullptr);
  c["threads"] = cfg.threads;
  c["seed"] = cfg.seed;
  c["tol"] = cfg.tol ? json(*cfg.tol) : json(nullptr);
  c["sectional_starts"] = cfg.sectional_starts;
  c["degree_start"] = cfg.degree_start;
  c["degree_max"] = cfg.degree_max;
  c["identity_points"] = cfg.identity_points;
  c["identity_sections"] = cfg.identity_sections;
  c["identity_spectra"] = cfg.identity_spectra;
  return c;
}

json report_header(const std::string& command, const RunConfig& cfg) {
  json r;
  r["tool"] = "curv4";
  r["version"] = kToolVersion;
  r["schema_version"] = kSchemaVersion;
  r["command"] = command;
  r["config"] = config_echo(cfg);
  return r;
}

double self_dual_margin(const MetricField& m, int grid, int threads) {
  SectionalOptions o;
  o.enabled = false;
  std::vector<SamplePoint> pts = lattice_grid(m, grid);
  const std::vector<SamplePoint> extra = random_points(m, 4096, 0x5eedu);
  pts.insert(pts.end(), extra.begin(), extra.end());
  return condition_check(m, pts, threads, nullptr, o).s6_minus_wplus.value;
}

EmpiricalEpsMax empirical_eps_max(double t, int grid, double tolerance, int threads, const std::string& phi_id) {
  EmpiricalEpsMax out;
  out.construction = twisted_eps_max(t, phi_id);
  auto violates = [&](double eps) {
    ++out.evaluations;
    return self_dual_margin(twisted_metric(t, eps, phi_id), grid, threads) < -tolerance;
  };
  constexpr int kCoarse = 16;
  double lo = 0.0, hi = 0.0;
  for (int k = 1; k <= kCoarse; ++k) {
    const double eps = out.construction * k / kCoarse;
    if (violates(eps)) {
      hi = eps;
      out.violated = true;
      break;
    }
    lo = eps;
  }
  if (!out.violated) {
    out.empirical = out.construction;
    return out;
  }
  while (hi - lo > 1e-4 * out.construction) {
    const double mid = 0.5 * (lo + hi);
    (violates(mid) ? hi : lo) = mid;
  }
  out.empirical = hi;
  return out;
}

CommandResult cmd_analyze(const RunConfig& cfg, bool with_csv) {
  return guarded("analyze", cfg, [&] {
    const auto t0 = std::chrono::steady_clock::now();
    check_grid(cfg.grid);
    const MetricField m = parse_metric_spec(cfg.metric);
    const auto grid = lattice_grid(m, cfg.grid);
    std::vector<PointMargins> records;
    const ConditionReport rep = condition_check(m, grid, cfg.threads, &records, sectional_options(cfg));
    const SpectralSummary spec = spectral_summary(m, grid, cfg.threads);

    CommandResult res;
    json& r = res.report;
    r = report_header("analyze", cfg);
    r["metric"] = {{"name", m.name()}, {"parameters", m.parameters()}, {"charts", m.atlas().size()},
                   {"kaehler", m.is_kaehler()}};
    r["aggregate"] = condition_json(rep);
    r["spectra"] = {{"wplus_eigenvalues_min", vec_json(spec.wplus_min)},
                    {"wplus_eigenvalues_max", vec_json(spec.wplus_max)},
                    {"s6_minus_wplus_eigenvalues_min", vec_json(spec.margin_min)},
                    {"s6_minus_wplus_eigenvalues_max", vec_json(spec.margin_max)},
                    {"max_weyl_norm", spec.max_weyl},
                    {"max_einstein_residual", spec.max_einstein}};
    const double vol = volume(m, volume_quadrature(cfg));
    r["volume"] = {{"value", vol}, {"ratio_to_16pi2", vol / (16.0 * std::numbers::pi * std::numbers::pi)}};
    if (m.is_kaehler()) {
      const KaehlerResiduals k = kaehler_residuals(m, grid);
      r["kaehler"] = {{"j_squared", k.j_squared}, {"compatibility", k.compatibility}, {"parallel", k.parallel}};
    }
    if (with_csv) {
      std::string& csv = res.csv;
      csv = "chart,x0,x1,x2,x3,s,min_sectional,s6_minus_wplus,s6_minus_wminus,s12_plus_wplus,s12_plus_wminus,"
            "curvature_operator,trace_residual,block_residual,bianchi_residual\n";
      for (const auto& p : records) {
        csv += std::to_string(p.chart);
        for (double v : {p.x[0], p.x[1], p.x[2], p.x[3], p.s, p.min_sectional, p.s6_minus_wplus, p.s6_minus_wminus,
                         p.s12_plus_wplus, p.s12_plus_wminus, p.r_op, p.trace_residual, p.block_residual,
                         p.bianchi_residual})
          csv += "," + (std::isfinite(v) ? fmt17(v) : std::string("nan"));
        csv += "\n";
      }
      r["csv_rows"] = records.size();
    }
    if (cfg.timing) r["wall_clock_s"] = seconds_since(t0);
    return res;
  });
}

CommandResult cmd_scan_family(const RunConfig& cfg) {
  return guarded("scan-family", cfg, [&] {
    const auto t0 = std::chrono::steady_clock::now();
    check_grid(cfg.grid);
    const std::vector<double> ts = cfg.t_values.empty() ? parse_value_list("0:1:0.25") : cfg.t_values;
    const std::vector<double> eps = cfg.eps_values.empty() ? std::vector<double>{0.0} : cfg.eps_values;
    for (double t : ts)
      if (t < 0.0 || t > 1.0) throw SpecError("t must lie in [0, 1]");
    const double tol = cfg.tol.value_or(1e-6);
    const double vol0 = 16.0 * std::numbers::pi * std::numbers::pi;

    CommandResult res;
    json& r = res.report;
    r = report_header("scan-family", cfg);
    r["t_values"] = ts;
    r["eps_values"] = eps;
    r["margin_tolerance"] = tol;
    json cells = json::array();
    json rows = json::array();
    res.csv = "t,eps,status,min_s6_minus_wplus,min_sectional,min_s,max_s,volume_ratio\n";
    for (double t : ts) {
      json trow;
      trow["t"] = t;
      const double construction = twisted_eps_max(t);
      trow["construction_eps_max"] = construction;
      if (cfg.eps_bisection) {
        const EmpiricalEpsMax e = empirical_eps_max(t, cfg.grid, tol, cfg.threads);
        trow["empirical_eps_max"] = e.empirical;
        trow["margin_violated_below_construction_bound"] = e.violated;
        trow["bisection_evaluations"] = e.evaluations;
      }
      rows.push_back(trow);
      for (double ep : eps) {
        json cell;
        cell["t"] = t;
        cell["eps"] = ep;
        try {
          const MetricField m = twisted_metric(t, ep);
          const ConditionReport cr =
              condition_check(m, lattice_grid(m, cfg.grid), cfg.threads, nullptr, sectional_options(cfg));
          const double vol = volume(m, volume_quadrature(cfg));
          cell["status"] = "ok";
          cell["aggregate"] = condition_json(cr);
          cell["volume"] = vol;
          cell["volume_ratio"] = vol / vol0;
          res.csv += fmt17(t) + "," + fmt17(ep) + ",ok," + fmt17(cr.s6_minus_wplus.value) + "," +
                     (std::isfinite(cr.min_sectional.value) ? fmt17(cr.min_sectional.value) : "nan") + "," +
                     fmt17(cr.min_s) + "," + fmt17(cr.max_s) + "," + fmt17(vol / vol0) + "\n";
        } catch (const GeometryError& e) {
          cell["status"] = "construction-failed";
          cell["message"] = e.what();
          res.csv += fmt17(t) + "," + fmt17(ep) + ",construction-failed,nan,nan,nan,nan,nan\n";
        }
        cells.push_back(cell);
      }
    }
    r["eps_max"] = rows;
    r["cells"] = cells;
    if (cfg.timing) r["wall_clock_s"] = seconds_since(t0);
    return res;
  });
}

CommandResult cmd_surface(const RunConfig& cfg) {
  return guarded("surface", cfg, [&] {
    const auto t0 = std::chrono::steady_clock::now();
    const MetricField m = parse_metric_spec(cfg.metric);
    if (cfg.surface.empty()) throw SpecError("surface requires --surface");
    const SurfaceImmersion s = parse_surface_spec(cfg.surface);
    if (!s.compatible_with(m)) throw SpecError("surface " + s.name() + " does not live in " + m.name());
    const auto nodes = sample_surface(s, m, surface_quadrature(cfg), cfg.threads);

    CommandResult res;
    json& r = res.report;
    r = report_header("surface", cfg);
    r["surface"] = {{"name", s.name()}, {"parameters", s.parameters()}, {"nodes", nodes.size()}};
    const double minimality = max_minimality_residual(nodes);
    double kdiff = 0.0;
    for (const auto& p : nodes) kdiff = std::max(kdiff, std::abs(p.k_perp_intrinsic - p.k_perp_extrinsic));
    r["minimality_residual"] = minimality;
    r["minimal"] = minimality < 1e-8;
    r["area"] = area(nodes);
    r["chern_number"] = chern_number(nodes);
    r["normal_curvature_cross_path"] = kdiff;

    json warnings = json::array();
    const bool minimal = minimality < 1e-8;
    const SectionBasis basis(s, cfg.degree_max);
    NearHolomorphic nh;
    if (minimal) {
      IndexOptions iopt;
      iopt.threads = cfg.threads;
      IndexForm last;
      const RefinementResult ref = refine_until_stable(
          [&](int l) {
            last = assemble_index_form(nodes, SectionBasis(s, l), iopt);
            return last;
          },
          cfg.degree_start, cfg.degree_max);
      json hist = json::array();
      for (const auto& h : ref.history)
        hist.push_back({{"degree", h.degree}, {"morse_index", h.morse_index}, {"nullity", h.nullity}});
      json lowest = json::array();
      for (int k = 0; k < std::min<int>(12, static_cast<int>(last.spectrum.size())); ++k)
        lowest.push_back(last.spectrum[k]);
      r["stability"] = {{"morse_index", ref.morse_index},
                        {"nullity", ref.nullity},
                        {"degree_used", ref.degree_used},
                        {"history", hist},
                        {"lowest_eigenvalues", lowest},
                        {"tol_idx", last.tol_idx},
                        {"mass_rank", last.rank},
                        {"mass_condition", last.g_condition}};
      nh = near_holomorphic_section(last, nodes, SectionBasis(s, ref.degree_used));
      if (s.kind() != SurfaceKind::ComplexLine) {
        const NormalSection parallel = generator_section(s, m, 0, true);
        r["second_variation_parallel"] = second_variation(nodes, parallel);
      }
    } else {
      warnings.push_back("surface is not minimal: Morse index not computed");
      nh = near_holomorphic_section(nodes, basis, cfg.threads);
    }
    r["near_holomorphic"] = {{"energy", nh.energy}, {"degree", minimal ? r["stability"]["degree_used"].get<int>() : cfg.degree_max},
                             {"negative_chern", nh.negative_chern}};
    const WeitzenboeckVariation wv = weitzenboeck_variation(nodes, nh.sigma, !minimal);
    r["averaged_second_variation"] = {{"lhs", wv.lhs},
                                      {"rhs", wv.rhs},
                                      {"dbar_term", wv.dbar_term},
                                      {"pairing_term", wv.pairing_term},
                                      {"a_wedge_a_term", wv.a_wedge_a_term},
                                      {"residual", wv.residual}};
    if (s.kind() == SurfaceKind::Slice || s.kind() == SurfaceKind::PerturbedSlice) {
      if (minimal) {
        const TheoremCReport tc = theorem_c_harness(m, s, cfg.degree_start + 2, surface_quadrature(cfg), cfg.threads);
        r["slice_instability"] = {{"verdict", tc.verdict},
                                  {"delta2_sigma", tc.delta2_sigma},
                                  {"delta2_j_sigma", tc.delta2_j_sigma},
                                  {"sum", tc.sum},
                                  {"min_pairing", tc.min_pairing},
                                  {"max_a_wedge_a", tc.max_a_wedge_a},
                                  {"min_sectional", tc.min_sectional}};
      } else {
        r["slice_instability"] = {{"verdict", "refused: slice is not minimal"}, {"minimality_residual", minimality}};
      }
    }
    r["warnings"] = warnings;
    if (cfg.timing) r["wall_clock_s"] = seconds_since(t0);
    return res;
  });
}

}  // namespace curv4::cli
