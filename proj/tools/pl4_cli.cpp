// pl4: product decomposition of nonnegatively curved PL 4-manifolds.
//
//   pl4 generate P Q -o out.complex | pl4 generate --fixture flat-torus -o out.complex
//   pl4 validate in.complex
//   pl4 analyze in.complex [--planes]
//   pl4 decompose in.complex out_prefix [--report path] [--rotate-planes rad]
//   pl4 verify in.complex f1 f2
//
// Reports are JSON on stdout, printed once at the end and only on exit 0.
// Exit codes: 0 success, 2 hypothesis violated, 3 invalid input.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "pl4/pl4.hpp"

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol_angle, tol_snap;
  bool quiet = false;
};

pl4::SplitOptions resolve_options(const Globals& g) {
  pl4::SplitOptions o = pl4::load_config(g.config).options;
  if (g.seed) o.seed = *g.seed;
  if (g.tol_angle) o.angle_tol = *g.tol_angle;
  if (g.tol_snap) o.snap_tol = *g.tol_snap;
  pl4::check_config(o);
  return o;
}

std::string dump(const pl4::Json& j) { return j.dump(2) + "\n"; }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw pl4::Error(pl4::ErrorCode::InvalidInput, "cannot write '" + path + "'");
  out << text;
}

pl4::Json census_summary(const pl4::MetricComplex4& mc) {
  const auto c = pl4::singular_census(mc);
  std::vector<double> angles;
  for (const auto& s : c.codim2) angles.push_back(s.cone_angle);
  std::sort(angles.begin(), angles.end());
  angles.erase(std::unique(angles.begin(), angles.end(),
                           [](double a, double b) { return std::abs(a - b) <= 1e-7; }),
               angles.end());
  pl4::Json distinct = pl4::Json::array();
  for (double a : angles) distinct.push_back(pl4::round_sig(a));
  return pl4::Json{{"vertices", mc.num_vertices()},
                   {"simplices", mc.num_simplices()},
                   {"triangles", mc.num_triangles()},
                   {"volume", pl4::round_sig(mc.total_volume())},
                   {"codim2_strata", c.codim2.size()},
                   {"codim2_angles", std::move(distinct)},
                   {"codim4_candidates", c.codim4.size()},
                   {"codim3_edges", c.codim3_violations.size()}};
}

int cmd_generate(std::ostream& out, const std::string& f1, const std::string& f2, const std::string& fixture,
                 const std::string& path) {
  pl4::MetricComplex4 mc;
  pl4::Json j;
  if (!fixture.empty()) {
    if (fixture == "flat-torus") mc = pl4::flat_torus_complex(3);
    else if (fixture == "saddle-join") mc = pl4::saddle_join_complex();
    else throw pl4::Error(pl4::ErrorCode::UnknownName, "unknown fixture '" + fixture + "'");
    j["fixture"] = fixture;
  } else {
    if (f1.empty() || f2.empty()) throw pl4::Error(pl4::ErrorCode::InvalidInput, "generate needs two factors");
    mc = pl4::product_complex(pl4::resolve_surface(f1), pl4::resolve_surface(f2));
    j["factors"] = pl4::Json::array({f1, f2});
  }
  pl4::save_complex(path, mc);
  j["output"] = path;
  j["census"] = census_summary(mc);
  out << dump(j);
  return pl4::kExitSuccess;
}

int cmd_validate(std::ostream& out, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pl4::Error(pl4::ErrorCode::InvalidInput, "cannot open complex file '" + path + "'");
  const auto r = pl4::read_complex_unchecked(in);
  if (!r.report.valid()) {
    for (const auto& i : r.report.issues) {
      std::cerr << "invalid: " << pl4::to_string(i.kind) << " at simplex " << i.simplex << ": " << i.detail << "\n";
    }
    return pl4::kExitInvalidInput;
  }
  const auto curv = pl4::check_nonneg_curvature(r.complex);
  if (!curv.nonneg) {
    std::cerr << "negative curvature: worst cone angle " << pl4::format_double(curv.worst_angle)
              << " > 2pi at triangle " << curv.worst_triangle << "\n";
    return pl4::kExitHypothesis;
  }
  pl4::Json j{{"input", path},
              {"validation", pl4::to_json(r.report)},
              {"curvature", pl4::to_json(curv)},
              {"census", census_summary(r.complex)}};
  out << dump(j);
  return pl4::kExitSuccess;
}

int cmd_analyze(std::ostream& out, const std::string& path, const pl4::SplitOptions& opt, bool planes) {
  const pl4::MetricComplex4 mc = pl4::load_complex(path);
  const auto census = pl4::singular_census(mc);
  const auto tree = pl4::dual_graph(mc);
  const auto rep = pl4::holonomy_generators(mc, census, tree);
  const auto forms = pl4::invariant_forms(rep, opt.orth_tol);
  const bool caveat = pl4::invariant_form_caveat(mc, census);
  pl4::Json j;
  j["input"] = path;
  j["complex"] = pl4::Json{{"vertices", mc.num_vertices()},
                           {"simplices", mc.num_simplices()},
                           {"volume", pl4::round_sig(mc.total_volume())},
                           {"euler_characteristic", pl4::euler_characteristic(mc)}};
  j["curvature"] = pl4::to_json(pl4::check_nonneg_curvature(mc));
  j["census"] = pl4::to_json(census);
  j["holonomy"] = pl4::to_json(rep);
  j["kahler"] = pl4::to_json(pl4::is_unitary_holonomy(rep, opt.orth_tol));
  j["invariant_forms"] = pl4::to_json(forms);
  j["caveat"] = caveat ? pl4::Json(pl4::kCaveatText) : pl4::Json(nullptr);
  j["distributions"] = nullptr;
  j["witness"] = nullptr;
  if (forms.dim == 2) {
    try {
      j["distributions"] = pl4::to_json(pl4::extract_distributions(forms, rep, &mc, &tree), planes);
    } catch (const pl4::ContradictionWitnessError& w) {
      j["witness"] = pl4::to_json(pl4::WitnessSummary{w.omega3(), w.residual(), static_cast<int>(w.generators().size())});
    }
  }
  if (caveat) std::cerr << "caveat: " << pl4::kCaveatText << "\n";
  out << dump(j);
  return pl4::kExitSuccess;
}

int cmd_decompose(std::ostream& out, const std::string& path, const std::string& prefix,
                  const pl4::SplitOptions& opt, const std::string& report_path, std::optional<double> rotate,
                  bool planes) {
  const pl4::MetricComplex4 mc = pl4::load_complex(path);
  pl4::SplitReport r;
  if (rotate) {
    const auto census = pl4::singular_census(mc);
    const auto tree = pl4::dual_graph(mc);
    const auto rep = pl4::holonomy_generators(mc, census, tree);
    const auto dist = pl4::extract_distributions(pl4::invariant_forms(rep, opt.orth_tol), rep, &mc, &tree);
    r = pl4::decompose_with_distributions(mc, pl4::rotate_distributions(dist, *rotate), opt);
  } else {
    r = pl4::decompose(mc, opt);
  }
  const std::string text = dump(pl4::to_json(r, planes));
  if (!report_path.empty()) write_text(report_path, text);
  if (!r.success()) {
    std::cerr << "decompose failed at " << r.failed_stage << ": " << r.message << "\n";
    return r.exit_code();
  }
  pl4::save_surface(prefix + ".alpha.surf", *r.factor_alpha);
  pl4::save_surface(prefix + ".beta.surf", *r.factor_beta);
  out << text;
  return pl4::kExitSuccess;
}

int cmd_verify(std::ostream& out, const std::string& path, const std::string& f1, const std::string& f2,
               const pl4::SplitOptions& opt) {
  const pl4::MetricComplex4 mc = pl4::load_complex(path);
  const pl4::TriSurface a = pl4::resolve_surface(f1), b = pl4::resolve_surface(f2);
  std::optional<pl4::LeafDistanceReport> ld;
  std::string leaf_note;
  try {
    const auto census = pl4::singular_census(mc);
    const auto tree = pl4::dual_graph(mc);
    const auto rep = pl4::holonomy_generators(mc, census, tree);
    const auto dist = pl4::extract_distributions(pl4::invariant_forms(rep, opt.orth_tol), rep, &mc, &tree);
    ld = pl4::leaf_distance_consistency(mc, dist, census, opt);
  } catch (const pl4::Error& e) {
    leaf_note = e.what();
  }
  const auto v = pl4::verify_product(mc, a, b, opt, ld);
  pl4::Json j{{"input", path}, {"factors", pl4::Json::array({f1, f2})}, {"verification", pl4::to_json(v)}};
  if (!leaf_note.empty()) j["leaf_check_skipped"] = leaf_note;
  if (!v.passed) {
    std::cerr << "verify failed:";
    if (!v.census_match) std::cerr << " census (" << v.census_detail << ")";
    if (!v.volume_match) std::cerr << " volume";
    if (v.census_match && !v.spectrum_match) std::cerr << " distance spectrum";
    if (!v.leaf_consistent) std::cerr << " leaf distances";
    std::cerr << "\n";
    return pl4::kExitHypothesis;
  }
  out << dump(j);
  return pl4::kExitSuccess;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Product decomposition of nonnegatively curved PL 4-manifolds"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "JSON config file (default: $PL4_CONFIG)");
  app.add_option("--seed", g.seed, "RNG seed for sampling");
  app.add_option("--tol-angle", g.tol_angle, "cone-angle and alignment tolerance");
  app.add_option("--tol-snap", g.tol_snap, "leaf snap tolerance, relative to the local edge scale");
  app.add_flag("--quiet", g.quiet, "suppress the report on stdout");

  std::string f1, f2, fixture, out_path, in, prefix, report_path;
  std::optional<double> rotate;
  bool planes = false;

  auto* gen = app.add_subcommand("generate", "write the product complex of two surfaces, or a fixture");
  gen->add_option("factor1", f1, "built-in name (tetra, cube, octa, box(a,b,c)) or surface file");
  gen->add_option("factor2", f2, "built-in name or surface file");
  gen->add_option("--fixture", fixture, "flat-torus | saddle-join");
  gen->add_option("-o,--out", out_path, "output complex file")->required();

  auto* val = app.add_subcommand("validate", "check complex invariants and curvature");
  val->add_option("input", in, "complex file")->required();

  auto* ana = app.add_subcommand("analyze", "census, holonomy and invariant forms");
  ana->add_option("input", in, "complex file")->required();
  ana->add_flag("--planes", planes, "include per-simplex plane projectors");

  auto* dec = app.add_subcommand("decompose", "split into two surface factors");
  dec->add_option("input", in, "complex file")->required();
  dec->add_option("out_prefix", prefix, "factor files are <prefix>.alpha.surf and <prefix>.beta.surf")->required();
  dec->add_option("--report", report_path, "also write the report here, on failure too");
  dec->add_option("--rotate-planes", rotate, "diagnostic: rotate the plane fields by this angle (radians)");
  dec->add_flag("--planes", planes, "include per-simplex plane projectors");

  auto* ver = app.add_subcommand("verify", "compare a complex with the product of two surfaces");
  ver->add_option("input", in, "complex file")->required();
  ver->add_option("factor1", f1, "built-in name or surface file")->required();
  ver->add_option("factor2", f2, "built-in name or surface file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : pl4::kExitInvalidInput;
  }

  std::ostringstream out;
  int rc = pl4::kExitSuccess;
  try {
    const pl4::SplitOptions opt = resolve_options(g);
    if (*gen) rc = cmd_generate(out, f1, f2, fixture, out_path);
    else if (*val) rc = cmd_validate(out, in);
    else if (*ana) rc = cmd_analyze(out, in, opt, planes);
    else if (*dec) rc = cmd_decompose(out, in, prefix, opt, report_path, rotate, planes);
    else if (*ver) rc = cmd_verify(out, in, f1, f2, opt);
  } catch (const pl4::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pl4::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pl4::kExitInvalidInput;
  }
  if (rc == pl4::kExitSuccess && !g.quiet) std::cout << out.str() << std::flush;
  return rc;
}
