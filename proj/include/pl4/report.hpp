#pragma once

// JSON views of the library results. Keys keep insertion order and every
// floating-point value is rounded to 9 significant digits, so a report is a
// deterministic function of its input.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "json.hpp"
#include "pl4/forms.hpp"
#include "pl4/holonomy.hpp"
#include "pl4/plcomplex.hpp"
#include "pl4/split.hpp"
#include "pl4/surface2.hpp"
#include "pl4/tensor4.hpp"

namespace pl4 {

using Json = nlohmann::ordered_json;

inline double round_sig(double x, int digits = 9) {
  if (!std::isfinite(x)) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  const double r = std::strtod(buf, nullptr);
  return r == 0 ? 0.0 : r;  // no negative zero
}

namespace detail {

inline Json num(double x) {
  if (!std::isfinite(x)) return Json(std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf"));
  return Json(round_sig(x));
}

inline Json nums(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

template <class M>
Json matrix_json(const M& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(num(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json vec_json(const Vec4& v) {
  Json a = Json::array();
  for (int i = 0; i < 4; ++i) a.push_back(num(v[i]));
  return a;
}

inline Json form_json(const AntisymForm& w) {
  Json a = Json::array();
  for (int i = 0; i < 6; ++i) a.push_back(num(w.entry(i)));
  return a;
}

inline Json plane_json(const OrientedPlane& p) {
  return Json{{"u", vec_json(p.u())}, {"v", vec_json(p.v())}, {"bivector", form_json(p.bivector())}};
}

}  // namespace detail

inline Json to_json(const SplitOptions& o) {
  using detail::num;
  return Json{{"orth_tol", num(o.orth_tol)},
              {"angle_tol", num(o.angle_tol)},
              {"snap_tol", num(o.snap_tol)},
              {"distance_tol", num(o.distance_tol)},
              {"budget_multiplier", o.budget_multiplier},
              {"complex_subdivision", o.complex_subdivision},
              {"surface_subdivision", o.surface_subdivision},
              {"distance_samples", o.distance_samples},
              {"seed", o.seed}};
}

inline Json to_json(const ValidationReport& r) {
  Json issues = Json::array();
  for (const auto& i : r.issues) {
    issues.push_back(Json{{"kind", std::string(to_string(i.kind))},
                          {"simplex", i.simplex},
                          {"facet", i.facet},
                          {"detail", i.detail}});
  }
  return Json{{"valid", r.valid()}, {"issues", std::move(issues)}};
}

inline Json to_json(const CurvatureCheck& c) {
  return Json{{"nonneg", c.nonneg}, {"worst_angle", detail::num(c.worst_angle)}, {"worst_triangle", c.worst_triangle}};
}

inline Json to_json(const SingularCensus& c) {
  Json strata = Json::array();
  for (std::size_t k = 0; k < c.codim2.size(); ++k) {
    Json tris = Json::array();
    for (int t : c.codim2[k].triangles) tris.push_back(t);
    strata.push_back(Json{{"id", k}, {"cone_angle", detail::num(c.codim2[k].cone_angle)}, {"triangles", std::move(tris)}});
  }
  Json verts = Json::array();
  for (const auto& s : c.codim4) verts.push_back(s.vertex);
  Json flags = Json::array();
  for (const auto& e : c.codim3_violations) flags.push_back(Json::array({e[0], e[1]}));
  return Json{{"codim2_count", c.codim2.size()},
              {"codim4_count", c.codim4.size()},
              {"codim3_count", c.codim3_violations.size()},
              {"codim2", std::move(strata)},
              {"codim4_vertices", std::move(verts)},
              {"codim3_edges", std::move(flags)}};
}

inline Json to_json(const HolonomyRep& rep) {
  Json gens = Json::array();
  for (const auto& g : rep.generators) {
    gens.push_back(Json{{"stratum", g.stratum},
                        {"triangle", g.triangle},
                        {"cone_angle", detail::num(g.cone_angle)},
                        {"rotation_angle", detail::num(g.angle)},
                        {"fixed_plane", Json::array({detail::vec_json(g.fixed_u), detail::vec_json(g.fixed_v)})},
                        {"matrix", detail::matrix_json(g.rotation)}});
  }
  return Json{{"base_simplex", rep.base}, {"generators", std::move(gens)}};
}

inline Json to_json(const UnitaryCheck& u) {
  Json j{{"unitary", u.unitary}, {"residual", detail::num(u.residual)}};
  j["complex_structure"] = u.unitary ? detail::form_json(u.witness) : Json(nullptr);
  return j;
}

inline Json to_json(const InvariantFormBasis& b) {
  Json basis = Json::array();
  for (const auto& w : b.basis) basis.push_back(detail::matrix_json(w.matrix()));
  return Json{{"dim", b.dim}, {"basis", std::move(basis)}};
}

// Per-simplex plane projectors are large; they are included only on request.
inline Json to_json(const DistributionPair& d, bool with_planes = false) {
  using detail::num;
  Json j{{"lambda", num(d.lambda)},
         {"mu", num(d.mu)},
         {"eigen_pair", Json::array({num(d.pair.a), num(d.pair.b)})},
         {"form", detail::matrix_json(d.form.matrix())},
         {"alpha", detail::plane_json(d.alpha_base)},
         {"beta", detail::plane_json(d.beta_base)},
         {"non_tree_gluings", d.non_tree_gluings},
         {"transport_error", num(d.transport_error)}};
  if (with_planes) {
    Json planes = Json::array();
    for (std::size_t s = 0; s < d.alpha.size(); ++s) {
      planes.push_back(Json{{"simplex", s},
                            {"alpha_projector", detail::matrix_json(d.alpha[s].projector())},
                            {"beta_projector", detail::matrix_json(d.beta[s].projector())}});
    }
    j["planes"] = std::move(planes);
  }
  return j;
}

inline Json to_json(const WitnessSummary& w) {
  return Json{{"omega3", detail::matrix_json(w.omega3.matrix())},
              {"residual", detail::num(w.residual)},
              {"generators", w.generators}};
}

inline Json to_json(const AlignmentTable& t) {
  Json a = Json::array();
  for (const auto& e : t) {
    a.push_back(Json{{"stratum", e.stratum},
                     {"tag", to_string(e.tag)},
                     {"deviation_alpha", detail::num(e.deviation_alpha)},
                     {"deviation_beta", detail::num(e.deviation_beta)}});
  }
  return a;
}

inline Json to_json(const std::vector<Codim4Structure>& v) {
  Json a = Json::array();
  for (const auto& s : v) {
    a.push_back(Json{{"vertex", s.vertex},
                     {"angle1", detail::num(s.angle1)},
                     {"angle2", detail::num(s.angle2)},
                     {"family1", s.family1},
                     {"family2", s.family2},
                     {"orthogonality", detail::num(s.orthogonality)}});
  }
  return a;
}

inline Json to_json(const UniformRadii& r) {
  return Json{{"delta", detail::num(r.delta)}, {"epsilon", detail::num(r.epsilon)}, {"from_strata", r.from_strata}};
}

inline Json surface_summary(const TriSurface& s, double angle_tol = 1e-7) {
  return Json{{"vertices", s.num_vertices()},
              {"triangles", s.num_triangles()},
              {"area", detail::num(s.area())},
              {"cone_angles", detail::nums(cone_angles(s, angle_tol))}};
}

inline Json to_json(const Leaf& l) {
  Json seed = Json::array();
  for (int i = 0; i < 5; ++i) seed.push_back(detail::num(l.seed.bary[i]));
  return Json{{"kind", to_string(l.kind)},
              {"seed_simplex", l.seed.simplex},
              {"seed_bary", std::move(seed)},
              {"polygons", l.polygons.size()},
              {"visits", l.visits},
              {"budget", l.budget},
              {"total_defect", detail::num(l.total_defect())},
              {"surface", surface_summary(l.surface)}};
}

inline Json to_json(const LeafDistanceReport& r) {
  Json samples = Json::array();
  for (const auto& s : r.samples) {
    samples.push_back(Json{{"seed_simplex", s.seed.simplex},
                           {"polygon", s.polygon},
                           {"d_x", detail::num(s.d_x)},
                           {"d_xhat", detail::num(s.d_xhat)},
                           {"deviation", detail::num(s.deviation)}});
  }
  return Json{{"target_simplex", r.target.simplex},
              {"samples", std::move(samples)},
              {"max_deviation", detail::num(r.max_deviation)},
              {"tolerance", detail::num(r.tolerance)},
              {"passed", r.passed}};
}

inline Json to_json(const VerifyReport& v) {
  using detail::num;
  return Json{{"passed", v.passed},
              {"census_match", v.census_match},
              {"census_detail", v.census_detail},
              {"volume_m", num(v.volume_m)},
              {"volume_product", num(v.volume_product)},
              {"volume_rel_error", num(v.volume_rel_error)},
              {"volume_match", v.volume_match},
              {"spectrum_size", v.spectrum_size},
              {"spectrum_max_rel", num(v.spectrum_max_rel)},
              {"spectrum_match", v.spectrum_match},
              {"leaf_consistent", v.leaf_consistent},
              {"leaf_distances", v.leaf_distances ? to_json(*v.leaf_distances) : Json(nullptr)}};
}

inline constexpr const char* kCaveatText =
    "input does not look simply connected relative to its strata; the invariant-form dimension is an upper "
    "bound on the parallel forms";

inline Json to_json(const SplitReport& r, bool with_planes = false) {
  auto opt = [](const auto& o, auto f) { return o ? f(*o) : Json(nullptr); };
  Json stages = Json::array();
  for (const auto& s : r.stages) stages.push_back(Json{{"name", s.name}, {"passed", s.passed}, {"detail", s.detail}});
  Json j;
  j["verdict"] = r.success() ? "Success" : "Failure";
  j["exit_code"] = r.exit_code();
  j["failed_stage"] = r.failed_stage.empty() ? Json(nullptr) : Json(r.failed_stage);
  j["failure_code"] = r.failure_code ? Json(std::string(to_string(*r.failure_code))) : Json(nullptr);
  j["message"] = r.message;
  j["options"] = to_json(r.options);
  j["complex"] = Json{{"vertices", r.num_vertices},
                      {"simplices", r.num_simplices},
                      {"volume", detail::num(r.volume)},
                      {"euler_characteristic", r.euler}};
  j["stages"] = std::move(stages);
  j["curvature"] = opt(r.curvature, [](const auto& c) { return to_json(c); });
  j["census"] = opt(r.census, [](const auto& c) { return to_json(c); });
  j["holonomy"] = opt(r.holonomy, [](const auto& h) { return to_json(h); });
  j["kahler"] = opt(r.unitary, [](const auto& u) { return to_json(u); });
  j["invariant_forms"] = opt(r.forms, [](const auto& f) { return to_json(f); });
  j["caveat"] = r.caveat ? Json(kCaveatText) : Json(nullptr);
  j["witness"] = opt(r.witness, [](const auto& w) { return to_json(w); });
  j["distributions"] = opt(r.distributions, [&](const auto& d) { return to_json(d, with_planes); });
  j["alignment"] = to_json(r.alignment);
  j["codim4"] = to_json(r.codim4);
  j["radii"] = to_json(r.radii);
  j["leaf_alpha"] = opt(r.leaf_alpha, [](const auto& l) { return to_json(l); });
  j["leaf_beta"] = opt(r.leaf_beta, [](const auto& l) { return to_json(l); });
  const double tol = r.options.angle_tol;
  j["factor_alpha"] = opt(r.factor_alpha, [&](const auto& f) { return surface_summary(f, tol); });
  j["factor_beta"] = opt(r.factor_beta, [&](const auto& f) { return surface_summary(f, tol); });
  j["verification"] = opt(r.verification, [](const auto& v) { return to_json(v); });
  return j;
}

}  // namespace pl4
