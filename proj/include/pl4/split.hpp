#pragma once

// Splitting a product-like complex: strata alignment, codim-4 structure, leaf
// tracing, distance consistency between leaves and end-to-end verification.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pl4/error.hpp"
#include "pl4/forms.hpp"
#include "pl4/geodesic.hpp"
#include "pl4/holonomy.hpp"
#include "pl4/plcomplex.hpp"
#include "pl4/surface2.hpp"
#include "pl4/tensor4.hpp"

namespace pl4 {

struct SplitOptions {
  double orth_tol = 1e-9;       // forms, commutation, codim-4 orthogonality
  double angle_tol = 1e-7;      // cone angles; plane alignment (sine of the principal angle)
  double snap_tol = 1e-7;       // relative to the local edge scale
  double distance_tol = 3e-2;   // relative, refined-graph distances
  int budget_multiplier = 64;   // polygon visits per simplex before giving up
  int complex_subdivision = 3;  // refined graph on the 4-complex
  int surface_subdivision = 8;  // refined graph on surfaces
  int distance_samples = 4;     // leaves sampled for the consistency check
  std::uint64_t seed = 20240611;
};

// ---------------------------------------------------------------------------
// alignment

enum class AlignmentTag { ParallelAlpha, ParallelBeta, Misaligned };

inline const char* to_string(AlignmentTag t) {
  switch (t) {
    case AlignmentTag::ParallelAlpha: return "ParallelAlpha";
    case AlignmentTag::ParallelBeta: return "ParallelBeta";
    case AlignmentTag::Misaligned: return "Misaligned";
  }
  return "?";
}

struct AlignmentEntry {
  int stratum = -1;
  AlignmentTag tag = AlignmentTag::Misaligned;
  double deviation_alpha = 0;  // max over the stratum's triangle charts
  double deviation_beta = 0;
};

using AlignmentTable = std::vector<AlignmentEntry>;

inline Mat4 triangle_projector(const Metric4& m, int s, const std::array<int, 3>& local) {
  const auto& c = m.chart(s);
  const Vec4 e1 = (c[local[1]] - c[local[0]]).normalized();
  Vec4 e2 = c[local[2]] - c[local[0]];
  e2 -= e1.dot(e2) * e1;
  e2.normalize();
  return e1 * e1.transpose() + e2 * e2.transpose();
}

// Operator 2-norm of the projector difference: sine of the largest principal angle.
inline double plane_deviation(const Mat4& p, const Mat4& q) {
  Eigen::SelfAdjointEigenSolver<Mat4> es(p - q, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline AlignmentTable align_strata(const MetricComplex4& mc, const DistributionPair& dist,
                                   const SingularCensus& census, double tol = 1e-7) {
  const Metric4& m = mc.metric();
  if (static_cast<int>(dist.alpha.size()) != m.num_simplices()) {
    throw Error(ErrorCode::PreconditionViolation, "align_strata: distributions not transported");
  }
  AlignmentTable table;
  for (int k = 0; k < static_cast<int>(census.codim2.size()); ++k) {
    AlignmentEntry e;
    e.stratum = k;
    for (int tri : census.codim2[k].triangles) {
      for (int s : mc.triangle_star(tri)) {
        const Mat4 p = triangle_projector(m, s, local_triangle(m, s, mc.triangle(tri)));
        e.deviation_alpha = std::max(e.deviation_alpha, plane_deviation(p, dist.alpha[s].projector()));
        e.deviation_beta = std::max(e.deviation_beta, plane_deviation(p, dist.beta[s].projector()));
      }
    }
    if (e.deviation_alpha <= tol) {
      e.tag = AlignmentTag::ParallelAlpha;
    } else if (e.deviation_beta <= tol) {
      e.tag = AlignmentTag::ParallelBeta;
    }
    table.push_back(e);
  }
  return table;
}

inline int count_misaligned(const AlignmentTable& t) {
  return static_cast<int>(std::count_if(t.begin(), t.end(), [](const AlignmentEntry& e) {
    return e.tag == AlignmentTag::Misaligned;
  }));
}

// ---------------------------------------------------------------------------
// codim-4 vertices

// angle1 is the cone angle an alpha-leaf sees at the vertex: it comes from the
// strata parallel to beta (transverse to alpha). angle2 likewise for beta.
struct Codim4Structure {
  int vertex = -1;
  double angle1 = kTwoPi, angle2 = kTwoPi;
  std::vector<int> family1;  // strata parallel to beta
  std::vector<int> family2;  // strata parallel to alpha
  double orthogonality = 0;  // max |P_a P_b| over chart pairs
};

inline std::vector<Codim4Structure> classify_codim4(const MetricComplex4& mc, const DistributionPair& dist,
                                                    const SingularCensus& census,
                                                    const AlignmentTable& alignment,
                                                    const SplitOptions& opt = {}) {
  const Metric4& m = mc.metric();
  // strata through each vertex
  std::map<int, std::set<int>> incident;
  for (int k = 0; k < static_cast<int>(census.codim2.size()); ++k) {
    for (int tri : census.codim2[k].triangles) {
      for (int l : mc.triangle(tri)) incident[l].insert(k);
    }
  }
  // simplices through each vertex
  std::vector<std::vector<int>> vstar(mc.num_vertices());
  for (int s = 0; s < m.num_simplices(); ++s) {
    for (int l : m.labels(s)) vstar[l].push_back(s);
  }

  std::vector<Codim4Structure> out;
  for (const Stratum& st : census.codim4) {
    const int v = st.vertex;
    const std::string where = "vertex " + std::to_string(v) + ": ";
    Codim4Structure c;
    c.vertex = v;
    for (int k : incident[v]) {
      switch (alignment[k].tag) {
        case AlignmentTag::ParallelBeta: c.family1.push_back(k); break;
        case AlignmentTag::ParallelAlpha: c.family2.push_back(k); break;
        case AlignmentTag::Misaligned:
          throw Error(ErrorCode::NotProductLike, where + "misaligned stratum " + std::to_string(k));
      }
    }
    if (c.family1.empty() || c.family2.empty()) {
      throw Error(ErrorCode::NotProductLike,
                  where + "all incident strata are parallel to one distribution (" +
                      std::to_string(c.family1.size()) + "/" + std::to_string(c.family2.size()) + ")");
    }
    auto family_angle = [&](const std::vector<int>& fam) {
      const double a = census.codim2[fam.front()].cone_angle;
      for (int k : fam) {
        if (std::abs(census.codim2[k].cone_angle - a) > opt.angle_tol) {
          throw Error(ErrorCode::NotProductLike, where + "strata of one family disagree in cone angle");
        }
      }
      if (a > kTwoPi + opt.angle_tol) throw Error(ErrorCode::NotProductLike, where + "cone angle exceeds 2 pi");
      return a;
    };
    c.angle1 = family_angle(c.family1);
    c.angle2 = family_angle(c.family2);

    const std::set<int> f1(c.family1.begin(), c.family1.end());
    const std::set<int> f2(c.family2.begin(), c.family2.end());
    for (int s : vstar[v]) {
      std::vector<Mat4> p1, p2;
      const auto& l = m.labels(s);
      const int lv = m.local_index(s, v);
      for (int a = 0; a < 5; ++a) {
        for (int b = a + 1; b < 5; ++b) {
          if (a == lv || b == lv) continue;
          std::array<int, 3> loc{lv, a, b};
          std::sort(loc.begin(), loc.end());
          const int tri = mc.triangle_id({l[loc[0]], l[loc[1]], l[loc[2]]});
          const int k = census.stratum_of_triangle[tri];
          if (f1.count(k)) p1.push_back(triangle_projector(m, s, loc));
          if (f2.count(k)) p2.push_back(triangle_projector(m, s, loc));
        }
      }
      for (const Mat4& a : p1) {
        for (const Mat4& b : p2) c.orthogonality = std::max(c.orthogonality, (a * b).cwiseAbs().maxCoeff());
      }
      c.orthogonality = std::max(
          c.orthogonality, (dist.alpha[s].projector() * dist.beta[s].projector()).cwiseAbs().maxCoeff());
    }
    if (c.orthogonality > opt.orth_tol) {
      throw Error(ErrorCode::NotProductLike, where + "families are not orthogonal (" +
                                                 std::to_string(c.orthogonality) + ")");
    }
    out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// uniform radii

namespace detail {

// Distance between the convex hulls of two small point sets by alternating
// projections; both hulls are faces of one simplex.
inline double face_distance(const std::vector<Vec4>& x, const std::vector<Vec4>& y) {
  Vec4 p = Vec4::Zero(), q = Vec4::Zero();
  for (const Vec4& v : x) p += v;
  for (const Vec4& v : y) q += v;
  p /= static_cast<double>(x.size());
  q /= static_cast<double>(y.size());
  double d = (p - q).norm();
  for (int it = 0; it < 500; ++it) {
    p = min_broken_line_on_simplex<4>(q, q, std::span<const Vec4>(x), true);
    q = min_broken_line_on_simplex<4>(p, p, std::span<const Vec4>(y), true);
    const double nd = (p - q).norm();
    if (d - nd <= 1e-14 * (1 + nd)) return nd;
    d = nd;
  }
  return d;
}

}  // namespace detail

struct UniformRadii {
  double delta = 0;    // local product radius
  double epsilon = 0;  // improved local product radius, below delta
  bool from_strata = false;  // false: no chart meets two disjoint strata
};

// Half the least chart distance between the closures of disjoint strata.
inline UniformRadii uniform_radii(const MetricComplex4& mc, const SingularCensus& census) {
  const Metric4& m = mc.metric();
  const int nk = static_cast<int>(census.codim2.size());
  std::vector<std::set<std::vector<int>>> faces(nk);  // sorted label sets of closure faces
  std::vector<std::set<int>> verts(nk);
  for (int k = 0; k < nk; ++k) {
    for (int tri : census.codim2[k].triangles) {
      const auto& t = mc.triangle(tri);
      faces[k].insert({t[0], t[1], t[2]});
      for (int a = 0; a < 3; ++a) {
        verts[k].insert(t[a]);
        faces[k].insert({t[a]});
        faces[k].insert({std::min(t[a], t[(a + 1) % 3]), std::max(t[a], t[(a + 1) % 3])});
      }
    }
  }
  std::vector<std::vector<bool>> disjoint(nk, std::vector<bool>(nk, true));
  for (int i = 0; i < nk; ++i) {
    for (int j = 0; j < nk; ++j) {
      for (int v : verts[i]) disjoint[i][j] = disjoint[i][j] && !verts[j].count(v);
    }
  }

  double best = std::numeric_limits<double>::infinity();
  double min_edge = std::numeric_limits<double>::infinity();
  for (int s = 0; s < m.num_simplices(); ++s) {
    for (double l : m.lengths(s)) min_edge = std::min(min_edge, l);
    const auto& l = m.labels(s);
    std::set<int> present;
    for (int x : l) {
      for (int k = 0; k < nk; ++k) {
        if (verts[k].count(x)) present.insert(k);
      }
    }
    // maximal closure faces of each stratum inside s
    std::map<int, std::vector<std::vector<int>>> local;
    for (int k : present) {
      std::vector<std::vector<int>> fs;
      for (unsigned mask = 1; mask < 32; ++mask) {
        std::vector<int> lab, loc;
        for (int i = 0; i < 5; ++i) {
          if (mask & (1u << i)) {
            lab.push_back(l[i]);
            loc.push_back(i);
          }
        }
        if (lab.size() > 3) continue;
        std::sort(lab.begin(), lab.end());
        if (faces[k].count(lab)) fs.push_back(loc);
      }
      std::vector<std::vector<int>> maximal;
      for (const auto& f : fs) {
        bool covered = false;
        for (const auto& g : fs) {
          covered = covered || (g.size() > f.size() && std::includes(g.begin(), g.end(), f.begin(), f.end()));
        }
        if (!covered) maximal.push_back(f);
      }
      local[k] = std::move(maximal);
    }
    for (auto i = local.begin(); i != local.end(); ++i) {
      for (auto j = std::next(i); j != local.end(); ++j) {
        if (!disjoint[i->first][j->first]) continue;
        for (const auto& f : i->second) {
          for (const auto& g : j->second) {
            std::vector<Vec4> x, y;
            for (int a : f) x.push_back(m.chart(s)[a]);
            for (int b : g) y.push_back(m.chart(s)[b]);
            best = std::min(best, detail::face_distance(x, y));
          }
        }
      }
    }
  }
  UniformRadii r;
  r.from_strata = std::isfinite(best);
  r.delta = 0.5 * (r.from_strata ? best : min_edge);
  r.epsilon = r.delta / 3;
  return r;
}

// ---------------------------------------------------------------------------
// leaves

enum class LeafKind { Alpha, Beta };

inline const char* to_string(LeafKind k) { return k == LeafKind::Alpha ? "alpha" : "beta"; }

struct LeafSeed {
  int simplex = 0;
  Metric4::Bary bary = Metric4::Bary::Constant(0.2);
};

struct LeafPolygon {
  int simplex = -1;
  std::vector<int> vertices;  // leaf vertex ids, counterclockwise in the plane's orientation
  std::vector<Vec4> points;   // chart coordinates of simplex
};

struct Leaf {
  LeafKind kind = LeafKind::Alpha;
  LeafSeed seed;
  TriSurface surface;                        // fan triangulation of the polygons
  std::vector<LeafPolygon> polygons;         // trace log, in visiting order
  std::vector<std::vector<int>> vertex_support;  // labels of the face of M carrying each vertex
  std::vector<int> vertex_stratum;           // codim-2 stratum through each vertex, or -1
  int visits = 0;
  int budget = 0;

  double total_defect() const { return defect_census(surface).total; }
};

struct LeafTraceOptions {
  double snap_tol = 1e-7;
  double snap_cap = std::numeric_limits<double>::infinity();  // absolute; epsilon when known
  int budget_multiplier = 64;
};

namespace detail {

struct ClipVertex {
  Eigen::Vector2d p;
  int label;  // constraint of the outgoing edge; -1 for the initial box
};

// Intersection of the convex polygon with {x : c + g.x >= 0}.
inline std::vector<ClipVertex> clip_half_plane(const std::vector<ClipVertex>& poly, double c,
                                               const Eigen::Vector2d& g, int label) {
  std::vector<ClipVertex> out;
  const int n = static_cast<int>(poly.size());
  for (int k = 0; k < n; ++k) {
    const ClipVertex& a = poly[k];
    const ClipVertex& b = poly[(k + 1) % n];
    const double fa = c + g.dot(a.p), fb = c + g.dot(b.p);
    if (fa >= 0) {
      out.push_back(a);
      if (fb < 0) out.push_back({a.p + fa / (fa - fb) * (b.p - a.p), label});
    } else if (fb >= 0) {
      out.push_back({a.p + fa / (fa - fb) * (b.p - a.p), a.label});
    }
  }
  return out;
}

inline bool has_singular_carrier(const MetricComplex4& mc, const SingularCensus& census, int s,
                                 const std::vector<int>& support) {
  if (support.size() > 3) return false;
  const auto& l = mc.metric().labels(s);
  for (int a = 0; a < 5; ++a) {
    for (int b = a + 1; b < 5; ++b) {
      for (int c = b + 1; c < 5; ++c) {
        const TriangleLabels t{l[a], l[b], l[c]};
        bool contains = true;
        for (int x : support) contains = contains && std::find(t.begin(), t.end(), x) != t.end();
        if (contains && census.stratum_of_triangle[mc.triangle_id(t)] >= 0) return true;
      }
    }
  }
  return false;
}

}  // namespace detail

// Traces the leaf through the seed tangent to the chosen distribution. The
// plane is sliced against every simplex it meets and continued across facets
// through the gluing maps; polygon vertices are identified by the face of M
// carrying them and their barycentric weights there.
inline Leaf trace_leaf(const MetricComplex4& mc, const DistributionPair& dist, const SingularCensus& census,
                       LeafKind kind, const LeafSeed& seed = {}, const LeafTraceOptions& opt = {}) {
  const Metric4& m = mc.metric();
  const int ns = m.num_simplices();
  if (static_cast<int>(dist.alpha.size()) != ns) {
    throw Error(ErrorCode::PreconditionViolation, "trace_leaf: distributions not transported");
  }
  if (seed.simplex < 0 || seed.simplex >= ns || seed.bary.minCoeff() < -1e-12 ||
      std::abs(seed.bary.sum() - 1) > 1e-9) {
    throw Error(ErrorCode::InvalidInput, "trace_leaf: seed outside its simplex");
  }
  const auto& tangent = kind == LeafKind::Alpha ? dist.alpha : dist.beta;
  const auto& normal = kind == LeafKind::Alpha ? dist.beta : dist.alpha;

  auto edge_scale = [&](int s) {
    const auto& l = m.lengths(s);
    return *std::max_element(l.begin(), l.end());
  };
  auto snap_level = [&](int s) { return std::min(opt.snap_tol, opt.snap_cap / edge_scale(s)); };

  {
    std::vector<int> support;
    for (int i = 0; i < 5; ++i) {
      if (seed.bary[i] > snap_level(seed.simplex)) support.push_back(m.labels(seed.simplex)[i]);
    }
    if (detail::has_singular_carrier(mc, census, seed.simplex, support)) {
      throw Error(ErrorCode::SeedSingular, "trace_leaf: seed lies on a singular stratum");
    }
  }

  Leaf leaf;
  leaf.kind = kind;
  leaf.seed = seed;
  leaf.budget = opt.budget_multiplier * ns;

  std::map<std::vector<int>, std::vector<std::pair<std::vector<double>, int>>> registry;
  auto register_vertex = [&](int s, const Metric4::Bary& bary) {
    std::vector<std::pair<int, double>> sw;
    for (int i = 0; i < 5; ++i) {
      if (bary[i] > 0) sw.emplace_back(m.labels(s)[i], bary[i]);
    }
    std::sort(sw.begin(), sw.end());
    std::vector<int> support;
    std::vector<double> w;
    for (auto [l, x] : sw) {
      support.push_back(l);
      w.push_back(x);
    }
    auto& bucket = registry[support];
    for (const auto& [ow, id] : bucket) {
      double diff = 0;
      for (std::size_t i = 0; i < w.size(); ++i) diff = std::max(diff, std::abs(w[i] - ow[i]));
      if (diff <= 1e-9) return id;
    }
    const int id = static_cast<int>(leaf.vertex_support.size());
    bucket.emplace_back(w, id);
    int stratum = -1;
    if (support.size() == 3) {
      stratum = census.stratum_of_triangle[mc.triangle_id({support[0], support[1], support[2]})];
    } else if (support.size() < 3) {
      const auto& l = m.labels(s);
      for (int a = 0; a < 5 && stratum < 0; ++a) {
        for (int b = a + 1; b < 5 && stratum < 0; ++b) {
          for (int c = b + 1; c < 5 && stratum < 0; ++c) {
            const TriangleLabels t{l[a], l[b], l[c]};
            bool contains = true;
            for (int x : support) contains = contains && std::find(t.begin(), t.end(), x) != t.end();
            if (contains) stratum = census.stratum_of_triangle[mc.triangle_id(t)];
          }
        }
      }
    }
    leaf.vertex_support.push_back(std::move(support));
    leaf.vertex_stratum.push_back(stratum);
    return id;
  };

  std::vector<std::vector<Eigen::Vector2d>> visited(ns);
  std::vector<std::pair<int, Vec4>> queue{{seed.simplex, m.point(seed.simplex, seed.bary)}};
  std::map<Edge, double> lengths;
  std::vector<TriSurface::Triangle> tris;

  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto [s, x] = queue[head];
    const double scale = edge_scale(s);
    const Eigen::Vector2d offset(normal[s].u().dot(x), normal[s].v().dot(x));
    bool seen = false;
    for (const auto& o : visited[s]) seen = seen || (o - offset).norm() <= 1e-9 * scale;
    if (seen) continue;
    visited[s].push_back(offset);
    if (++leaf.visits > leaf.budget) {
      throw Error(ErrorCode::NonClosingLeaf, "trace_leaf: " + std::to_string(leaf.budget) +
                                                 " polygon visits without closing");
    }

    // barycentric coordinates along the plane: lambda(a, b) = l0 + a du + b dv
    const Vec4& u = tangent[s].u();
    const Vec4& v = tangent[s].v();
    const Metric4::Bary l0 = m.barycentric(s, x);
    const Metric4::Bary du = m.barycentric(s, x + u) - l0;
    const Metric4::Bary dv = m.barycentric(s, x + v) - l0;
    const double r = 2 * scale;
    std::vector<detail::ClipVertex> poly{{{-r, -r}, -1}, {{r, -r}, -1}, {{r, r}, -1}, {{-r, r}, -1}};
    for (int i = 0; i < 5 && !poly.empty(); ++i) {
      poly = detail::clip_half_plane(poly, l0[i], Eigen::Vector2d(du[i], dv[i]), i);
    }
    if (poly.size() < 3) continue;
    double area2 = 0;
    for (std::size_t k = 0; k < poly.size(); ++k) {
      const auto& p = poly[k].p;
      const auto& q = poly[(k + 1) % poly.size()].p;
      area2 += p.x() * q.y() - p.y() * q.x();
    }
    if (area2 <= 1e-12 * scale * scale) continue;

    struct Corner {
      int id;
      int label;
      Vec4 pos;
    };
    std::vector<Corner> corners;
    const double snap = snap_level(s);
    for (const auto& cv : poly) {
      if (cv.label < 0) throw Error(ErrorCode::PreconditionViolation, "trace_leaf: slice not bounded");
      Metric4::Bary lam = l0 + cv.p.x() * du + cv.p.y() * dv;
      for (int i = 0; i < 5; ++i) {
        if (lam[i] < snap) lam[i] = 0;
      }
      lam /= lam.sum();
      const int id = register_vertex(s, lam);
      const Corner c{id, cv.label, m.point(s, lam)};
      if (!corners.empty() && corners.back().id == id) {
        corners.back().label = c.label;
      } else {
        corners.push_back(c);
      }
    }
    while (corners.size() > 1 && corners.back().id == corners.front().id) corners.pop_back();
    if (corners.size() < 3) continue;

    LeafPolygon lp;
    lp.simplex = s;
    for (const Corner& c : corners) {
      lp.vertices.push_back(c.id);
      lp.points.push_back(c.pos);
    }
    const int n = static_cast<int>(corners.size());
    for (int k = 0; k < n; ++k) {
      const Corner& a = corners[k];
      const Corner& b = corners[(k + 1) % n];
      lengths[make_edge(a.id, b.id)] = (a.pos - b.pos).norm();
      const FacetRef nb = m.neighbor(s, a.label);
      if (nb.valid()) queue.push_back({nb.simplex, m.gluing_map(s, a.label)(0.5 * (a.pos + b.pos))});
    }
    for (int k = 1; k + 1 < n; ++k) {
      tris.push_back({corners[0].id, corners[k].id, corners[k + 1].id});
      lengths[make_edge(corners[0].id, corners[k + 1].id)] = (corners[0].pos - corners[k + 1].pos).norm();
    }
    leaf.polygons.push_back(std::move(lp));
  }

  const int nv = static_cast<int>(leaf.vertex_support.size());
  TriSurface raw(nv, tris, lengths);
  leaf.surface = std::move(raw);
  return leaf;
}

// The leaf with flat vertices removed; `cone_stratum` receives the stratum of
// each remaining vertex.
inline TriSurface leaf_factor(const Leaf& leaf, double angle_tol = 1e-7,
                              std::vector<int>* cone_stratum = nullptr) {
  std::vector<int> remap;
  TriSurface f = simplify_flat_vertices(leaf.surface, angle_tol, &remap);
  if (cone_stratum != nullptr) {
    cone_stratum->assign(f.num_vertices(), -1);
    for (std::size_t v = 0; v < remap.size(); ++v) {
      if (remap[v] >= 0) (*cone_stratum)[remap[v]] = leaf.vertex_stratum[v];
    }
  }
  return f;
}

// Every singular leaf vertex sits on a stratum transverse to the leaf, with
// the stratum's cone angle.
inline bool leaf_cones_consistent(const Leaf& leaf, const SingularCensus& census,
                                  const AlignmentTable& alignment, double angle_tol = 1e-7) {
  const AlignmentTag transverse =
      leaf.kind == LeafKind::Alpha ? AlignmentTag::ParallelBeta : AlignmentTag::ParallelAlpha;
  for (int v = 0; v < leaf.surface.num_vertices(); ++v) {
    const double total = leaf.surface.total_angle(v);
    if (std::abs(total - kTwoPi) <= angle_tol) continue;
    const int k = leaf.vertex_stratum[v];
    if (k < 0 || alignment[k].tag != transverse) return false;
    if (std::abs(census.codim2[k].cone_angle - total) > angle_tol) return false;
  }
  return true;
}

// Seed points strictly inside a simplex, drawn from a seeded generator.
inline std::vector<LeafSeed> sample_seeds(const MetricComplex4& mc, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, mc.num_simplices() - 1);
  std::uniform_real_distribution<double> weight(0.2, 1.0);
  std::vector<LeafSeed> out;
  for (int i = 0; i < count; ++i) {
    LeafSeed s;
    s.simplex = pick(rng);
    for (int j = 0; j < 5; ++j) s.bary[j] = weight(rng);
    s.bary /= s.bary.sum();
    out.push_back(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// distances between leaves

struct DistanceSample {
  LeafSeed seed;       // x
  int polygon = -1;    // x-hat is the centroid of this polygon of L(x)
  double d_x = 0, d_xhat = 0;
  double deviation = 0;  // |d_x - d_xhat| / max(d_x, d_xhat)
};

struct LeafDistanceReport {
  LeafSeed target;
  std::vector<DistanceSample> samples;
  double max_deviation = 0;
  double tolerance = 0;
  bool passed = false;
};

// Distances from points to a target leaf, measured on a refined graph. From
// each query the paths to the nearest few leaf polygons are straightened with
// the far end free to slide inside its polygon; the least length is kept.
class LeafDistanceField {
 public:
  static constexpr int kCandidates = 12;

  LeafDistanceField(const MetricComplex4& mc, const Leaf& target, int subdivision)
      : graph_(mc.metric(), subdivision) {
    for (const LeafPolygon& p : target.polygons) {
      const int pid = graph_.add_polygon(p.simplex, p.points);
      Vec4 c = Vec4::Zero();
      for (const Vec4& x : p.points) c += x;
      c /= static_cast<double>(p.points.size());
      std::vector<int> nodes{graph_.add_point(p.simplex, mc.metric().barycentric(p.simplex, c), pid)};
      for (const Vec4& x : p.points) {
        nodes.push_back(graph_.add_point(p.simplex, mc.metric().barycentric(p.simplex, x), pid));
      }
      targets_.push_back(std::move(nodes));
    }
  }

  int add_query(int simplex, const Metric4::Bary& bary) { return graph_.add_point(simplex, bary); }

  double distance(int query) const {
    const std::array<int, 1> src{query};
    const auto sp = graph_.dijkstra(src);
    std::vector<std::pair<double, int>> nearest;
    for (const auto& nodes : targets_) {
      int best = nodes.front();
      for (int n : nodes) {
        if (sp.dist[n] < sp.dist[best]) best = n;
      }
      nearest.emplace_back(sp.dist[best], best);
    }
    const std::size_t k = std::min<std::size_t>(kCandidates, nearest.size());
    std::partial_sort(nearest.begin(), nearest.begin() + k, nearest.end());
    double out = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) out = std::min(out, graph_.straightened(sp, nearest[i].second));
    return out;
  }

 private:
  RefinedGraph<4> graph_;
  std::vector<std::vector<int>> targets_;
};

inline Vec4 polygon_centroid(const LeafPolygon& p) {
  Vec4 c = Vec4::Zero();
  for (const Vec4& x : p.points) c += x;
  return c / static_cast<double>(p.points.size());
}

// For sampled x and a far point x-hat of the alpha-leaf through x, compares
// d(x, L) with d(x-hat, L) for a fixed target alpha-leaf L.
inline LeafDistanceReport leaf_distance_consistency(const MetricComplex4& mc, const DistributionPair& dist,
                                                    const SingularCensus& census, const SplitOptions& opt = {},
                                                    const LeafSeed& target = {}) {
  const Metric4& m = mc.metric();
  LeafTraceOptions topt;
  topt.snap_tol = opt.snap_tol;
  topt.budget_multiplier = opt.budget_multiplier;
  LeafDistanceReport rep;
  rep.target = target;
  rep.tolerance = opt.distance_tol;
  const Leaf l = trace_leaf(mc, dist, census, LeafKind::Alpha, target, topt);
  LeafDistanceField field(mc, l, opt.complex_subdivision);

  std::mt19937_64 rng(opt.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<std::pair<int, int>> queries;
  for (const LeafSeed& sd : sample_seeds(mc, opt.distance_samples, opt.seed)) {
    const Leaf lx = trace_leaf(mc, dist, census, LeafKind::Alpha, sd, topt);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(lx.polygons.size()) - 1);
    DistanceSample ds;
    ds.seed = sd;
    ds.polygon = pick(rng);
    const LeafPolygon& p = lx.polygons[ds.polygon];
    const int qx = field.add_query(sd.simplex, sd.bary);
    const int qh = field.add_query(p.simplex, m.barycentric(p.simplex, polygon_centroid(p)));
    queries.emplace_back(qx, qh);
    rep.samples.push_back(ds);
  }
  for (std::size_t i = 0; i < queries.size(); ++i) {
    DistanceSample& ds = rep.samples[i];
    ds.d_x = field.distance(queries[i].first);
    ds.d_xhat = field.distance(queries[i].second);
    const double big = std::max(ds.d_x, ds.d_xhat);
    ds.deviation = big > 1e-9 ? std::abs(ds.d_x - ds.d_xhat) / big : 0.0;
    rep.max_deviation = std::max(rep.max_deviation, ds.deviation);
  }
  rep.passed = rep.max_deviation <= opt.distance_tol;
  return rep;
}

// ---------------------------------------------------------------------------
// verification

// Unordered angle pairs at codim-4 vertices, read off the incident strata.
inline std::vector<std::pair<double, double>> codim4_angle_pairs(const MetricComplex4& mc,
                                                                 const SingularCensus& census) {
  std::map<int, std::set<int>> incident;
  for (int k = 0; k < static_cast<int>(census.codim2.size()); ++k) {
    for (int tri : census.codim2[k].triangles) {
      for (int l : mc.triangle(tri)) incident[l].insert(k);
    }
  }
  std::vector<std::pair<double, double>> out;
  for (const Stratum& st : census.codim4) {
    std::vector<double> a;
    for (int k : incident[st.vertex]) a.push_back(census.codim2[k].cone_angle);
    std::sort(a.begin(), a.end());
    out.emplace_back(a.empty() ? kTwoPi : a.front(), a.empty() ? kTwoPi : a.back());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Sorted pairwise distances between the codim-4 vertices.
inline std::vector<double> codim4_distance_spectrum(const MetricComplex4& mc, const SingularCensus& census,
                                                    int subdivision) {
  const RefinedGraph<4> g(mc.metric(), subdivision);
  std::vector<int> nodes;
  for (const Stratum& st : census.codim4) nodes.push_back(g.vertex_node(st.vertex));
  const std::size_t n = nodes.size();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::array<int, 1> src{nodes[i]};
    const auto sp = g.dijkstra(src);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) d(i, j) = g.straightened(sp, nodes[j]);
    }
  }
  // straightening is one-sided; keep the better of the two directions
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) out.push_back(std::min(d(i, j), d(j, i)));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// The same spectrum for the product of two surfaces, where the distance
// between (a, b) and (a', b') is hypot(d(a, a'), d(b, b')).
inline std::vector<double> product_distance_spectrum(const TriSurface& fa, const TriSurface& fb, double angle_tol,
                                                     int subdivision) {
  const std::vector<int> va = singular_vertices(fa, angle_tol), vb = singular_vertices(fb, angle_tol);
  const Eigen::MatrixXd da = vertex_distances(fa, va, subdivision);
  const Eigen::MatrixXd db = vertex_distances(fb, vb, subdivision);
  const int na = static_cast<int>(va.size()), nb = static_cast<int>(vb.size());
  std::vector<double> out;
  for (int i = 0; i < na * nb; ++i) {
    for (int j = i + 1; j < na * nb; ++j) out.push_back(std::hypot(da(i / nb, j / nb), db(i % nb, j % nb)));
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct VerifyReport {
  bool census_match = false;
  std::string census_detail;
  double volume_m = 0, volume_product = 0, volume_rel_error = 0;
  bool volume_match = false;
  int spectrum_size = 0;
  double spectrum_max_rel = 0;
  bool spectrum_match = false;
  std::optional<LeafDistanceReport> leaf_distances;
  bool leaf_consistent = false;
  bool passed = false;
};

namespace detail {

inline std::string compare_census(const MetricComplex4& a, const SingularCensus& ca, const MetricComplex4& b,
                                  const SingularCensus& cb, double tol) {
  if (ca.codim2.size() != cb.codim2.size()) {
    return "stratum count " + std::to_string(ca.codim2.size()) + " vs " + std::to_string(cb.codim2.size());
  }
  std::vector<double> x, y;
  for (const auto& s : ca.codim2) x.push_back(s.cone_angle);
  for (const auto& s : cb.codim2) y.push_back(s.cone_angle);
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::abs(x[i] - y[i]) > tol) return "stratum cone angles differ";
  }
  if (ca.codim4.size() != cb.codim4.size()) {
    return "codim-4 count " + std::to_string(ca.codim4.size()) + " vs " + std::to_string(cb.codim4.size());
  }
  const auto pa = codim4_angle_pairs(a, ca);
  const auto pb = codim4_angle_pairs(b, cb);
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (std::abs(pa[i].first - pb[i].first) > tol || std::abs(pa[i].second - pb[i].second) > tol) {
      return "codim-4 angle pairs differ";
    }
  }
  if (ca.codim3_violations.size() != cb.codim3_violations.size()) return "codim-3 flags differ";
  return {};
}

}  // namespace detail

// Rebuilds the product of the factors and compares census and volume with M;
// the codim-4 distance spectrum of M is compared with the exact product
// distances of the factors. The leaf distance check needs the distributions
// of M; without them it is skipped and reported as failed.
inline VerifyReport verify_product(const MetricComplex4& mc, const TriSurface& fa, const TriSurface& fb,
                                   const SplitOptions& opt = {},
                                   const std::optional<LeafDistanceReport>& leaf_distances = std::nullopt) {
  VerifyReport r;
  const MetricComplex4 prod = product_complex(fa, fb, mc.tolerances());
  const SingularCensus cm = singular_census(mc);
  const SingularCensus cp = singular_census(prod);
  r.census_detail = detail::compare_census(mc, cm, prod, cp, opt.angle_tol);
  r.census_match = r.census_detail.empty();

  r.volume_m = mc.total_volume();
  r.volume_product = fa.area() * fb.area();
  r.volume_rel_error = std::abs(r.volume_m - r.volume_product) / std::max(r.volume_m, r.volume_product);
  r.volume_match = r.volume_rel_error <= 1e-6;

  if (r.census_match) {
    const auto sm = codim4_distance_spectrum(mc, cm, opt.complex_subdivision);
    const auto sq = product_distance_spectrum(fa, fb, opt.angle_tol, opt.surface_subdivision);
    r.spectrum_size = static_cast<int>(sm.size());
    if (sq.size() != sm.size()) r.spectrum_max_rel = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sm.size() && i < sq.size(); ++i) {
      const double big = std::max(sm[i], sq[i]);
      if (big > 0) r.spectrum_max_rel = std::max(r.spectrum_max_rel, std::abs(sm[i] - sq[i]) / big);
    }
    r.spectrum_match = r.spectrum_max_rel <= opt.distance_tol;
  }

  r.leaf_distances = leaf_distances;
  r.leaf_consistent = leaf_distances.has_value() && leaf_distances->passed;
  r.passed = r.census_match && r.volume_match && r.spectrum_match && r.leaf_consistent;
  return r;
}

// ---------------------------------------------------------------------------
// full pipeline

enum class Verdict { Success, Failure };

struct StageRecord {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct WitnessSummary {
  AntisymForm omega3;
  double residual = 0;
  int generators = 0;
};

struct SplitReport {
  Verdict verdict = Verdict::Failure;
  std::string failed_stage;
  std::optional<ErrorCode> failure_code;
  std::string message;
  std::vector<StageRecord> stages;

  SplitOptions options;
  int num_vertices = 0, num_simplices = 0;
  double volume = 0;
  std::optional<CurvatureCheck> curvature;
  std::optional<SingularCensus> census;
  std::optional<HolonomyRep> holonomy;
  std::optional<UnitaryCheck> unitary;
  std::optional<InvariantFormBasis> forms;
  bool caveat = false;
  int euler = 0;
  std::optional<WitnessSummary> witness;
  std::optional<DistributionPair> distributions;
  AlignmentTable alignment;
  std::vector<Codim4Structure> codim4;
  UniformRadii radii;
  std::optional<Leaf> leaf_alpha, leaf_beta;
  std::optional<TriSurface> factor_alpha, factor_beta;
  std::vector<int> factor_alpha_strata, factor_beta_strata;
  std::optional<VerifyReport> verification;

  bool success() const { return verdict == Verdict::Success; }

  int exit_code() const {
    if (success()) return kExitSuccess;
    if (failure_code) return pl4::exit_code(*failure_code);
    return kExitHypothesis;
  }
};

namespace detail {

class Pipeline {
 public:
  Pipeline(const MetricComplex4& mc, const SplitOptions& opt) : mc_(mc) {
    r_.options = opt;
    r_.num_vertices = mc.num_vertices();
    r_.num_simplices = mc.num_simplices();
    r_.volume = mc.total_volume();
  }

  SplitReport run(const std::optional<DistributionPair>& injected) {
    const SplitOptions& opt = r_.options;
    if (!stage("validate", [&] {
          const auto v = validate(mc_);
          if (!v.valid()) {
            throw Error(ErrorCode::InvalidInput, std::string(to_string(v.issues.front().kind)) + ": " +
                                                     v.issues.front().detail);
          }
          return std::string("valid");
        })) {
      return finish();
    }
    if (!stage("curvature", [&] {
          r_.curvature = check_nonneg_curvature(mc_);
          if (!r_.curvature->nonneg) {
            throw Error(ErrorCode::NegativeCurvature,
                        "cone angle " + format_double(r_.curvature->worst_angle) + " exceeds 2 pi at triangle " +
                            std::to_string(r_.curvature->worst_triangle));
          }
          return std::string("nonnegative");
        })) {
      return finish();
    }
    if (!stage("census", [&] {
          r_.census = singular_census(mc_);
          if (!r_.census->codim3_violations.empty()) {
            throw Error(ErrorCode::NotProductLike, std::to_string(r_.census->codim3_violations.size()) +
                                                       " codim-3 edges");
          }
          return std::to_string(r_.census->codim2.size()) + " codim-2 strata, " +
                 std::to_string(r_.census->codim4.size()) + " codim-4 candidates";
        })) {
      return finish();
    }
    const DualTree tree = dual_graph(mc_);
    if (!stage("holonomy", [&] {
          r_.holonomy = holonomy_generators(mc_, *r_.census, tree);
          r_.unitary = is_unitary_holonomy(*r_.holonomy, opt.orth_tol);
          return std::to_string(r_.holonomy->generators.size()) + " generators";
        })) {
      return finish();
    }
    r_.euler = euler_characteristic(mc_);
    r_.caveat = invariant_form_caveat(mc_, *r_.census);
    if (!stage("betti_check", [&] {
          r_.forms = invariant_forms(*r_.holonomy, opt.orth_tol);
          if (!betti_check(*r_.forms)) {
            throw Error(ErrorCode::WrongDimension,
                        "invariant 2-forms have dimension " + std::to_string(r_.forms->dim) + ", expected 2");
          }
          return std::string("dim 2");
        })) {
      return finish();
    }
    if (!stage("distributions", [&] {
          if (injected) {
            r_.distributions = *injected;
            return std::string("supplied");
          }
          try {
            r_.distributions = extract_distributions(*r_.forms, *r_.holonomy, &mc_, &tree);
          } catch (const ContradictionWitnessError& w) {
            r_.witness = WitnessSummary{w.omega3(), w.residual(), static_cast<int>(w.generators().size())};
            throw;
          }
          return "eigenvalues " + format_double(r_.distributions->pair.a) + ", " +
                 format_double(r_.distributions->pair.b);
        })) {
      return finish();
    }
    if (!stage("align_strata", [&] {
          r_.alignment = align_strata(mc_, *r_.distributions, *r_.census, opt.angle_tol);
          const int bad = count_misaligned(r_.alignment);
          if (bad > 0) throw Error(ErrorCode::Misaligned, std::to_string(bad) + " misaligned strata");
          return std::string("all strata aligned");
        })) {
      return finish();
    }
    if (!stage("classify_codim4", [&] {
          r_.codim4 = classify_codim4(mc_, *r_.distributions, *r_.census, r_.alignment, opt);
          return std::to_string(r_.codim4.size()) + " product vertices";
        })) {
      return finish();
    }
    r_.radii = uniform_radii(mc_, *r_.census);
    LeafTraceOptions topt;
    topt.snap_tol = opt.snap_tol;
    topt.snap_cap = r_.radii.epsilon;
    topt.budget_multiplier = opt.budget_multiplier;
    for (LeafKind kind : {LeafKind::Alpha, LeafKind::Beta}) {
      const bool alpha = kind == LeafKind::Alpha;
      if (!stage(alpha ? "trace_leaf_alpha" : "trace_leaf_beta", [&] {
            Leaf leaf = trace_leaf(mc_, *r_.distributions, *r_.census, kind, LeafSeed{}, topt);
            const DefectCensus dc = defect_census(leaf.surface);
            if (std::abs(dc.total - 2 * kTwoPi) > 1e-6) {
              throw Error(ErrorCode::NonClosingLeaf, "leaf total defect " + format_double(dc.total));
            }
            if (!leaf_cones_consistent(leaf, *r_.census, r_.alignment, opt.angle_tol)) {
              throw Error(ErrorCode::NotProductLike, "leaf cone points do not sit on transverse strata");
            }
            auto& strata = alpha ? r_.factor_alpha_strata : r_.factor_beta_strata;
            TriSurface f = leaf_factor(leaf, opt.angle_tol, &strata);
            const std::string d = std::to_string(leaf.visits) + " polygons, " +
                                  std::to_string(f.num_vertices()) + " vertices";
            (alpha ? r_.leaf_alpha : r_.leaf_beta) = std::move(leaf);
            (alpha ? r_.factor_alpha : r_.factor_beta) = std::move(f);
            return d;
          })) {
        return finish();
      }
    }
    if (!stage("verify_product", [&] {
          std::optional<LeafDistanceReport> ld =
              leaf_distance_consistency(mc_, *r_.distributions, *r_.census, opt);
          r_.verification = verify_product(mc_, *r_.factor_alpha, *r_.factor_beta, opt, ld);
          const VerifyReport& v = *r_.verification;
          if (!v.passed) {
            std::string why;
            if (!v.census_match) why = "census: " + v.census_detail;
            else if (!v.volume_match) why = "volume";
            else if (!v.spectrum_match) why = "codim-4 distance spectrum";
            else why = "leaf distances";
            throw Error(ErrorCode::NotProductLike, "verification failed: " + why);
          }
          return std::string("all checks passed");
        })) {
      return finish();
    }
    r_.verdict = Verdict::Success;
    return finish();
  }

 private:
  template <class F>
  bool stage(const char* name, F&& body) {
    StageRecord rec;
    rec.name = name;
    try {
      rec.detail = body();
      rec.passed = true;
    } catch (const Error& e) {
      rec.detail = e.what();
      r_.failed_stage = name;
      r_.failure_code = e.code();
      r_.message = e.what();
    }
    r_.stages.push_back(rec);
    return rec.passed;
  }

  SplitReport finish() { return std::move(r_); }

  const MetricComplex4& mc_;
  SplitReport r_;
};

}  // namespace detail

inline SplitReport decompose(const MetricComplex4& mc, const SplitOptions& opt = {}) {
  return detail::Pipeline(mc, opt).run(std::nullopt);
}

// Runs the pipeline with the given plane fields in place of the extracted
// ones; the stages before them still run. Used to probe the later checks.
inline SplitReport decompose_with_distributions(const MetricComplex4& mc, const DistributionPair& dist,
                                                const SplitOptions& opt = {}) {
  return detail::Pipeline(mc, opt).run(dist);
}

// Transported plane fields whose base planes are rotated by `angle` between
// the two eigenplanes: e1 -> cos e1 + sin e3, e2 -> cos e2 + sin e4 in the
// frame (alpha_u, alpha_v, beta_u, beta_v).
inline DistributionPair rotate_distributions(const DistributionPair& d, double angle) {
  DistributionPair out = d;
  const double c = std::cos(angle), s = std::sin(angle);
  auto mix = [&](const OrientedPlane& a, const OrientedPlane& b, double sign) {
    return OrientedPlane(c * a.u() + sign * s * b.u(), c * a.v() + sign * s * b.v());
  };
  out.alpha_base = mix(d.alpha_base, d.beta_base, 1);
  out.beta_base = mix(d.beta_base, d.alpha_base, -1);
  for (std::size_t i = 0; i < d.alpha.size(); ++i) {
    out.alpha[i] = mix(d.alpha[i], d.beta[i], 1);
    out.beta[i] = mix(d.beta[i], d.alpha[i], -1);
  }
  return out;
}

}  // namespace pl4
