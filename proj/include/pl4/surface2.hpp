#pragma once

// Intrinsic polyhedral surfaces given by triangles and edge lengths.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pl4/error.hpp"
#include "pl4/geodesic.hpp"
#include "pl4/simplicial.hpp"

namespace pl4 {

using Edge = std::pair<int, int>;  // (min, max)

inline Edge make_edge(int u, int v) { return u < v ? Edge{u, v} : Edge{v, u}; }

// Angle opposite side c in a triangle with sides a, b, c.
inline double law_of_cosines(double a, double b, double c) {
  const double x = (a * a + b * b - c * c) / (2 * a * b);
  return std::acos(std::clamp(x, -1.0, 1.0));
}

class TriSurface {
 public:
  using Triangle = std::array<int, 3>;

  TriSurface() = default;

  // Validates eagerly; throws InvalidSurface.
  TriSurface(int num_vertices, std::vector<Triangle> triangles, std::map<Edge, double> lengths)
      : nv_(num_vertices), tris_(std::move(triangles)), lengths_(std::move(lengths)) {
    const std::vector<std::string> issues = problems();
    if (!issues.empty()) throw Error(ErrorCode::InvalidSurface, issues.front());
    metric_ = build_metric();
  }

  // Lengths taken from an embedding.
  static TriSurface from_points(const std::vector<Eigen::Vector3d>& pts,
                                std::vector<Triangle> triangles) {
    std::map<Edge, double> len;
    for (const Triangle& t : triangles) {
      for (int i = 0; i < 3; ++i) {
        const int u = t[i], v = t[(i + 1) % 3];
        len[make_edge(u, v)] = (pts[u] - pts[v]).norm();
      }
    }
    return TriSurface(static_cast<int>(pts.size()), std::move(triangles), std::move(len));
  }

  int num_vertices() const { return nv_; }
  int num_triangles() const { return static_cast<int>(tris_.size()); }
  int num_edges() const { return static_cast<int>(lengths_.size()); }
  const std::vector<Triangle>& triangles() const { return tris_; }
  const std::map<Edge, double>& edge_lengths() const { return lengths_; }
  double length(int u, int v) const { return lengths_.at(make_edge(u, v)); }
  int euler_characteristic() const { return nv_ - num_edges() + num_triangles(); }
  const SimplicialMetric<2>& metric() const { return metric_; }

  // Interior angle of triangle t at its local corner i.
  double corner_angle(int t, int i) const {
    const Triangle& tr = tris_[t];
    const int v = tr[i], a = tr[(i + 1) % 3], b = tr[(i + 2) % 3];
    return law_of_cosines(length(v, a), length(v, b), length(a, b));
  }

  double total_angle(int v) const {
    double sum = 0;
    for (int t = 0; t < num_triangles(); ++t) {
      for (int i = 0; i < 3; ++i) {
        if (tris_[t][i] == v) sum += corner_angle(t, i);
      }
    }
    return sum;
  }

  double triangle_area(int t) const {
    const Triangle& tr = tris_[t];
    const double a = length(tr[0], tr[1]), b = length(tr[1], tr[2]), c = length(tr[0], tr[2]);
    // numerically stable Heron
    std::array<double, 3> s = {a, b, c};
    std::sort(s.begin(), s.end(), std::greater<>());
    const double x = s[0], y = s[1], z = s[2];
    const double p = (x + (y + z)) * (z - (x - y)) * (z + (x - y)) * (x + (y - z));
    return 0.25 * std::sqrt(std::max(0.0, p));
  }

  double area() const {
    double sum = 0;
    for (int t = 0; t < num_triangles(); ++t) sum += triangle_area(t);
    return sum;
  }

  // Every violated invariant, in a stable order.
  std::vector<std::string> problems() const {
    std::vector<std::string> out;
    std::map<Edge, int> count;
    std::vector<bool> used(nv_, false);
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      const Triangle& tr = tris_[t];
      bool ok = true;
      for (int v : tr) {
        if (v < 0 || v >= nv_) {
          out.push_back("triangle " + std::to_string(t) + " has vertex out of range");
          ok = false;
        }
      }
      if (!ok) continue;
      if (tr[0] == tr[1] || tr[1] == tr[2] || tr[0] == tr[2]) {
        out.push_back("triangle " + std::to_string(t) + " repeats a vertex");
        continue;
      }
      std::array<double, 3> l{};
      for (int i = 0; i < 3; ++i) {
        used[tr[i]] = true;
        const Edge e = make_edge(tr[i], tr[(i + 1) % 3]);
        ++count[e];
        auto it = lengths_.find(e);
        if (it == lengths_.end() || !(it->second > 0) || !std::isfinite(it->second)) {
          out.push_back("edge " + edge_name(e) + " lacks a positive length");
          ok = false;
        } else {
          l[i] = it->second;
        }
      }
      if (ok) {
        std::sort(l.begin(), l.end());
        if (!(l[2] < l[0] + l[1])) {
          out.push_back("triangle " + std::to_string(t) + " violates the strict triangle inequality");
        }
      }
    }
    for (const auto& [e, c] : count) {
      if (c != 2) {
        out.push_back("edge " + edge_name(e) + " has " + std::to_string(c) + " incident triangles");
      }
    }
    for (const auto& [e, l] : lengths_) {
      if (!count.count(e)) out.push_back("length given for unused edge " + edge_name(e));
    }
    for (int v = 0; v < nv_; ++v) {
      if (!used[v]) out.push_back("vertex " + std::to_string(v) + " has no triangle");
    }
    if (out.empty() && !connected()) out.push_back("surface is not connected");
    if (tris_.empty()) out.push_back("surface has no triangles");
    return out;
  }

  friend bool operator==(const TriSurface& a, const TriSurface& b) {
    return a.nv_ == b.nv_ && a.tris_ == b.tris_ && a.lengths_ == b.lengths_;
  }

 private:
  static std::string edge_name(const Edge& e) {
    return "(" + std::to_string(e.first) + "," + std::to_string(e.second) + ")";
  }

  bool connected() const {
    std::vector<int> parent(nv_);
    for (int v = 0; v < nv_; ++v) parent[v] = v;
    std::function<int(int)> find = [&](int v) { return parent[v] == v ? v : parent[v] = find(parent[v]); };
    for (const Triangle& t : tris_) {
      parent[find(t[1])] = find(t[0]);
      parent[find(t[2])] = find(t[0]);
    }
    for (int v = 1; v < nv_; ++v) {
      if (find(v) != find(0)) return false;
    }
    return true;
  }

  SimplicialMetric<2> build_metric() const {
    std::vector<SimplicialMetric<2>::Labels> labels;
    std::vector<SimplicialMetric<2>::Lengths> lens;
    for (const Triangle& t : tris_) {
      labels.push_back(t);
      lens.push_back({length(t[0], t[1]), length(t[0], t[2]), length(t[1], t[2])});
    }
    return SimplicialMetric<2>::glue_by_labels(nv_, std::move(labels), std::move(lens));
  }

  int nv_ = 0;
  std::vector<Triangle> tris_;
  std::map<Edge, double> lengths_;
  SimplicialMetric<2> metric_;
};

inline double angle_defect(const TriSurface& s, int v) {
  return 2 * std::numbers::pi - s.total_angle(v);
}

struct DefectCensus {
  std::vector<double> defects;  // per vertex
  double total = 0;
  std::vector<int> negative;    // vertices with defect below -tol
};

inline DefectCensus defect_census(const TriSurface& s, double tol = 1e-9) {
  DefectCensus c;
  std::vector<double> angle(s.num_vertices(), 0.0);
  for (int t = 0; t < s.num_triangles(); ++t) {
    for (int i = 0; i < 3; ++i) angle[s.triangles()[t][i]] += s.corner_angle(t, i);
  }
  for (int v = 0; v < s.num_vertices(); ++v) {
    const double d = 2 * std::numbers::pi - angle[v];
    c.defects.push_back(d);
    c.total += d;
    if (d < -tol) c.negative.push_back(v);
  }
  return c;
}

inline bool is_nonneg_curved(const TriSurface& s, double tol = 1e-9) {
  return defect_census(s, tol).negative.empty();
}

// Vertices with |defect| > tol, i.e. the cone points.
inline std::vector<int> singular_vertices(const TriSurface& s, double tol = 1e-7) {
  const DefectCensus c = defect_census(s);
  std::vector<int> out;
  for (int v = 0; v < s.num_vertices(); ++v) {
    if (std::abs(c.defects[v]) > tol) out.push_back(v);
  }
  return out;
}

// Total angles at the cone points, sorted ascending.
inline std::vector<double> cone_angles(const TriSurface& s, double tol = 1e-7) {
  std::vector<double> out;
  for (int v : singular_vertices(s, tol)) out.push_back(s.total_angle(v));
  std::sort(out.begin(), out.end());
  return out;
}

// Box [0,a]x[0,b]x[0,c]; vertex id = x + 2y + 4z with x, y, z in {0, 1};
// each face is split along the diagonal through its smallest vertex id.
inline TriSurface box_surface(double a, double b, double c) {
  if (!(a > 0 && b > 0 && c > 0)) throw Error(ErrorCode::InvalidSurface, "box: edge lengths must be positive");
  std::vector<Eigen::Vector3d> pts;
  for (int v = 0; v < 8; ++v) pts.emplace_back(a * (v & 1), b * ((v >> 1) & 1), c * ((v >> 2) & 1));
  const int quads[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4},
                           {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  std::vector<TriSurface::Triangle> tris;
  for (const auto& q : quads) {
    const int k = static_cast<int>(std::min_element(q, q + 4) - q);
    const int v0 = q[k], v1 = q[(k + 1) % 4], v2 = q[(k + 2) % 4], v3 = q[(k + 3) % 4];
    tris.push_back({v0, v1, v2});
    tris.push_back({v0, v2, v3});
  }
  return TriSurface::from_points(pts, std::move(tris));
}

inline TriSurface cube_surface() { return box_surface(1, 1, 1); }

// Regular tetrahedron with unit edges.
inline TriSurface tetrahedron_surface() {
  std::map<Edge, double> len;
  for (int u = 0; u < 4; ++u) {
    for (int v = u + 1; v < 4; ++v) len[{u, v}] = 1.0;
  }
  return TriSurface(4, {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}}, std::move(len));
}

// Regular octahedron with vertices +-e_i / sqrt(2) (unit edges), ordered
// +x, -x, +y, -y, +z, -z.
inline TriSurface octahedron_surface() {
  const double r = 1 / std::numbers::sqrt2;
  std::vector<Eigen::Vector3d> pts;
  for (int axis = 0; axis < 3; ++axis) {
    for (double sgn : {1.0, -1.0}) {
      Eigen::Vector3d p = Eigen::Vector3d::Zero();
      p[axis] = sgn * r;
      pts.push_back(p);
    }
  }
  std::vector<TriSurface::Triangle> tris;
  for (int sx = 0; sx < 2; ++sx) {
    for (int sy = 0; sy < 2; ++sy) {
      for (int sz = 0; sz < 2; ++sz) {
        // orient outward: odd parity flips the winding
        TriSurface::Triangle t{sx, 2 + sy, 4 + sz};
        if ((sx + sy + sz) % 2 == 1) std::swap(t[1], t[2]);
        tris.push_back(t);
      }
    }
  }
  return TriSurface::from_points(pts, std::move(tris));
}

// Accepts tetrahedron | tetra, cube, octahedron | octa, box(a,b,c).
inline TriSurface builtin_surface(const std::string& name) {
  if (name == "tetrahedron" || name == "tetra") return tetrahedron_surface();
  if (name == "cube") return cube_surface();
  if (name == "octahedron" || name == "octa") return octahedron_surface();
  if (name.rfind("box(", 0) == 0 && name.back() == ')') {
    std::string inner = name.substr(4, name.size() - 5);
    std::replace(inner.begin(), inner.end(), ',', ' ');
    std::istringstream in(inner);
    double a, b, c;
    std::string rest;
    if (in >> a >> b >> c && !(in >> rest)) return box_surface(a, b, c);
  }
  throw Error(ErrorCode::UnknownName, "unknown surface '" + name + "'");
}

inline bool is_builtin_surface_name(const std::string& name) {
  try {
    builtin_surface(name);
    return true;
  } catch (const Error&) {
    return false;
  }
}

// Pairwise intrinsic distances between the given vertices.
inline Eigen::MatrixXd vertex_distances(const TriSurface& s, const std::vector<int>& verts,
                                        int subdivision = 8) {
  RefinedGraph<2> g(s.metric(), subdivision);
  const int n = static_cast<int>(verts.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  // both directions are straightened; the graph paths, hence the chains, differ
  for (int i = 0; i < n; ++i) {
    const auto sp = g.dijkstra(std::vector<int>{g.vertex_node(verts[i])});
    for (int j = 0; j < n; ++j) {
      if (j != i) d(i, j) = g.straightened(sp, g.vertex_node(verts[j]));
    }
  }
  return d.cwiseMin(d.transpose());
}

struct IsometryOptions {
  double angle_tol = 1e-7;
  double distance_rel_tol = 1e-3;
  int subdivision = 8;
};

struct IsometryResult {
  bool isometric = false;
  std::vector<std::pair<int, int>> matching;  // singular vertex of S1 -> of S2
  std::string reason;
};

// Conservative congruence test: equal area, equal cone-angle multisets and a
// cone-point matching preserving all pairwise intrinsic distances.
inline IsometryResult surfaces_isometric(const TriSurface& s1, const TriSurface& s2,
                                         const IsometryOptions& opt = {}) {
  IsometryResult r;
  const double a1 = s1.area(), a2 = s2.area();
  if (std::abs(a1 - a2) > opt.distance_rel_tol * std::max(a1, a2)) {
    r.reason = "areas differ";
    return r;
  }
  const std::vector<int> v1 = singular_vertices(s1, opt.angle_tol);
  const std::vector<int> v2 = singular_vertices(s2, opt.angle_tol);
  if (v1.size() != v2.size()) {
    r.reason = "cone point counts differ";
    return r;
  }
  std::vector<double> ang1, ang2;
  for (int v : v1) ang1.push_back(s1.total_angle(v));
  for (int v : v2) ang2.push_back(s2.total_angle(v));
  {
    auto x = ang1, y = ang2;
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (std::abs(x[i] - y[i]) > opt.angle_tol) {
        r.reason = "cone angle multisets differ";
        return r;
      }
    }
  }
  const Eigen::MatrixXd d1 = vertex_distances(s1, v1, opt.subdivision);
  const Eigen::MatrixXd d2 = vertex_distances(s2, v2, opt.subdivision);
  const double scale = std::max(d1.maxCoeff(), d2.maxCoeff());
  const int n = static_cast<int>(v1.size());
  std::vector<int> image(n, -1);
  std::vector<bool> taken(n, false);
  std::function<bool(int)> extend = [&](int i) {
    if (i == n) return true;
    for (int j = 0; j < n; ++j) {
      if (taken[j] || std::abs(ang1[i] - ang2[j]) > opt.angle_tol) continue;
      bool ok = true;
      for (int k = 0; k < i && ok; ++k) {
        ok = std::abs(d1(i, k) - d2(j, image[k])) <= opt.distance_rel_tol * scale;
      }
      if (!ok) continue;
      image[i] = j;
      taken[j] = true;
      if (extend(i + 1)) return true;
      taken[j] = false;
    }
    return false;
  };
  if (!extend(0)) {
    r.reason = "no distance-preserving cone point matching";
    return r;
  }
  r.isometric = true;
  for (int i = 0; i < n; ++i) r.matching.emplace_back(v1[i], v2[image[i]]);
  return r;
}

namespace detail {

struct MutableSurface {
  std::vector<TriSurface::Triangle> tris;
  std::map<Edge, double> len;

  double l(int u, int v) const { return len.at(make_edge(u, v)); }

  double corner(const TriSurface::Triangle& t, int v) const {
    int i = 0;
    while (t[i] != v) ++i;
    const int a = t[(i + 1) % 3], b = t[(i + 2) % 3];
    return law_of_cosines(l(v, a), l(v, b), l(a, b));
  }

  std::vector<int> incident(int v) const {
    std::vector<int> out;
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      if (tris[t][0] == v || tris[t][1] == v || tris[t][2] == v) out.push_back(t);
    }
    return out;
  }

  static int third(const TriSurface::Triangle& t, int u, int v) {
    for (int x : t) {
      if (x != u && x != v) return x;
    }
    return -1;
  }

  static bool has(const TriSurface::Triangle& t, int v) {
    return t[0] == v || t[1] == v || t[2] == v;
  }

  // Flips edge (v, w) if the quadrilateral around it is strictly convex at v and w.
  bool try_flip(int v, int w) {
    int t1 = -1, t2 = -1;
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      if (has(tris[t], v) && has(tris[t], w)) (t1 < 0 ? t1 : t2) = t;
    }
    if (t1 < 0 || t2 < 0) return false;
    const int a = third(tris[t1], v, w), b = third(tris[t2], v, w);
    if (a == b || len.count(make_edge(a, b))) return false;
    const double at_v = corner(tris[t1], v) + corner(tris[t2], v);
    const double at_w = corner(tris[t1], w) + corner(tris[t2], w);
    constexpr double kMargin = 1e-9;
    if (at_v >= std::numbers::pi - kMargin || at_w >= std::numbers::pi - kMargin) return false;
    const double la = l(v, a), lb = l(v, b);
    const double new_len = std::sqrt(std::max(0.0, la * la + lb * lb - 2 * la * lb * std::cos(at_v)));
    // keep the orientation of t1: (v, w, a) order carried over
    int i = 0;
    while (tris[t1][i] != v) ++i;
    const bool w_next = tris[t1][(i + 1) % 3] == w;
    len.erase(make_edge(v, w));
    len[make_edge(a, b)] = new_len;
    if (w_next) {  // t1 = (v, w, a), t2 = (w, v, b)
      tris[t1] = {v, b, a};
      tris[t2] = {w, a, b};
    } else {  // t1 = (v, a, w), t2 = (v, w, b)
      tris[t1] = {v, a, b};
      tris[t2] = {w, b, a};
    }
    return true;
  }

  // Removes a flat vertex by flipping its edges away; true on success.
  bool remove_vertex(int v) {
    for (int guard = 0; guard < 64; ++guard) {
      const std::vector<int> inc = incident(v);
      if (inc.size() == 3) {
        std::set<int> ring;
        for (int t : inc) {
          for (int x : tris[t]) {
            if (x != v) ring.insert(x);
          }
        }
        if (ring.size() != 3) return false;
        // keep the orientation of the first incident triangle
        const TriSurface::Triangle& t0 = tris[inc[0]];
        int i = 0;
        while (t0[i] != v) ++i;
        const int a = t0[(i + 1) % 3], b = t0[(i + 2) % 3];
        int c = -1;
        for (int x : ring) {
          if (x != a && x != b) c = x;
        }
        for (int x : ring) len.erase(make_edge(v, x));
        std::vector<TriSurface::Triangle> kept;
        for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
          if (std::find(inc.begin(), inc.end(), t) == inc.end()) kept.push_back(tris[t]);
        }
        kept.push_back({a, b, c});
        tris = std::move(kept);
        return true;
      }
      bool flipped = false;
      for (int t : inc) {
        for (int x : tris[t]) {
          if (x != v && try_flip(v, x)) {
            flipped = true;
            break;
          }
        }
        if (flipped) break;
      }
      if (!flipped) return false;
    }
    return false;
  }
};

}  // namespace detail

// Removes vertices with |defect| <= tol (flat points) by intrinsic edge flips;
// the metric is unchanged. Vertices that cannot be removed are kept.
// old_to_new, when given, receives the new id of each kept vertex (-1 if removed).
inline TriSurface simplify_flat_vertices(const TriSurface& s, double tol = 1e-7,
                                         std::vector<int>* old_to_new = nullptr) {
  detail::MutableSurface m{s.triangles(), s.edge_lengths()};
  const DefectCensus c = defect_census(s);
  std::vector<bool> removed(s.num_vertices(), false);
  // a removal can unblock an earlier failure, so sweep until nothing changes
  for (bool progress = true; progress;) {
    progress = false;
    for (int v = 0; v < s.num_vertices(); ++v) {
      if (removed[v] || std::abs(c.defects[v]) > tol) continue;
      detail::MutableSurface trial = m;
      if (trial.remove_vertex(v)) {
        m = std::move(trial);
        removed[v] = true;
        progress = true;
      }
    }
  }
  std::vector<int> remap(s.num_vertices(), -1);
  int next = 0;
  for (int v = 0; v < s.num_vertices(); ++v) {
    if (!removed[v]) remap[v] = next++;
  }
  std::vector<TriSurface::Triangle> tris;
  for (auto t : m.tris) tris.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
  std::map<Edge, double> len;
  for (const auto& [e, l] : m.len) len[make_edge(remap[e.first], remap[e.second])] = l;
  if (old_to_new != nullptr) *old_to_new = remap;
  return TriSurface(next, std::move(tris), std::move(len));
}

// Text format:
//   pl4-surface 1
//   vertices N
//   v <id>                      (N lines)
//   triangles T
//   t <a> <b> <c>               (T lines)
//   edges E
//   e <u> <v> <length>          (E lines, %.17g)
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline double parse_double(const std::string& tok) {
  char* end = nullptr;
  const double x = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end != tok.c_str() + tok.size()) {
    throw Error(ErrorCode::InvalidInput, "expected a number, got '" + tok + "'");
  }
  return x;
}

inline void write_surface(std::ostream& out, const TriSurface& s) {
  out << "pl4-surface 1\n";
  out << "vertices " << s.num_vertices() << "\n";
  for (int v = 0; v < s.num_vertices(); ++v) out << "v " << v << "\n";
  out << "triangles " << s.num_triangles() << "\n";
  for (const auto& t : s.triangles()) out << "t " << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "edges " << s.num_edges() << "\n";
  for (const auto& [e, l] : s.edge_lengths()) {
    out << "e " << e.first << " " << e.second << " " << format_double(l) << "\n";
  }
}

namespace detail {

class RecordReader {
 public:
  explicit RecordReader(std::istream& in) : in_(in) {}

  std::vector<std::string> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ss(line);
      std::vector<std::string> toks;
      std::string tok;
      while (ss >> tok) toks.push_back(tok);
      if (!toks.empty()) return toks;
    }
    fail("unexpected end of input");
  }

  std::vector<std::string> expect(const std::string& head, std::size_t count) {
    std::vector<std::string> toks = next();
    if (toks[0] != head || toks.size() != count) {
      fail("expected '" + head + "' record with " + std::to_string(count - 1) + " fields");
    }
    return toks;
  }

  long integer(const std::string& tok) {
    long x = 0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
    if (ec != std::errc() || p != tok.data() + tok.size()) fail("expected an integer, got '" + tok + "'");
    return x;
  }

  double real(const std::string& tok) {
    try {
      return parse_double(tok);
    } catch (const Error&) {
      fail("expected a number, got '" + tok + "'");
    }
  }

  bool at_end() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.find_first_not_of(" \t\r") != std::string::npos && line[line.find_first_not_of(" \t\r")] != '#') {
        return false;
      }
    }
    return true;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::InvalidInput, "line " + std::to_string(line_no_) + ": " + msg);
  }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

}  // namespace detail

inline TriSurface read_surface(std::istream& in) {
  detail::RecordReader r(in);
  const auto magic = r.expect("pl4-surface", 2);
  if (magic[1] != "1") r.fail("unsupported surface format version " + magic[1]);
  const long nv = r.integer(r.expect("vertices", 2)[1]);
  if (nv < 0) r.fail("negative vertex count");
  for (long i = 0; i < nv; ++i) {
    if (r.integer(r.expect("v", 2)[1]) != i) r.fail("vertex records must be numbered 0..N-1 in order");
  }
  const long nt = r.integer(r.expect("triangles", 2)[1]);
  if (nt < 0) r.fail("negative triangle count");
  std::vector<TriSurface::Triangle> tris;
  for (long i = 0; i < nt; ++i) {
    const auto t = r.expect("t", 4);
    tris.push_back({static_cast<int>(r.integer(t[1])), static_cast<int>(r.integer(t[2])),
                    static_cast<int>(r.integer(t[3]))});
  }
  const long ne = r.integer(r.expect("edges", 2)[1]);
  if (ne < 0) r.fail("negative edge count");
  std::map<Edge, double> len;
  for (long i = 0; i < ne; ++i) {
    const auto e = r.expect("e", 4);
    const Edge key = make_edge(static_cast<int>(r.integer(e[1])), static_cast<int>(r.integer(e[2])));
    if (!len.emplace(key, r.real(e[3])).second) r.fail("duplicate edge record");
  }
  if (!r.at_end()) r.fail("trailing records");
  return TriSurface(static_cast<int>(nv), std::move(tris), std::move(len));
}

inline TriSurface load_surface(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open surface file '" + path + "'");
  return read_surface(in);
}

inline void save_surface(const std::string& path, const TriSurface& s) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write '" + path + "'");
  write_surface(out, s);
}

// Built-in name or surface file.
inline TriSurface resolve_surface(const std::string& name_or_path) {
  try {
    return builtin_surface(name_or_path);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::UnknownName) throw;
  }
  return load_surface(name_or_path);
}

}  // namespace pl4
