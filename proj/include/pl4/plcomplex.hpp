#pragma once

// Closed metric 4-complexes built from flat 4-simplices.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "pl4/error.hpp"
#include "pl4/simplicial.hpp"
#include "pl4/surface2.hpp"

namespace pl4 {

using Metric4 = SimplicialMetric<4>;
using Vec4d = Eigen::Matrix<double, 4, 1>;
using TriangleLabels = std::array<int, 3>;

inline constexpr double kTwoPi = 2 * std::numbers::pi;

struct ComplexTolerances {
  double angle = 1e-7;    // |cone angle - 2pi| below this is flat
  double length = 1e-9;   // relative mismatch allowed between glued edges
};

class MetricComplex4 {
 public:
  MetricComplex4() = default;
  explicit MetricComplex4(Metric4 metric, ComplexTolerances tol = {})
      : metric_(std::move(metric)), tol_(tol) {
    index_triangles();
  }

  const Metric4& metric() const { return metric_; }
  const ComplexTolerances& tolerances() const { return tol_; }
  int num_vertices() const { return metric_.num_vertices(); }
  int num_simplices() const { return metric_.num_simplices(); }

  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  const TriangleLabels& triangle(int id) const { return triangles_[id]; }
  const std::vector<int>& triangle_star(int id) const { return star_[id]; }

  int triangle_id(TriangleLabels t) const {
    std::sort(t.begin(), t.end());
    auto it = triangle_index_.find(t);
    return it == triangle_index_.end() ? -1 : it->second;
  }

  double total_volume() const {
    double v = 0;
    for (int s = 0; s < num_simplices(); ++s) v += metric_.volume(s);
    return v;
  }

 private:
  void index_triangles() {
    for (int s = 0; s < num_simplices(); ++s) {
      const auto& l = metric_.labels(s);
      for (int a = 0; a < 5; ++a) {
        for (int b = a + 1; b < 5; ++b) {
          for (int c = b + 1; c < 5; ++c) {
            TriangleLabels t{l[a], l[b], l[c]};
            std::sort(t.begin(), t.end());
            auto [it, inserted] = triangle_index_.try_emplace(t, num_triangles());
            if (inserted) {
              triangles_.push_back(t);
              star_.emplace_back();
            }
            star_[it->second].push_back(s);
          }
        }
      }
    }
  }

  Metric4 metric_;
  ComplexTolerances tol_;
  std::vector<TriangleLabels> triangles_;
  std::vector<std::vector<int>> star_;
  std::map<TriangleLabels, int> triangle_index_;
};

// ---------------------------------------------------------------------------
// Validation

enum class IssueKind { BoundaryFace, Overglued, MetricMismatch, Degenerate, Disconnected };

inline std::string_view to_string(IssueKind k) {
  switch (k) {
    case IssueKind::BoundaryFace: return "boundary face";
    case IssueKind::Overglued: return "face shared by more than two simplices";
    case IssueKind::MetricMismatch: return "metric mismatch";
    case IssueKind::Degenerate: return "degenerate simplex";
    case IssueKind::Disconnected: return "disconnected";
  }
  return "?";
}

struct ValidationIssue {
  IssueKind kind;
  int simplex;
  int facet;  // local index of the opposite vertex, -1 if not facet-specific
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool valid() const { return issues.empty(); }
};

namespace detail {

inline std::string face_name(const Metric4& m, int s, int opposite) {
  std::string out = "{";
  const auto key = Metric4::facet_key(m.labels(s), opposite);
  for (int i = 0; i < 4; ++i) out += (i ? "," : "") + std::to_string(key[i]);
  return out + "}";
}

}  // namespace detail

inline ValidationReport validate(const MetricComplex4& mc, const GluingIssues* gluing = nullptr) {
  ValidationReport r;
  const Metric4& m = mc.metric();
  if (gluing != nullptr) {
    for (const FacetRef& f : gluing->overglued) {
      r.issues.push_back({IssueKind::Overglued, f.simplex, f.opposite, detail::face_name(m, f.simplex, f.opposite)});
    }
  }
  for (int s = 0; s < m.num_simplices(); ++s) {
    if (!m.nondegenerate(s)) {
      r.issues.push_back({IssueKind::Degenerate, s, -1,
                          "Cayley-Menger determinant " + format_double(m.gram_determinant(s))});
    }
    for (int i = 0; i < 5; ++i) {
      const FacetRef nb = m.neighbor(s, i);
      if (!nb.valid()) {
        const bool overglued = gluing != nullptr &&
            std::find(gluing->overglued.begin(), gluing->overglued.end(), FacetRef{s, i}) != gluing->overglued.end();
        if (!overglued) r.issues.push_back({IssueKind::BoundaryFace, s, i, detail::face_name(m, s, i)});
        continue;
      }
      if (nb.simplex < s) continue;
      for (int a = 0; a < 5; ++a) {
        for (int b = a + 1; b < 5; ++b) {
          if (a == i || b == i) continue;
          const int ta = m.local_index(nb.simplex, m.labels(s)[a]);
          const int tb = m.local_index(nb.simplex, m.labels(s)[b]);
          const double l1 = m.length(s, a, b), l2 = m.length(nb.simplex, ta, tb);
          if (std::abs(l1 - l2) > mc.tolerances().length * std::max(l1, l2)) {
            r.issues.push_back({IssueKind::MetricMismatch, s, i,
                                detail::face_name(m, s, i) + " edge (" + std::to_string(m.labels(s)[a]) +
                                    "," + std::to_string(m.labels(s)[b]) + "): " + format_double(l1) +
                                    " vs " + format_double(l2)});
          }
        }
      }
    }
  }
  if (m.num_simplices() > 0 && !dual_tree(m).connected) {
    r.issues.push_back({IssueKind::Disconnected, -1, -1, "dual graph is not connected"});
  }
  return r;
}

// ---------------------------------------------------------------------------
// Cone angles and the singular census

// Dihedral angle of simplex s at the triangle with the given local indices.
inline double dihedral_angle(const Metric4& m, int s, const std::array<int, 3>& local) {
  const auto& c = m.chart(s);
  Eigen::Matrix<double, 4, 2> e;
  e.col(0) = c[local[1]] - c[local[0]];
  e.col(1) = c[local[2]] - c[local[0]];
  std::array<int, 2> other{};
  for (int i = 0, k = 0; i < 5; ++i) {
    if (i != local[0] && i != local[1] && i != local[2]) other[k++] = i;
  }
  const Eigen::Matrix2d g = e.transpose() * e;
  auto transverse = [&](int i) {
    const Vec4d r = c[i] - c[local[0]];
    const Eigen::Vector2d coef = g.ldlt().solve(e.transpose() * r);
    return Vec4d(r - e * coef);
  };
  const Vec4d x = transverse(other[0]), y = transverse(other[1]);
  const Vec4d xu = x.normalized();
  const double along = y.dot(xu);
  return std::atan2((y - along * xu).norm(), along);
}

inline double triangle_area(const Metric4& m, int s, const std::array<int, 3>& local) {
  const auto& c = m.chart(s);
  const Vec4d a = c[local[1]] - c[local[0]], b = c[local[2]] - c[local[0]];
  return 0.5 * std::sqrt(std::max(0.0, a.squaredNorm() * b.squaredNorm() - std::pow(a.dot(b), 2)));
}

inline std::array<int, 3> local_triangle(const Metric4& m, int s, const TriangleLabels& t) {
  return {m.local_index(s, t[0]), m.local_index(s, t[1]), m.local_index(s, t[2])};
}

inline double cone_angle_at_triangle(const MetricComplex4& mc, int tri) {
  const Metric4& m = mc.metric();
  const TriangleLabels& t = mc.triangle(tri);
  const int s0 = mc.triangle_star(tri).front();
  const auto l0 = local_triangle(m, s0, t);
  double scale = 0;
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) scale = std::max(scale, m.length(s0, l0[a], l0[b]));
  }
  if (triangle_area(m, s0, l0) <= 1e-12 * scale * scale) {
    throw Error(ErrorCode::DegenerateFace, "triangle has zero area");
  }
  double sum = 0;
  for (int s : mc.triangle_star(tri)) sum += dihedral_angle(m, s, local_triangle(m, s, t));
  return sum;
}

inline double cone_angle_at_triangle(const MetricComplex4& mc, const TriangleLabels& t) {
  const int id = mc.triangle_id(t);
  if (id < 0) throw Error(ErrorCode::PreconditionViolation, "not a triangle of the complex");
  return cone_angle_at_triangle(mc, id);
}

inline std::vector<double> all_cone_angles(const MetricComplex4& mc) {
  std::vector<double> out(mc.num_triangles());
  for (int t = 0; t < mc.num_triangles(); ++t) out[t] = cone_angle_at_triangle(mc, t);
  return out;
}

struct Stratum {
  int codim = 2;
  std::vector<int> triangles;  // codim 2: triangle ids, ascending
  int vertex = -1;             // codim 4
  double cone_angle = kTwoPi;  // codim 2
};

struct SingularCensus {
  std::vector<Stratum> codim2;
  std::vector<Stratum> codim4;  // candidates; split finalizes them
  std::vector<std::array<int, 2>> codim3_violations;
  std::vector<int> stratum_of_triangle;  // -1 for flat triangles
  std::vector<double> cone_angles;       // per triangle

  bool empty() const { return codim2.empty() && codim4.empty() && codim3_violations.empty(); }
};

inline SingularCensus singular_census(const MetricComplex4& mc) {
  SingularCensus c;
  const int nt = mc.num_triangles();
  c.cone_angles = all_cone_angles(mc);
  c.stratum_of_triangle.assign(nt, -1);
  const double tol = mc.tolerances().angle;
  std::vector<int> singular;
  for (int t = 0; t < nt; ++t) {
    if (std::abs(c.cone_angles[t] - kTwoPi) > tol) singular.push_back(t);
  }
  // edges of singular triangles
  std::map<std::array<int, 2>, std::vector<int>> edge_tris;
  for (int t : singular) {
    const auto& l = mc.triangle(t);
    edge_tris[{l[0], l[1]}].push_back(t);
    edge_tris[{l[0], l[2]}].push_back(t);
    edge_tris[{l[1], l[2]}].push_back(t);
  }
  // components through shared edges, numbered by lowest triangle id
  for (int t : singular) {
    if (c.stratum_of_triangle[t] >= 0) continue;
    Stratum st;
    st.codim = 2;
    const int id = static_cast<int>(c.codim2.size());
    std::vector<int> stack{t};
    c.stratum_of_triangle[t] = id;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      st.triangles.push_back(u);
      const auto& l = mc.triangle(u);
      for (const std::array<int, 2>& e : {std::array<int, 2>{l[0], l[1]}, std::array<int, 2>{l[0], l[2]},
                                          std::array<int, 2>{l[1], l[2]}}) {
        for (int w : edge_tris[e]) {
          if (c.stratum_of_triangle[w] < 0) {
            c.stratum_of_triangle[w] = id;
            stack.push_back(w);
          }
        }
      }
    }
    std::sort(st.triangles.begin(), st.triangles.end());
    double sum = 0;
    for (int u : st.triangles) sum += c.cone_angles[u];
    st.cone_angle = sum / static_cast<double>(st.triangles.size());
    c.codim2.push_back(std::move(st));
  }
  for (const auto& [e, tris] : edge_tris) {
    if (tris.size() != 2) c.codim3_violations.push_back(e);
  }
  // codim-4 candidates: the link graph of singular triangles at the vertex
  // is not a single cycle
  std::map<int, std::vector<std::array<int, 2>>> link;
  for (int t : singular) {
    const auto& l = mc.triangle(t);
    link[l[0]].push_back({l[1], l[2]});
    link[l[1]].push_back({l[0], l[2]});
    link[l[2]].push_back({l[0], l[1]});
  }
  for (const auto& [v, edges] : link) {
    std::map<int, std::vector<int>> adj;
    for (const auto& [a, b] : edges) {
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    bool cycle = std::all_of(adj.begin(), adj.end(), [](const auto& kv) { return kv.second.size() == 2; });
    if (cycle) {
      std::set<int> seen{adj.begin()->first};
      std::vector<int> stack{adj.begin()->first};
      while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int w : adj[u]) {
          if (seen.insert(w).second) stack.push_back(w);
        }
      }
      cycle = seen.size() == adj.size();
    }
    if (!cycle) {
      Stratum st;
      st.codim = 4;
      st.vertex = v;
      c.codim4.push_back(st);
    }
  }
  return c;
}

struct CurvatureCheck {
  bool nonneg = true;
  double worst_angle = kTwoPi;  // largest cone angle
  int worst_triangle = -1;
};

inline CurvatureCheck check_nonneg_curvature(const MetricComplex4& mc) {
  CurvatureCheck r;
  r.worst_angle = -1;
  for (int t = 0; t < mc.num_triangles(); ++t) {
    const double a = cone_angle_at_triangle(mc, t);
    if (a > r.worst_angle) {
      r.worst_angle = a;
      r.worst_triangle = t;
    }
  }
  r.nonneg = r.worst_angle <= kTwoPi + mc.tolerances().angle;
  return r;
}

inline DualTree dual_graph(const MetricComplex4& mc) { return dual_tree(mc.metric(), 0); }

// ---------------------------------------------------------------------------
// Construction

// Builds a complex from labelled simplices, gluing facets with equal labels.
// Throws InvalidInput if the result fails validation.
inline MetricComplex4 complex_from_simplices(int num_vertices, std::vector<Metric4::Labels> simplices,
                                             std::vector<Metric4::Lengths> lengths,
                                             ComplexTolerances tol = {}) {
  GluingIssues issues;
  MetricComplex4 mc(Metric4::glue_by_labels(num_vertices, std::move(simplices), std::move(lengths), &issues), tol);
  const ValidationReport r = validate(mc, &issues);
  if (!r.valid()) {
    throw Error(ErrorCode::InvalidInput, std::string(to_string(r.issues.front().kind)) + " " + r.issues.front().detail);
  }
  return mc;
}

// Staircase triangulation of P x Q. Product vertex (p, q) has id p * |Q| + q;
// each cell sigma x tau (vertices sorted by id) is cut into the six 4-simplices
// of monotone lattice paths.
inline MetricComplex4 product_complex(const TriSurface& p, const TriSurface& q, ComplexTolerances tol = {}) {
  const int nq = q.num_vertices();
  std::vector<Metric4::Labels> simplices;
  std::vector<Metric4::Lengths> lengths;
  // the six monotone paths from (0,0) to (2,2): 0 = step in P, 1 = step in Q
  static constexpr std::array<std::array<int, 4>, 6> kPaths = {{
      {0, 0, 1, 1}, {0, 1, 0, 1}, {0, 1, 1, 0}, {1, 0, 0, 1}, {1, 0, 1, 0}, {1, 1, 0, 0}}};
  for (auto sigma : p.triangles()) {
    std::sort(sigma.begin(), sigma.end());
    for (auto tau : q.triangles()) {
      std::sort(tau.begin(), tau.end());
      for (const auto& path : kPaths) {
        std::array<std::array<int, 2>, 5> pts{};
        int i = 0, j = 0;
        pts[0] = {0, 0};
        for (int k = 0; k < 4; ++k) {
          (path[k] == 0 ? i : j) += 1;
          pts[k + 1] = {i, j};
        }
        Metric4::Labels labels;
        Metric4::Lengths len;
        for (int a = 0; a < 5; ++a) labels[a] = sigma[pts[a][0]] * nq + tau[pts[a][1]];
        for (int a = 0; a < 5; ++a) {
          for (int b = a + 1; b < 5; ++b) {
            const int pa = sigma[pts[a][0]], pb = sigma[pts[b][0]];
            const int qa = tau[pts[a][1]], qb = tau[pts[b][1]];
            const double dp = pa == pb ? 0.0 : p.length(pa, pb);
            const double dq = qa == qb ? 0.0 : q.length(qa, qb);
            len[Metric4::edge_index(a, b)] = std::sqrt(dp * dp + dq * dq);
          }
        }
        simplices.push_back(labels);
        lengths.push_back(len);
      }
    }
  }
  return complex_from_simplices(p.num_vertices() * nq, std::move(simplices), std::move(lengths), tol);
}

// Flat torus (R / n)^4 with unit cubes, each cut into the 24 simplices of the
// Kuhn triangulation. Vertex id = sum x_i n^i.
inline MetricComplex4 flat_torus_complex(int n = 3) {
  if (n < 3) throw Error(ErrorCode::PreconditionViolation, "flat torus needs at least 3 cubes per axis");
  std::vector<Metric4::Labels> simplices;
  std::vector<Metric4::Lengths> lengths;
  auto id = [n](const std::array<int, 4>& x) {
    int v = 0;
    for (int i = 3; i >= 0; --i) v = v * n + ((x[i] % n) + n) % n;
    return v;
  };
  std::array<int, 4> perm{0, 1, 2, 3};
  std::vector<std::array<int, 4>> perms;
  do {
    perms.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (int cell = 0; cell < n * n * n * n; ++cell) {
    const std::array<int, 4> base{cell % n, (cell / n) % n, (cell / (n * n)) % n, cell / (n * n * n)};
    for (const auto& pi : perms) {
      std::array<std::array<int, 4>, 5> pts;
      pts[0] = {0, 0, 0, 0};
      for (int k = 0; k < 4; ++k) {
        pts[k + 1] = pts[k];
        pts[k + 1][pi[k]] = 1;
      }
      Metric4::Labels labels;
      Metric4::Lengths len;
      for (int a = 0; a < 5; ++a) {
        std::array<int, 4> x;
        for (int i = 0; i < 4; ++i) x[i] = base[i] + pts[a][i];
        labels[a] = id(x);
      }
      for (int a = 0; a < 5; ++a) {
        for (int b = a + 1; b < 5; ++b) {
          int d = 0;
          for (int i = 0; i < 4; ++i) d += pts[a][i] != pts[b][i];
          len[Metric4::edge_index(a, b)] = std::sqrt(static_cast<double>(d));
        }
      }
      simplices.push_back(labels);
      lengths.push_back(len);
    }
  }
  return complex_from_simplices(n * n * n * n, std::move(simplices), std::move(lengths));
}

// Join of a 5-cycle (vertices 0..4) with the boundary of a tetrahedron
// (vertices 5..8), all edges of unit length: a 4-sphere made of 20 regular
// simplices. Each triangle of the tetrahedron boundary sits in five simplices,
// so its cone angle is 5 arccos(1/4) > 2pi.
inline MetricComplex4 saddle_join_complex() {
  std::vector<Metric4::Labels> simplices;
  std::vector<Metric4::Lengths> lengths;
  Metric4::Lengths unit;
  unit.fill(1.0);
  const std::array<std::array<int, 3>, 4> faces = {{{5, 6, 7}, {5, 6, 8}, {5, 7, 8}, {6, 7, 8}}};
  for (int i = 0; i < 5; ++i) {
    for (const auto& f : faces) {
      simplices.push_back({i, (i + 1) % 5, f[0], f[1], f[2]});
      lengths.push_back(unit);
    }
  }
  return complex_from_simplices(9, std::move(simplices), std::move(lengths));
}

// ---------------------------------------------------------------------------
// Text format:
//   pl4-complex 1
//   vertices N
//   simplices S
//   tolerances <angle> <length>
//   v <id>                                    (N lines)
//   s <l0> .. <l4> <len01> <len02> .. <len34>  (S lines, edge order (0,1),(0,2),..,(3,4))
//   gluings G
//   g <s> <i> <t> <j>                          (facet opposite local i of s glued to
//                                               facet opposite local j of t, s < t)

inline void write_complex(std::ostream& out, const MetricComplex4& mc) {
  const Metric4& m = mc.metric();
  out << "pl4-complex 1\n";
  out << "vertices " << m.num_vertices() << "\n";
  out << "simplices " << m.num_simplices() << "\n";
  out << "tolerances " << format_double(mc.tolerances().angle) << " "
      << format_double(mc.tolerances().length) << "\n";
  for (int v = 0; v < m.num_vertices(); ++v) out << "v " << v << "\n";
  for (int s = 0; s < m.num_simplices(); ++s) {
    out << "s";
    for (int l : m.labels(s)) out << " " << l;
    for (double l : m.lengths(s)) out << " " << format_double(l);
    out << "\n";
  }
  std::vector<std::array<int, 4>> glue;
  for (int s = 0; s < m.num_simplices(); ++s) {
    for (int i = 0; i < 5; ++i) {
      const FacetRef nb = m.neighbor(s, i);
      if (nb.valid() && (s < nb.simplex || (s == nb.simplex && i < nb.opposite))) {
        glue.push_back({s, i, nb.simplex, nb.opposite});
      }
    }
  }
  out << "gluings " << glue.size() << "\n";
  for (const auto& g : glue) out << "g " << g[0] << " " << g[1] << " " << g[2] << " " << g[3] << "\n";
}

struct ComplexReadResult {
  MetricComplex4 complex;
  ValidationReport report;
};

// Parses without throwing on validation failures; syntax errors throw InvalidInput.
inline ComplexReadResult read_complex_unchecked(std::istream& in) {
  detail::RecordReader r(in);
  const auto magic = r.expect("pl4-complex", 2);
  if (magic[1] != "1") r.fail("unsupported complex format version " + magic[1]);
  const long nv = r.integer(r.expect("vertices", 2)[1]);
  const long ns = r.integer(r.expect("simplices", 2)[1]);
  if (nv < 0 || ns < 0) r.fail("negative count");
  const auto tol_rec = r.expect("tolerances", 3);
  ComplexTolerances tol{r.real(tol_rec[1]), r.real(tol_rec[2])};
  if (!(tol.angle > 0) || !(tol.length > 0)) r.fail("tolerances must be positive");
  for (long i = 0; i < nv; ++i) {
    if (r.integer(r.expect("v", 2)[1]) != i) r.fail("vertex records must be numbered 0..N-1 in order");
  }
  std::vector<Metric4::Labels> simplices(ns);
  std::vector<Metric4::Lengths> lengths(ns);
  for (long s = 0; s < ns; ++s) {
    const auto rec = r.expect("s", 16);
    for (int i = 0; i < 5; ++i) {
      const long l = r.integer(rec[1 + i]);
      if (l < 0 || l >= nv) r.fail("vertex label out of range");
      simplices[s][i] = static_cast<int>(l);
    }
    std::set<int> distinct(simplices[s].begin(), simplices[s].end());
    if (distinct.size() != 5) r.fail("simplex repeats a vertex");
    for (int e = 0; e < 10; ++e) {
      lengths[s][e] = r.real(rec[6 + e]);
      if (!(lengths[s][e] > 0) || !std::isfinite(lengths[s][e])) r.fail("edge lengths must be positive");
    }
  }
  const long ng = r.integer(r.expect("gluings", 2)[1]);
  std::vector<Metric4::Neighbors> nbrs(ns);
  for (long k = 0; k < ng; ++k) {
    const auto rec = r.expect("g", 5);
    const long s = r.integer(rec[1]), i = r.integer(rec[2]), t = r.integer(rec[3]), j = r.integer(rec[4]);
    if (s < 0 || s >= ns || t < 0 || t >= ns || i < 0 || i > 4 || j < 0 || j > 4) r.fail("gluing out of range");
    if (nbrs[s][i].valid() || nbrs[t][j].valid()) r.fail("facet glued twice");
    if (s == t && i == j) r.fail("facet glued to itself");
    if (Metric4::facet_key(simplices[s], static_cast<int>(i)) != Metric4::facet_key(simplices[t], static_cast<int>(j))) {
      r.fail("gluing joins facets with different vertex labels");
    }
    nbrs[s][i] = {static_cast<int>(t), static_cast<int>(j)};
    nbrs[t][j] = {static_cast<int>(s), static_cast<int>(i)};
  }
  if (!r.at_end()) r.fail("trailing records");
  ComplexReadResult out;
  out.complex = MetricComplex4(Metric4(static_cast<int>(nv), std::move(simplices), std::move(lengths), std::move(nbrs)), tol);
  out.report = validate(out.complex);
  return out;
}

inline MetricComplex4 read_complex(std::istream& in) {
  ComplexReadResult r = read_complex_unchecked(in);
  if (!r.report.valid()) {
    const auto& i = r.report.issues.front();
    throw Error(ErrorCode::InvalidInput, std::string(to_string(i.kind)) + " " + i.detail);
  }
  return std::move(r.complex);
}

inline MetricComplex4 load_complex(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open complex file '" + path + "'");
  return read_complex(in);
}

inline void save_complex(const std::string& path, const MetricComplex4& mc) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write '" + path + "'");
  write_complex(out, mc);
}

}  // namespace pl4
