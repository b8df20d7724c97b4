#pragma once

// Developing maps over the flat part and the holonomy representation.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "pl4/error.hpp"
#include "pl4/plcomplex.hpp"
#include "pl4/tensor4.hpp"

namespace pl4 {

using Placement = AffineMap<4>;

struct DevelopingChart {
  std::vector<int> path;
  std::vector<Placement> placements;  // chart(path[k]) -> chart(path[0])
};

inline DevelopingChart develop(const MetricComplex4& mc, std::span<const int> path) {
  return {std::vector<int>(path.begin(), path.end()), develop_path<4>(mc.metric(), path)};
}

// Simplices around a triangle in cyclic order, starting at the lowest id and
// stepping first to the lower-id neighbour: s0, s1, ..., s_{k-1}.
inline std::vector<int> triangle_fan(const MetricComplex4& mc, int tri) {
  const Metric4& m = mc.metric();
  const TriangleLabels& t = mc.triangle(tri);
  const auto& star = mc.triangle_star(tri);
  const int s0 = *std::min_element(star.begin(), star.end());
  // facets of s through t are those opposite a vertex not on t
  auto fan_neighbors = [&](int s) {
    std::vector<int> out;
    for (int i = 0; i < 5; ++i) {
      const int l = m.labels(s)[i];
      if (l == t[0] || l == t[1] || l == t[2]) continue;
      out.push_back(m.neighbor(s, i).simplex);
    }
    return out;
  };
  std::vector<int> fan{s0};
  auto first = fan_neighbors(s0);
  std::sort(first.begin(), first.end());
  int prev = s0, cur = first[0];
  while (cur != s0) {
    fan.push_back(cur);
    const auto nb = fan_neighbors(cur);
    const int next = nb[0] == prev ? nb[1] : nb[0];
    prev = cur;
    cur = next;
    if (fan.size() > star.size()) throw Error(ErrorCode::InvalidInput, "triangle fan does not close");
  }
  return fan;
}

struct HolonomyGenerator {
  int stratum = -1;
  int triangle = -1;
  std::vector<int> loop;         // closed fan loop, first simplex repeated at the end
  std::vector<int> tree_path;    // base -> loop start along the spanning tree
  Mat4 rotation = Mat4::Identity();  // in the base chart
  double angle = 0;              // rotation angle in [0, pi]
  double cone_angle = kTwoPi;
  Vec4 fixed_u, fixed_v;         // orthonormal basis of the fixed plane, base chart
};

struct HolonomyRep {
  int base = 0;
  std::vector<HolonomyGenerator> generators;

  std::vector<Mat4> matrices() const {
    std::vector<Mat4> out;
    for (const auto& g : generators) out.push_back(g.rotation);
    return out;
  }
};

// Rotation angle of an SO(4) element fixing the plane spanned by (u, v).
inline double transverse_rotation_angle(const Mat4& r, const Vec4& u, const Vec4& v) {
  // orthonormal complement of the fixed plane
  std::vector<Vec4> comp;
  for (int k = 0; k < 4 && comp.size() < 2; ++k) {
    Vec4 e = Vec4::Unit(k);
    e -= u.dot(e) * u + v.dot(e) * v;
    for (const Vec4& c : comp) e -= c.dot(e) * c;
    if (e.norm() > 0.3) comp.push_back(e.normalized());
  }
  const Vec4 n1 = comp[0], n2 = comp[1];
  const Vec4 rn1 = r * n1;
  return std::abs(std::atan2(n2.dot(rn1), n1.dot(rn1)));
}

// Holonomy of the fan loop around any triangle, conjugated into the chart of
// the tree root. Flat triangles give the identity.
inline HolonomyGenerator holonomy_around_triangle(const MetricComplex4& mc, int tri, const DualTree& tree) {
  const Metric4& m = mc.metric();
  HolonomyGenerator g;
  g.triangle = tri;
  g.loop = triangle_fan(mc, tri);
  g.loop.push_back(g.loop.front());
  const auto around = develop_path<4>(m, g.loop);
  const int s0 = g.loop.front();
  g.tree_path = tree.path(tree.root, s0);
  const auto to_base = develop_path<4>(m, g.tree_path);
  const Mat4 a = to_base.back().linear;
  g.rotation = a * around.back().linear * a.transpose();
  const auto local = local_triangle(m, s0, mc.triangle(tri));
  const auto& c = m.chart(s0);
  const Vec4 e1 = a * (c[local[1]] - c[local[0]]);
  Vec4 e2 = a * (c[local[2]] - c[local[0]]);
  g.fixed_u = e1.normalized();
  e2 -= g.fixed_u.dot(e2) * g.fixed_u;
  g.fixed_v = e2.normalized();
  g.angle = transverse_rotation_angle(g.rotation, g.fixed_u, g.fixed_v);
  g.cone_angle = cone_angle_at_triangle(mc, tri);
  return g;
}

inline HolonomyGenerator holonomy_around_stratum(const MetricComplex4& mc, int tri, const DualTree& tree) {
  if (std::abs(cone_angle_at_triangle(mc, tri) - kTwoPi) <= mc.tolerances().angle) {
    throw Error(ErrorCode::NonSingularTriangle, "triangle " + std::to_string(tri) + " is flat");
  }
  return holonomy_around_triangle(mc, tri, tree);
}

// One generator per codim-2 stratum, looping around its lowest-id triangle.
inline HolonomyRep holonomy_generators(const MetricComplex4& mc, const SingularCensus& census,
                                       const DualTree& tree) {
  HolonomyRep rep;
  rep.base = tree.root;
  for (int k = 0; k < static_cast<int>(census.codim2.size()); ++k) {
    HolonomyGenerator g = holonomy_around_stratum(mc, census.codim2[k].triangles.front(), tree);
    g.stratum = k;
    rep.generators.push_back(std::move(g));
  }
  return rep;
}

struct UnitaryCheck {
  bool unitary = false;
  AntisymForm witness;  // first-kind complex structure commuting with every generator
  double residual = 0;  // max entry of g J' - J' g over generators
};

// Searches the first-kind forms for one invariant under every generator; the
// holonomy then lies in the copy of U(2) preserving it.
inline UnitaryCheck is_unitary_holonomy(std::span<const Mat4> gens, double tol = kDefaultOrthTol) {
  auto residual = [&](const AntisymForm& w) {
    double r = 0;
    const Mat4 wm = w.matrix();
    for (const Mat4& g : gens) r = std::max(r, (g * wm - wm * g).cwiseAbs().maxCoeff());
    return r;
  };
  UnitaryCheck out;
  const AntisymForm j = standard_J();
  if (residual(j) <= tol) {
    out.unitary = true;
    out.witness = j;
    out.residual = residual(j);
    return out;
  }
  // first_kind(x) is linear in x; solve g F(x) g^T = F(x) for all g
  Eigen::MatrixXd sys(6 * gens.size(), 3);
  for (std::size_t k = 0; k < gens.size(); ++k) {
    for (int c = 0; c < 3; ++c) {
      const AntisymForm f = first_kind(Vec3::Unit(c));
      const AntisymForm d = f.conjugated(gens[k]) - f;
      for (int e = 0; e < 6; ++e) sys(6 * k + e, c) = d.entry(e);
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys, Eigen::ComputeFullV);
  const Vec3 x = svd.matrixV().col(2);
  const AntisymForm w = first_kind(x.normalized());
  out.residual = residual(w);
  out.unitary = out.residual <= tol;
  if (out.unitary) out.witness = w;
  return out;
}

inline UnitaryCheck is_unitary_holonomy(const HolonomyRep& rep, double tol = kDefaultOrthTol) {
  const auto mats = rep.matrices();
  return is_unitary_holonomy(std::span<const Mat4>(mats), tol);
}

}  // namespace pl4
