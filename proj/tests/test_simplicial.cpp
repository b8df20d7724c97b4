#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "pl4/geodesic.hpp"
#include "pl4/simplicial.hpp"

namespace {

using pl4::SimplicialMetric;
using Surf = SimplicialMetric<2>;

Surf regular_tetrahedron_surface() {
  std::vector<Surf::Labels> tris = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
  std::vector<Surf::Lengths> len(4, {1.0, 1.0, 1.0});
  return Surf::glue_by_labels(4, tris, len);
}

// Unit cube boundary; vertex id = x + 2y + 4z.
Surf unit_cube_surface() {
  const int quads[6][4] = {{0, 1, 3, 2}, {4, 5, 7, 6}, {0, 1, 5, 4},
                           {2, 3, 7, 6}, {0, 2, 6, 4}, {1, 3, 7, 5}};
  auto pos = [](int v) {
    return Eigen::Vector3d(v & 1, (v >> 1) & 1, (v >> 2) & 1);
  };
  std::vector<Surf::Labels> tris;
  std::vector<Surf::Lengths> len;
  for (const auto& q : quads) {
    for (const Surf::Labels t : {Surf::Labels{q[0], q[1], q[2]}, Surf::Labels{q[0], q[2], q[3]}}) {
      tris.push_back(t);
      len.push_back({(pos(t[0]) - pos(t[1])).norm(), (pos(t[0]) - pos(t[2])).norm(),
                     (pos(t[1]) - pos(t[2])).norm()});
    }
  }
  return Surf::glue_by_labels(8, tris, len);
}

SimplicialMetric<4> regular_4simplex() {
  std::vector<SimplicialMetric<4>::Labels> s = {{0, 1, 2, 3, 4}};
  SimplicialMetric<4>::Lengths l;
  l.fill(1.0);
  return SimplicialMetric<4>::glue_by_labels(5, s, {l});
}

TEST(Simplicial, EdgeIndexOrder) {
  EXPECT_EQ(SimplicialMetric<4>::edge_index(0, 1), 0);
  EXPECT_EQ(SimplicialMetric<4>::edge_index(0, 4), 3);
  EXPECT_EQ(SimplicialMetric<4>::edge_index(1, 2), 4);
  EXPECT_EQ(SimplicialMetric<4>::edge_index(3, 2), 7);
  EXPECT_EQ(SimplicialMetric<4>::edge_index(3, 4), 9);
}

TEST(Simplicial, ChartsReproduceLengths) {
  const auto m = regular_4simplex();
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) {
      EXPECT_NEAR((m.chart(0)[i] - m.chart(0)[j]).norm(), 1.0, 1e-12);
    }
  }
  // sqrt(n + 1) / (n! 2^(n/2)) for the unit regular n-simplex
  EXPECT_NEAR(m.volume(0), std::sqrt(5.0) / 96, 1e-14);
  EXPECT_TRUE(m.nondegenerate(0));
}

TEST(Simplicial, BoundaryFacetsReported) {
  pl4::GluingIssues issues;
  std::vector<SimplicialMetric<4>::Labels> s = {{0, 1, 2, 3, 4}};
  SimplicialMetric<4>::Lengths l;
  l.fill(1.0);
  SimplicialMetric<4>::glue_by_labels(5, s, {l}, &issues);
  EXPECT_EQ(issues.boundary.size(), 5u);
  EXPECT_TRUE(issues.overglued.empty());
}

TEST(Simplicial, GluingMapsAgreeOnSharedVertices) {
  const auto m = unit_cube_surface();
  for (int s = 0; s < m.num_simplices(); ++s) {
    for (int i = 0; i < 3; ++i) {
      const auto nb = m.neighbor(s, i);
      ASSERT_TRUE(nb.valid());
      const auto g = m.gluing_map(s, i);
      for (int k = 0; k < 3; ++k) {
        if (k == i) continue;
        const int j = m.local_index(nb.simplex, m.labels(s)[k]);
        EXPECT_LT((g(m.chart(s)[k]) - m.chart(nb.simplex)[j]).norm(), 1e-12);
      }
      // the opposite vertices land on opposite sides of the shared edge
      const auto n = m.inward_normal(nb.simplex, nb.opposite);
      const auto base = m.chart(nb.simplex)[(nb.opposite + 1) % 3];
      EXPECT_LT(n.dot(g(m.chart(s)[i]) - base), 0);
    }
  }
}

TEST(Simplicial, DevelopBacktrackIsIdentity) {
  const auto m = unit_cube_surface();
  const int t = m.neighbor(0, 0).simplex;
  const std::vector<int> path{0, t, 0};
  const auto pl = pl4::develop_path<2>(m, path);
  EXPECT_LT((pl.back().linear - Eigen::Matrix2d::Identity()).norm(), 1e-12);
  EXPECT_LT(pl.back().translation.norm(), 1e-12);
  EXPECT_THROW(pl4::develop_path<2>(m, std::vector<int>{0, 0}), pl4::Error);
}

TEST(Simplicial, DualTreeSpansAndPathsAreAdjacent) {
  const auto m = unit_cube_surface();
  const auto tree = pl4::dual_tree(m);
  EXPECT_TRUE(tree.connected);
  EXPECT_EQ(tree.num_edges(), 18u);
  for (int a = 0; a < m.num_simplices(); ++a) {
    const auto p = tree.path(0, a);
    EXPECT_EQ(p.front(), 0);
    EXPECT_EQ(p.back(), a);
    for (std::size_t k = 1; k < p.size(); ++k) EXPECT_GE(m.shared_facet(p[k - 1], p[k]), 0);
  }
}

TEST(Simplicial, LoopAroundCubeCornerRotatesByDefect) {
  const auto m = unit_cube_surface();
  // triangles around vertex 0, in cyclic order
  std::vector<int> fan;
  for (int s = 0; s < m.num_simplices(); ++s) {
    if (m.local_index(s, 0) >= 0) fan.push_back(s);
  }
  ASSERT_EQ(fan.size(), 6u);  // three squares, each split at vertex 0
  std::vector<int> loop{fan[0]};
  std::vector<bool> used(m.num_simplices(), false);
  used[fan[0]] = true;
  while (loop.size() < fan.size()) {
    for (int s : fan) {
      if (!used[s] && m.shared_facet(loop.back(), s) >= 0 &&
          m.local_index(s, 0) >= 0) {
        // must share an edge through vertex 0
        const int f = m.shared_facet(loop.back(), s);
        if (m.labels(loop.back())[f] == 0) continue;
        loop.push_back(s);
        used[s] = true;
        break;
      }
    }
  }
  loop.push_back(fan[0]);
  const auto pl = pl4::develop_path<2>(m, loop);
  const double angle = std::atan2(pl.back().linear(1, 0), pl.back().linear(0, 0));
  EXPECT_NEAR(std::abs(angle), std::numbers::pi / 2, 1e-12);
}

double graph_distance(const Surf& m, int k, int from, int to) {
  pl4::RefinedGraph<2> g(m, k);
  const int src = g.vertex_node(from);
  const auto sp = g.dijkstra(std::vector<int>{src});
  return g.straightened(sp, g.vertex_node(to));
}

TEST(Geodesic, TetrahedronVertexDistances) {
  const auto m = regular_tetrahedron_surface();
  EXPECT_NEAR(graph_distance(m, 4, 0, 3), 1.0, 1e-12);
}

TEST(Geodesic, CubeAntipodalCorners) {
  const auto m = unit_cube_surface();
  EXPECT_NEAR(graph_distance(m, 4, 0, 7), std::sqrt(5.0), 1e-9);
  EXPECT_NEAR(graph_distance(m, 4, 0, 3), std::sqrt(2.0), 1e-9);
}

TEST(Geodesic, TetrahedronOppositeEdgeMidpoints) {
  const auto m = regular_tetrahedron_surface();
  pl4::RefinedGraph<2> g(m, 3);
  // midpoint of edge {0,1} in triangle 0 and of edge {2,3} in triangle 2
  const int a = g.add_point(0, Eigen::Vector3d(0.5, 0.5, 0));
  const int b = g.add_point(2, Eigen::Vector3d(0, 0.5, 0.5));
  const auto sp = g.dijkstra(std::vector<int>{a});
  EXPECT_NEAR(g.straightened(sp, b), 1.0, 1e-9);
}

TEST(Geodesic, FreeEndOnPolygon) {
  const auto m = unit_cube_surface();
  pl4::RefinedGraph<2> g(m, 2);
  // triangle of the top face z = 1 containing vertex 7, and a polygon at that corner
  int top = -1;
  for (int s = 0; s < m.num_simplices(); ++s) {
    if (m.local_index(s, 7) >= 0 && m.local_index(s, 4) >= 0 && m.local_index(s, 5) >= 0) top = s;
  }
  ASSERT_GE(top, 0);
  const auto& c = m.chart(top);
  const int i7 = m.local_index(top, 7);
  std::vector<Surf::Point> poly;
  for (int i = 0; i < 3; ++i) poly.push_back(c[i7] + 0.3 * (c[i] - c[i7]));
  const int pid = g.add_polygon(top, poly);
  const int leaf = g.add_point(top, m.barycentric(top, (poly[0] + poly[1] + poly[2]) / 3), pid);
  const auto sp = g.dijkstra(std::vector<int>{leaf});
  // unfolding across the front face: nearest polygon corner sits at (0.7, 1.7)
  EXPECT_NEAR(g.straightened(sp, g.vertex_node(0)), std::sqrt(3.38), 1e-9);
}

}  // namespace
