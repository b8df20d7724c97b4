#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "pl4/plcomplex.hpp"

namespace {

constexpr double kPi = std::numbers::pi;

const pl4::MetricComplex4& tetra_tetra() {
  static const auto mc = pl4::product_complex(pl4::tetrahedron_surface(), pl4::tetrahedron_surface());
  return mc;
}

const pl4::MetricComplex4& cube_cube() {
  static const auto mc = pl4::product_complex(pl4::cube_surface(), pl4::cube_surface());
  return mc;
}

const pl4::MetricComplex4& flat_torus() {
  static const auto mc = pl4::flat_torus_complex();
  return mc;
}

TEST(PlComplex, ProductCounts) {
  EXPECT_EQ(tetra_tetra().num_simplices(), 96);
  EXPECT_EQ(cube_cube().num_simplices(), 864);
  EXPECT_TRUE(pl4::validate(tetra_tetra()).valid());
  EXPECT_TRUE(pl4::validate(cube_cube()).valid());
  EXPECT_EQ(flat_torus().num_simplices(), 81 * 24);
}

TEST(PlComplex, CayleyMengerPositivity) {
  for (const auto* mc : {&tetra_tetra(), &cube_cube(), &flat_torus()}) {
    for (int s = 0; s < mc->num_simplices(); ++s) EXPECT_TRUE(mc->metric().nondegenerate(s));
  }
}

TEST(PlComplex, VolumesMatchProductAreas) {
  const double tet_area = std::sqrt(3.0);
  EXPECT_NEAR(tetra_tetra().total_volume(), tet_area * tet_area, 1e-12);
  EXPECT_NEAR(cube_cube().total_volume(), 36.0, 1e-11);
  EXPECT_NEAR(flat_torus().total_volume(), 81.0, 1e-10);
}

TEST(PlComplex, ValidationFindsBoundaryAndMismatch) {
  std::stringstream buf;
  pl4::write_complex(buf, tetra_tetra());
  std::string text = buf.str();

  // drop the last gluing record -> two boundary faces
  {
    std::string t = text;
    const auto last = t.rfind("\ng ");
    t.erase(last + 1);
    const auto hdr = t.find("gluings ");
    const auto eol = t.find('\n', hdr);
    const int g = std::stoi(t.substr(hdr + 8, eol - hdr - 8));
    t.replace(hdr, eol - hdr, "gluings " + std::to_string(g - 1));
    std::istringstream in(t);
    const auto r = pl4::read_complex_unchecked(in);
    ASSERT_FALSE(r.report.valid());
    EXPECT_EQ(r.report.issues.size(), 2u);
    EXPECT_EQ(r.report.issues[0].kind, pl4::IssueKind::BoundaryFace);
    std::istringstream in2(t);
    EXPECT_THROW(pl4::read_complex(in2), pl4::Error);
  }
  // perturb one edge length of simplex 0 -> metric mismatch on its glued faces
  {
    const pl4::Metric4& m = tetra_tetra().metric();
    std::vector<pl4::Metric4::Labels> labels;
    std::vector<pl4::Metric4::Lengths> lengths;
    for (int s = 0; s < m.num_simplices(); ++s) {
      labels.push_back(m.labels(s));
      lengths.push_back(m.lengths(s));
    }
    lengths[0][0] *= 1.01;
    pl4::MetricComplex4 bad(pl4::Metric4::glue_by_labels(m.num_vertices(), labels, lengths));
    const auto r = pl4::validate(bad);
    ASSERT_FALSE(r.valid());
    for (const auto& i : r.issues) EXPECT_EQ(i.kind, pl4::IssueKind::MetricMismatch);
  }
}

TEST(PlComplex, FlatTorusConeAnglesAreTwoPi) {
  const auto& mc = flat_torus();
  for (int t = 0; t < mc.num_triangles(); ++t) {
    EXPECT_NEAR(pl4::cone_angle_at_triangle(mc, t), 2 * kPi, 1e-9);
  }
  EXPECT_TRUE(pl4::singular_census(mc).empty());
  const auto c = pl4::check_nonneg_curvature(mc);
  EXPECT_TRUE(c.nonneg);
  EXPECT_NEAR(c.worst_angle, 2 * kPi, 1e-9);
}

TEST(PlComplex, ProductConeAnglesMatchFactorTotalAngles) {
  const int nq = 8;
  const auto& mc = cube_cube();
  for (int t = 0; t < mc.num_triangles(); ++t) {
    const auto& l = mc.triangle(t);
    const bool same_p = l[0] / nq == l[1] / nq && l[1] / nq == l[2] / nq;
    const bool same_q = l[0] % nq == l[1] % nq && l[1] % nq == l[2] % nq;
    const double expected = same_p || same_q ? 3 * kPi / 2 : 2 * kPi;
    EXPECT_NEAR(pl4::cone_angle_at_triangle(mc, t), expected, 1e-9) << t;
  }
  // vertex x face examples
  EXPECT_NEAR(pl4::cone_angle_at_triangle(mc, pl4::TriangleLabels{0 * 8 + 0, 0 * 8 + 1, 0 * 8 + 3}), 3 * kPi / 2, 1e-12);
  EXPECT_NEAR(pl4::cone_angle_at_triangle(tetra_tetra(), pl4::TriangleLabels{0, 1, 2}), kPi, 1e-12);
}

TEST(PlComplex, CensusOfProducts) {
  const auto cc = pl4::singular_census(cube_cube());
  EXPECT_EQ(cc.codim2.size(), 16u);
  EXPECT_EQ(cc.codim4.size(), 64u);
  EXPECT_TRUE(cc.codim3_violations.empty());
  for (const auto& s : cc.codim2) {
    EXPECT_NEAR(s.cone_angle, 3 * kPi / 2, 1e-9);
    EXPECT_EQ(s.triangles.size(), 12u);
  }
  const auto tt = pl4::singular_census(tetra_tetra());
  EXPECT_EQ(tt.codim2.size(), 8u);
  EXPECT_EQ(tt.codim4.size(), 16u);
  EXPECT_TRUE(tt.codim3_violations.empty());
  for (const auto& s : tt.codim2) EXPECT_NEAR(s.cone_angle, kPi, 1e-9);
}

TEST(PlComplex, CensusAgreesUnderSwap) {
  const auto box = pl4::box_surface(1, 1, 2);
  const auto tet = pl4::tetrahedron_surface();
  const auto a = pl4::singular_census(pl4::product_complex(box, tet));
  const auto b = pl4::singular_census(pl4::product_complex(tet, box));
  EXPECT_EQ(a.codim2.size(), b.codim2.size());
  EXPECT_EQ(a.codim4.size(), b.codim4.size());
  std::vector<double> x, y;
  for (const auto& s : a.codim2) x.push_back(s.cone_angle);
  for (const auto& s : b.codim2) y.push_back(s.cone_angle);
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(x[i], y[i], 1e-9);
}

TEST(PlComplex, NegativeCurvatureJoinRejected) {
  const auto mc = pl4::saddle_join_complex();
  EXPECT_TRUE(pl4::validate(mc).valid());
  const auto c = pl4::check_nonneg_curvature(mc);
  EXPECT_FALSE(c.nonneg);
  EXPECT_NEAR(c.worst_angle, 5 * std::acos(0.25), 1e-12);
}

TEST(PlComplex, DualGraph) {
  const auto tt = pl4::dual_graph(tetra_tetra());
  EXPECT_TRUE(tt.connected);
  EXPECT_EQ(tt.parent.size(), 96u);
  EXPECT_EQ(tt.num_edges(), 96u * 5 / 2);
  const auto cc = pl4::dual_graph(cube_cube());
  EXPECT_TRUE(cc.connected);
  EXPECT_EQ(cc.parent.size(), 864u);
  // a single chart
  std::vector<pl4::Metric4::Labels> one = {{0, 1, 2, 3, 4}};
  pl4::Metric4::Lengths l;
  l.fill(1.0);
  const pl4::MetricComplex4 single(pl4::Metric4::glue_by_labels(5, one, {l}));
  EXPECT_EQ(pl4::dual_graph(single).order.size(), 1u);
  // deterministic
  EXPECT_EQ(pl4::dual_graph(cube_cube()).parent, cc.parent);
}

TEST(PlComplex, FileRoundTrip) {
  std::stringstream a;
  pl4::write_complex(a, tetra_tetra());
  const auto back = pl4::read_complex(a);
  std::stringstream b;
  pl4::write_complex(b, back);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(back.num_simplices(), 96);
}

}  // namespace
