#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "pl4/split.hpp"

namespace {

constexpr double kPi = std::numbers::pi;

struct Fixture {
  pl4::MetricComplex4 mc;
  pl4::SingularCensus census;
  pl4::DualTree tree;
  pl4::HolonomyRep rep;
  pl4::DistributionPair dist;
};

Fixture make_fixture(const pl4::TriSurface& p, const pl4::TriSurface& q) {
  Fixture f;
  f.mc = pl4::product_complex(p, q);
  f.census = pl4::singular_census(f.mc);
  f.tree = pl4::dual_graph(f.mc);
  f.rep = pl4::holonomy_generators(f.mc, f.census, f.tree);
  f.dist = pl4::extract_distributions(pl4::invariant_forms(f.rep), f.rep, &f.mc, &f.tree);
  return f;
}

const Fixture& cube_cube() {
  static const Fixture f = make_fixture(pl4::cube_surface(), pl4::cube_surface());
  return f;
}

const Fixture& tetra_tetra() {
  static const Fixture f = make_fixture(pl4::tetrahedron_surface(), pl4::tetrahedron_surface());
  return f;
}

const Fixture& box_tetra() {
  static const Fixture f = make_fixture(pl4::box_surface(1, 1, 2), pl4::tetrahedron_surface());
  return f;
}

// Which factor a stratum comes from: vertex ids are p * nQ + q, so a stratum
// {v} x Q has constant p.
bool stratum_is_vertex_times_q(const Fixture& f, int k, int nq) {
  const auto& tri = f.mc.triangle(f.census.codim2[k].triangles.front());
  return tri[0] / nq == tri[1] / nq && tri[1] / nq == tri[2] / nq;
}

TEST(Split, AlignmentFollowsFactors) {
  for (const auto* f : {&cube_cube(), &tetra_tetra()}) {
    const int nq = f == &cube_cube() ? 8 : 4;
    const auto table = pl4::align_strata(f->mc, f->dist, f->census);
    ASSERT_EQ(table.size(), f->census.codim2.size());
    EXPECT_EQ(pl4::count_misaligned(table), 0);
    // one tag for {v} x Q strata, the other for P x {w}; which is which depends on alpha
    std::set<pl4::AlignmentTag> vq, pw;
    for (const auto& e : table) {
      (stratum_is_vertex_times_q(*f, e.stratum, nq) ? vq : pw).insert(e.tag);
      EXPECT_LT(std::min(e.deviation_alpha, e.deviation_beta), 1e-9);
    }
    EXPECT_EQ(vq.size(), 1u);
    EXPECT_EQ(pw.size(), 1u);
    EXPECT_NE(*vq.begin(), *pw.begin());
  }
}

TEST(Split, RotatedPlanesAreMisaligned) {
  const auto& f = cube_cube();
  const auto rotated = pl4::rotate_distributions(f.dist, kPi / 4);
  const auto table = pl4::align_strata(f.mc, rotated, f.census);
  EXPECT_EQ(pl4::count_misaligned(table), static_cast<int>(table.size()));
  for (const auto& e : table) {
    EXPECT_NEAR(e.deviation_alpha, std::sin(kPi / 4), 1e-9);
    EXPECT_NEAR(e.deviation_beta, std::sin(kPi / 4), 1e-9);
  }
}

TEST(Split, Codim4ProductAngles) {
  const struct {
    const Fixture* f;
    std::multiset<double> angles;
  } cases[] = {{&cube_cube(), {1.5 * kPi, 1.5 * kPi}},
               {&tetra_tetra(), {kPi, kPi}},
               {&box_tetra(), {1.5 * kPi, kPi}}};
  for (const auto& c : cases) {
    const auto table = pl4::align_strata(c.f->mc, c.f->dist, c.f->census);
    const auto s4 = pl4::classify_codim4(c.f->mc, c.f->dist, c.f->census, table);
    EXPECT_EQ(s4.size(), c.f->census.codim4.size());
    for (const auto& s : s4) {
      const auto lo = std::min(s.angle1, s.angle2), hi = std::max(s.angle1, s.angle2);
      EXPECT_NEAR(lo, *c.angles.begin(), 1e-9);
      EXPECT_NEAR(hi, *c.angles.rbegin(), 1e-9);
      EXPECT_FALSE(s.family1.empty());
      EXPECT_FALSE(s.family2.empty());
      EXPECT_LT(s.orthogonality, 1e-9);
    }
  }
}

TEST(Split, Codim4RejectsOneSidedVertex) {
  const auto& f = tetra_tetra();
  auto table = pl4::align_strata(f.mc, f.dist, f.census);
  const auto first = table.front().tag;
  for (auto& e : table) e.tag = first;
  EXPECT_THROW(pl4::classify_codim4(f.mc, f.dist, f.census, table), pl4::Error);
  try {
    pl4::classify_codim4(f.mc, f.dist, f.census, table);
  } catch (const pl4::Error& e) {
    EXPECT_EQ(e.code(), pl4::ErrorCode::NotProductLike);
  }
}

TEST(Split, LeafOfCubeTimesCube) {
  const auto& f = cube_cube();
  for (auto kind : {pl4::LeafKind::Alpha, pl4::LeafKind::Beta}) {
    const auto leaf = pl4::trace_leaf(f.mc, f.dist, f.census, kind);
    EXPECT_LE(leaf.visits, leaf.budget);
    EXPECT_NEAR(leaf.total_defect(), 4 * kPi, 1e-6);
    EXPECT_TRUE(pl4::is_nonneg_curved(leaf.surface));
    const auto angles = pl4::cone_angles(leaf.surface);
    ASSERT_EQ(angles.size(), 8u);
    for (double a : angles) EXPECT_NEAR(a, 1.5 * kPi, 1e-7);
    const auto factor = pl4::leaf_factor(leaf);
    EXPECT_TRUE(pl4::surfaces_isometric(factor, pl4::cube_surface()).isometric);
  }
}

TEST(Split, LeavesOfBoxTimesTetra) {
  const auto& f = box_tetra();
  const auto table = pl4::align_strata(f.mc, f.dist, f.census);
  const auto a = pl4::trace_leaf(f.mc, f.dist, f.census, pl4::LeafKind::Alpha);
  const auto b = pl4::trace_leaf(f.mc, f.dist, f.census, pl4::LeafKind::Beta);
  EXPECT_TRUE(pl4::leaf_cones_consistent(a, f.census, table));
  EXPECT_TRUE(pl4::leaf_cones_consistent(b, f.census, table));
  const auto fa = pl4::leaf_factor(a), fb = pl4::leaf_factor(b);
  const auto box = pl4::box_surface(1, 1, 2), tet = pl4::tetrahedron_surface();
  const bool straight = pl4::surfaces_isometric(fa, box).isometric && pl4::surfaces_isometric(fb, tet).isometric;
  const bool swapped = pl4::surfaces_isometric(fa, tet).isometric && pl4::surfaces_isometric(fb, box).isometric;
  EXPECT_TRUE(straight || swapped);
}

TEST(Split, LeavesFromDifferentSeedsAreIsometric) {
  const auto& f = tetra_tetra();
  const auto seeds = pl4::sample_seeds(f.mc, 5, 7);
  std::vector<pl4::TriSurface> leaves;
  for (const auto& s : seeds) {
    const auto leaf = pl4::trace_leaf(f.mc, f.dist, f.census, pl4::LeafKind::Beta, s);
    EXPECT_NEAR(leaf.total_defect(), 4 * kPi, 1e-6);
    leaves.push_back(pl4::leaf_factor(leaf));
  }
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    for (std::size_t j = i + 1; j < leaves.size(); ++j) {
      EXPECT_TRUE(pl4::surfaces_isometric(leaves[i], leaves[j]).isometric) << i << " " << j;
    }
  }
}

TEST(Split, SingularSeedRejected) {
  const auto& f = tetra_tetra();
  const int tri = f.census.codim2.front().triangles.front();
  const int s = f.mc.triangle_star(tri).front();
  const auto local = pl4::local_triangle(f.mc.metric(), s, f.mc.triangle(tri));
  pl4::LeafSeed seed;
  seed.simplex = s;
  seed.bary.setZero();
  for (int i : local) seed.bary[i] = 1.0 / 3;
  try {
    pl4::trace_leaf(f.mc, f.dist, f.census, pl4::LeafKind::Alpha, seed);
    FAIL() << "expected SeedSingular";
  } catch (const pl4::Error& e) {
    EXPECT_EQ(e.code(), pl4::ErrorCode::SeedSingular);
  }
}

TEST(Split, TinyBudgetDoesNotClose) {
  const auto& f = tetra_tetra();
  pl4::LeafTraceOptions opt;
  opt.budget_multiplier = 0;
  try {
    pl4::trace_leaf(f.mc, f.dist, f.census, pl4::LeafKind::Alpha, {}, opt);
    FAIL() << "expected NonClosingLeaf";
  } catch (const pl4::Error& e) {
    EXPECT_EQ(e.code(), pl4::ErrorCode::NonClosingLeaf);
  }
}

TEST(Split, UniformRadii) {
  // nearest disjoint strata are {v} x Q and {v'} x Q for a unit edge vv' (or the mirror)
  for (const auto* f : {&cube_cube(), &tetra_tetra(), &box_tetra()}) {
    const auto r = pl4::uniform_radii(f->mc, f->census);
    EXPECT_TRUE(r.from_strata);
    EXPECT_NEAR(r.delta, 0.5, 1e-9);
    EXPECT_NEAR(r.epsilon, r.delta / 3, 1e-15);
  }
  // shortest box edge 2: nearest disjoint strata are 2 apart
  const auto g = make_fixture(pl4::box_surface(2, 2, 3), pl4::box_surface(2, 3, 3));
  EXPECT_NEAR(pl4::uniform_radii(g.mc, g.census).delta, 1.0, 1e-9);
}

std::vector<std::string> stage_names(const pl4::SplitReport& r) {
  std::vector<std::string> out;
  for (const auto& s : r.stages) out.push_back(s.name);
  return out;
}

TEST(Decompose, CubeTimesCubeRoundTrip) {
  const auto r = pl4::decompose(cube_cube().mc);
  ASSERT_TRUE(r.success()) << r.failed_stage << ": " << r.message;
  EXPECT_EQ(r.exit_code(), 0);
  const std::vector<std::string> expected{"validate",        "curvature",        "census",
                                          "holonomy",        "betti_check",      "distributions",
                                          "align_strata",    "classify_codim4",  "trace_leaf_alpha",
                                          "trace_leaf_beta", "verify_product"};
  EXPECT_EQ(stage_names(r), expected);
  EXPECT_FALSE(r.caveat);
  EXPECT_EQ(r.euler, 4);
  ASSERT_TRUE(r.factor_alpha && r.factor_beta && r.verification);
  EXPECT_TRUE(pl4::surfaces_isometric(*r.factor_alpha, pl4::cube_surface()).isometric);
  EXPECT_TRUE(pl4::surfaces_isometric(*r.factor_beta, pl4::cube_surface()).isometric);
  EXPECT_NEAR(r.factor_alpha->area() * r.factor_beta->area(), cube_cube().mc.total_volume(), 1e-9);
  EXPECT_EQ(r.verification->spectrum_size, 64 * 63 / 2);
  EXPECT_LT(r.verification->spectrum_max_rel, 1e-9);
  ASSERT_TRUE(r.verification->leaf_distances);
  EXPECT_LE(r.verification->leaf_distances->max_deviation, r.options.distance_tol);
}

TEST(Decompose, BoxTimesTetraFactors) {
  const auto r = pl4::decompose(box_tetra().mc);
  ASSERT_TRUE(r.success()) << r.failed_stage << ": " << r.message;
  const auto box = pl4::box_surface(1, 1, 2), tet = pl4::tetrahedron_surface();
  const auto& a = *r.factor_alpha;
  const auto& b = *r.factor_beta;
  const bool straight = pl4::surfaces_isometric(a, box).isometric && pl4::surfaces_isometric(b, tet).isometric;
  const bool swapped = pl4::surfaces_isometric(a, tet).isometric && pl4::surfaces_isometric(b, box).isometric;
  EXPECT_TRUE(straight || swapped);
}

TEST(Verify, WrongFactorsFailCensus) {
  const auto& f = cube_cube();
  const auto v = pl4::verify_product(f.mc, pl4::cube_surface(), pl4::tetrahedron_surface());
  EXPECT_FALSE(v.census_match);
  EXPECT_FALSE(v.census_detail.empty());
  EXPECT_FALSE(v.passed);
}

TEST(Verify, FactorOrderDoesNotMatter) {
  const auto& f = box_tetra();
  const auto ld = pl4::leaf_distance_consistency(f.mc, f.dist, f.census);
  const auto box = pl4::box_surface(1, 1, 2), tet = pl4::tetrahedron_surface();
  for (const auto& [a, b] : {std::pair{box, tet}, std::pair{tet, box}}) {
    const auto v = pl4::verify_product(f.mc, a, b, {}, ld);
    EXPECT_TRUE(v.census_match) << v.census_detail;
    EXPECT_TRUE(v.volume_match);
    EXPECT_TRUE(v.spectrum_match) << v.spectrum_max_rel;
    EXPECT_TRUE(v.passed);
  }
}

TEST(Verify, WithoutLeafDistancesNotPassed) {
  const auto& f = tetra_tetra();
  const auto v = pl4::verify_product(f.mc, pl4::tetrahedron_surface(), pl4::tetrahedron_surface());
  EXPECT_TRUE(v.census_match && v.volume_match && v.spectrum_match);
  EXPECT_FALSE(v.leaf_consistent);
  EXPECT_FALSE(v.passed);
}

TEST(Verify, ScaledFactorFailsVolume) {
  const auto& f = tetra_tetra();
  const auto ld = pl4::leaf_distance_consistency(f.mc, f.dist, f.census);
  const auto tet = pl4::tetrahedron_surface();
  auto lengths = tet.edge_lengths();
  for (auto& [e, l] : lengths) l *= 1.1;
  const pl4::TriSurface big(tet.num_vertices(), tet.triangles(), lengths);
  const auto v = pl4::verify_product(f.mc, big, tet, {}, ld);
  EXPECT_TRUE(v.census_match);
  EXPECT_NEAR(v.volume_product / v.volume_m, 1.21, 1e-9);
  EXPECT_FALSE(v.volume_match);
  EXPECT_FALSE(v.spectrum_match);
  EXPECT_FALSE(v.passed);
}

TEST(LeafDistances, ConstantAlongLeavesOfProduct) {
  for (const auto* f : {&tetra_tetra(), &box_tetra()}) {
    const auto ld = pl4::leaf_distance_consistency(f->mc, f->dist, f->census);
    ASSERT_EQ(ld.samples.size(), 4u);
    EXPECT_TRUE(ld.passed) << ld.max_deviation;
    for (const auto& s : ld.samples) {
      EXPECT_GE(s.d_x, 0);
      EXPECT_LE(s.deviation, ld.tolerance);
    }
  }
}

// Unit-edge tetrahedron: every pair of vertices is at distance 1, so pairs of
// product vertices sit at 1 (one factor moves) or sqrt 2 (both move).
TEST(Distances, TetraSquaredSpectrumIsExact) {
  const auto& f = tetra_tetra();
  const auto spec = pl4::codim4_distance_spectrum(f.mc, f.census, 3);
  ASSERT_EQ(spec.size(), 120u);
  for (std::size_t i = 0; i < spec.size(); ++i) EXPECT_NEAR(spec[i], i < 48 ? 1.0 : std::sqrt(2.0), 1e-9) << i;
}

// Unit cube: edge 1 (12 pairs), face diagonal sqrt 2 (12), antipodal sqrt 5 (4).
TEST(Distances, CubeVertexDistances) {
  const auto cube = pl4::cube_surface();
  std::vector<int> all(8);
  for (int i = 0; i < 8; ++i) all[i] = i;
  const auto d = pl4::vertex_distances(cube, all, 8);
  std::vector<double> pairs;
  for (int i = 0; i < 8; ++i) {
    for (int j = i + 1; j < 8; ++j) pairs.push_back(d(i, j));
  }
  std::sort(pairs.begin(), pairs.end());
  for (int i = 0; i < 28; ++i) EXPECT_NEAR(pairs[i], i < 12 ? 1.0 : i < 24 ? std::sqrt(2.0) : std::sqrt(5.0), 1e-9);
  const auto prod = pl4::product_distance_spectrum(cube, pl4::tetrahedron_surface(), 1e-7, 8);
  ASSERT_EQ(prod.size(), 32u * 31 / 2);
  EXPECT_NEAR(prod.front(), 1.0, 1e-9);
  EXPECT_NEAR(prod.back(), std::sqrt(6.0), 1e-9);
}

TEST(LeafDistances, ZeroOnTheLeafItself) {
  const auto& f = box_tetra();
  const auto leaf = pl4::trace_leaf(f.mc, f.dist, f.census, pl4::LeafKind::Beta);
  pl4::LeafDistanceField field(f.mc, leaf, 3);
  for (std::size_t i = 0; i < leaf.polygons.size(); i += 7) {
    const auto& p = leaf.polygons[i];
    pl4::Vec4 c = pl4::Vec4::Zero();
    for (const auto& x : p.points) c += x;
    c /= static_cast<double>(p.points.size());
    const int q = field.add_query(p.simplex, f.mc.metric().barycentric(p.simplex, 0.5 * (c + p.points.front())));
    EXPECT_NEAR(field.distance(q), 0.0, 1e-9) << i;
  }
}

TEST(Decompose, FlatTorusStopsAtBettiCheck) {
  const auto r = pl4::decompose(pl4::flat_torus_complex(3));
  EXPECT_FALSE(r.success());
  EXPECT_EQ(r.failed_stage, "betti_check");
  ASSERT_TRUE(r.forms);
  EXPECT_EQ(r.forms->dim, 6);
  EXPECT_TRUE(r.caveat);
  EXPECT_EQ(r.exit_code(), pl4::kExitHypothesis);
}

TEST(Decompose, SaddleJoinStopsAtCurvature) {
  const auto r = pl4::decompose(pl4::saddle_join_complex());
  EXPECT_EQ(r.failed_stage, "curvature");
  EXPECT_EQ(r.failure_code, pl4::ErrorCode::NegativeCurvature);
  EXPECT_EQ(r.exit_code(), pl4::kExitHypothesis);
}

TEST(Decompose, RotatedDistributionsStopAtAlignment) {
  const auto& f = cube_cube();
  const auto r = pl4::decompose_with_distributions(f.mc, pl4::rotate_distributions(f.dist, kPi / 4));
  EXPECT_EQ(r.failed_stage, "align_strata");
  EXPECT_EQ(r.failure_code, pl4::ErrorCode::Misaligned);
  EXPECT_EQ(r.exit_code(), pl4::kExitHypothesis);
  EXPECT_EQ(stage_names(r).back(), "align_strata");
}

TEST(Decompose, RotatingByZeroChangesNothing) {
  const auto& f = tetra_tetra();
  const auto r = pl4::decompose_with_distributions(f.mc, pl4::rotate_distributions(f.dist, 0));
  EXPECT_TRUE(r.success()) << r.failed_stage << ": " << r.message;
}

}  // namespace
