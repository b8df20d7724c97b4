#include <gtest/gtest.h>

#include <random>

#include "pl4/tensor4.hpp"
#include "test_util.hpp"

using namespace pl4;
using pl4::testing::random_rotation;
using pl4::testing::random_unit3;

namespace {

const AntisymForm kBlock21{2, 0, 0, 0, 0, 1};
const AntisymForm kK = second_kind(1, 0, 0);

}  // namespace

TEST(EigenPairs, Examples) {
  auto j = eigen_pairs(standard_J());
  EXPECT_NEAR(j.a, 1, 1e-15);
  EXPECT_NEAR(j.b, 1, 1e-15);

  auto z = eigen_pairs(AntisymForm{});
  EXPECT_EQ(z.a, 0);
  EXPECT_EQ(z.b, 0);

  auto blk = eigen_pairs(kBlock21);
  EXPECT_NEAR(blk.a, 2, 1e-15);
  EXPECT_NEAR(blk.b, 1, 1e-15);
}

TEST(EigenPairs, MatchesGeneralEigensolverOnRandomForms) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 500; ++trial) {
    AntisymForm w(n(rng), n(rng), n(rng), n(rng), n(rng), n(rng));
    const auto p = eigen_pairs(w);
    const auto mags = pl4::testing::eigen_magnitudes(w.matrix());
    EXPECT_NEAR(p.a, mags[0], 1e-9);
    EXPECT_NEAR(p.b, mags[3], 1e-9);
    EXPECT_GE(p.a, p.b);
    EXPECT_NEAR(p.a * p.a + p.b * p.b, 0.5 * w.norm() * w.norm(), 1e-9);
    EXPECT_NEAR(p.a * p.b, std::abs(w.pfaffian()), 1e-9);
  }
}

TEST(ScalarOrthogonal, Examples) {
  EXPECT_TRUE(is_scalar_multiple_of_orthogonal(standard_J().matrix()).holds);
  EXPECT_FALSE(is_scalar_multiple_of_orthogonal(kBlock21.matrix()).holds);
  auto zero = is_scalar_multiple_of_orthogonal(Mat4::Zero());
  EXPECT_TRUE(zero.holds);
  EXPECT_EQ(zero.scale, 0);
}

TEST(ScalarOrthogonal, AgreesWithRepeatedEigenvalues) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    AntisymForm w(n(rng), n(rng), n(rng), n(rng), n(rng), n(rng));
    if (trial % 2 == 0) w = n(rng) * first_kind(random_unit3(rng));
    const auto p = eigen_pairs(w);
    const bool repeated = p.a - p.b <= 1e-9 * std::max(1.0, p.a);
    EXPECT_EQ(is_scalar_multiple_of_orthogonal(w.matrix(), 1e-9).holds, repeated);
  }
}

TEST(ClassifyKind, Examples) {
  auto j = classify_kind(standard_J().matrix());
  EXPECT_EQ(j.tag, Kind::FirstKind);
  EXPECT_EQ(j.a, 1);
  EXPECT_EQ(j.b, 0);
  EXPECT_EQ(j.c, 0);

  auto k = classify_kind(kK.matrix());
  EXPECT_EQ(k.tag, Kind::SecondKind);
  EXPECT_EQ(k.a, 1);

  EXPECT_EQ(classify_kind(kBlock21.matrix()).tag, Kind::NotApplicable);
}

TEST(ClassifyKind, RejectsMalformedOrthogonalAntisymmetric) {
  // Orthogonal but not antisymmetric.
  EXPECT_EQ(classify_kind(Mat4::Identity()).tag, Kind::NotApplicable);
  // Antisymmetric but not orthogonal.
  EXPECT_EQ(classify_kind((2.0 * standard_J()).matrix()).tag, Kind::NotApplicable);
}

TEST(ClassifyKind, RandomConjugatesAreUniqueAndPfaffianSigned) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const Mat4 g = random_rotation(rng);
    const bool first = trial % 2 == 0;
    const AntisymForm w = (first ? standard_J() : kK).conjugated(g);
    const auto cls = classify_kind(w.matrix());
    ASSERT_NE(cls.tag, Kind::NotApplicable);
    EXPECT_EQ(cls.tag, first ? Kind::FirstKind : Kind::SecondKind);
    EXPECT_NEAR(cls.a * cls.a + cls.b * cls.b + cls.c * cls.c, 1, 1e-9);
    EXPECT_NEAR(w.pfaffian(), first ? 1.0 : -1.0, 1e-9);
  }
}

TEST(CombineDistinct, FirstAndSecondKind) {
  auto combo = combine_distinct(standard_J(), kK);
  ASSERT_TRUE(combo.has_value());
  EXPECT_EQ(combo->lambda, 1);
  EXPECT_EQ(combo->mu, 1);
  EXPECT_LT(combo->form.max_abs_diff(AntisymForm{2, 0, 0, 0, 0, 0}), 1e-15);
  EXPECT_NEAR(combo->pair.a, 2, 1e-15);
  EXPECT_NEAR(combo->pair.b, 0, 1e-15);
}

TEST(CombineDistinct, TwoFirstKindHaveNoDistinctCombination) {
  EXPECT_FALSE(combine_distinct(standard_J(), first_kind(0, 1, 0)).has_value());
}

TEST(CombineDistinct, RejectsDependentForms) {
  try {
    combine_distinct(standard_J(), 2.0 * standard_J());
    FAIL() << "expected precondition violation";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PreconditionViolation);
  }
}

TEST(CombineDistinct, MixedKindEigenvaluesFollowSumAndDifference) {
  // First- and second-kind matrices commute and square to -I, so
  // (lB1 + mB2)^2 = -(l^2 + m^2) I - 2 l m B1 B2 with B1 B2 symmetric orthogonal
  // of eigenvalues +-1: eigenvalue magnitudes are |l + m| and |l - m|.
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const Mat4 g = random_rotation(rng);
    const AntisymForm b1 = first_kind(random_unit3(rng)).conjugated(g);
    const AntisymForm b2 = second_kind(random_unit3(rng)).conjugated(g);
    const Mat4 prod = b1.matrix() * b2.matrix();
    EXPECT_LT((prod - b2.matrix() * b1.matrix()).cwiseAbs().maxCoeff(), 1e-12);
    const double l = u(rng), m = u(rng);
    const auto p = eigen_pairs(l * b1 + m * b2);
    const double hi = std::max(std::abs(l + m), std::abs(l - m));
    const double lo = std::min(std::abs(l + m), std::abs(l - m));
    EXPECT_NEAR(p.a, hi, 1e-9);
    EXPECT_NEAR(p.b, lo, 1e-9);
  }
}

TEST(EigenPlanes, BlockForm) {
  auto [pa, pb] = eigen_planes(kBlock21);
  Mat4 e12 = Mat4::Zero();
  e12(0, 0) = e12(1, 1) = 1;
  EXPECT_LT((pa.projector() - e12).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(pa.bivector().max_abs_diff(AntisymForm{1, 0, 0, 0, 0, 0}), 1e-12);
  EXPECT_LT(pb.bivector().max_abs_diff(AntisymForm{0, 0, 0, 0, 0, 1}), 1e-12);
}

TEST(EigenPlanes, ZeroSecondEigenvalueTakesComplementOrientation) {
  auto [pa, pb] = eigen_planes(standard_J() + kK);
  EXPECT_LT(pa.bivector().max_abs_diff(AntisymForm{1, 0, 0, 0, 0, 0}), 1e-12);
  EXPECT_LT(pb.bivector().max_abs_diff(AntisymForm{0, 0, 0, 0, 0, 1}), 1e-12);
}

TEST(EigenPlanes, RepeatedEigenvaluesRejected) {
  try {
    eigen_planes(standard_J());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RepeatedEigenvalues);
  }
}

TEST(EigenPlanes, BasisIndependentAndComplementary) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const Mat4 g = random_rotation(rng);
    const double a = 1 + std::abs(n(rng)), b = std::abs(n(rng)) * 0.5;
    const AntisymForm w = AntisymForm{a, 0, 0, 0, 0, b}.conjugated(g);
    auto [pa, pb] = eigen_planes(w);
    // Projectors agree with the rotated coordinate planes regardless of the
    // internal column choice.
    Mat4 e12 = Mat4::Zero();
    e12(0, 0) = e12(1, 1) = 1;
    EXPECT_LT((pa.projector() - g * e12 * g.transpose()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((pa.projector() + pb.projector() - Mat4::Identity()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((pa.projector() * pb.projector()).cwiseAbs().maxCoeff(), 1e-9);
    // w restricted to the first plane is +a times its area form.
    EXPECT_NEAR(pa.u().dot(w.matrix() * pa.v()), a, 1e-9);
    Mat4 frame;
    frame << pa.u(), pa.v(), pb.u(), pb.v();
    EXPECT_NEAR(frame.determinant(), 1, 1e-9);
    // Permuting coordinates and undoing it gives the same oriented planes.
    Mat4 perm = Mat4::Zero();
    perm(0, 2) = perm(2, 0) = perm(1, 3) = perm(3, 1) = 1;  // even permutation
    auto [qa, qb] = eigen_planes(w.conjugated(perm));
    EXPECT_TRUE(qa.transformed(perm.transpose()).same_as(pa, 1e-9));
    EXPECT_TRUE(qb.transformed(perm.transpose()).same_as(pb, 1e-9));
  }
}

TEST(Commutant, Dimensions) {
  std::vector<Mat4> none;
  EXPECT_EQ(commutant_in_O4(none).dimension, 16);
  std::vector<Mat4> j = {standard_J().matrix()};
  EXPECT_EQ(commutant_in_O4(j).dimension, 8);
  std::vector<Mat4> jc = {standard_J().matrix(), first_kind(0, 1, 0).matrix()};
  auto c = commutant_in_O4(jc);
  EXPECT_EQ(c.dimension, 4);
  for (const Mat4& x : c.basis) {
    EXPECT_LT((x * jc[0] - jc[0] * x).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((x * jc[1] - jc[1] * x).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Commutant, SU2FormsCommuteWithFirstKindOnly) {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::complex<double> z1(n(rng), n(rng)), z2(n(rng), n(rng));
    const double s = std::sqrt(std::norm(z1) + std::norm(z2));
    const SU2Form su{z1 / s, z2 / s};
    const Mat4 a = su.matrix();
    EXPECT_TRUE(is_orthogonal(a, 1e-12));
    EXPECT_NEAR(a.determinant(), 1, 1e-12);
    const Mat4 c = first_kind(random_unit3(rng)).matrix();
    EXPECT_LT((a * c - c * a).cwiseAbs().maxCoeff(), 1e-9);
    // A generic second-kind matrix does not commute.
    const Mat4 k = second_kind(random_unit3(rng)).matrix();
    EXPECT_GT((a * k - k * a).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(ThirdFormWitness, Examples) {
  auto w3 = third_form_witness(standard_J(), first_kind(0, 1, 0));
  EXPECT_NEAR(std::abs(w3.self_dual_part()[2]), 1, 1e-12);
  EXPECT_NEAR(w3.self_dual_part().head<2>().norm(), 0, 1e-12);
  EXPECT_NEAR(w3.anti_self_dual_part().norm(), 0, 1e-12);

  auto w3b = third_form_witness(standard_J(), first_kind(0, 0, 1));
  EXPECT_NEAR(std::abs(w3b.self_dual_part()[1]), 1, 1e-12);

  try {
    third_form_witness(standard_J(), kK);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotBothFirstKind);
  }
  try {
    third_form_witness(standard_J(), -1.0 * standard_J());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateFirstKindPair);
  }
}

TEST(ThirdFormWitness, IndependentAndCommutesWithSharedCommutant) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 v1 = random_unit3(rng), v2 = random_unit3(rng);
    const AntisymForm w1 = 1.7 * first_kind(v1), w2 = 0.3 * first_kind(v2);
    const AntisymForm w3 = third_form_witness(w1, w2);
    EXPECT_EQ(classify_kind(w3.matrix(), 1e-9).tag, Kind::FirstKind);
    Eigen::Matrix3d m;
    m << v1, v2, w3.self_dual_part();
    EXPECT_GT(std::abs(m.determinant()), 1e-6);
    std::complex<double> z1(n(rng), n(rng)), z2(n(rng), n(rng));
    const double s = std::sqrt(std::norm(z1) + std::norm(z2));
    const Mat4 a = SU2Form{z1 / s, z2 / s}.matrix();
    EXPECT_LT((a * w3.matrix() - w3.matrix() * a).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(NormalizingFrame, MapsFirstKindToJ) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 50; ++trial) {
    const AntisymForm w = first_kind(random_unit3(rng));
    const Mat4 g = normalizing_frame(w);
    EXPECT_TRUE(is_orthogonal(g, 1e-12));
    EXPECT_NEAR(g.determinant(), 1, 1e-12);
    EXPECT_LT(w.conjugated(g.transpose()).max_abs_diff(standard_J()), 1e-12);
  }
}
