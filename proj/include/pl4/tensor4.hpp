#pragma once

// Linear algebra on R^4 and on antisymmetric 4x4 matrices (2-forms).
//
// Conventions: a 2-form w acts as w(x, y) = x^T W y. The six independent
// entries are stored as (a12, a13, a14, a23, a24, a34), 1-based.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "pl4/error.hpp"

namespace pl4 {

using Mat4 = Eigen::Matrix4d;
using Vec4 = Eigen::Vector4d;
using Vec3 = Eigen::Vector3d;

inline constexpr double kDefaultOrthTol = 1e-9;
inline constexpr double kSeparationTol = 1e-6;

inline bool is_orthogonal(const Mat4& m, double tol = kDefaultOrthTol) {
  return ((m.transpose() * m) - Mat4::Identity()).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_antisymmetric(const Mat4& m, double tol = kDefaultOrthTol) {
  return (m + m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

class AntisymForm {
 public:
  static constexpr std::array<std::pair<int, int>, 6> kIndex = {
      std::pair{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};

  AntisymForm() { e_.fill(0.0); }
  explicit AntisymForm(const std::array<double, 6>& entries) : e_(entries) {}
  AntisymForm(double a12, double a13, double a14, double a23, double a24, double a34)
      : e_{a12, a13, a14, a23, a24, a34} {}

  // Reads the strict upper triangle; the lower triangle is ignored.
  static AntisymForm from_matrix(const Mat4& m) {
    AntisymForm f;
    for (int k = 0; k < 6; ++k) f.e_[k] = m(kIndex[k].first, kIndex[k].second);
    return f;
  }

  // The oriented plane u ^ v as a form: entries u_i v_j - u_j v_i.
  static AntisymForm wedge(const Vec4& u, const Vec4& v) {
    AntisymForm f;
    for (int k = 0; k < 6; ++k) {
      auto [i, j] = kIndex[k];
      f.e_[k] = u[i] * v[j] - u[j] * v[i];
    }
    return f;
  }

  Mat4 matrix() const {
    Mat4 m = Mat4::Zero();
    for (int k = 0; k < 6; ++k) {
      auto [i, j] = kIndex[k];
      m(i, j) = e_[k];
      m(j, i) = -e_[k];
    }
    return m;
  }

  double operator()(int i, int j) const { return matrix()(i, j); }
  const std::array<double, 6>& entries() const { return e_; }
  double entry(int k) const { return e_[k]; }

  double a12() const { return e_[0]; }
  double a13() const { return e_[1]; }
  double a14() const { return e_[2]; }
  double a23() const { return e_[3]; }
  double a24() const { return e_[4]; }
  double a34() const { return e_[5]; }

  double pfaffian() const { return a12() * a34() - a13() * a24() + a14() * a23(); }

  // Frobenius norm of the full 4x4 matrix.
  double norm() const { return std::sqrt(2.0 * half_norm_sq()); }
  // Sum of squares of the six independent entries, i.e. half the squared Frobenius norm.
  double half_norm_sq() const {
    double s = 0;
    for (double x : e_) s += x * x;
    return s;
  }

  // Frobenius inner product of the full matrices.
  friend double inner(const AntisymForm& x, const AntisymForm& y) {
    double s = 0;
    for (int k = 0; k < 6; ++k) s += x.e_[k] * y.e_[k];
    return 2.0 * s;
  }

  friend AntisymForm operator+(AntisymForm x, const AntisymForm& y) {
    for (int k = 0; k < 6; ++k) x.e_[k] += y.e_[k];
    return x;
  }
  friend AntisymForm operator-(AntisymForm x, const AntisymForm& y) {
    for (int k = 0; k < 6; ++k) x.e_[k] -= y.e_[k];
    return x;
  }
  friend AntisymForm operator*(double s, AntisymForm x) {
    for (double& v : x.e_) v *= s;
    return x;
  }
  AntisymForm operator-() const { return -1.0 * *this; }

  // g W g^T, the form pulled back along g^T.
  AntisymForm conjugated(const Mat4& g) const { return from_matrix(g * matrix() * g.transpose()); }

  // Coordinates of the first-kind (Pfaffian +) and second-kind (Pfaffian -) parts:
  // the form equals first_kind(sd) + second_kind(asd).
  Vec3 self_dual_part() const {
    return {(a12() + a34()) / 2, (a13() - a24()) / 2, (a14() + a23()) / 2};
  }
  Vec3 anti_self_dual_part() const {
    return {(a12() - a34()) / 2, (a13() + a24()) / 2, (a14() - a23()) / 2};
  }

  double max_abs_diff(const AntisymForm& o) const {
    double m = 0;
    for (int k = 0; k < 6; ++k) m = std::max(m, std::abs(e_[k] - o.e_[k]));
    return m;
  }

 private:
  std::array<double, 6> e_;
};

// Templates of the two kinds of orthogonal antisymmetric matrices.
inline AntisymForm first_kind(double a, double b, double c) { return {a, b, c, c, -b, a}; }
inline AntisymForm second_kind(double a, double b, double c) { return {a, b, c, -c, b, -a}; }
inline AntisymForm first_kind(const Vec3& v) { return first_kind(v[0], v[1], v[2]); }
inline AntisymForm second_kind(const Vec3& v) { return second_kind(v[0], v[1], v[2]); }

// The standard complex structure dx1^dx2 + dx3^dx4.
inline AntisymForm standard_J() { return first_kind(1, 0, 0); }

struct EigenPair {
  double a = 0;  // a >= b >= 0; eigenvalues are +-ai, +-bi
  double b = 0;
};

// Closed form: with W = first_kind(v) + second_kind(w), a = |v| + |w| and
// b = ||v| - |w||, which satisfy a^2 + b^2 = |W|_F^2 / 2 and ab = |Pf(W)|
// without the cancellation of solving those two equations directly.
inline EigenPair eigen_pairs(const AntisymForm& w) {
  const double sd = w.self_dual_part().norm();
  const double asd = w.anti_self_dual_part().norm();
  return {sd + asd, std::abs(sd - asd)};
}

struct ScalarOrthogonalCheck {
  bool holds = false;
  double scale = 0;  // c with A A^T = c I
};

inline ScalarOrthogonalCheck is_scalar_multiple_of_orthogonal(const Mat4& a,
                                                              double tol = kDefaultOrthTol) {
  const Mat4 aat = a * a.transpose();
  const double c = aat.trace() / 4;
  const double err = (aat - c * Mat4::Identity()).cwiseAbs().maxCoeff();
  return {err <= tol * std::max(1.0, c), c};
}

enum class Kind { FirstKind, SecondKind, NotApplicable };

struct KindClassification {
  Kind tag = Kind::NotApplicable;
  double a = 0, b = 0, c = 0;
};

inline KindClassification classify_kind(const Mat4& m, double tol = kDefaultOrthTol) {
  if (!is_orthogonal(m, tol) || !is_antisymmetric(m, tol)) return {};
  const double a = m(0, 1), b = m(0, 2), c = m(0, 3);
  const Mat4 first = first_kind(a, b, c).matrix();
  const Mat4 second = second_kind(a, b, c).matrix();
  const bool is_first = (m - first).cwiseAbs().maxCoeff() <= tol;
  const bool is_second = (m - second).cwiseAbs().maxCoeff() <= tol;
  // Both templates only coincide when a = b = c = 0, which orthogonality excludes.
  if (is_first && !is_second) return {Kind::FirstKind, a, b, c};
  if (is_second && !is_first) return {Kind::SecondKind, a, b, c};
  return {};
}

inline bool linearly_independent(const AntisymForm& x, const AntisymForm& y, double tol = 1e-12) {
  const double xx = inner(x, x), yy = inner(y, y), xy = inner(x, y);
  if (xx <= tol || yy <= tol) return false;
  return xx * yy - xy * xy > tol * xx * yy;
}

struct DistinctCombination {
  double lambda = 0;
  double mu = 0;
  AntisymForm form;
  EigenPair pair;
};

// Samples lambda*W1 + mu*W2 on a fixed grid followed by seeded random draws
// (64 candidates in total); returns the first with well separated eigenvalues.
inline std::optional<DistinctCombination> combine_distinct(const AntisymForm& w1,
                                                           const AntisymForm& w2,
                                                           double separation = kSeparationTol) {
  if (!linearly_independent(w1, w2)) {
    throw Error(ErrorCode::PreconditionViolation, "combine_distinct: forms are linearly dependent");
  }
  constexpr int kSamples = 64;
  std::vector<std::pair<double, double>> candidates = {{1, 1},   {1, -1}, {1, 0.5},
                                                       {1, -0.5}, {1, 2}, {1, -2}};
  std::mt19937_64 rng(0x5eed2f0f5ULL);
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  while (candidates.size() < kSamples) candidates.emplace_back(coeff(rng), coeff(rng));

  for (auto [lambda, mu] : candidates) {
    const AntisymForm w = lambda * w1 + mu * w2;
    const EigenPair p = eigen_pairs(w);
    if (p.a - p.b > separation * w.norm()) return DistinctCombination{lambda, mu, w, p};
  }
  return std::nullopt;
}

class OrientedPlane {
 public:
  OrientedPlane() = default;
  OrientedPlane(const Vec4& u, const Vec4& v) : u_(u), v_(v) {}

  const Vec4& u() const { return u_; }
  const Vec4& v() const { return v_; }
  Mat4 projector() const { return u_ * u_.transpose() + v_ * v_.transpose(); }
  AntisymForm bivector() const { return AntisymForm::wedge(u_, v_); }

  OrientedPlane transformed(const Mat4& rot) const { return {rot * u_, rot * v_}; }

  // Same oriented plane (bivectors agree).
  bool same_as(const OrientedPlane& o, double tol) const {
    return bivector().max_abs_diff(o.bivector()) <= tol;
  }

 private:
  Vec4 u_ = Vec4::UnitX();
  Vec4 v_ = Vec4::UnitY();
};

namespace detail {

// First column of p (within rounding) of maximal norm, normalized.
inline Vec4 dominant_column(const Mat4& p) {
  int best = 0;
  double best_norm = -1;
  for (int j = 0; j < 4; ++j) {
    const double n = p.col(j).norm();
    if (n > best_norm + 1e-12) {
      best_norm = n;
      best = j;
    }
  }
  return p.col(best) / best_norm;
}

// Orthonormal basis (u, v) of the range of a rank-2 projector.
inline std::pair<Vec4, Vec4> plane_basis(const Mat4& p) {
  const Vec4 u = dominant_column(p);
  const Mat4 rest = p - u * u.transpose();
  return {u, dominant_column(rest)};
}

}  // namespace detail

// The a-eigenplane (oriented by w) and its orthogonal complement (oriented so
// that the pair is positively oriented in R^4).
inline std::pair<OrientedPlane, OrientedPlane> eigen_planes(const AntisymForm& w,
                                                            double separation = kSeparationTol) {
  const EigenPair p = eigen_pairs(w);
  if (!(p.a - p.b > separation * w.norm())) {
    throw Error(ErrorCode::RepeatedEigenvalues, "eigen_planes: eigenvalues are not distinct");
  }
  const Mat4 m = w.matrix();
  const Mat4 neg_sq = -(m * m);
  const Mat4 proj_a = (neg_sq - p.b * p.b * Mat4::Identity()) / (p.a * p.a - p.b * p.b);
  const Mat4 proj_b = Mat4::Identity() - proj_a;

  const Vec4 u1 = detail::dominant_column(proj_a);
  const Vec4 v1 = (-m * u1 / p.a).normalized();

  auto [u2, v2] = detail::plane_basis(proj_b);
  Mat4 frame;
  frame << u1, v1, u2, v2;
  if (frame.determinant() < 0) v2 = -v2;
  return {OrientedPlane(u1, v1), OrientedPlane(u2, v2)};
}

struct Commutant {
  std::vector<Mat4> basis;
  int dimension = 0;
};

// Null space of X -> (XM - MX) over all M, on the 16-dimensional matrix space.
inline Commutant commutant_in_O4(std::span<const Mat4> ms, double tol = kDefaultOrthTol) {
  Commutant out;
  if (ms.empty()) {
    for (int k = 0; k < 16; ++k) {
      Mat4 e = Mat4::Zero();
      e(k / 4, k % 4) = 1;
      out.basis.push_back(e);
    }
    out.dimension = 16;
    return out;
  }
  Eigen::MatrixXd sys(16 * ms.size(), 16);
  for (int k = 0; k < 16; ++k) {
    Mat4 e = Mat4::Zero();
    e(k / 4, k % 4) = 1;
    for (std::size_t i = 0; i < ms.size(); ++i) {
      const Mat4 r = e * ms[i] - ms[i] * e;
      sys.block<16, 1>(16 * i, k) = Eigen::Map<const Eigen::Matrix<double, 16, 1>>(r.data());
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double scale = std::max(1.0, sv.size() > 0 ? sv[0] : 0.0);
  for (int k = 0; k < 16; ++k) {
    const double s = k < sv.size() ? sv[k] : 0.0;
    if (s <= tol * scale) {
      Eigen::Matrix<double, 16, 1> col = svd.matrixV().col(k);
      out.basis.emplace_back(Eigen::Map<const Mat4>(col.data()));
    }
  }
  out.dimension = static_cast<int>(out.basis.size());
  return out;
}

// 2x2 real block of the complex number x + iy.
inline Eigen::Matrix2d complex_block(std::complex<double> z) {
  Eigen::Matrix2d b;
  b << z.real(), -z.imag(), z.imag(), z.real();
  return b;
}

inline Mat4 complex_block_matrix(std::complex<double> z1, std::complex<double> z2,
                                 std::complex<double> z3, std::complex<double> z4) {
  Mat4 m;
  m.block<2, 2>(0, 0) = complex_block(z1);
  m.block<2, 2>(0, 2) = complex_block(z2);
  m.block<2, 2>(2, 0) = complex_block(z3);
  m.block<2, 2>(2, 2) = complex_block(z4);
  return m;
}

struct SU2Form {
  std::complex<double> z1, z2;  // |z1|^2 + |z2|^2 = 1

  Mat4 matrix() const { return complex_block_matrix(z1, z2, -std::conj(z2), std::conj(z1)); }
};

// Orthonormal frame g with g^T W g = J, for W orthogonal and antisymmetric.
inline Mat4 normalizing_frame(const AntisymForm& w) {
  const Mat4 m = w.matrix();
  const Vec4 u1 = Vec4::UnitX();
  const Vec4 u2 = -m * u1;
  Vec4 u3 = Vec4::Zero();
  double best = -1;
  for (int k = 0; k < 4; ++k) {
    Vec4 e = Vec4::Unit(k);
    e -= u1.dot(e) * u1 + u2.dot(e) * u2;
    if (e.norm() > best + 1e-12) {
      best = e.norm();
      u3 = e;
    }
  }
  u3.normalize();
  const Vec4 u4 = -m * u3;
  Mat4 g;
  g << u1, u2, u3, u4;
  return g;
}

// Rescales a form with repeated eigenvalues to an orthogonal matrix.
inline std::optional<AntisymForm> orthogonal_normalization(const AntisymForm& w,
                                                           double tol = kDefaultOrthTol) {
  const EigenPair p = eigen_pairs(w);
  if (p.a <= tol || p.a - p.b > 1e-6 * p.a) return std::nullopt;
  return (1.0 / p.a) * w;
}

// A first-kind form independent of two given first-kind forms: the third
// direction of the 3-dimensional space of first-kind multiples, computed in
// a frame where the first form is J.
inline AntisymForm third_form_witness(const AntisymForm& w1, const AntisymForm& w2,
                                      double tol = 1e-7) {
  const auto n1 = orthogonal_normalization(w1);
  const auto n2 = orthogonal_normalization(w2);
  if (!n1 || !n2 || classify_kind(n1->matrix(), tol).tag != Kind::FirstKind ||
      classify_kind(n2->matrix(), tol).tag != Kind::FirstKind) {
    throw Error(ErrorCode::NotBothFirstKind, "third_form_witness: both forms must be first kind");
  }
  const Mat4 g = normalizing_frame(*n1);
  const AntisymForm c = n2->conjugated(g.transpose());
  const Vec3 abc = c.self_dual_part();
  if (std::abs(std::abs(abc[0]) - 1.0) <= tol) {
    throw Error(ErrorCode::DegenerateFirstKindPair,
                "third_form_witness: second form is a multiple of the first");
  }
  const Vec3 third = Vec3::UnitX().cross(abc).normalized();
  return first_kind(third).conjugated(g);
}

}  // namespace pl4
