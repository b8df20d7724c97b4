#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "pl4/tensor4.hpp"

namespace pl4::testing {

inline constexpr double kPi = std::numbers::pi;

inline Mat4 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0, 1);
  Mat4 a;
  for (int i = 0; i < 16; ++i) a.data()[i] = n(rng);
  Eigen::HouseholderQR<Mat4> qr(a);
  Mat4 q = qr.householderQ();
  if (q.determinant() < 0) q.col(0) = -q.col(0);
  return q;
}

inline Vec3 random_unit3(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0, 1);
  Vec3 v(n(rng), n(rng), n(rng));
  return v.normalized();
}

// Eigenvalue magnitudes of an antisymmetric matrix via a general complex
// eigensolver, sorted descending (four entries, pairs repeated).
inline std::array<double, 4> eigen_magnitudes(const Mat4& m) {
  Eigen::EigenSolver<Mat4> es(m);
  std::array<double, 4> out;
  for (int i = 0; i < 4; ++i) out[i] = std::abs(es.eigenvalues()[i]);
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

inline Mat4 block_rotation(double theta1, double theta2) {
  Mat4 r = Mat4::Zero();
  r(0, 0) = std::cos(theta1);
  r(0, 1) = -std::sin(theta1);
  r(1, 0) = std::sin(theta1);
  r(1, 1) = std::cos(theta1);
  r(2, 2) = std::cos(theta2);
  r(2, 3) = -std::sin(theta2);
  r(3, 2) = std::sin(theta2);
  r(3, 3) = std::cos(theta2);
  return r;
}

}  // namespace pl4::testing
