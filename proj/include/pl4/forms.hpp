#pragma once

// Holonomy-invariant 2-forms and the pair of parallel plane fields they define.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "pl4/error.hpp"
#include "pl4/holonomy.hpp"
#include "pl4/plcomplex.hpp"
#include "pl4/tensor4.hpp"

namespace pl4 {

struct InvariantFormBasis {
  std::vector<AntisymForm> basis;  // Frobenius-orthonormal, base chart
  int dim = 0;
};

// Forms W with g W g^T = W for all generators. The basis is canonical: the
// standard basis e_ij is projected onto the solution space and
// Gram-Schmidt-orthonormalized in order; each vector's largest entry is positive.
inline InvariantFormBasis invariant_forms(std::span<const Mat4> gens, double tol = kDefaultOrthTol) {
  Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(std::max<std::size_t>(6 * gens.size(), 1), 6);
  for (std::size_t k = 0; k < gens.size(); ++k) {
    for (int c = 0; c < 6; ++c) {
      std::array<double, 6> e{};
      e[c] = 1;
      const AntisymForm basis_form(e);
      const AntisymForm d = basis_form.conjugated(gens[k]) - basis_form;
      for (int r = 0; r < 6; ++r) sys(6 * k + r, c) = d.entry(r);
    }
  }
  Eigen::Matrix<double, 6, 6> null_proj = Eigen::Matrix<double, 6, 6>::Identity();
  if (!gens.empty()) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    Eigen::Matrix<double, 6, 6> range = Eigen::Matrix<double, 6, 6>::Zero();
    for (int i = 0; i < sv.size(); ++i) {
      if (sv[i] > std::sqrt(tol)) range += svd.matrixV().col(i) * svd.matrixV().col(i).transpose();
    }
    null_proj -= range;
  }
  InvariantFormBasis out;
  std::vector<Eigen::Matrix<double, 6, 1>> done;
  for (int c = 0; c < 6; ++c) {
    Eigen::Matrix<double, 6, 1> v = null_proj.col(c);
    for (const auto& d : done) v -= d.dot(v) * d;
    if (v.norm() < 1e-6) continue;
    v.normalize();
    int big = 0;
    for (int i = 1; i < 6; ++i) {
      if (std::abs(v[i]) > std::abs(v[big]) + 1e-12) big = i;
    }
    if (v[big] < 0) v = -v;
    done.push_back(v);
    // entries a_k carry half the Frobenius norm squared
    std::array<double, 6> e;
    for (int i = 0; i < 6; ++i) e[i] = v[i] / std::sqrt(2.0);
    out.basis.emplace_back(e);
  }
  out.dim = static_cast<int>(out.basis.size());
  return out;
}

inline InvariantFormBasis invariant_forms(const HolonomyRep& rep, double tol = kDefaultOrthTol) {
  const auto mats = rep.matrices();
  return invariant_forms(std::span<const Mat4>(mats), tol);
}

inline bool betti_check(const InvariantFormBasis& b, int expected = 2) { return b.dim == expected; }

// Euler characteristic of the complex from its face counts.
inline int euler_characteristic(const MetricComplex4& mc) {
  const Metric4& m = mc.metric();
  std::set<std::array<int, 2>> edges;
  std::set<std::array<int, 4>> tets;
  for (int s = 0; s < m.num_simplices(); ++s) {
    const auto& l = m.labels(s);
    for (int a = 0; a < 5; ++a) {
      for (int b = a + 1; b < 5; ++b) edges.insert({std::min(l[a], l[b]), std::max(l[a], l[b])});
      tets.insert(Metric4::facet_key(l, a));
    }
  }
  return mc.num_vertices() - static_cast<int>(edges.size()) + mc.num_triangles() -
         static_cast<int>(tets.size()) + mc.num_simplices();
}

// Stratum loops generate the holonomy only when the flat part is simply
// connected relative to them; flag inputs that visibly are not S2 x S2-like.
inline bool invariant_form_caveat(const MetricComplex4& mc, const SingularCensus& census) {
  return census.codim2.empty() || euler_characteristic(mc) != 4;
}

struct DistributionPair {
  double lambda = 0, mu = 0;
  AntisymForm form;   // lambda w1 + mu w2
  EigenPair pair;
  OrientedPlane alpha_base, beta_base;
  std::vector<OrientedPlane> alpha, beta;  // per simplex chart; empty without a complex
  int non_tree_gluings = 0;
  double transport_error = 0;  // max bivector deviation over non-tree gluings
};

class ContradictionWitnessError : public Error {
 public:
  ContradictionWitnessError(AntisymForm omega3, std::vector<Mat4> generators, double residual)
      : Error(ErrorCode::ContradictionWitness,
              "invariant forms admit no combination with distinct eigenvalues; a third invariant "
              "first-kind form exists"),
        omega3_(omega3),
        generators_(std::move(generators)),
        residual_(residual) {}

  const AntisymForm& omega3() const { return omega3_; }
  const std::vector<Mat4>& generators() const { return generators_; }
  // max entry of g W3 - W3 g over the generators
  double residual() const { return residual_; }

 private:
  AntisymForm omega3_;
  std::vector<Mat4> generators_;
  double residual_;
};

// Plane fields from a 2-dimensional invariant basis. With a complex and its
// spanning tree, the base planes are transported to every simplex chart and
// checked across the gluings outside the tree.
inline DistributionPair extract_distributions(const InvariantFormBasis& basis, std::span<const Mat4> gens,
                                              const MetricComplex4* mc = nullptr,
                                              const DualTree* tree = nullptr) {
  if (basis.dim != 2) {
    throw Error(ErrorCode::WrongDimension,
                "expected 2 invariant forms, found " + std::to_string(basis.dim));
  }
  const auto combo = combine_distinct(basis.basis[0], basis.basis[1]);
  if (!combo) {
    const AntisymForm w3 = third_form_witness(basis.basis[0], basis.basis[1]);
    double res = 0;
    const Mat4 wm = w3.matrix();
    for (const Mat4& g : gens) res = std::max(res, (g * wm - wm * g).cwiseAbs().maxCoeff());
    throw ContradictionWitnessError(w3, std::vector<Mat4>(gens.begin(), gens.end()), res);
  }
  DistributionPair d;
  d.lambda = combo->lambda;
  d.mu = combo->mu;
  d.form = combo->form;
  d.pair = combo->pair;
  std::tie(d.alpha_base, d.beta_base) = eigen_planes(combo->form);
  if (mc == nullptr || tree == nullptr) return d;

  const Metric4& m = mc->metric();
  const auto place = tree_placements(m, *tree);
  d.alpha.resize(m.num_simplices());
  d.beta.resize(m.num_simplices());
  for (int s = 0; s < m.num_simplices(); ++s) {
    const Mat4 rt = place[s].linear.transpose();
    d.alpha[s] = d.alpha_base.transformed(rt);
    d.beta[s] = d.beta_base.transformed(rt);
  }
  for (int s = 0; s < m.num_simplices(); ++s) {
    for (int i = 0; i < 5; ++i) {
      const FacetRef nb = m.neighbor(s, i);
      if (!nb.valid() || nb.simplex < s || tree->is_tree_edge(s, nb.simplex)) continue;
      ++d.non_tree_gluings;
      const Mat4 g = m.gluing_map(s, i).linear;
      const double ea = d.alpha[s].transformed(g).bivector().max_abs_diff(d.alpha[nb.simplex].bivector());
      const double eb = d.beta[s].transformed(g).bivector().max_abs_diff(d.beta[nb.simplex].bivector());
      d.transport_error = std::max({d.transport_error, ea, eb});
    }
  }
  return d;
}

inline DistributionPair extract_distributions(const InvariantFormBasis& basis, const HolonomyRep& rep,
                                              const MetricComplex4* mc = nullptr,
                                              const DualTree* tree = nullptr) {
  const auto mats = rep.matrices();
  return extract_distributions(basis, std::span<const Mat4>(mats), mc, tree);
}

}  // namespace pl4
