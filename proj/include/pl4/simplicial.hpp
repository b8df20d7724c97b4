#pragma once

// Dimension-generic flat simplicial complexes: per-simplex charts from edge
// lengths, facet gluings, the dual graph and developing maps. Surfaces use
// D = 2 and the 4-manifolds use D = 4.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include "pl4/error.hpp"

namespace pl4 {

template <int D>
struct AffineMap {
  using Point = Eigen::Matrix<double, D, 1>;
  using Linear = Eigen::Matrix<double, D, D>;

  Linear linear = Linear::Identity();
  Point translation = Point::Zero();

  Point operator()(const Point& x) const { return linear * x + translation; }

  // (this o other)(x) = this(other(x))
  AffineMap compose(const AffineMap& other) const {
    return {linear * other.linear, linear * other.translation + translation};
  }

  AffineMap inverse() const {
    const Linear inv = linear.transpose();  // isometries only
    return {inv, -(inv * translation)};
  }
};

// Gluing partner across the facet opposite a local vertex.
struct FacetRef {
  int simplex = -1;
  int opposite = -1;  // local index of the vertex opposite the facet in `simplex`

  bool valid() const { return simplex >= 0; }
  friend bool operator==(const FacetRef&, const FacetRef&) = default;
};

struct GluingIssues {
  std::vector<FacetRef> boundary;   // facets with no partner
  std::vector<FacetRef> overglued;  // facets shared by more than two simplices
};

template <int D>
class SimplicialMetric {
 public:
  static constexpr int kVerts = D + 1;
  static constexpr int kEdges = D * (D + 1) / 2;
  using Point = Eigen::Matrix<double, D, 1>;
  using Bary = Eigen::Matrix<double, kVerts, 1>;
  using Labels = std::array<int, kVerts>;
  using Lengths = std::array<double, kEdges>;
  using Chart = std::array<Point, kVerts>;
  using Neighbors = std::array<FacetRef, kVerts>;

  // Index of edge (i, j), i < j, in the order (0,1), (0,2), ..., (D-1,D).
  static constexpr int edge_index(int i, int j) {
    if (i > j) std::swap(i, j);
    return i * (2 * D + 1 - i) / 2 + (j - i - 1);
  }

  SimplicialMetric() = default;

  SimplicialMetric(int num_vertices, std::vector<Labels> simplices, std::vector<Lengths> lengths,
                   std::vector<Neighbors> neighbors)
      : num_vertices_(num_vertices),
        simplices_(std::move(simplices)),
        lengths_(std::move(lengths)),
        neighbors_(std::move(neighbors)) {
    build_charts();
  }

  // Glues facets that carry the same vertex labels.
  static SimplicialMetric glue_by_labels(int num_vertices, std::vector<Labels> simplices,
                                         std::vector<Lengths> lengths,
                                         GluingIssues* issues = nullptr) {
    std::vector<Neighbors> nbrs(simplices.size());
    std::map<std::array<int, D>, std::vector<FacetRef>> by_key;
    for (int s = 0; s < static_cast<int>(simplices.size()); ++s) {
      for (int i = 0; i < kVerts; ++i) by_key[facet_key(simplices[s], i)].push_back({s, i});
    }
    for (const auto& [key, refs] : by_key) {
      if (refs.size() == 2) {
        nbrs[refs[0].simplex][refs[0].opposite] = refs[1];
        nbrs[refs[1].simplex][refs[1].opposite] = refs[0];
      } else if (issues != nullptr) {
        auto& dst = refs.size() == 1 ? issues->boundary : issues->overglued;
        dst.insert(dst.end(), refs.begin(), refs.end());
      }
    }
    return SimplicialMetric(num_vertices, std::move(simplices), std::move(lengths),
                            std::move(nbrs));
  }

  static std::array<int, D> facet_key(const Labels& labels, int opposite) {
    std::array<int, D> key{};
    for (int i = 0, k = 0; i < kVerts; ++i) {
      if (i != opposite) key[k++] = labels[i];
    }
    std::sort(key.begin(), key.end());
    return key;
  }

  int num_vertices() const { return num_vertices_; }
  int num_simplices() const { return static_cast<int>(simplices_.size()); }
  const Labels& labels(int s) const { return simplices_[s]; }
  const Lengths& lengths(int s) const { return lengths_[s]; }
  double length(int s, int i, int j) const { return lengths_[s][edge_index(i, j)]; }
  const Chart& chart(int s) const { return charts_[s]; }
  const Neighbors& neighbors(int s) const { return neighbors_[s]; }
  FacetRef neighbor(int s, int i) const { return neighbors_[s][i]; }
  double gram_determinant(int s) const { return gram_det_[s]; }

  double volume(int s) const {
    double fact = 1;
    for (int k = 2; k <= D; ++k) fact *= k;
    return std::sqrt(std::max(0.0, gram_det_[s])) / fact;
  }

  // Cayley-Menger positivity, relative to the simplex scale.
  bool nondegenerate(int s, double rel_tol = 1e-12) const {
    double scale = 0;
    for (double l : lengths_[s]) scale = std::max(scale, l);
    return gram_det_[s] > rel_tol * std::pow(scale, 2 * D);
  }

  int local_index(int s, int label) const {
    for (int i = 0; i < kVerts; ++i) {
      if (simplices_[s][i] == label) return i;
    }
    return -1;
  }

  bool contains_all(int s, std::span<const int> labels) const {
    return std::all_of(labels.begin(), labels.end(),
                       [&](int l) { return local_index(s, l) >= 0; });
  }

  Point point(int s, const Bary& bary) const {
    Point p = Point::Zero();
    for (int i = 0; i < kVerts; ++i) p += bary[i] * charts_[s][i];
    return p;
  }

  Bary barycentric(int s, const Point& x) const {
    Eigen::Matrix<double, kVerts, 1> rhs;
    rhs.template head<D>() = x;
    rhs[D] = 1;
    return bary_solver_[s].solve(rhs);
  }

  Point barycenter(int s) const {
    Bary b = Bary::Constant(1.0 / kVerts);
    return point(s, b);
  }

  // Unit normal of the facet opposite `opposite`, pointing toward that vertex.
  Point inward_normal(int s, int opposite) const {
    const Chart& c = charts_[s];
    Eigen::Matrix<double, D, D - 1> e;
    int base = -1;
    for (int i = 0, k = -1; i < kVerts; ++i) {
      if (i == opposite) continue;
      if (base < 0) {
        base = i;
        continue;
      }
      e.col(++k) = c[i] - c[base];
    }
    const Point r = c[opposite] - c[base];
    const Eigen::Matrix<double, D - 1, 1> coef = (e.transpose() * e).ldlt().solve(e.transpose() * r);
    return (r - e * coef).normalized();
  }

  // Isometry from chart(s) to the chart of the simplex glued across the
  // facet opposite local vertex `opposite`.
  AffineMap<D> gluing_map(int s, int opposite) const {
    const FacetRef nb = neighbors_[s][opposite];
    if (!nb.valid()) throw Error(ErrorCode::NotAdjacent, "gluing_map: boundary facet");
    const int t = nb.simplex;
    Eigen::Matrix<double, D, D> src, dst;
    Point src0 = Point::Zero(), dst0 = Point::Zero();
    int k = -1;
    for (int i = 0; i < kVerts; ++i) {
      if (i == opposite) continue;
      const int j = local_index(t, simplices_[s][i]);
      if (j < 0) throw Error(ErrorCode::InvalidInput, "gluing_map: glued facets differ in labels");
      if (k < 0) {
        src0 = charts_[s][i];
        dst0 = charts_[t][j];
      } else {
        src.col(k) = charts_[s][i] - src0;
        dst.col(k) = charts_[t][j] - dst0;
      }
      ++k;
    }
    src.col(D - 1) = inward_normal(s, opposite);
    dst.col(D - 1) = -inward_normal(t, nb.opposite);
    Eigen::Matrix<double, D, D> lin = dst * src.inverse();
    Eigen::JacobiSVD<Eigen::Matrix<double, D, D>> svd(lin, Eigen::ComputeFullU | Eigen::ComputeFullV);
    lin = svd.matrixU() * svd.matrixV().transpose();
    return {lin, dst0 - lin * src0};
  }

  // Local index in s of the facet shared with t, or -1.
  int shared_facet(int s, int t) const {
    for (int i = 0; i < kVerts; ++i) {
      if (neighbors_[s][i].simplex == t) return i;
    }
    return -1;
  }

 private:
  void build_charts() {
    const int n = num_simplices();
    charts_.resize(n);
    gram_det_.resize(n);
    bary_solver_.resize(n);
    for (int s = 0; s < n; ++s) {
      Eigen::Matrix<double, D, D> g;
      for (int i = 1; i <= D; ++i) {
        for (int j = 1; j <= D; ++j) {
          const double d0i = i == 0 ? 0 : length(s, 0, i);
          const double d0j = j == 0 ? 0 : length(s, 0, j);
          const double dij = i == j ? 0 : length(s, i, j);
          g(i - 1, j - 1) = 0.5 * (d0i * d0i + d0j * d0j - dij * dij);
        }
      }
      gram_det_[s] = g.determinant();
      Eigen::Matrix<double, D, D> coords;  // row i-1 = vertex i
      Eigen::LLT<Eigen::Matrix<double, D, D>> llt(g);
      if (llt.info() == Eigen::Success) {
        coords = llt.matrixL();
      } else {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, D, D>> es(g);
        coords = es.eigenvectors() *
                 es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
      }
      charts_[s][0] = Point::Zero();
      for (int i = 1; i <= D; ++i) charts_[s][i] = coords.row(i - 1).transpose();

      Eigen::Matrix<double, kVerts, kVerts> a;
      for (int i = 0; i < kVerts; ++i) {
        a.template block<D, 1>(0, i) = charts_[s][i];
        a(D, i) = 1;
      }
      bary_solver_[s] = a.fullPivLu();
    }
  }

  int num_vertices_ = 0;
  std::vector<Labels> simplices_;
  std::vector<Lengths> lengths_;
  std::vector<Neighbors> neighbors_;
  std::vector<Chart> charts_;
  std::vector<double> gram_det_;
  std::vector<Eigen::FullPivLU<Eigen::Matrix<double, kVerts, kVerts>>> bary_solver_;
};

// Dual graph with a breadth-first spanning tree rooted at simplex `root`;
// neighbors are visited in increasing simplex id.
struct DualTree {
  int root = 0;
  std::vector<int> parent;        // -1 at root and unreached simplices
  std::vector<int> depth;         // -1 if unreached
  std::vector<int> order;         // BFS visiting order
  std::vector<std::vector<int>> adjacency;
  bool connected = false;

  std::size_t num_edges() const {
    std::size_t e = 0;
    for (const auto& a : adjacency) e += a.size();
    return e / 2;
  }

  bool is_tree_edge(int s, int t) const { return parent[s] == t || parent[t] == s; }

  // Simplex sequence a -> ... -> b along the tree.
  std::vector<int> path(int a, int b) const {
    std::vector<int> up_a{a}, up_b{b};
    while (up_a.back() != up_b.back()) {
      if (depth[up_a.back()] >= depth[up_b.back()]) {
        up_a.push_back(parent[up_a.back()]);
      } else {
        up_b.push_back(parent[up_b.back()]);
      }
    }
    up_b.pop_back();
    up_a.insert(up_a.end(), up_b.rbegin(), up_b.rend());
    return up_a;
  }
};

template <int D>
DualTree dual_tree(const SimplicialMetric<D>& m, int root = 0) {
  DualTree t;
  const int n = m.num_simplices();
  t.root = root;
  t.parent.assign(n, -1);
  t.depth.assign(n, -1);
  t.adjacency.resize(n);
  for (int s = 0; s < n; ++s) {
    for (const FacetRef& f : m.neighbors(s)) {
      if (f.valid()) t.adjacency[s].push_back(f.simplex);
    }
    std::sort(t.adjacency[s].begin(), t.adjacency[s].end());
  }
  if (n == 0) return t;
  std::deque<int> queue{root};
  t.depth[root] = 0;
  while (!queue.empty()) {
    const int s = queue.front();
    queue.pop_front();
    t.order.push_back(s);
    for (int nb : t.adjacency[s]) {
      if (t.depth[nb] >= 0) continue;
      t.depth[nb] = t.depth[s] + 1;
      t.parent[nb] = s;
      queue.push_back(nb);
    }
  }
  t.connected = static_cast<int>(t.order.size()) == n;
  return t;
}

// Placements of a simplex path into the chart of its first simplex:
// placements[k] maps chart(path[k]) into developed coordinates.
template <int D>
std::vector<AffineMap<D>> develop_path(const SimplicialMetric<D>& m, std::span<const int> path) {
  std::vector<AffineMap<D>> out;
  if (path.empty()) return out;
  out.emplace_back();
  for (std::size_t k = 1; k < path.size(); ++k) {
    const int facet = m.shared_facet(path[k], path[k - 1]);
    if (facet < 0 || path[k] == path[k - 1]) {
      throw Error(ErrorCode::NotAdjacent, "develop: consecutive simplices " +
                                              std::to_string(path[k - 1]) + " and " +
                                              std::to_string(path[k]) + " are not glued");
    }
    out.push_back(out.back().compose(m.gluing_map(path[k], facet)));
  }
  return out;
}

// Placement of every simplex into the root chart along the spanning tree.
template <int D>
std::vector<AffineMap<D>> tree_placements(const SimplicialMetric<D>& m, const DualTree& tree) {
  std::vector<AffineMap<D>> out(m.num_simplices());
  for (int s : tree.order) {
    if (s == tree.root) continue;
    const int p = tree.parent[s];
    out[s] = out[p].compose(m.gluing_map(s, m.shared_facet(s, p)));
  }
  return out;
}

}  // namespace pl4
