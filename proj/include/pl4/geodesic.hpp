#pragma once

// Approximate intrinsic distances on flat simplicial complexes.
//
// A refined graph puts a barycentric grid (subdivision k) plus one node per
// facet centroid on every simplex and joins every pair of nodes that share a
// simplex. Graph paths are then
// straightened: the simplices the path visits are developed into one chart and
// the crossing points on the shared facets are optimized exactly, one at a
// time, which yields the length of the shortest path through that simplex
// chain.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <queue>
#include <span>
#include <vector>

#include "pl4/simplicial.hpp"

namespace pl4 {

namespace detail {

// Minimizer of |a - c| + |c - b| over the simplex spanned by `verts`.
// Faces are enumerated: on the affine hull of a face the minimizer lies on the
// segment between the projections of a and b, split in the ratio of the
// distances of a and b to the hull.
template <int D>
Eigen::Matrix<double, D, 1> min_broken_line_on_simplex(
    const Eigen::Matrix<double, D, 1>& a, const Eigen::Matrix<double, D, 1>& b,
    std::span<const Eigen::Matrix<double, D, 1>> verts, bool second_point_free = false) {
  using Point = Eigen::Matrix<double, D, 1>;
  const int n = static_cast<int>(verts.size());
  Point best = verts[0];
  double best_val = std::numeric_limits<double>::infinity();
  auto objective = [&](const Point& c) {
    return second_point_free ? (a - c).norm() : (a - c).norm() + (c - b).norm();
  };
  auto try_face = [&](unsigned mask) -> bool {
    int idx[D + 1];
    int m = 0;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) idx[m++] = i;
    }
    Point c;
    if (m == 1) {
      c = verts[idx[0]];
    } else {
      Eigen::Matrix<double, D, Eigen::Dynamic, 0, D, D> e(D, m - 1);
      for (int j = 1; j < m; ++j) e.col(j - 1) = verts[idx[j]] - verts[idx[0]];
      const auto gram = (e.transpose() * e).eval();
      const auto solver = gram.ldlt();
      const Eigen::VectorXd ya = solver.solve(e.transpose() * (a - verts[idx[0]]));
      const Point pa = verts[idx[0]] + e * ya;
      Eigen::VectorXd yc = ya;
      if (!second_point_free) {
        const Eigen::VectorXd yb = solver.solve(e.transpose() * (b - verts[idx[0]]));
        const Point pb = verts[idx[0]] + e * yb;
        const double ha = (a - pa).norm(), hb = (b - pb).norm();
        const double t = ha + hb > 0 ? ha / (ha + hb) : 0.0;
        yc = ya + t * (yb - ya);
      }
      constexpr double kEps = 1e-12;
      if (yc.minCoeff() < -kEps || yc.sum() > 1 + kEps) return false;
      c = verts[idx[0]] + e * yc;
    }
    const double v = objective(c);
    if (v < best_val) {
      best_val = v;
      best = c;
    }
    return true;
  };
  const unsigned full = (1u << n) - 1;
  if (try_face(full)) return best;  // interior optimum is global on the simplex
  for (unsigned mask = 1; mask < full; ++mask) try_face(mask);
  return best;
}

template <int D>
Eigen::Matrix<double, D, 1> closest_point_on_polygon(
    const Eigen::Matrix<double, D, 1>& p, std::span<const Eigen::Matrix<double, D, 1>> poly) {
  using Point = Eigen::Matrix<double, D, 1>;
  Point best = poly[0];
  double best_d = (p - best).norm();
  for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
    const std::array<Point, 3> tri = {poly[0], poly[k], poly[k + 1]};
    const Point c = min_broken_line_on_simplex<D>(p, p, tri, true);
    const double d = (p - c).norm();
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace detail

template <int D>
class RefinedGraph {
 public:
  using Metric = SimplicialMetric<D>;
  using Point = typename Metric::Point;
  using Bary = typename Metric::Bary;
  static constexpr int kVerts = Metric::kVerts;

  struct Node {
    int simplex = -1;                 // a simplex containing the node
    std::vector<int> support;         // sorted labels carrying positive weight
    std::vector<double> weights;      // barycentric weight per support label
    int polygon = -1;                 // free-end constraint for extra nodes
  };
  struct Arc {
    int to;
    double weight;
    int simplex;
  };
  struct ShortestPaths {
    std::vector<double> dist;
    std::vector<int> pred;
    std::vector<int> pred_simplex;
  };

  RefinedGraph(const Metric& m, int subdivision) : m_(&m), k_(subdivision) {
    build_grid();
  }

  const Metric& metric() const { return *m_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  const Node& node(int id) const { return nodes_[id]; }

  int vertex_node(int label) const {
    auto it = grid_index_.find({label, k_});
    return it == grid_index_.end() ? -1 : it->second;
  }

  // Adds a point of simplex s joined to every node of s.
  int add_point(int s, const Bary& bary, int polygon = -1) {
    Node nd;
    nd.simplex = s;
    nd.polygon = polygon;
    std::vector<std::pair<int, double>> sw;
    for (int i = 0; i < kVerts; ++i) {
      if (bary[i] > 1e-13) sw.emplace_back(m_->labels(s)[i], bary[i]);
    }
    std::sort(sw.begin(), sw.end());
    double total = 0;
    for (auto& [l, w] : sw) total += w;
    for (auto& [l, w] : sw) {
      nd.support.push_back(l);
      nd.weights.push_back(w / total);
    }
    const int id = num_nodes();
    nodes_.push_back(std::move(nd));
    adj_.emplace_back();
    const Point p = m_->point(s, bary);
    for (int other : simplex_nodes_[s]) {
      const double w = (p - position(other, s)).norm();
      adj_[id].push_back({other, w, s});
      adj_[other].push_back({id, w, s});
    }
    simplex_nodes_[s].push_back(id);
    return id;
  }

  // Registers a convex polygon (chart coordinates of simplex s) usable as a
  // free end by nodes created with this polygon id.
  int add_polygon(int s, std::vector<Point> verts) {
    polygons_.push_back({s, std::move(verts)});
    return static_cast<int>(polygons_.size()) - 1;
  }

  Point position(int id, int s) const {
    const Node& nd = nodes_[id];
    Point p = Point::Zero();
    for (std::size_t i = 0; i < nd.support.size(); ++i) {
      p += nd.weights[i] * m_->chart(s)[m_->local_index(s, nd.support[i])];
    }
    return p;
  }

  ShortestPaths dijkstra(std::span<const int> sources) const {
    ShortestPaths sp;
    const int n = num_nodes();
    sp.dist.assign(n, std::numeric_limits<double>::infinity());
    sp.pred.assign(n, -1);
    sp.pred_simplex.assign(n, -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    for (int s : sources) {
      sp.dist[s] = 0;
      pq.push({0.0, s});
    }
    while (!pq.empty()) {
      auto [d, u] = pq.top();
      pq.pop();
      if (d > sp.dist[u]) continue;
      for (const Arc& a : adj_[u]) {
        const double nd = d + a.weight;
        if (nd < sp.dist[a.to]) {
          sp.dist[a.to] = nd;
          sp.pred[a.to] = u;
          sp.pred_simplex[a.to] = a.simplex;
          pq.push({nd, a.to});
        }
      }
    }
    return sp;
  }

  // Length of the straightened path from `target` back to its source.
  double straightened(const ShortestPaths& sp, int target) const {
    if (!std::isfinite(sp.dist[target])) return sp.dist[target];
    std::vector<int> nodes{target};
    std::vector<int> segs;
    while (sp.pred[nodes.back()] >= 0) {
      segs.push_back(sp.pred_simplex[nodes.back()]);
      nodes.push_back(sp.pred[nodes.back()]);
    }
    if (segs.empty()) return 0.0;
    return straighten(nodes, segs);
  }

  // Straightens a node path; segs[i] is a simplex containing nodes[i], nodes[i+1].
  // The shortest path through the simplex chain is computed; where it bends
  // at a codimension-2 face, the chain is rerouted around the other side of
  // that face and kept if strictly shorter.
  double straighten(const std::vector<int>& nodes, const std::vector<int>& segs) const {
    std::vector<int> chain{segs[0]};
    std::vector<int> crossing_node;  // node whose position initializes each crossing
    for (std::size_t i = 1; i < segs.size(); ++i) {
      if (segs[i] == chain.back()) continue;
      const std::vector<int> hop = star_path(chain.back(), segs[i], nodes[i]);
      for (std::size_t j = 1; j < hop.size(); ++j) {
        chain.push_back(hop[j]);
        crossing_node.push_back(nodes[i]);
      }
    }
    const int first = nodes.front(), last = nodes.back();
    const Point a = position(first, chain.front());
    std::vector<Point> init;
    for (std::size_t k = 0; k < crossing_node.size(); ++k) init.push_back(position(crossing_node[k], chain[k]));
    ChainPath best = straighten_chain(chain, a, position(last, chain.back()), first, last, &init);

    for (int round = 0; round < kMaxReroutes; ++round) {
      bool improved = false;
      for (const auto& alt : reroutes(best)) {
        ChainPath cand = straighten_chain(alt, a, position(last, alt.back()), first, last, nullptr);
        if (cand.length < best.length - 1e-12 * (1 + best.length)) {
          best = std::move(cand);
          improved = true;
          break;
        }
      }
      if (!improved) break;
    }
    return best.length;
  }

 private:
  static constexpr int kMaxReroutes = 32;

  struct ChainPath {
    std::vector<int> chain;
    std::vector<Point> pts;  // start, crossings, end; developed into chart(chain.front())
    std::vector<AffineMap<D>> placements;
    double length = 0;
  };

  // Shortest path from a (chart of chain.front()) to b (chart of chain.back())
  // through the chain; ends attached to polygon nodes may slide in the polygon.
  ChainPath straighten_chain(const std::vector<int>& chain, const Point& a, const Point& b, int first_node,
                             int last_node, const std::vector<Point>* init) const {
    ChainPath out;
    out.chain = chain;
    out.placements = develop_path<D>(*m_, chain);
    const auto& placements = out.placements;
    const int ncross = static_cast<int>(chain.size()) - 1;

    std::vector<std::array<Point, D>> facets(ncross);
    std::vector<Point>& pts = out.pts;
    pts.resize(ncross + 2);
    for (int k = 0; k < ncross; ++k) {
      const int f = m_->shared_facet(chain[k], chain[k + 1]);
      Point c = Point::Zero();
      for (int i = 0, j = 0; i < kVerts; ++i) {
        if (i != f) {
          facets[k][j] = placements[k](m_->chart(chain[k])[i]);
          c += facets[k][j++];
        }
      }
      // nodes shared by consecutive crossings would pin each other; start off the node
      pts[k + 1] = c / D;
      if (init != nullptr) pts[k + 1] = 0.5 * (pts[k + 1] + placements[k]((*init)[k]));
    }
    pts[0] = a;
    pts[ncross + 1] = placements.back()(b);

    auto developed_polygon = [&](int node_id, const AffineMap<D>& place) {
      std::vector<Point> poly;
      const int pid = nodes_[node_id].polygon;
      if (pid < 0) return poly;
      for (const Point& p : polygons_[pid].verts) poly.push_back(place(p));
      return poly;
    };
    const std::vector<Point> start_poly = developed_polygon(first_node, placements.front());
    const std::vector<Point> end_poly = developed_polygon(last_node, placements.back());

    auto total = [&] {
      double t = 0;
      for (std::size_t i = 0; i + 1 < pts.size(); ++i) t += (pts[i + 1] - pts[i]).norm();
      return t;
    };

    if (start_poly.empty() && end_poly.empty() && straight_line_feasible(pts.front(), pts.back(), facets)) {
      for (int k = 0; k < ncross; ++k) {
        pts[k + 1] = line_facet_point(pts.front(), pts.back(), facets[k]);
      }
      out.length = (pts.back() - pts.front()).norm();
      return out;
    }

    double prev = total();
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      if (!start_poly.empty()) {
        pts[0] = detail::closest_point_on_polygon<D>(pts[1], start_poly);
      }
      for (int k = 0; k < ncross; ++k) {
        pts[k + 1] = detail::min_broken_line_on_simplex<D>(pts[k], pts[k + 2], facets[k]);
      }
      if (!end_poly.empty()) {
        pts[ncross + 1] = detail::closest_point_on_polygon<D>(pts[ncross], end_poly);
      }
      slide_coincident_runs(pts, facets);
      const double cur = total();
      if (prev - cur <= 1e-13 * (1 + cur)) {
        prev = cur;
        break;
      }
      prev = cur;
    }
    out.length = prev;
    return out;
  }

  // Single-point moves cannot separate crossings that sit on one point of a
  // common lower face; such runs are moved together along that face.
  static void slide_coincident_runs(std::vector<Point>& pts, const std::vector<std::array<Point, D>>& facets) {
    const int ncross = static_cast<int>(facets.size());
    int i = 1;
    while (i <= ncross) {
      int j = i;
      const double tol = 1e-10 * (1 + pts[i].norm());
      while (j < ncross && (pts[j + 1] - pts[i]).norm() <= tol) ++j;
      if (j > i) {
        std::vector<Point> common;
        for (const Point& v : facets[i - 1]) {
          bool shared = true;
          for (int k = i; k < j && shared; ++k) {
            bool found = false;
            for (const Point& w : facets[k]) found = found || (w - v).norm() <= tol;
            shared = found;
          }
          if (shared) common.push_back(v);
        }
        if (!common.empty()) {
          const Point c = detail::min_broken_line_on_simplex<D>(pts[i - 1], pts[j + 1], common);
          for (int k = i; k <= j; ++k) pts[k] = c;
        }
      }
      i = j + 1;
    }
  }

  static Point line_facet_point(const Point& a, const Point& b, const std::array<Point, D>& f) {
    Eigen::Matrix<double, D, D> sys;
    for (int j = 1; j < D; ++j) sys.col(j - 1) = f[j] - f[0];
    sys.col(D - 1) = a - b;
    const Eigen::Matrix<double, D, 1> sol = sys.fullPivLu().solve(a - f[0]);
    return a + sol[D - 1] * (b - a);
  }

  // Alternative chains going around the other side of each codimension-2
  // face at which the path bends.
  std::vector<std::vector<int>> reroutes(const ChainPath& p) const {
    std::vector<std::vector<int>> out;
    const auto& chain = p.chain;
    const int ncross = static_cast<int>(chain.size()) - 1;
    for (int k = 0; k < ncross; ++k) {
      const Point& x = p.pts[k + 1];
      const Point d0 = x - p.pts[k], d1 = p.pts[k + 2] - x;
      const double n0 = d0.norm(), n1 = d1.norm();
      if (n0 > 0 && n1 > 0 && d0.dot(d1) >= (1 - 1e-12) * n0 * n1) continue;  // straight here
      // face of the crossing facet carrying x
      const int f = m_->shared_facet(chain[k], chain[k + 1]);
      Eigen::Matrix<double, D + 1, D> sys;
      std::array<int, D> labels;
      for (int i = 0, j = 0; i < kVerts; ++i) {
        if (i == f) continue;
        const Point v = p.placements[k](m_->chart(chain[k])[i]);
        sys.template topRows<D>().col(j) = v;
        sys(D, j) = 1;
        labels[j++] = m_->labels(chain[k])[i];
      }
      Eigen::Matrix<double, D + 1, 1> rhs;
      rhs.template head<D>() = x;
      rhs[D] = 1;
      const Eigen::Matrix<double, D, 1> w = sys.colPivHouseholderQr().solve(rhs);
      std::vector<int> face;
      for (int j = 0; j < D; ++j) {
        if (w[j] > 1e-9) face.push_back(labels[j]);
      }
      if (static_cast<int>(face.size()) != D - 1) continue;
      // maximal run of chain simplices containing the face
      int i0 = k, i1 = k + 1;
      while (i0 > 0 && m_->contains_all(chain[i0 - 1], face)) --i0;
      while (i1 < ncross && m_->contains_all(chain[i1 + 1], face)) ++i1;
      const std::vector<int> fan = face_fan(chain[i0], face);
      const int n = static_cast<int>(fan.size());
      const int pos0 = static_cast<int>(std::find(fan.begin(), fan.end(), chain[i0]) - fan.begin());
      const int pos1 = static_cast<int>(std::find(fan.begin(), fan.end(), chain[i1]) - fan.begin());
      if (pos1 >= n) continue;
      // the run goes forward along the fan iff its second entry follows chain[i0]
      const bool forward = fan[(pos0 + 1) % n] == chain[i0 + 1];
      std::vector<int> alt(chain.begin(), chain.begin() + i0);
      for (int q = pos0;; q = forward ? (q - 1 + n) % n : (q + 1) % n) {
        alt.push_back(fan[q]);
        if (q == pos1) break;
      }
      alt.insert(alt.end(), chain.begin() + i1 + 1, chain.end());
      if (alt != chain) out.push_back(std::move(alt));
    }
    return out;
  }

  // Simplices around a codimension-2 face in cyclic order, starting at s.
  std::vector<int> face_fan(int s, const std::vector<int>& face) const {
    auto across = [&](int u) {
      std::vector<int> nb;
      for (int i = 0; i < kVerts; ++i) {
        const int l = m_->labels(u)[i];
        if (std::find(face.begin(), face.end(), l) != face.end()) continue;
        nb.push_back(m_->neighbor(u, i).simplex);
      }
      return nb;
    };
    std::vector<int> fan{s};
    int prev = s, cur = across(s)[0];
    while (cur != s && cur >= 0 && fan.size() <= static_cast<std::size_t>(m_->num_simplices())) {
      fan.push_back(cur);
      const auto nb = across(cur);
      const int next = nb[0] == prev ? nb[1] : nb[0];
      prev = cur;
      cur = next;
    }
    return fan;
  }

  static constexpr int kMaxSweeps = 4000;

  struct Polygon {
    int simplex;
    std::vector<Point> verts;
  };

  static bool straight_line_feasible(const Point& a, const Point& b,
                                     const std::vector<std::array<Point, D>>& facets) {
    double last_t = 0;
    for (const auto& f : facets) {
      Eigen::Matrix<double, D, D> sys;
      for (int j = 1; j < D; ++j) sys.col(j - 1) = f[j] - f[0];
      sys.col(D - 1) = a - b;
      // a + t (b - a) = f0 + E y
      const Eigen::Matrix<double, D, 1> sol = sys.fullPivLu().solve(a - f[0]);
      const double t = sol[D - 1];
      const auto y = sol.template head<D - 1>();
      constexpr double kEps = 1e-10;
      if (!std::isfinite(t) || t < last_t - kEps || t > 1 + kEps) return false;
      if (y.minCoeff() < -kEps || y.sum() > 1 + kEps) return false;
      last_t = t;
    }
    return true;
  }

  // Facet-adjacent simplices from s to t, all containing the support of node v.
  std::vector<int> star_path(int s, int t, int v) const {
    const std::vector<int>& support = nodes_[v].support;
    std::map<int, int> parent{{s, -1}};
    std::deque<int> queue{s};
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      if (u == t) break;
      for (const FacetRef& f : m_->neighbors(u)) {
        if (!f.valid() || parent.count(f.simplex)) continue;
        if (!m_->contains_all(f.simplex, support)) continue;
        parent[f.simplex] = u;
        queue.push_back(f.simplex);
      }
    }
    if (!parent.count(t)) throw Error(ErrorCode::NotAdjacent, "straighten: disconnected star");
    std::vector<int> path;
    for (int u = t; u >= 0; u = parent[u]) path.push_back(u);
    std::reverse(path.begin(), path.end());
    return path;
  }

  void build_grid() {
    const int n = m_->num_simplices();
    simplex_nodes_.assign(n, {});
    std::vector<std::array<int, kVerts>> comps;
    std::array<int, kVerts> c{};
    enumerate(0, k_, c, comps);
    for (int s = 0; s < n; ++s) {
      for (const auto& comp : comps) {
        std::vector<int> key;
        for (int i = 0; i < kVerts; ++i) {
          if (comp[i] > 0) {
            key.push_back(m_->labels(s)[i]);
            key.push_back(comp[i]);
          }
        }
        sort_pairs(key);
        auto [it, inserted] = grid_index_.try_emplace(key, num_nodes());
        if (inserted) {
          Node nd;
          nd.simplex = s;
          for (std::size_t i = 0; i < key.size(); i += 2) {
            nd.support.push_back(key[i]);
            nd.weights.push_back(static_cast<double>(key[i + 1]) / k_);
          }
          nodes_.push_back(std::move(nd));
        }
        simplex_nodes_[s].push_back(it->second);
      }
      // facet centroids, so that paths can cross facets away from lower faces
      for (int f = 0; f < kVerts; ++f) {
        std::vector<int> key;
        for (int i = 0; i < kVerts; ++i) {
          if (i != f) key.push_back(m_->labels(s)[i]);
        }
        std::sort(key.begin(), key.end());
        key.push_back(-1);
        auto [it, inserted] = grid_index_.try_emplace(key, num_nodes());
        if (inserted) {
          Node nd;
          nd.simplex = s;
          nd.support.assign(key.begin(), key.end() - 1);
          nd.weights.assign(D, 1.0 / D);
          nodes_.push_back(std::move(nd));
        }
        simplex_nodes_[s].push_back(it->second);
      }
    }
    adj_.assign(nodes_.size(), {});
    for (int s = 0; s < n; ++s) {
      const auto& ids = simplex_nodes_[s];
      std::vector<Point> pos;
      for (int id : ids) pos.push_back(position(id, s));
      for (std::size_t i = 0; i < ids.size(); ++i) {
        for (std::size_t j = i + 1; j < ids.size(); ++j) {
          const double w = (pos[i] - pos[j]).norm();
          adj_[ids[i]].push_back({ids[j], w, s});
          adj_[ids[j]].push_back({ids[i], w, s});
        }
      }
    }
    for (auto& arcs : adj_) {
      std::stable_sort(arcs.begin(), arcs.end(),
                       [](const Arc& x, const Arc& y) { return x.to < y.to; });
      arcs.erase(std::unique(arcs.begin(), arcs.end(),
                             [](const Arc& x, const Arc& y) { return x.to == y.to; }),
                 arcs.end());
    }
  }

  static void sort_pairs(std::vector<int>& key) {
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t i = 0; i < key.size(); i += 2) pairs.emplace_back(key[i], key[i + 1]);
    std::sort(pairs.begin(), pairs.end());
    key.clear();
    for (auto [l, c] : pairs) {
      key.push_back(l);
      key.push_back(c);
    }
  }

  static void enumerate(int i, int left, std::array<int, kVerts>& c,
                        std::vector<std::array<int, kVerts>>& out) {
    if (i == kVerts - 1) {
      c[i] = left;
      out.push_back(c);
      return;
    }
    for (int v = left; v >= 0; --v) {
      c[i] = v;
      enumerate(i + 1, left - v, c, out);
    }
  }

  const Metric* m_;
  int k_;
  std::vector<Node> nodes_;
  std::vector<std::vector<Arc>> adj_;
  std::vector<std::vector<int>> simplex_nodes_;
  std::map<std::vector<int>, int> grid_index_;
  std::vector<Polygon> polygons_;
};

}  // namespace pl4
