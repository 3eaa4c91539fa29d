#include <algorithm>
#include <map>
#include <numeric>
#include <string>

#include "turnscan/mesh.hpp"

namespace turnscan {
namespace {

Edge undirected(std::uint32_t a, std::uint32_t b) { return a < b ? Edge{a, b} : Edge{b, a}; }

struct EdgeUse {
  std::uint32_t count = 0;
  std::uint32_t from = 0, to = 0;  // direction in the first triangle using the edge
};

std::map<Edge, EdgeUse> edge_uses(const TriangleMesh& mesh) {
  std::map<Edge, EdgeUse> uses;
  for (const Triangle& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const std::uint32_t a = t[k], b = t[(k + 1) % 3];
      EdgeUse& u = uses[undirected(a, b)];
      if (u.count++ == 0) {
        u.from = a;
        u.to = b;
      }
    }
  }
  return uses;
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0u); }
  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::uint32_t> parent_;
};

}  // namespace

std::vector<BoundaryLoop> boundary_loops(const TriangleMesh& mesh) {
  const auto uses = edge_uses(mesh);
  std::vector<Edge> non_manifold;
  std::map<std::uint32_t, std::vector<std::uint32_t>> outgoing;
  for (const auto& [edge, use] : uses) {
    if (use.count >= 3) non_manifold.push_back(edge);
    if (use.count == 1) outgoing[use.from].push_back(use.to);
  }
  if (!non_manifold.empty()) {
    std::string what = "boundary_loops: " + std::to_string(non_manifold.size()) + " non-manifold edge(s):";
    for (std::size_t i = 0; i < std::min<std::size_t>(non_manifold.size(), 10); ++i)
      what += " (" + std::to_string(non_manifold[i].first) + "," + std::to_string(non_manifold[i].second) + ")";
    throw NonManifoldError(what, std::move(non_manifold));
  }
  // Every vertex has an even number of boundary edges on an edge-manifold
  // mesh, so walking unused edges always closes. The walk follows triangle
  // winding where it can; inconsistently wound patches fall back to the
  // lowest unused neighbor.
  struct Incident {
    std::uint32_t other;
    bool forward;
    std::size_t edge;
  };
  std::map<std::uint32_t, std::vector<Incident>> incident;
  std::size_t edge_count = 0;
  for (auto& [from, targets] : outgoing) {
    for (std::uint32_t to : targets) {
      incident[from].push_back({to, true, edge_count});
      incident[to].push_back({from, false, edge_count});
      ++edge_count;
    }
  }
  for (auto& [v, list] : incident)
    std::sort(list.begin(), list.end(), [](const Incident& x, const Incident& y) {
      return x.forward != y.forward ? x.forward : x.other < y.other;
    });
  std::vector<std::uint8_t> used(edge_count, 0);
  auto take = [&](std::uint32_t v) -> const Incident* {
    for (const Incident& e : incident[v]) {
      if (used[e.edge]) continue;
      used[e.edge] = 1;
      return &e;
    }
    return nullptr;
  };

  std::vector<BoundaryLoop> loops;
  for (const auto& [start, list] : incident) {
    while (const Incident* first = take(start)) {
      BoundaryLoop loop;
      loop.vertices.push_back(start);
      std::uint32_t cur = first->other;
      while (cur != start) {
        loop.vertices.push_back(cur);
        const Incident* e = take(cur);
        if (!e) break;  // unreachable with even degrees
        cur = e->other;
      }
      const auto lowest = std::min_element(loop.vertices.begin(), loop.vertices.end());
      std::rotate(loop.vertices.begin(), lowest, loop.vertices.end());
      loops.push_back(std::move(loop));
    }
  }
  std::sort(loops.begin(), loops.end(),
            [](const BoundaryLoop& a, const BoundaryLoop& b) { return a.vertices < b.vertices; });
  return loops;
}

MeshAudit mesh_audit(const TriangleMesh& mesh) {
  MeshAudit audit;
  const auto uses = edge_uses(mesh);
  for (const auto& [edge, use] : uses) {
    if (use.count == 1) ++audit.boundary_edges;
    if (use.count >= 3) ++audit.non_manifold_edges;
  }
  std::vector<std::uint8_t> referenced(mesh.vertices.size(), 0);
  DisjointSets sets(mesh.vertices.size());
  for (const Triangle& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      referenced[t[k]] = 1;
      sets.unite(t[k], t[(k + 1) % 3]);
    }
  }
  long vertices = 0;
  for (std::uint32_t v = 0; v < mesh.vertices.size(); ++v) {
    if (!referenced[v]) continue;
    ++vertices;
    if (sets.find(v) == v) ++audit.connected_components;
  }
  audit.euler_characteristic =
      vertices - static_cast<long>(uses.size()) + static_cast<long>(mesh.triangles.size());
  return audit;
}

}  // namespace turnscan
