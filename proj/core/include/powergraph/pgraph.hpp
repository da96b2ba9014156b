#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "powergraph/matfq.hpp"

namespace pg {

enum class Mode { GL_PROJ, PGL };
const char* mode_name(Mode m);  // "glproj" / "pgl"

struct GroupContext {
  int n = 0;
  FieldPtr F;
  Mode mode = Mode::PGL;
};

struct GraphConfig {
  u64 max_vertices = u64{1} << 24;
  u64 adjacency_cap = 2'000'000;
  u64 exact_diameter_cap = 200'000;
  int sample_sources = 64;
  u64 seed = 1;
  int workers = 1;
  // Exact diameters of large components take BFS sources from one vertex per
  // similarity class; conjugation is a graph automorphism.
  bool symmetry_sources = true;
};

// Vertex count of the reduced graph: |GL| - |Z| or |PGL| - 1.
u64 predicted_vertex_count(const GroupContext& ctx);

struct Component {
  int id = 0;
  u64 size = 0;
  u64 representative = 0;  // smallest vertex index
};

struct DiameterResult {
  int value = 0;
  bool exact = true;
};

// Canonical representative: identity map in GL_PROJ mode, first nonzero
// row-major entry scaled to 1 in PGL mode.
Matrix canonical(const Matrix& A, Mode mode);

class Graph {
 public:
  static Graph build(const GroupContext& ctx, const GraphConfig& cfg = {});

  const GroupContext& context() const { return ctx_; }
  const GraphConfig& config() const { return cfg_; }
  u64 vertex_count() const { return keys_.size(); }
  Matrix vertex(u64 i) const;
  std::optional<u64> index_of(const Matrix& A) const;  // canonicalizes first

  bool has_adjacency() const { return !offsets_.empty(); }
  u64 edge_count() const { return edge_count_; }
  std::pair<const std::uint32_t*, const std::uint32_t*> neighbors(u64 v) const;
  bool adjacent(u64 u, u64 v) const;
  // Sorted (u, v) pairs with u < v; throws AdjacencyDropped.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges() const;

  const std::vector<Component>& components() const { return comps_; }
  int component_of(u64 v) const { return comp_of_[v]; }
  std::vector<u64> component_vertices(int id) const;

  DiameterResult diameter(int comp_id) const;  // per config thresholds
  DiameterResult diameter_exact(int comp_id, bool use_symmetry) const;
  DiameterResult diameter_sampled(int comp_id, int sources, u64 seed) const;
  // BFS distances from v (-1 where unreachable).
  std::vector<int> bfs(u64 v) const;
  int eccentricity(u64 v) const;

 private:
  GroupContext ctx_;
  GraphConfig cfg_;
  u64 q_ = 0;
  std::vector<u64> keys_;
  std::vector<std::uint32_t> direct_;  // key -> index when the key space is small
  std::vector<u64> offsets_;
  std::vector<std::uint32_t> adj_;
  u64 edge_count_ = 0;
  std::vector<int> comp_of_;
  std::vector<Component> comps_;

  friend struct GraphBuilder;
};

bool is_edge(const GroupContext& ctx, const Matrix& A, const Matrix& B);
bool quotient_check(const Graph& gl, const Graph& pgl);

}  // namespace pg
