#include "powergraph/pgraph.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <random>
#include <thread>
#include <unordered_set>

#include "powergraph/canon.hpp"
#include "powergraph/error.hpp"
#include "powergraph/obstruct.hpp"

namespace pg {

const char* mode_name(Mode m) { return m == Mode::PGL ? "pgl" : "glproj"; }

u64 predicted_vertex_count(const GroupContext& ctx) {
  u64 q = ctx.F->q();
  u64 g = gl_order(ctx.n, q);
  if (ctx.mode == Mode::PGL) return g / (q - 1) - 1;
  return g - (q - 1);
}

Matrix canonical(const Matrix& A, Mode mode) {
  if (mode == Mode::GL_PROJ) return A;
  for (fe x : A.a) {
    if (x != 0) return x == 1 ? A : scale(A, A.F->inv(x));
  }
  throw Error(Errc::InvalidVertex, "zero matrix");
}

namespace {

constexpr int kMaxN = 8;

struct DSU {
  std::vector<std::uint32_t> parent, sz;
  explicit DSU(u64 n) : parent(n), sz(n, 1) {
    for (u64 i = 0; i < n; ++i) parent[i] = static_cast<std::uint32_t>(i);
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (sz[a] < sz[b]) std::swap(a, b);
    parent[b] = a;
    sz[a] += sz[b];
  }
};

// Table arithmetic for fields with q <= 256.
struct SmallField {
  unsigned q = 0;
  std::vector<std::uint8_t> add, mul, inv;
  explicit SmallField(const Field& F) : q(static_cast<unsigned>(F.q())) {
    add.resize(q * q);
    mul.resize(q * q);
    inv.assign(q, 0);
    for (unsigned a = 0; a < q; ++a) {
      for (unsigned b = 0; b < q; ++b) {
        add[a * q + b] = static_cast<std::uint8_t>(F.add(a, b));
        mul[a * q + b] = static_cast<std::uint8_t>(F.mul(a, b));
      }
      if (a) inv[a] = static_cast<std::uint8_t>(F.inv(a));
    }
  }
};

using SMat = std::array<std::uint8_t, kMaxN * kMaxN>;

struct Ops {
  const SmallField& K;
  int n;
  u64 q;
  std::vector<u64> place;  // q^(n*n-1-idx)

  Ops(const SmallField& k, int dim) : K(k), n(dim), q(k.q), place(dim * dim) {
    u64 w = 1;
    for (int i = dim * dim - 1; i >= 0; --i) {
      place[i] = w;
      w *= q;
    }
  }
  void mul(const SMat& A, const SMat& B, SMat& C) const {
    const unsigned qq = K.q;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        std::uint8_t s = 0;
        for (int k = 0; k < n; ++k) {
          std::uint8_t x = A[i * kMaxN + k], y = B[k * kMaxN + j];
          if (x && y) s = K.add[s * qq + K.mul[x * qq + y]];
        }
        C[i * kMaxN + j] = s;
      }
    }
  }
  bool is_scalar(const SMat& A) const {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        std::uint8_t x = A[i * kMaxN + j];
        if (i == j ? x != A[0] : x != 0) return false;
      }
    }
    return true;
  }
  bool is_identity(const SMat& A) const { return A[0] == 1 && is_scalar(A); }
  u64 key(const SMat& A) const {
    u64 k = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) k = k * q + A[i * kMaxN + j];
    }
    return k;
  }
  // Key of the PGL-canonical representative.
  u64 canon_key(const SMat& A) const {
    std::uint8_t lead = 0;
    for (int i = 0; i < n && !lead; ++i) {
      for (int j = 0; j < n; ++j) {
        if (A[i * kMaxN + j]) {
          lead = A[i * kMaxN + j];
          break;
        }
      }
    }
    if (lead == 1) return key(A);
    const std::uint8_t* row = &K.mul[K.inv[lead] * K.q];
    u64 k = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) k = k * q + row[A[i * kMaxN + j]];
    }
    return k;
  }
  SMat decode(u64 k) const {
    SMat A{};
    for (int idx = n * n - 1; idx >= 0; --idx) {
      A[(idx / n) * kMaxN + idx % n] = static_cast<std::uint8_t>(k % q);
      k /= q;
    }
    return A;
  }
};

// Row-by-row enumeration in key order, skipping dependent rows.
struct Enumerator {
  const SmallField& K;
  int n;
  Mode mode;
  unsigned q;
  u64 qn;
  std::vector<std::uint8_t> digits;  // qn x n
  std::vector<std::vector<std::uint32_t>> stamp;
  std::vector<std::uint32_t> cur;
  std::vector<std::vector<std::uint32_t>> span;
  std::vector<u64> rows;
  std::vector<u64>& out;
  u64 rowplace;

  Enumerator(const SmallField& k, int dim, Mode m, std::vector<u64>& o)
      : K(k), n(dim), mode(m), q(k.q), out(o) {
    qn = 1;
    for (int i = 0; i < n; ++i) qn *= q;
    digits.resize(qn * n);
    for (u64 c = 0; c < qn; ++c) {
      u64 v = c;
      for (int j = n - 1; j >= 0; --j) {
        digits[c * n + j] = static_cast<std::uint8_t>(v % q);
        v /= q;
      }
    }
    stamp.assign(n + 1, std::vector<std::uint32_t>(qn, 0));
    cur.assign(n + 1, 0);
    span.assign(n + 1, {});
    rows.assign(n, 0);
    rowplace = qn;
  }

  u64 axpy(u64 s, unsigned c, u64 r) const {
    u64 out_code = 0;
    for (int j = 0; j < n; ++j) {
      unsigned d = K.add[digits[s * n + j] * q + K.mul[c * q + digits[r * n + j]]];
      out_code = out_code * q + d;
    }
    return out_code;
  }

  bool leading_one(u64 r) const {
    for (int j = 0; j < n; ++j) {
      if (digits[r * n + j]) return digits[r * n + j] == 1;
    }
    return false;
  }

  bool is_scalar_rows() const {
    std::uint8_t d0 = digits[rows[0] * n + 0];
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        std::uint8_t x = digits[rows[i] * n + j];
        if (i == j ? x != d0 : x != 0) return false;
      }
    }
    return true;
  }

  void run() {
    span[0] = {0};
    ++cur[0];
    stamp[0][0] = cur[0];
    rec(0);
  }

  void rec(int level) {
    if (level == n) {
      if (is_scalar_rows()) return;
      u64 k = 0;
      for (int i = 0; i < n; ++i) k = k * qn + rows[i];
      out.push_back(k);
      return;
    }
    for (u64 r = 1; r < qn; ++r) {
      if (stamp[level][r] == cur[level]) continue;
      if (level == 0 && mode == Mode::PGL && !leading_one(r)) continue;
      rows[level] = r;
      if (level + 1 < n) {
        auto& sp = span[level + 1];
        sp.clear();
        ++cur[level + 1];
        for (u64 s : span[level]) {
          for (unsigned c = 0; c < q; ++c) {
            u64 t = axpy(s, c, r);
            if (stamp[level + 1][t] != cur[level + 1]) {
              stamp[level + 1][t] = cur[level + 1];
              sp.push_back(static_cast<std::uint32_t>(t));
            }
          }
        }
      }
      rec(level + 1);
    }
  }
};

}  // namespace

struct GraphBuilder {
  static void build(Graph& G) {
    const GroupContext& ctx = G.ctx_;
    const GraphConfig& cfg = G.cfg_;
    const Field& F = *ctx.F;
    G.q_ = F.q();
    u64 predicted = predicted_vertex_count(ctx);
    if (predicted > cfg.max_vertices) {
      throw Error(Errc::TooLarge, "group of order " + std::to_string(gl_order(ctx.n, F.q())) + " gives " +
                                      std::to_string(predicted) + " vertices, above the cap of " +
                                      std::to_string(cfg.max_vertices));
    }
    if (ctx.n > kMaxN || F.q() > 256) throw Error(Errc::TooLarge, "enumeration supports n <= 8 and q <= 256");
    SmallField K(F);
    Ops ops(K, ctx.n);
    G.keys_.reserve(predicted);
    Enumerator en(K, ctx.n, ctx.mode, G.keys_);
    en.run();
    if (G.keys_.size() != predicted) throw Error(Errc::Internal, "vertex enumeration count mismatch");

    auto space = try_pow(F.q(), static_cast<unsigned>(ctx.n * ctx.n));
    if (space && *space <= (u64{1} << 26)) {
      G.direct_.assign(*space, UINT32_MAX);
      for (u64 i = 0; i < G.keys_.size(); ++i) G.direct_[G.keys_[i]] = static_cast<std::uint32_t>(i);
    }
    auto lookup = [&G](u64 key) -> std::uint32_t {
      if (!G.direct_.empty()) return G.direct_[key];
      auto it = std::lower_bound(G.keys_.begin(), G.keys_.end(), key);
      if (it == G.keys_.end() || *it != key) return UINT32_MAX;
      return static_cast<std::uint32_t>(it - G.keys_.begin());
    };

    u64 V = G.keys_.size();
    bool keep_adj = V <= cfg.adjacency_cap;
    bool pgl = ctx.mode == Mode::PGL;
    int workers = std::max(1, cfg.workers);
    u64 chunk = (V + workers - 1) / workers;

    // Each worker walks the powers of its vertex range.  With adjacency the
    // edges are merged in a sorted pass; without it every worker keeps a
    // private union-find that is folded in worker order.
    std::vector<std::vector<u64>> wedges(workers);
    std::vector<DSU> wdsu;
    if (!keep_adj) {
      for (int w = 0; w < workers; ++w) wdsu.emplace_back(V);
    }
    auto work = [&](int w) {
      u64 lo = w * chunk, hi = std::min(V, lo + chunk);
      SMat P{}, T{};
      for (u64 i = lo; i < hi; ++i) {
        SMat g = ops.decode(G.keys_[i]);
        P = g;
        for (;;) {
          ops.mul(P, g, T);
          P = T;
          if (pgl) {
            if (ops.is_scalar(P)) break;
          } else {
            if (ops.is_identity(P)) break;
            if (ops.is_scalar(P)) continue;
          }
          std::uint32_t j = lookup(pgl ? ops.canon_key(P) : ops.key(P));
          if (j == UINT32_MAX) throw Error(Errc::Internal, "power not found among vertices");
          if (j == i) continue;
          if (keep_adj) {
            u64 a = std::min<u64>(i, j), b = std::max<u64>(i, j);
            wedges[w].push_back((a << 32) | b);
          } else {
            wdsu[w].unite(static_cast<std::uint32_t>(i), j);
          }
        }
      }
    };
    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::thread> ts;
      for (int w = 0; w < workers; ++w) ts.emplace_back(work, w);
      for (auto& t : ts) t.join();
    }

    DSU dsu(keep_adj ? V : 0);
    DSU* final_dsu = &dsu;
    if (keep_adj) {
      std::vector<u64> all;
      std::size_t total = 0;
      for (auto& e : wedges) total += e.size();
      all.reserve(total);
      for (auto& e : wedges) {
        all.insert(all.end(), e.begin(), e.end());
        std::vector<u64>().swap(e);
      }
      std::sort(all.begin(), all.end());
      all.erase(std::unique(all.begin(), all.end()), all.end());
      G.edge_count_ = all.size();
      std::vector<u64> deg(V + 1, 0);
      for (u64 e : all) {
        deg[e >> 32]++;
        deg[e & 0xffffffffu]++;
      }
      G.offsets_.assign(V + 1, 0);
      for (u64 i = 0; i < V; ++i) G.offsets_[i + 1] = G.offsets_[i] + deg[i];
      G.adj_.resize(G.offsets_[V]);
      std::vector<u64> pos(G.offsets_.begin(), G.offsets_.end() - 1);
      for (u64 e : all) {
        u64 a = e >> 32, b = e & 0xffffffffu;
        G.adj_[pos[a]++] = static_cast<std::uint32_t>(b);
        G.adj_[pos[b]++] = static_cast<std::uint32_t>(a);
        dsu.unite(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b));
      }
      if (V == 0) G.offsets_.clear();
    } else {
      for (int w = 1; w < workers; ++w) {
        for (u64 i = 0; i < V; ++i) wdsu[0].unite(static_cast<std::uint32_t>(i), wdsu[w].find(static_cast<std::uint32_t>(i)));
      }
      final_dsu = &wdsu[0];
    }

    // Components sorted by size desc, then smallest member.
    std::vector<std::uint32_t> root_of(V);
    std::map<std::uint32_t, std::pair<u64, u64>> info;  // root -> (size, min index)
    for (u64 i = 0; i < V; ++i) {
      std::uint32_t r = final_dsu->find(static_cast<std::uint32_t>(i));
      root_of[i] = r;
      auto [it, fresh] = info.emplace(r, std::make_pair(u64{0}, i));
      it->second.first++;
    }
    std::vector<std::pair<std::uint32_t, std::pair<u64, u64>>> order(info.begin(), info.end());
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
      if (a.second.first != b.second.first) return a.second.first > b.second.first;
      return a.second.second < b.second.second;
    });
    std::map<std::uint32_t, int> id_of;
    for (std::size_t c = 0; c < order.size(); ++c) {
      id_of[order[c].first] = static_cast<int>(c);
      G.comps_.push_back({static_cast<int>(c), order[c].second.first, order[c].second.second});
    }
    G.comp_of_.resize(V);
    for (u64 i = 0; i < V; ++i) G.comp_of_[i] = id_of[root_of[i]];
  }
};

Graph Graph::build(const GroupContext& ctx, const GraphConfig& cfg) {
  Graph G;
  G.ctx_ = ctx;
  G.cfg_ = cfg;
  GraphBuilder::build(G);
  return G;
}

Matrix Graph::vertex(u64 i) const {
  int n = ctx_.n;
  Matrix M(ctx_.F, n);
  u64 k = keys_.at(i);
  for (int idx = n * n - 1; idx >= 0; --idx) {
    M.a[idx] = k % q_;
    k /= q_;
  }
  return M;
}

std::optional<u64> Graph::index_of(const Matrix& A0) const {
  if (A0.n != ctx_.n || A0.F != ctx_.F) return std::nullopt;
  if (A0.is_scalar()) return std::nullopt;
  Matrix A = canonical(A0, ctx_.mode);
  u64 k = 0;
  for (fe x : A.a) k = k * q_ + x;
  if (!direct_.empty()) {
    if (k >= direct_.size() || direct_[k] == UINT32_MAX) return std::nullopt;
    return direct_[k];
  }
  auto it = std::lower_bound(keys_.begin(), keys_.end(), k);
  if (it == keys_.end() || *it != k) return std::nullopt;
  return static_cast<u64>(it - keys_.begin());
}

std::pair<const std::uint32_t*, const std::uint32_t*> Graph::neighbors(u64 v) const {
  if (!has_adjacency()) throw Error(Errc::AdjacencyDropped, "adjacency lists were not retained");
  return {adj_.data() + offsets_[v], adj_.data() + offsets_[v + 1]};
}

bool Graph::adjacent(u64 u, u64 v) const {
  auto [b, e] = neighbors(u);
  return std::binary_search(b, e, static_cast<std::uint32_t>(v));
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> Graph::edges() const {
  if (!has_adjacency()) throw Error(Errc::AdjacencyDropped, "adjacency lists were not retained");
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  out.reserve(edge_count_);
  for (u64 u = 0; u < vertex_count(); ++u) {
    for (u64 k = offsets_[u]; k < offsets_[u + 1]; ++k) {
      if (adj_[k] > u) out.emplace_back(static_cast<std::uint32_t>(u), adj_[k]);
    }
  }
  return out;
}

std::vector<u64> Graph::component_vertices(int id) const {
  std::vector<u64> out;
  for (u64 i = 0; i < comp_of_.size(); ++i) {
    if (comp_of_[i] == id) out.push_back(i);
  }
  return out;
}

std::vector<int> Graph::bfs(u64 s) const {
  if (!has_adjacency()) throw Error(Errc::AdjacencyDropped, "adjacency lists were not retained");
  std::vector<int> dist(vertex_count(), -1);
  std::vector<std::uint32_t> queue{static_cast<std::uint32_t>(s)};
  dist[s] = 0;
  for (std::size_t h = 0; h < queue.size(); ++h) {
    std::uint32_t u = queue[h];
    for (u64 k = offsets_[u]; k < offsets_[u + 1]; ++k) {
      std::uint32_t v = adj_[k];
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

namespace {

int ecc_with(const Graph& G, u64 s, std::vector<int>& dist, std::vector<std::uint32_t>& queue) {
  queue.clear();
  queue.push_back(static_cast<std::uint32_t>(s));
  dist[s] = 0;
  int ecc = 0;
  for (std::size_t h = 0; h < queue.size(); ++h) {
    std::uint32_t u = queue[h];
    auto [b, e] = G.neighbors(u);
    for (auto it = b; it != e; ++it) {
      if (dist[*it] < 0) {
        dist[*it] = dist[u] + 1;
        ecc = std::max(ecc, dist[*it]);
        queue.push_back(*it);
      }
    }
  }
  for (auto v : queue) dist[v] = -1;
  return ecc;
}

std::string block_key(const Matrix& A) {
  std::string k;
  for (auto& b : similarity_blocks(A)) {
    for (fe c : b.irr.c) k += std::to_string(c) + ",";
    k += ":" + std::to_string(b.chain) + "|";
  }
  return k;
}

}  // namespace

int Graph::eccentricity(u64 v) const {
  if (!has_adjacency()) throw Error(Errc::AdjacencyDropped, "adjacency lists were not retained");
  std::vector<int> dist(vertex_count(), -1);
  std::vector<std::uint32_t> queue;
  return ecc_with(*this, v, dist, queue);
}

DiameterResult Graph::diameter_exact(int comp_id, bool use_symmetry) const {
  if (!has_adjacency()) throw Error(Errc::AdjacencyDropped, "adjacency lists were not retained");
  auto verts = component_vertices(comp_id);
  std::vector<u64> sources;
  if (use_symmetry && verts.size() > 2000) {
    std::unordered_set<std::string> seen;
    for (u64 v : verts) {
      if (seen.insert(block_key(vertex(v))).second) sources.push_back(v);
    }
  } else {
    sources = verts;
  }
  std::vector<int> best(std::max(1, cfg_.workers), 0);
  int workers = std::max(1, cfg_.workers);
  auto run = [&](int w) {
    std::vector<int> dist(vertex_count(), -1);
    std::vector<std::uint32_t> queue;
    for (std::size_t i = w; i < sources.size(); i += workers) best[w] = std::max(best[w], ecc_with(*this, sources[i], dist, queue));
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> ts;
    for (int w = 0; w < workers; ++w) ts.emplace_back(run, w);
    for (auto& t : ts) t.join();
  }
  return {*std::max_element(best.begin(), best.end()), true};
}

DiameterResult Graph::diameter_sampled(int comp_id, int count, u64 seed) const {
  if (!has_adjacency()) throw Error(Errc::AdjacencyDropped, "adjacency lists were not retained");
  auto verts = component_vertices(comp_id);
  std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * static_cast<u64>(comp_id + 1)));
  std::vector<int> dist(vertex_count(), -1);
  std::vector<std::uint32_t> queue;
  int best = 0;
  for (int i = 0; i < count; ++i) {
    u64 s = verts[rng() % verts.size()];
    best = std::max(best, ecc_with(*this, s, dist, queue));
  }
  return {best, false};
}

DiameterResult Graph::diameter(int comp_id) const {
  const Component& c = comps_.at(comp_id);
  if (c.size > cfg_.exact_diameter_cap) return diameter_sampled(comp_id, cfg_.sample_sources, cfg_.seed);
  return diameter_exact(comp_id, cfg_.symmetry_sources);
}

// ------------------------------------------------------------ is_edge

namespace {

bool power_of(const Matrix& B, const Matrix& A, Mode mode) {
  // Is B = A^k for some k >= 2 (modulo scalars in PGL mode)?
  Matrix target = canonical(B, mode);
  Matrix P = A;
  for (u64 k = 2;; ++k) {
    P = P * A;
    if (mode == Mode::PGL) {
      if (P.is_scalar()) return false;
      if (canonical(P, mode) == target) return true;
    } else {
      if (P.is_identity()) return false;
      if (P == target) return true;
    }
  }
}

}  // namespace

bool is_edge(const GroupContext& ctx, const Matrix& A, const Matrix& B) {
  for (const Matrix* M : {&A, &B}) {
    if (M->n != ctx.n || M->F != ctx.F) throw Error(Errc::ContextMismatch, "matrix outside the context");
    if (!is_invertible(*M) || M->is_scalar()) throw Error(Errc::InvalidVertex, "central or singular matrix is not a vertex");
  }
  if (canonical(A, ctx.mode) == canonical(B, ctx.mode)) return false;
  return power_of(B, A, ctx.mode) || power_of(A, B, ctx.mode);
}

bool quotient_check(const Graph& gl, const Graph& pgl) {
  const auto& a = gl.context();
  const auto& b = pgl.context();
  if (a.n != b.n || a.F != b.F || a.mode != Mode::GL_PROJ || b.mode != Mode::PGL) {
    throw Error(Errc::ContextMismatch, "quotient_check needs GL_PROJ and PGL graphs of the same (n, q)");
  }
  std::vector<u64> image(gl.vertex_count());
  for (u64 i = 0; i < gl.vertex_count(); ++i) {
    auto j = pgl.index_of(gl.vertex(i));
    if (!j) return false;
    image[i] = *j;
  }
  for (auto [u, v] : gl.edges()) {
    u64 pu = image[u], pv = image[v];
    if (pu != pv && !pgl.adjacent(pu, pv)) return false;
  }
  std::vector<int> comp_image(gl.components().size(), -1);
  for (u64 i = 0; i < gl.vertex_count(); ++i) {
    int c = gl.component_of(i);
    int pc = pgl.component_of(image[i]);
    if (comp_image[c] < 0) comp_image[c] = pc;
    if (comp_image[c] != pc) return false;
  }
  return true;
}

// ----------------------------------------------- census-only lookups

int census_big_tag(int n, const Matrix& A) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<Graph>> cache;
  std::shared_ptr<Graph> G;
  {
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(n);
    if (it != cache.end()) G = it->second;
  }
  if (!G) {
    GroupContext ctx{n, Field::make(2, 1), Mode::PGL};
    GraphConfig cfg;
    cfg.adjacency_cap = 0;
    G = std::make_shared<Graph>(Graph::build(ctx, cfg));
    std::lock_guard<std::mutex> lk(mu);
    cache.emplace(n, G);
  }
  Matrix t1 = Matrix::identity(A.F, n), t2 = Matrix::identity(A.F, n);
  t1(0, 1) = 1;
  t2(0, 1) = 1;
  t2(2, 3) = 1;
  auto ia = G->index_of(A);
  if (!ia) return 0;
  int c = G->component_of(*ia);
  if (c == G->component_of(*G->index_of(t1))) return 1;
  if (c == G->component_of(*G->index_of(t2))) return 2;
  return 0;
}

}  // namespace pg
