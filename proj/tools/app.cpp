#include "app.hpp"

#include <algorithm>
#include <random>
#include <thread>

#include "powergraph/canon.hpp"
#include "powergraph/error.hpp"
#include "powergraph/obstruct.hpp"

namespace pg::app {

namespace {

// Runs fn(i) for i in [0, count) on up to `workers` threads.  Callers write
// into slot i only, so the merged result does not depend on scheduling.
template <class Fn>
void parallel_for(u64 count, int workers, Fn fn) {
  int w = std::max(1, std::min<int>(workers, static_cast<int>(std::min<u64>(count, 1024))));
  if (w == 1) {
    for (u64 i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(w));
  for (int t = 0; t < w; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (u64 i = static_cast<u64>(t); i < count; i += static_cast<u64>(w)) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::mt19937_64 sample_rng(u64 seed, u64 index, u64 stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

Matrix random_invertible(const FieldPtr& F, int n, std::mt19937_64& rng) {
  for (;;) {
    Matrix M(F, n);
    for (auto& x : M.a) x = rng() % F->q();
    if (is_invertible(M)) return M;
  }
}

fe random_unit(const FieldPtr& F, std::mt19937_64& rng) { return 1 + rng() % (F->q() - 1); }

ordered_json context_json(int n, u64 q, Mode mode) {
  return ordered_json{{"n", n}, {"q", q}, {"mode", mode_name(mode)}};
}

bool label_has_diameter_check(const RunConfig& cfg) { return cfg.mode == Mode::PGL || cfg.q == 2; }

}  // namespace

FieldPtr field_for(u64 q) {
  auto pp = prime_power(q);
  if (!pp) throw Error(Errc::NotPrimePower, std::to_string(q) + " is not a prime power");
  return Field::make(pp->first, static_cast<unsigned>(pp->second));
}

Mode parse_mode(const std::string& s) {
  std::string t;
  for (char c : s) {
    if (c != '_' && c != '-') t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (t == "pgl") return Mode::PGL;
  if (t == "glproj" || t == "gl") return Mode::GL_PROJ;
  throw Error(Errc::ParseError, "unknown mode '" + s + "' (expected glproj or pgl)");
}

GraphConfig graph_config(const RunConfig& cfg) {
  GraphConfig g;
  g.max_vertices = cfg.max_vertices;
  g.adjacency_cap = cfg.adjacency_cap;
  g.exact_diameter_cap = cfg.exact_diameter_cap;
  g.sample_sources = cfg.sample_sources;
  g.seed = cfg.seed;
  g.workers = cfg.workers;
  return g;
}

// ------------------------------------------------------------ census

CensusResult census_of(const Graph& G, const RunConfig& cfg) {
  const GroupContext& ctx = G.context();
  int n = ctx.n;
  u64 q = ctx.F->q();
  bool pgl = ctx.mode == Mode::PGL;
  bool classifiable = n >= 3;
  bool in_range = (q != 2 && n >= 3) || (q == 2 && n >= 6);
  CensusResult res;
  auto& mis = res.mismatches;

  const auto& comps = G.components();
  std::vector<std::optional<ComponentClass>> cls(comps.size());
  std::vector<DiameterResult> diam(comps.size());
  parallel_for(comps.size(), cfg.workers, [&](u64 i) {
    if (classifiable) cls[i] = classify(n, q, G.vertex(comps[i].representative));
    if (G.has_adjacency()) diam[i] = G.diameter(comps[i].id);
  });

  ordered_json jc = ordered_json::array();
  std::map<std::string, u64> by_class;
  std::vector<int> big_ids;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const Component& c = comps[i];
    ordered_json e;
    e["id"] = c.id;
    e["size"] = c.size;
    if (G.has_adjacency()) {
      e["diameter"] = {{"value", diam[i].value}, {"exact", diam[i].exact}};
    } else {
      e["diameter"] = nullptr;
    }
    e["representative"] = G.vertex(c.representative).format();
    std::string name = cls[i] ? cls[i]->display() : "unclassified";
    e["class"] = name;
    ++by_class[name];
    if (cls[i]) {
      const ComponentClass& k = *cls[i];
      std::string where = "component " + std::to_string(c.id) + " (" + name + ")";
      auto pred = predicted_size_for(k, pgl, q);
      if (pred) {
        e["predicted_size"] = *pred;
        if (*pred != c.size) mis.push_back(where + ": size " + std::to_string(c.size) + ", predicted " + std::to_string(*pred));
      } else {
        big_ids.push_back(c.id);
      }
      e["diameter_bound"] = diam_name(k.diameter);
      // Census-only big components carry no diameter prediction.
      bool predicted_diameter = !(k.census_only && k.label == Label::BIG);
      if (!predicted_diameter) e["diameter_bound"] = nullptr;
      if (G.has_adjacency() && label_has_diameter_check(cfg) && predicted_diameter) {
        int v = diam[i].value;
        bool bad = v > diam_limit(k.diameter);
        if (k.diameter == DiamBound::Exactly1 && diam[i].exact && v != 1) bad = true;
        if (bad) mis.push_back(where + ": diameter " + std::to_string(v) + " exceeds " + diam_name(k.diameter));
      }
      e["witness"] = k.witness;
    }
    jc.push_back(std::move(e));
  }

  // All BIG vertices share one component (two named ones for q = 2, n = 4, 5).
  if (classifiable) {
    bool two_named = q == 2 && (n == 4 || n == 5);
    if (two_named) {
      std::map<int, int> tags;
      for (int id : big_ids) ++tags[cls[static_cast<std::size_t>(id)]->big_tag];
      if (tags[1] != 1 || tags[2] != 1 || big_ids.size() != 2) {
        mis.push_back("expected exactly the two named big components, found " + std::to_string(big_ids.size()) + " unpredicted components");
      }
    } else if (in_range && big_ids.size() > 1) {
      mis.push_back("BIG vertices split over " + std::to_string(big_ids.size()) + " components");
    } else if (!in_range && !big_ids.empty()) {
      mis.push_back(std::to_string(big_ids.size()) + " components have no census prediction");
    }
  }

  // Every vertex carries the label of its component.
  std::string vertex_check = "representatives";
  if (classifiable && G.vertex_count() <= cfg.vertex_check_cap) {
    vertex_check = "all";
    std::vector<std::string> bad(G.vertex_count());
    parallel_for(G.vertex_count(), cfg.workers, [&](u64 v) {
      ComponentClass k = classify(n, q, G.vertex(v));
      const ComponentClass& r = *cls[static_cast<std::size_t>(G.component_of(v))];
      if (k.label != r.label || k.big_tag != r.big_tag) {
        bad[v] = "vertex " + std::to_string(v) + " is " + k.display() + " in a " + r.display() + " component";
      }
    });
    for (auto& b : bad) {
      if (!b.empty()) mis.push_back(std::move(b));
    }
  }

  if (cfg.paper_check && q == 2 && n == 3) {
    std::map<u64, u64> sizes;
    for (const auto& c : comps) ++sizes[c.size];
    std::map<u64, u64> expect{{2, 28}, {3, 21}, {6, 8}};
    if (comps.size() != 57 || sizes != expect) mis.push_back("small-group check: GL_3(F_2) should have 21 components of size 3, 8 of size 6, 28 of size 2");
  }

  ordered_json& r = res.report;
  r["context"] = context_json(n, q, ctx.mode);
  r["vertices"] = G.vertex_count();
  if (G.has_adjacency()) r["edges"] = G.edge_count();
  r["component_count"] = comps.size();
  r["components"] = std::move(jc);
  ordered_json bc = ordered_json::object();
  for (auto& [k, v] : by_class) bc[k] = v;
  r["by_class"] = std::move(bc);
  r["vertex_check"] = vertex_check;
  r["ok"] = mis.empty();
  r["mismatches"] = mis;
  return res;
}

CensusResult run_census(const RunConfig& cfg) {
  GroupContext ctx{cfg.n, field_for(cfg.q), cfg.mode};
  Graph G = Graph::build(ctx, graph_config(cfg));
  return census_of(G, cfg);
}

// ------------------------------------------------------------ verify-theorem

TheoremSummary run_verify_theorem(const RunConfig& cfg) {
  if (!in_routing_range(cfg.n, cfg.q)) {
    throw Error(Errc::OutOfRange, "verify-theorem needs (q != 2, n >= 3) or (q = 2, n >= 6)");
  }
  FieldPtr F = field_for(cfg.q);
  int n = cfg.n;
  u64 q = cfg.q;
  TheoremSummary s;
  int generic_bound = to_pivot_bound(n, q);

  struct Outcome {
    Branch branch = Branch::AlreadyPivot;
    int length = 0;
    bool counted = false;
    std::string failure;
  };
  auto route_one = [&](const Matrix& A) {
    Outcome o;
    try {
      PivotRoute r = to_pivot_path(A);
      o.branch = r.branch;
      o.counted = true;
      if (r.path) {
        o.length = static_cast<int>(r.path->length());
        if (o.length > generic_bound) o.failure = std::string(branch_name(r.branch)) + " certificate longer than " + std::to_string(generic_bound);
        if (!verify_path(*r.path)) o.failure = "certificate fails verification";
      }
    } catch (const Error& e) {
      o.failure = e.what();
    }
    if (!o.failure.empty()) o.failure += " for " + A.format();
    return o;
  };

  u64 N = static_cast<u64>(std::max(0, cfg.samples));
  std::vector<Outcome> out(N);
  parallel_for(N, cfg.workers, [&](u64 i) {
    auto rng = sample_rng(cfg.seed, i, 0);
    Matrix A = random_invertible(F, n, rng);
    while (A.is_scalar()) A = random_invertible(F, n, rng);
    out[i] = route_one(A);
  });
  auto absorb = [&](const Outcome& o) {
    if (o.counted) {
      auto& b = s.branches[o.branch];
      ++b.hits;
      b.max_length = std::max(b.max_length, o.length);
    }
    if (!o.failure.empty()) s.failures.push_back(o.failure);
  };
  for (const auto& o : out) absorb(o);
  s.samples = N;

  // Reachable branches the samples missed are exercised through a built-in
  // witness under a random conjugation.
  ordered_json coverage = ordered_json::array();
  auto reach = branch_reachability(n, q);
  for (std::size_t bi = 0; bi < reach.size(); ++bi) {
    const BranchReach& br = reach[bi];
    ordered_json e{{"branch", branch_name(br.branch)}, {"reachable", br.reachable}};
    u64 sampled = s.branches.count(br.branch) ? s.branches[br.branch].hits : 0;
    e["sample_hits"] = sampled;
    if (br.reachable && sampled == 0) {
      auto w = branch_witness(br.branch, n, F);
      bool hit = false;
      if (w) {
        auto rng = sample_rng(cfg.seed, bi, 1);
        Matrix X = random_invertible(F, n, rng);
        Outcome o = route_one(X * *w * mat_inv(X));
        hit = o.counted && o.branch == br.branch;
        absorb(o);
      }
      e["witness_exercised"] = hit;
      if (!hit) s.failures.push_back(std::string("reachable branch ") + branch_name(br.branch) + " was not exercised");
    }
    if (!br.reachable) e["reason"] = br.reason;
    coverage.push_back(std::move(e));
  }

  // Random pivot pairs; for q != 2 even pairs are diagonal pivots and odd
  // pairs Jordan pivots.
  u64 M = static_cast<u64>(std::max(0, cfg.pivot_pairs));
  std::vector<std::pair<int, std::string>> pout(M);
  PivotPair ref = reference_pivots(n, F);
  parallel_for(M, cfg.workers, [&](u64 i) {
    auto rng = sample_rng(cfg.seed, i, 2);
    auto make = [&]() {
      Matrix X = random_invertible(F, n, rng);
      Matrix T = ref.J;
      if (q != 2 && i % 2 == 0) {
        PivotSpec sp;
        sp.x = random_unit(F, rng);
        do sp.y = random_unit(F, rng);
        while (sp.y == sp.x);
        sp.m = 1 + static_cast<int>(rng() % static_cast<u64>(n - 2));
        T = pivot_matrix(sp, n, F);
      }
      return X * T * mat_inv(X);
    };
    Matrix P1 = make(), P2 = make();
    try {
      PathCertificate c = pivot_path(P1, P2);
      pout[i].first = static_cast<int>(c.length());
      if (c.length() > 8) pout[i].second = "pivot path longer than 8";
      if (!verify_path(c)) pout[i].second = "pivot path fails verification";
    } catch (const Error& e) {
      pout[i].second = e.what();
    }
    if (!pout[i].second.empty()) pout[i].second += " for " + P1.format() + " -> " + P2.format();
  });
  for (auto& [len, fail] : pout) {
    s.pivot_max = std::max(s.pivot_max, len);
    if (!fail.empty()) s.failures.push_back(fail);
  }
  s.pivot_pairs = M;

  ordered_json& r = s.report;
  r["context"] = context_json(n, q, Mode::PGL);
  r["seed"] = cfg.seed;
  r["samples"] = N;
  r["to_pivot_bound"] = generic_bound;
  ordered_json jb = ordered_json::array();
  for (const auto& [b, st] : s.branches) {
    jb.push_back({{"branch", branch_name(b)}, {"hits", st.hits}, {"max_length", st.max_length}, {"bound", branch_bound(b)}});
  }
  r["branches"] = std::move(jb);
  r["coverage"] = std::move(coverage);
  r["pivot_pairs"] = {{"count", M}, {"max_length", s.pivot_max}, {"bound", 8}};
  r["ok"] = s.failures.empty();
  r["failures"] = s.failures;
  return s;
}

// ------------------------------------------------------------ export-edges

EdgeExport export_edges(const RunConfig& cfg) {
  GroupContext ctx{cfg.n, field_for(cfg.q), cfg.mode};
  Graph G = Graph::build(ctx, graph_config(cfg));
  EdgeExport ex;
  auto edges = G.edges();
  ex.edge_count = edges.size();
  for (auto [u, v] : edges) {
    ex.edges += std::to_string(u);
    ex.edges += ' ';
    ex.edges += std::to_string(v);
    ex.edges += '\n';
  }
  ordered_json verts = ordered_json::array();
  for (u64 i = 0; i < G.vertex_count(); ++i) verts.push_back(G.vertex(i).format());
  ex.index["context"] = context_json(cfg.n, cfg.q, cfg.mode);
  ex.index["vertices"] = std::move(verts);
  return ex;
}

// ------------------------------------------------------------ certificates

ordered_json certificate_json(const PathCertificate& c) {
  ordered_json j;
  j["context"] = context_json(c.ctx.n, c.ctx.F->q(), c.ctx.mode);
  ordered_json v = ordered_json::array();
  for (const auto& M : c.vertices) v.push_back(M.format());
  j["vertices"] = std::move(v);
  ordered_json st = ordered_json::array();
  for (const auto& s : c.steps) st.push_back({{"k", s.k}, {"dir", s.forward ? "forward" : "backward"}});
  j["steps"] = std::move(st);
  j["branches"] = c.branches;
  return j;
}

PathCertificate certificate_from_json(const nlohmann::json& j, const RunConfig& cfg) {
  try {
    int n = cfg.n;
    u64 q = cfg.q;
    Mode mode = cfg.mode;
    if (j.contains("context")) {
      const auto& c = j.at("context");
      if (c.contains("n")) n = c.at("n").get<int>();
      if (c.contains("q")) q = c.at("q").get<u64>();
      if (c.contains("mode")) mode = parse_mode(c.at("mode").get<std::string>());
    }
    PathCertificate cert;
    cert.ctx = GroupContext{n, field_for(q), mode};
    for (const auto& v : j.at("vertices")) cert.vertices.push_back(Matrix::parse(cert.ctx.F, v.get<std::string>()));
    for (const auto& s : j.at("steps")) {
      PathStep st;
      st.k = s.at("k").get<u64>();
      std::string dir = s.value("dir", std::string("forward"));
      if (dir != "forward" && dir != "backward") throw Error(Errc::ParseError, "step dir must be forward or backward");
      st.forward = dir == "forward";
      cert.steps.push_back(st);
    }
    if (j.contains("branches")) cert.branches = j.at("branches").get<std::vector<std::string>>();
    return cert;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("certificate JSON: ") + e.what());
  }
}

std::string certificate_text(const PathCertificate& c) {
  std::string s;
  for (std::size_t i = 0; i < c.vertices.size(); ++i) {
    s += std::to_string(i) + ": " + c.vertices[i].format() + "\n";
    if (i < c.steps.size()) {
      const PathStep& st = c.steps[i];
      s += st.forward ? "   | next = this^" + std::to_string(st.k) + "\n" : "   | this = next^" + std::to_string(st.k) + "\n";
    }
  }
  s += "length " + std::to_string(c.length()) + "; branches:";
  for (const auto& b : c.branches) s += " " + b;
  s += "\n";
  return s;
}

}  // namespace pg::app
