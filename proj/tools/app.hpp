#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "powergraph/pgraph.hpp"
#include "powergraph/route.hpp"

namespace pg::app {

using nlohmann::ordered_json;

struct RunConfig {
  int n = 3;
  u64 q = 2;
  Mode mode = Mode::PGL;
  u64 seed = 1;
  int workers = 1;
  u64 max_vertices = u64{1} << 24;
  u64 adjacency_cap = 2'000'000;
  u64 exact_diameter_cap = 200'000;
  int sample_sources = 64;
  int samples = 1000;
  int pivot_pairs = 100;
  bool paper_check = false;
  // Classify every vertex, not only component representatives, up to this
  // many vertices.
  u64 vertex_check_cap = 300'000;
};

FieldPtr field_for(u64 q);
Mode parse_mode(const std::string& s);
GraphConfig graph_config(const RunConfig& cfg);

struct CensusResult {
  ordered_json report;
  std::vector<std::string> mismatches;
  bool ok() const { return mismatches.empty(); }
};

CensusResult run_census(const RunConfig& cfg);
// Component report for an already built graph.
CensusResult census_of(const Graph& G, const RunConfig& cfg);

struct BranchStats {
  u64 hits = 0;
  int max_length = 0;
};

struct TheoremSummary {
  std::map<Branch, BranchStats> branches;
  u64 samples = 0;
  u64 pivot_pairs = 0;
  int pivot_max = 0;
  std::vector<std::string> failures;
  ordered_json report;
  bool ok() const { return failures.empty(); }
};

TheoremSummary run_verify_theorem(const RunConfig& cfg);

struct EdgeExport {
  std::string edges;  // "u v\n" lines
  ordered_json index;  // vertex id -> matrix string
  u64 edge_count = 0;
};

EdgeExport export_edges(const RunConfig& cfg);

ordered_json certificate_json(const PathCertificate& c);
PathCertificate certificate_from_json(const nlohmann::json& j, const RunConfig& cfg);
std::string certificate_text(const PathCertificate& c);

}  // namespace pg::app
