// powergraph: census, classification and routing for power graphs of
// GL_n(F_q) and PGL_n(F_q).
//
// Exit codes: 0 success, 1 prediction mismatch or failed verification,
// 2 usage or input error, 3 resource cap.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "app.hpp"
#include "powergraph/error.hpp"
#include "powergraph/obstruct.hpp"

namespace {

using namespace pg;
using pg::app::ordered_json;

int exit_code_for(Errc e) {
  switch (e) {
    case Errc::TooLarge:
    case Errc::AdjacencyDropped:
      return 3;
    case Errc::Internal:
    case Errc::InternalBoundViolation:
      return 1;
    default:
      return 2;
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::ParseError, "cannot write " + path);
  f << text;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

}  // namespace

int main(int argc, char** argv) {
  app::RunConfig cfg;
  std::string mode = "pgl";
  std::string out;

  CLI::App cli{"Power graphs of GL_n(F_q) and PGL_n(F_q)"};
  cli.require_subcommand(1);
  cli.fallthrough();
  cli.option_defaults()->always_capture_default();
  cli.add_option("--n", cfg.n, "Matrix dimension");
  cli.add_option("--q", cfg.q, "Field size (prime power)");
  cli.add_option("--mode", mode, "glproj or pgl");
  cli.add_option("--seed", cfg.seed, "Seed for every sampled quantity");
  cli.add_option("--workers", cfg.workers, "Worker threads")->check(CLI::Range(1, 256));
  cli.add_option("--max-vertices", cfg.max_vertices, "Vertex cap for enumeration");
  cli.add_option("--adjacency-cap", cfg.adjacency_cap, "Drop adjacency lists above this many vertices");
  cli.add_option("--exact-diameter-cap", cfg.exact_diameter_cap, "Largest component with an exact diameter");
  cli.add_option("--sample-sources", cfg.sample_sources, "BFS sources for sampled diameters");
  cli.add_option("--out", out, "Output file");

  auto* census = cli.add_subcommand("census", "Enumerate the graph and label every component");
  census->add_option("n", cfg.n);
  census->add_option("q", cfg.q);
  census->add_option("mode", mode);
  census->add_flag("--paper-check", cfg.paper_check, "Also assert the explicit small-group descriptions");

  std::string matrix_a, matrix_b, verify_file;
  auto* classify_cmd = cli.add_subcommand("classify", "Component class of one element");
  classify_cmd->add_option("n", cfg.n)->required();
  classify_cmd->add_option("q", cfg.q)->required();
  classify_cmd->add_option("matrix", matrix_a, "Rows separated by ';', entries by ','")->required();

  auto* route = cli.add_subcommand("route", "Path certificate between two elements, or to a pivot");
  route->add_option("n", cfg.n);
  route->add_option("q", cfg.q);
  route->add_option("A", matrix_a);
  route->add_option("B", matrix_b);
  route->add_option("--verify-only", verify_file, "Re-check a certificate stored as JSON");

  auto* theorem = cli.add_subcommand("verify-theorem", "Sampled check of the routing bounds");
  theorem->add_option("n", cfg.n);
  theorem->add_option("q", cfg.q);
  theorem->add_option("--samples", cfg.samples, "Random elements to route");
  theorem->add_option("--pairs", cfg.pivot_pairs, "Random pivot pairs to connect");

  auto* edges = cli.add_subcommand("export-edges", "Sorted edge list plus a vertex index");
  edges->add_option("n", cfg.n);
  edges->add_option("q", cfg.q);
  edges->add_option("mode", mode);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = cli.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    cfg.mode = app::parse_mode(mode);

    if (census->parsed()) {
      auto res = app::run_census(cfg);
      if (out.empty()) {
        std::cout << dump(res.report);
      } else {
        write_text(out, dump(res.report));
        std::cout << "vertices " << res.report["vertices"] << ", components " << res.report["component_count"] << "\n";
        for (auto& [k, v] : res.report["by_class"].items()) std::cout << "  " << k << ": " << v << "\n";
      }
      for (const auto& m : res.mismatches) std::cerr << "mismatch: " << m << "\n";
      return res.ok() ? 0 : 1;
    }

    if (classify_cmd->parsed()) {
      FieldPtr F = app::field_for(cfg.q);
      Matrix A = Matrix::parse(F, matrix_a);
      ComponentClass c = classify(cfg.n, cfg.q, A);
      auto size = predicted_size_for(c, cfg.mode == Mode::PGL, cfg.q);
      std::cout << "label: " << c.display() << "\n";
      std::cout << "predicted size: " << (size ? std::to_string(*size) : std::string("unknown")) << " (" << mode_name(cfg.mode) << ")\n";
      std::cout << "diameter: " << diam_name(c.diameter) << "\n";
      std::cout << "witness: " << c.witness << "\n";
      return 0;
    }

    if (route->parsed()) {
      if (!verify_file.empty()) {
        std::ifstream f(verify_file);
        if (!f) throw Error(Errc::ParseError, "cannot read " + verify_file);
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(f);
        } catch (const nlohmann::json::exception& e) {
          throw Error(Errc::ParseError, std::string("certificate JSON: ") + e.what());
        }
        PathCertificate cert = app::certificate_from_json(j, cfg);
        PathCheck chk = verify_path(cert);
        if (chk) {
          std::cout << "valid: " << cert.length() << " steps\n";
          return 0;
        }
        std::cout << "invalid at index " << chk.failed_index << ": " << chk.reason << "\n";
        return 1;
      }
      if (matrix_a.empty()) throw Error(Errc::ParseError, "route needs a matrix A (and optionally B)");
      FieldPtr F = app::field_for(cfg.q);
      Matrix A = Matrix::parse(F, matrix_a);
      std::optional<PathCertificate> cert;
      if (matrix_b.empty()) {
        PivotRoute r = to_pivot_path(A);
        std::cout << "branch: " << branch_name(r.branch) << "\n";
        if (r.obstruction) std::cout << "obstruction: " << r.obstruction->display() << "\n";
        cert = r.path;
      } else {
        Matrix B = Matrix::parse(F, matrix_b);
        ConnectResult r = connect(A, B, cfg.mode);
        if (!r.path) {
          std::cout << "DIFFERENT_COMPONENT: " << r.a.display() << " / " << r.b.display() << "\n";
          return 0;
        }
        cert = r.path;
      }
      if (cert) {
        std::cout << app::certificate_text(*cert);
        if (!out.empty()) write_text(out, dump(app::certificate_json(*cert)));
      }
      return 0;
    }

    if (theorem->parsed()) {
      auto s = app::run_verify_theorem(cfg);
      for (const auto& [b, st] : s.branches) {
        std::cout << branch_name(b) << ": hits " << st.hits << ", max length " << st.max_length << " (bound " << branch_bound(b) << ")\n";
      }
      for (const auto& e : s.report["coverage"]) {
        if (!e["reachable"].get<bool>()) std::cout << e["branch"].get<std::string>() << ": unreachable, " << e["reason"].get<std::string>() << "\n";
      }
      std::cout << "pivot pairs: " << s.pivot_pairs << ", max length " << s.pivot_max << " (bound 8)\n";
      if (!out.empty()) write_text(out, dump(s.report));
      for (const auto& f : s.failures) std::cerr << "failure: " << f << "\n";
      std::cout << (s.ok() ? "ok" : "FAILED") << "\n";
      return s.ok() ? 0 : 1;
    }

    if (edges->parsed()) {
      auto ex = app::export_edges(cfg);
      if (out.empty()) {
        std::cout << ex.edges;
      } else {
        write_text(out, ex.edges);
        write_text(out + ".index.json", dump(ex.index));
        std::cout << ex.edge_count << " edges written to " << out << "\n";
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  }
  return 2;
}
