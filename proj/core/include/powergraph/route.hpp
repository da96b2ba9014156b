#pragma once

#include <optional>
#include <string>
#include <vector>

#include "powergraph/matfq.hpp"
#include "powergraph/obstruct.hpp"
#include "powergraph/pgraph.hpp"

namespace pg {

// One edge of a certificate.  forward: vertices[i+1] == vertices[i]^k,
// otherwise vertices[i] == vertices[i+1]^k.  Equality is exact in GL_PROJ
// mode and modulo scalars in PGL mode.
struct PathStep {
  u64 k = 1;
  bool forward = true;
  friend bool operator==(const PathStep&, const PathStep&) = default;
};

struct PathCertificate {
  GroupContext ctx;
  std::vector<Matrix> vertices;
  std::vector<PathStep> steps;
  std::vector<std::string> branches;  // construction tags, informational only

  std::size_t length() const { return steps.size(); }
  bool empty() const { return steps.empty(); }
  const Matrix& front() const { return vertices.front(); }
  const Matrix& back() const { return vertices.back(); }
  PathCertificate reversed() const;
  // Appends `tail`, which must start where this certificate ends.
  void append(const PathCertificate& tail);
};

struct PathCheck {
  bool ok = true;
  int failed_index = -1;  // vertex or step index of the first failure
  std::string reason;
  explicit operator bool() const { return ok; }
};

PathCheck verify_path(const PathCertificate& cert);

// Canonical PGL representatives; consecutive vertices equal modulo scalars
// are merged and repeated vertices are cut out.
PathCertificate project_to_pgl(const PathCertificate& cert);
// Cuts out the segment between two occurrences of the same vertex.
void remove_cycles(PathCertificate& cert);

// Theorem range for routing: (q != 2, n >= 3) or (q == 2, n >= 6).
bool in_routing_range(int n, u64 q);

// ----------------------------------------------------------- pivots

struct PivotPair {
  Matrix J;  // I + E_{0,n-1}
  Matrix A;  // diag(1, x, 1, ...) with x the smallest element != 0, 1; for q = 2
             // the block [[1,1],[1,0]] on coordinates 1, 2
};
PivotPair reference_pivots(int n, const FieldPtr& F);

// diag(x I_{n-m-1}, y I_m, x)
struct PivotSpec {
  fe x = 1;
  fe y = 0;
  int m = 1;
};
Matrix pivot_matrix(const PivotSpec& s, int n, const FieldPtr& F);
// Spec with m no larger than n/2 (ties broken towards the smaller x code),
// and X with X * pivot_matrix(spec) * X^-1 == P.
PivotSpec pivot_spec_of(const Matrix& P, Matrix* X = nullptr);

// X with X * T * X^-1 == P; throws PreconditionViolated if not similar.
Matrix conjugator(const Matrix& P, const Matrix& T);

struct CommFactorization {
  std::string pattern;           // e.g. "J,A,J,A,J"; letters name the designated matrices
  std::vector<Matrix> factors;   // M1..M5
  std::vector<Matrix> designated;  // matrix each factor commutes with
  std::optional<Matrix> permutation;  // product equals P * X when set
};

// Commutation of every factor and the product identity.
bool check_factorization(const CommFactorization& f, const Matrix& X);

// X in Comm(J) Comm(A) Comm(J) Comm(A) Comm(J).
CommFactorization comm_factorize_jordan(const Matrix& X);
// X (or P X) in Comm(A1) Comm(J) Comm(A) Comm(J) Comm(A2); q != 2, n >= 3.
// For n = 3 both specs must have m = 1.
CommFactorization comm_factorize_pivot(const Matrix& X, const PivotSpec& A1, const PivotSpec& A2);

PathCertificate pivot_path(const Matrix& P1, const Matrix& P2);

// ----------------------------------------------------------- path to pivot

enum class Branch {
  AlreadyPivot,
  UnipotentPower,
  PrimeEvasion,
  IrreducibleChar,
  IrreducibleCharSpecial,  // q = 3, n = 4
  DiagonalOdd,
  DiagonalEven,
  SamePrimePower,
  SamePrimePowerSpecial,  // q = 3, n = 4
  EvenOrder2,
  IrreducibleFactor2,
  CompositeOrder2,
  PrimeOrder2,
  MersenneOrder2,
  ObstructionJordan,
  ObstructionIrreducible,
  ObstructionDiagonal,
  ObstructionExtraIrreducible2,
  ObstructionQuasiDiagonal2,
};
inline constexpr int kBranchCount = 19;

const char* branch_name(Branch b);
bool branch_is_obstruction(Branch b);
int branch_bound(Branch b);

struct PivotRoute {
  Branch branch = Branch::AlreadyPivot;
  std::optional<PathCertificate> path;       // ends at a pivot (q != 2) or Jordan pivot (q = 2)
  std::optional<ComponentClass> obstruction;  // set when the dispatch ends at an isolated class
};

PivotRoute to_pivot_path(const Matrix& A);

// Largest to_pivot_path length over all branches for (n, q).
int to_pivot_bound(int n, u64 q);
// 16, or 20 for q = 2 and for (q, n) = (3, 4).
int connect_bound(int n, u64 q);

struct ConnectResult {
  std::optional<PathCertificate> path;  // unset when the elements are in different components
  ComponentClass a, b;
};

ConnectResult connect(const Matrix& A, const Matrix& B, Mode mode = Mode::PGL);

// Exponent k >= 1 with B == A^k (exact or modulo scalars), if any.
std::optional<u64> power_exponent(const Matrix& A, const Matrix& B, Mode mode);

// ----------------------------------------------------------- branch coverage

struct BranchReach {
  Branch branch;
  bool reachable = false;
  std::string reason;
};
// Which dispatch branches can occur for (n, q), decided from the field and
// prime facts alone.
std::vector<BranchReach> branch_reachability(int n, u64 q);

// A matrix taking `b` (up to conjugation), or nullopt if no witness is built
// in for this branch at (n, q).
std::optional<Matrix> branch_witness(Branch b, int n, const FieldPtr& F);

}  // namespace pg
