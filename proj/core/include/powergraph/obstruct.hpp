#pragma once

#include <optional>
#include <string>
#include <vector>

#include "powergraph/matfq.hpp"

namespace pg {

enum class Label { JORDAN_TYPE, IRREDUCIBLE, DIAGONALIZABLE, QUASI_DIAG_2, EXTRA_IRRED_2, BIG };
enum class DiamBound { Exactly1, AtMost2, AtMost16, AtMost20 };

const char* label_name(Label l);
const char* diam_name(DiamBound d);
int diam_limit(DiamBound d);

struct ComponentClass {
  Label label = Label::BIG;
  std::optional<u64> predicted_size;  // vertices in the PGL reduced power graph
  DiamBound diameter = DiamBound::AtMost16;
  std::string witness;
  // Outside the theorem's range; the label follows the explicit small-group
  // descriptions (q = 2, n in {3,4,5}) and is backed by brute force.
  bool census_only = false;
  // For census-only BIG labels at q = 2, n in {4,5}: 1 for the component of
  // diag(J_2, I), 2 for the component of diag(J_2, J_2), 0 if neither.
  int big_tag = 0;

  std::string display() const;
};

// Per-mode size.  In the projectively reduced GL graph Jordan-type and
// irreducible components contain every scalar multiple and are (q-1) times
// larger; diagonalizable ones keep their size and occur q-1 times as often.
std::optional<u64> predicted_size_for(const ComponentClass& c, bool pgl_mode, u64 q);

ComponentClass classify(int n, u64 q, const Matrix& A);

bool obstruction_diameter_is_one(u64 q, int n, Label label);

// Smallest prime factor of q^n - 1 coprime to q - 1, or nullopt for (3, 2).
std::optional<u64> prime_evasion(u64 q, int n);

enum class ConsecutiveKind { FERMAT_PRIME, MERSENNE_SUCCESSOR, NINE, NOT_CONSECUTIVE };
const char* consecutive_name(ConsecutiveKind k);
ConsecutiveKind consecutive_pp_kind(u64 q);

struct PrimeFacts {
  u64 q = 0;
  int n = 0;
  // factorization of q^d - 1 for d = 1..2n (empty where it overflows)
  std::vector<std::vector<std::pair<u64, int>>> qd_minus_1;
  ConsecutiveKind kind = ConsecutiveKind::NOT_CONSECUTIVE;
};
PrimeFacts prime_facts(u64 q, int n);

// Census lookup used for q = 2, n in {4,5}; implemented alongside pgraph.
int census_big_tag(int n, const Matrix& A);

}  // namespace pg
