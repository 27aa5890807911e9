// Truncated series in noncommuting letters X_1..X_r, Y_1..Y_t where the only
// relations are X_i Y_j = Y_j X_i.  Canonical words carry the X block first;
// the internal order of each block is preserved, never sorted.
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ncms/common.hpp"

namespace ncms {

enum class family : uint8_t { x, ybar };

struct letter {
  family fam;
  uint8_t index;  // 1-based within its family

  friend bool operator==(const letter&, const letter&) = default;
};

struct alphabet {
  int r = 0;  // number of X letters
  int t = 0;  // number of Y letters

  bool contains(letter l) const {
    return l.index >= 1 && l.index <= (l.fam == family::x ? r : t);
  }
  friend bool operator==(const alphabet&, const alphabet&) = default;
};

// A canonical word.  Letters are stored packed: X_i as i, Y_j as 0x80|j.
// Inline storage; degree is bounded by the truncation order in practice.
class word {
 public:
  static constexpr int max_len = 12;

  word() = default;

  static word from_letters(std::span<const letter> ls, const alphabet& a);
  // Canonical form of a raw letter sequence: stable partition, X block first.
  static word canonicalize(std::span<const letter> ls, const alphabet& a);

  int degree() const { return len_; }
  letter at(int i) const;
  bool is_canonical() const;
  int x_degree() const;

  // Concatenation in canonical form (merges the X and Y blocks stably).
  word canonical_concat(const word& rhs) const;

  std::string dotted() const;  // "X1.X3.Y2"; empty word -> ""

  // Order: degree first, then lexicographic with X_1 < .. < X_r < Y_1 < ..
  friend auto operator<=>(const word& a, const word& b) {
    if (auto c = a.len_ <=> b.len_; c != 0) return c;
    for (int i = 0; i < a.len_; ++i)
      if (auto c = a.code_[i] <=> b.code_[i]; c != 0) return c;
    return std::strong_ordering::equal;
  }
  friend bool operator==(const word& a, const word& b) {
    return (a <=> b) == 0;
  }

 private:
  std::array<uint8_t, max_len> code_{};
  uint8_t len_ = 0;
  void push(uint8_t c);
  friend class word_table;
};

// Sparse truncated series: finitely many (word, coefficient) pairs, all of
// degree <= max_degree, kept sorted by word order.
class free_series {
 public:
  free_series(alphabet a, int max_degree);

  static free_series one(alphabet a, int max_degree);

  const alphabet& letters() const { return alphabet_; }
  int max_degree() const { return max_degree_; }

  cplx coeff(const word& w) const;
  void set_coeff(const word& w, cplx v);  // v == 0 erases
  const std::vector<std::pair<word, cplx>>& terms() const { return terms_; }

  friend bool operator==(const free_series&, const free_series&) = default;

 private:
  alphabet alphabet_;
  int max_degree_;
  std::vector<std::pair<word, cplx>> terms_;
};

// Product truncated at degree D (defaults to the common max_degree).
free_series series_mul(const free_series& a, const free_series& b, int D = -1);

// Multiplicative inverse by degree recursion; requires constant term 1.
free_series series_inverse(const free_series& a);

struct approx_report {
  bool equal;
  double max_abs_dev;
  word worst;  // word achieving the largest deviation
};
approx_report series_approx_eq(const free_series& a, const free_series& b,
                               double tol);

std::string series_to_json(const free_series& a);
free_series series_from_json(const std::string& text);

// ---------------------------------------------------------------------------
// Dense kernel layout.  Enumerates every canonical word of degree <= D once,
// so hot loops can hold series as flat coefficient vectors and multiply via a
// precomputed pair -> product index table.  Public semantics stay sparse.
class word_table {
 public:
  word_table(alphabet a, int max_degree);

  int size() const { return static_cast<int>(words_.size()); }
  const word& at(int i) const { return words_[i]; }
  int index_of(const word& w) const;  // -1 if absent
  const alphabet& letters() const { return alphabet_; }
  int max_degree() const { return max_degree_; }

  struct pair_entry {
    int32_t left, right, out;
  };
  // All (i, j, k) with word_k = word_i * word_j, deg_i + deg_j <= D.
  const std::vector<pair_entry>& products() const { return products_; }

  std::vector<cplx> dense(const free_series& s) const;
  free_series sparse(std::span<const cplx> v) const;

  // c = a * b (c may not alias a or b).
  void mul(std::span<const cplx> a, std::span<const cplx> b,
           std::span<cplx> c) const;

 private:
  alphabet alphabet_;
  int max_degree_;
  std::vector<word> words_;            // sorted (degree, lex)
  std::vector<pair_entry> products_;
};

}  // namespace ncms
