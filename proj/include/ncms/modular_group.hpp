// Integer matrices in Gamma_0(N), cusps and scaling matrices, coset
// representatives, and the Schreier rewriting used to factor group elements
// into a fixed finite generator set.
#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "ncms/common.hpp"

namespace ncms {

struct upper_half_point {
  double x = 0.0, y = 1.0;
  cplx z() const { return {x, y}; }
};

// Point of P^1(Q); (1,0) is infinity.  Normalized: gcd=1, den >= 0,
// and num = 1 when den = 0.
struct p1q {
  long long num = 1, den = 0;
  static p1q infinity() { return {1, 0}; }
  static p1q zero() { return {0, 1}; }
  static p1q of(long long num, long long den);
  bool is_infinity() const { return den == 0; }
  friend bool operator==(const p1q&, const p1q&) = default;
};

struct group_element {
  long long a = 1, b = 0, c = 0, d = 1;

  static group_element make(long long a, long long b, long long c,
                            long long d);  // validates det = 1
  long long det() const { return a * d - b * c; }
  long long trace() const { return a + d; }
  group_element mul(const group_element& o) const;
  group_element inverse() const { return {d, -b, -c, a}; }
  // Sign normalization (-I folded): c > 0, or c = 0 and d = 1.
  group_element normalized() const;
  bool is_identity_up_to_sign() const { return c == 0 && b == 0; }

  friend bool operator==(const group_element&, const group_element&) = default;
};

inline group_element t_power(long long e) { return {1, e, 0, 1}; }
inline group_element s_element() { return {0, -1, 1, 0}; }

upper_half_point apply_moebius(const group_element& g, upper_half_point z);
p1q apply_moebius(const group_element& g, const p1q& p);

enum class cusp_label { infinity, zero };

struct cusp {
  cusp_label label = cusp_label::infinity;
  p1q value = p1q::infinity();
  static cusp infinity() { return {cusp_label::infinity, p1q::infinity()}; }
  static cusp zero() { return {cusp_label::zero, p1q::zero()}; }
  friend bool operator==(const cusp&, const cusp&) = default;
};

// Real det-1 matrix sigma_b mapping infinity to the cusp with unit
// translation width; infinity -> identity, 0 -> [0,-1/sqrt(N); sqrt(N),0].
struct scaling_matrix {
  double a = 1, b = 0, c = 0, d = 1;
  scaling_matrix inverse() const { return {d, -b, -c, a}; }
  cplx apply(cplx z) const { return (a * z + b) / (c * z + d); }
  upper_half_point apply(upper_half_point z) const;
};

// True iff |trace| = 2; throws std::domain_error on +-I (trace test is
// meaningless there).
bool is_parabolic(const group_element& g);

// One continued-fraction letter: S, or T^e.
struct sl2_letter {
  bool s = false;
  long long e = 0;
};

// Word with g = sign * prod(letters) over {S, T^e}.
struct sl2_word {
  std::vector<sl2_letter> letters;
  int sign = 1;
};
sl2_word sl2_decompose(const group_element& g);

// Token of the Schreier rewriting: the coset class the walk is in, the letter
// applied, with T exponents reduced mod the class's T-orbit period.
struct schreier_token {
  int cls = 0;
  bool s_letter = false;
  long long e = 0;  // reduced exponent when !s_letter
};

class gamma0 {
 public:
  explicit gamma0(long long N);  // N >= 1; N = 0 is a domain error

  long long level() const { return level_; }
  bool is_member(const group_element& g) const { return g.c % level_ == 0; }

  // Inequivalent cusps; available for N = 1 ({infinity}) and N prime
  // ({infinity, zero}), a domain error otherwise.
  std::vector<cusp> cusps() const;
  scaling_matrix scaling(const cusp& b) const;

  // One representative per double class of bottom rows in sigma-normalized
  // coordinates: the identity plus rows (c,d), N|c, 0 < c <= cmax,
  // gcd(c,d) = 1, d in [0,c), up to overall sign.
  std::vector<group_element> coset_reps(const cusp& b, double cmax) const;

  // Bottom row of sigma_b^{-1} g sigma_b (integer for members).
  std::pair<long long, long long> normalized_row(const group_element& g,
                                                 const cusp& b) const;
  // Member with the given sigma-normalized bottom row; (0,1) -> identity.
  group_element element_from_row(const cusp& b, long long C, long long D) const;

  // --- Schreier machinery over P^1(Z/N) -----------------------------------
  int p1_size() const;
  int p1_class_of(long long c, long long d) const;
  int root_class() const { return p1_class_of(0, 1); }
  const group_element& class_rep(int cls) const;
  int t_period(int cls) const;
  int step(int cls, bool s_letter, long long e = 1) const;

  // Rewrites g (up to sign) as a product of emitted generators
  // u = rep(cls) * letter * rep(next)^{-1}, one per token, in order.
  std::vector<schreier_token> symbol_word(const group_element& g) const;
  group_element token_element(const schreier_token& tok) const;

 private:
  long long level_;
  void ensure_schreier() const;
  struct schreier_data;
  mutable std::shared_ptr<schreier_data> schreier_;
};

}  // namespace ncms
