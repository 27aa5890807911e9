#include "ncms/modular_group.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace ncms {

namespace {

long long gcd_ll(long long a, long long b) { return std::gcd(a, b); }

// Nearest-integer division, ties toward zero.
long long round_div(long long a, long long b) {
  long long q = a / b, r = a % b;
  if (2 * std::abs(r) > std::abs(b)) q += (a < 0) == (b < 0) ? 1 : -1;
  return q;
}

bool is_prime(long long n) {
  if (n < 2) return false;
  for (long long p = 2; p * p <= n; ++p)
    if (n % p == 0) return false;
  return true;
}

// x with a*x + c*y = 1 for coprime (a, c); returns (x, y).
std::pair<long long, long long> ext_gcd_pair(long long a, long long c) {
  long long old_r = a, r = c, old_s = 1, s = 0, old_t = 0, t = 1;
  while (r != 0) {
    long long q = old_r / r;
    std::tie(old_r, r) = std::pair{r, old_r - q * r};
    std::tie(old_s, s) = std::pair{s, old_s - q * s};
    std::tie(old_t, t) = std::pair{t, old_t - q * t};
  }
  if (old_r < 0) {
    old_s = -old_s;
    old_t = -old_t;
    old_r = -old_r;
  }
  if (old_r != 1) throw std::invalid_argument("arguments not coprime");
  return {old_s, old_t};
}

}  // namespace

p1q p1q::of(long long num, long long den) {
  if (num == 0 && den == 0) throw std::invalid_argument("0/0 is not in P1(Q)");
  long long g = gcd_ll(std::abs(num), std::abs(den));
  num /= g;
  den /= g;
  if (den < 0 || (den == 0 && num < 0)) {
    num = -num;
    den = -den;
  }
  return {num, den};
}

group_element group_element::make(long long a, long long b, long long c,
                                  long long d) {
  group_element g{a, b, c, d};
  if (g.det() != 1) throw std::invalid_argument("matrix must have det 1");
  return g;
}

group_element group_element::mul(const group_element& o) const {
  return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c,
          c * o.b + d * o.d};
}

group_element group_element::normalized() const {
  if (c < 0 || (c == 0 && d < 0)) return {-a, -b, -c, -d};
  return *this;
}

upper_half_point apply_moebius(const group_element& g, upper_half_point z) {
  if (z.y <= 0) throw std::domain_error("point not in the upper half plane");
  cplx w = (cplx(double(g.a)) * z.z() + double(g.b)) /
           (cplx(double(g.c)) * z.z() + double(g.d));
  return {w.real(), w.imag()};
}

p1q apply_moebius(const group_element& g, const p1q& p) {
  return p1q::of(g.a * p.num + g.b * p.den, g.c * p.num + g.d * p.den);
}

upper_half_point scaling_matrix::apply(upper_half_point z) const {
  cplx w = apply(z.z());
  return {w.real(), w.imag()};
}

bool is_parabolic(const group_element& g) {
  if (g.is_identity_up_to_sign() && std::abs(g.a) == 1)
    throw std::domain_error("parabolicity undefined for +-identity");
  return std::abs(g.trace()) == 2;
}

sl2_word sl2_decompose(const group_element& g) {
  if (g.det() != 1) throw std::invalid_argument("not in SL2(Z)");
  sl2_word w;
  group_element m = g;
  // Left-peel letters: m <- letter^{-1} * m, pushing the letter, until
  // m = +-T^e.  Each S step swaps |a| and |c| after a is reduced mod c.
  while (m.c != 0) {
    long long q = round_div(m.a, m.c);
    if (q != 0) {
      w.letters.push_back({false, q});
      m = t_power(-q).mul(m);
    }
    w.letters.push_back({true, 0});
    m = s_element().inverse().mul(m);
  }
  // m = (a, b; 0, d) with a = d = +-1: m = sign * T^(a*b).
  long long e = m.a * m.b;
  if (e != 0) w.letters.push_back({false, e});
  w.sign = m.a > 0 ? 1 : -1;
  return w;
}

// --- Schreier data over P^1(Z/N) -------------------------------------------

struct gamma0::schreier_data {
  long long N;
  // canonical pair (c,d) -> class index
  std::map<std::pair<long long, long long>, int> index;
  std::vector<std::pair<long long, long long>> canon;  // class -> pair
  std::vector<group_element> reps;
  std::vector<int> t_next, s_next, period;

  std::pair<long long, long long> canonical(long long c, long long d) const {
    if (N == 1) return {0, 0};
    c = ((c % N) + N) % N;
    d = ((d % N) + N) % N;
    std::pair<long long, long long> best{N, N};
    for (long long u = 1; u < N; ++u) {
      if (gcd_ll(u, N) != 1) continue;
      best = std::min(best, std::pair{(u * c) % N, (u * d) % N});
    }
    return best;
  }
};

gamma0::gamma0(long long N) : level_(N) {
  if (N < 1) throw std::domain_error("level must be a positive integer");
}

std::vector<cusp> gamma0::cusps() const {
  if (level_ == 1) return {cusp::infinity()};
  if (is_prime(level_)) return {cusp::infinity(), cusp::zero()};
  throw std::domain_error("cusp list only provided for level 1 or prime");
}

scaling_matrix gamma0::scaling(const cusp& b) const {
  if (b.label == cusp_label::infinity) return {};
  double rt = std::sqrt(double(level_));
  return {0.0, -1.0 / rt, rt, 0.0};
}

std::vector<group_element> gamma0::coset_reps(const cusp& b,
                                              double cmax) const {
  if (b.label == cusp_label::zero && !is_prime(level_) && level_ != 1)
    throw std::domain_error("cusp 0 machinery requires prime level");
  std::vector<group_element> out;
  out.push_back({});  // identity double class, row (0,1)
  long long climit = static_cast<long long>(std::floor(cmax));
  for (long long c = level_; c <= climit; c += level_)
    for (long long d = 0; d < c; ++d)
      if (gcd_ll(c, d) == 1) out.push_back(element_from_row(b, c, d));
  return out;
}

std::pair<long long, long long> gamma0::normalized_row(const group_element& g,
                                                       const cusp& b) const {
  if (!is_member(g)) throw std::invalid_argument("element not in the group");
  // sigma_b^{-1} g sigma_b has integer entries for members; its bottom row is
  // (c, d) at infinity and (-N b, a) at zero.
  auto row = b.label == cusp_label::infinity
                 ? std::pair{g.c, g.d}
                 : std::pair{-level_ * g.b, g.a};
  if (row.first < 0 || (row.first == 0 && row.second < 0)) {
    row.first = -row.first;
    row.second = -row.second;
  }
  return row;
}

group_element gamma0::element_from_row(const cusp& b, long long C,
                                       long long D) const {
  if (C == 0) {
    if (std::abs(D) != 1) throw std::invalid_argument("row not unimodular");
    return {};
  }
  if (C % level_ != 0 || gcd_ll(std::abs(C), std::abs(D)) != 1)
    throw std::invalid_argument("row not a normalized coset row");
  if (b.label == cusp_label::infinity) {
    // bottom row (C, D); a D - b C = 1, a reduced mod C for small entries.
    auto [a, mb] = ext_gcd_pair(D, C);  // a*D + mb*C = 1
    long long bb = -mb;
    long long k = round_div(a, C);
    a -= k * C;
    bb -= k * D;
    return group_element::make(a, bb, C, D);
  }
  // top row (a, b) = (D, -C/N); bottom row (N*y, x) with x*D + y*C = 1.
  long long bN = -C / level_;
  auto [x, y] = ext_gcd_pair(D, C);
  if (D != 0) {  // shift (x, y) -> (x + mC, y - mD) to keep entries small
    long long m = round_div(y, D);
    x += m * C;
    y -= m * D;
  }
  return group_element::make(D, bN, level_ * y, x);
}

void gamma0::ensure_schreier() const {
  if (schreier_) return;
  auto sd = std::make_shared<schreier_data>();
  sd->N = level_;
  const long long N = level_;
  // Discover classes orbit-first: whenever a class is new, close its whole
  // T-orbit immediately with chain representatives R, RT, RT^2, ...  Then
  // every T-step generator is a power of a conjugated translation (trivial
  // symbol); the S-step generators carry all the content.
  std::vector<int> s_frontier;
  auto find = [&](long long c, long long d) {
    auto it = sd->index.find(sd->canonical(c, d));
    return it == sd->index.end() ? -1 : it->second;
  };
  auto add_class = [&](long long c, long long d, const group_element& rep) {
    int idx = static_cast<int>(sd->canon.size());
    sd->index.emplace(sd->canonical(c, d), idx);
    sd->canon.push_back(sd->canonical(c, d));
    sd->reps.push_back(rep);
    return idx;
  };
  auto discover = [&](long long c, long long d, const group_element& rep) {
    if (find(c, d) >= 0) return;
    s_frontier.push_back(add_class(c, d, rep));
    long long cc = c, dd = d;
    group_element walk = rep;
    while (true) {
      long long nd = ((cc + dd) % N + N) % N;  // T edge: (c, d) -> (c, c+d)
      if (find(cc, nd) >= 0) break;
      walk = walk.mul(t_power(1));
      s_frontier.push_back(add_class(cc, nd, walk));
      dd = nd;
    }
  };
  discover(0, 1, group_element{});
  for (size_t head = 0; head < s_frontier.size(); ++head) {
    int i = s_frontier[head];
    auto [c, d] = sd->canon[i];
    // S edge: (c, d) -> (d, -c).
    discover(d, ((-c) % N + N) % N, sd->reps[i].mul(s_element()));
  }
  int n = static_cast<int>(sd->canon.size());
  sd->t_next.resize(n);
  sd->s_next.resize(n);
  sd->period.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    auto [c, d] = sd->canon[i];
    sd->t_next[i] = sd->index.at(sd->canonical(c, c + d));
    sd->s_next[i] = sd->index.at(sd->canonical(d, -c));
  }
  for (int i = 0; i < n; ++i) {
    int j = i, p = 0;
    do {
      j = sd->t_next[j];
      ++p;
    } while (j != i);
    sd->period[i] = p;
  }
  schreier_ = std::move(sd);
}

int gamma0::p1_size() const {
  ensure_schreier();
  return static_cast<int>(schreier_->canon.size());
}

int gamma0::p1_class_of(long long c, long long d) const {
  ensure_schreier();
  auto it = schreier_->index.find(schreier_->canonical(c, d));
  if (it == schreier_->index.end())
    throw std::invalid_argument("row has no P1 class at this level");
  return it->second;
}

const group_element& gamma0::class_rep(int cls) const {
  ensure_schreier();
  return schreier_->reps.at(cls);
}

int gamma0::t_period(int cls) const {
  ensure_schreier();
  return schreier_->period.at(cls);
}

int gamma0::step(int cls, bool s_letter, long long e) const {
  ensure_schreier();
  if (s_letter) return schreier_->s_next.at(cls);
  long long p = schreier_->period.at(cls);
  long long k = ((e % p) + p) % p;
  int j = cls;
  for (long long i = 0; i < k; ++i) j = schreier_->t_next[j];
  return j;
}

std::vector<schreier_token> gamma0::symbol_word(const group_element& g) const {
  if (!is_member(g))
    throw std::invalid_argument("element not in Gamma_0(N)");
  ensure_schreier();
  sl2_word w = sl2_decompose(g);
  std::vector<schreier_token> out;
  int cls = root_class();
  for (const auto& l : w.letters) {
    if (l.s) {
      out.push_back({cls, true, 0});
      cls = step(cls, true);
    } else {
      long long p = schreier_->period.at(cls);
      long long e = ((l.e % p) + p) % p;
      out.push_back({cls, false, e});
      cls = step(cls, false, e);
    }
  }
  if (cls != root_class())
    throw std::logic_error("Schreier walk did not return to the root class");
  return out;
}

group_element gamma0::token_element(const schreier_token& tok) const {
  ensure_schreier();
  group_element r = class_rep(tok.cls);
  group_element letter = tok.s_letter ? s_element() : t_power(tok.e);
  int next = step(tok.cls, tok.s_letter, tok.e);
  group_element u = r.mul(letter).mul(class_rep(next).inverse());
  if (!is_member(u))
    throw std::logic_error("Schreier generator escaped the group");
  return u.normalized();
}

}  // namespace ncms
