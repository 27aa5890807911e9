#include "ncms/free_series.hpp"

#include <algorithm>
#include <map>

#include "json.hpp"

namespace ncms {

namespace {

uint8_t pack(letter l) {
  return l.fam == family::x ? l.index : static_cast<uint8_t>(0x80 | l.index);
}

letter unpack(uint8_t c) {
  return c & 0x80 ? letter{family::ybar, static_cast<uint8_t>(c & 0x7f)}
                  : letter{family::x, c};
}

void check_letter(letter l, const alphabet& a) {
  if (l.index < 1 || !a.contains(l))
    throw std::invalid_argument("letter index outside alphabet");
}

}  // namespace

void word::push(uint8_t c) {
  if (len_ >= max_len) throw std::invalid_argument("word exceeds max length");
  code_[len_++] = c;
}

word word::from_letters(std::span<const letter> ls, const alphabet& a) {
  word w;
  for (letter l : ls) {
    check_letter(l, a);
    w.push(pack(l));
  }
  if (!w.is_canonical())
    throw std::invalid_argument("letter sequence is not canonical");
  return w;
}

word word::canonicalize(std::span<const letter> ls, const alphabet& a) {
  // Stable partition: X block first, each family keeps its internal order.
  word w;
  for (letter l : ls) {
    check_letter(l, a);
    if (l.fam == family::x) w.push(pack(l));
  }
  for (letter l : ls)
    if (l.fam == family::ybar) w.push(pack(l));
  return w;
}

letter word::at(int i) const {
  if (i < 0 || i >= len_) throw std::out_of_range("letter position");
  return unpack(code_[i]);
}

bool word::is_canonical() const {
  for (int i = 1; i < len_; ++i)
    if ((code_[i - 1] & 0x80) && !(code_[i] & 0x80)) return false;
  return true;
}

int word::x_degree() const {
  int k = 0;
  while (k < len_ && !(code_[k] & 0x80)) ++k;
  return k;
}

word word::canonical_concat(const word& rhs) const {
  word out;
  int lx = x_degree(), rx = rhs.x_degree();
  for (int i = 0; i < lx; ++i) out.push(code_[i]);
  for (int i = 0; i < rx; ++i) out.push(rhs.code_[i]);
  for (int i = lx; i < len_; ++i) out.push(code_[i]);
  for (int i = rx; i < rhs.len_; ++i) out.push(rhs.code_[i]);
  return out;
}

std::string word::dotted() const {
  std::string s;
  for (int i = 0; i < len_; ++i) {
    if (i) s += '.';
    letter l = unpack(code_[i]);
    s += (l.fam == family::x ? 'X' : 'Y');
    s += std::to_string(static_cast<int>(l.index));
  }
  return s;
}

free_series::free_series(alphabet a, int max_degree)
    : alphabet_(a), max_degree_(max_degree) {
  if (a.r < 0 || a.t < 0 || max_degree < 0 || max_degree > word::max_len)
    throw std::invalid_argument("bad alphabet or truncation degree");
}

free_series free_series::one(alphabet a, int max_degree) {
  free_series s(a, max_degree);
  s.set_coeff(word{}, 1.0);
  return s;
}

cplx free_series::coeff(const word& w) const {
  auto it = std::lower_bound(
      terms_.begin(), terms_.end(), w,
      [](const auto& p, const word& k) { return p.first < k; });
  return it != terms_.end() && it->first == w ? it->second : cplx{};
}

void free_series::set_coeff(const word& w, cplx v) {
  if (w.degree() > max_degree_)
    throw std::invalid_argument("word degree exceeds series truncation");
  for (int i = 0; i < w.degree(); ++i) check_letter(w.at(i), alphabet_);
  if (!w.is_canonical()) throw std::invalid_argument("word is not canonical");
  auto it = std::lower_bound(
      terms_.begin(), terms_.end(), w,
      [](const auto& p, const word& k) { return p.first < k; });
  bool present = it != terms_.end() && it->first == w;
  if (v == cplx{}) {
    if (present) terms_.erase(it);
  } else if (present) {
    it->second = v;
  } else {
    terms_.insert(it, {w, v});
  }
}

free_series series_mul(const free_series& a, const free_series& b, int D) {
  if (!(a.letters() == b.letters()))
    throw std::invalid_argument("alphabet mismatch in product");
  if (D < 0) D = std::min(a.max_degree(), b.max_degree());
  std::map<word, cplx> acc;
  for (const auto& [u, au] : a.terms()) {
    if (u.degree() > D) continue;
    for (const auto& [v, bv] : b.terms()) {
      if (u.degree() + v.degree() > D) continue;
      acc[u.canonical_concat(v)] += au * bv;
    }
  }
  free_series out(a.letters(), D);
  for (const auto& [w, c] : acc)
    if (c != cplx{}) out.set_coeff(w, c);
  return out;
}

free_series series_inverse(const free_series& a) {
  cplx c0 = a.coeff(word{});
  if (std::abs(c0 - 1.0) > 1e-14)
    throw std::domain_error("series_inverse requires constant term 1");
  const int D = a.max_degree();
  // b_0 = 1, b_d = -sum_{1<=k<=d} (a-1)_k * b_{d-k}; the recursion fills b by
  // total degree, so every product on the right is already known.
  free_series b = free_series::one(a.letters(), D);
  for (int d = 1; d <= D; ++d) {
    std::map<word, cplx> layer;
    for (const auto& [u, au] : a.terms()) {
      int k = u.degree();
      if (k < 1 || k > d) continue;
      for (const auto& [v, bv] : b.terms()) {
        if (v.degree() != d - k) continue;
        layer[u.canonical_concat(v)] -= au * bv;
      }
    }
    for (const auto& [w, c] : layer) b.set_coeff(w, c);
  }
  return b;
}

approx_report series_approx_eq(const free_series& a, const free_series& b,
                               double tol) {
  approx_report rep{true, 0.0, word{}};
  auto scan = [&](const free_series& lhs, const free_series& rhs) {
    for (const auto& [w, c] : lhs.terms()) {
      double dev = std::abs(c - rhs.coeff(w));
      if (dev > rep.max_abs_dev) {
        rep.max_abs_dev = dev;
        rep.worst = w;
      }
    }
  };
  scan(a, b);
  scan(b, a);
  rep.equal = rep.max_abs_dev <= tol;
  return rep;
}

std::string series_to_json(const free_series& a) {
  nlohmann::json j;
  j["alphabet"] = {{"x", a.letters().r}, {"y", a.letters().t}};
  j["D"] = a.max_degree();
  auto terms = nlohmann::json::array();
  for (const auto& [w, c] : a.terms())  // storage is (degree, lex) sorted
    terms.push_back(
        {{"word", w.dotted()}, {"re", c.real()}, {"im", c.imag()}});
  j["terms"] = std::move(terms);
  return j.dump(2);
}

free_series series_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  alphabet a{j.at("alphabet").at("x").get<int>(),
             j.at("alphabet").at("y").get<int>()};
  free_series s(a, j.at("D").get<int>());
  for (const auto& t : j.at("terms")) {
    std::string dotted = t.at("word").get<std::string>();
    std::vector<letter> ls;
    size_t pos = 0;
    while (pos < dotted.size()) {
      size_t dot = dotted.find('.', pos);
      std::string tok = dotted.substr(pos, dot == std::string::npos
                                               ? std::string::npos
                                               : dot - pos);
      if (tok.size() < 2 || (tok[0] != 'X' && tok[0] != 'Y'))
        throw std::invalid_argument("bad word token: " + tok);
      letter l{tok[0] == 'X' ? family::x : family::ybar,
               static_cast<uint8_t>(std::stoi(tok.substr(1)))};
      ls.push_back(l);
      if (dot == std::string::npos) break;
      pos = dot + 1;
    }
    s.set_coeff(word::from_letters(ls, a),
                cplx(t.at("re").get<double>(), t.at("im").get<double>()));
  }
  return s;
}

word_table::word_table(alphabet a, int max_degree)
    : alphabet_(a), max_degree_(max_degree) {
  if (max_degree < 0 || max_degree > word::max_len)
    throw std::invalid_argument("bad word_table degree");
  // Enumerate X-block length cx, Y-block length cy, cx+cy <= D, all index
  // assignments.  Sorted afterwards into (degree, lex) order.
  std::vector<letter> buf;
  auto emit_y = [&](auto&& self, int cy) -> void {
    if (cy == 0) {
      words_.push_back(word::canonicalize(buf, alphabet_));
      return;
    }
    for (int j = 1; j <= alphabet_.t; ++j) {
      buf.push_back({family::ybar, static_cast<uint8_t>(j)});
      self(self, cy - 1);
      buf.pop_back();
    }
  };
  auto emit_x = [&](auto&& self, int cx, int cy) -> void {
    if (cx == 0) {
      emit_y(emit_y, cy);
      return;
    }
    for (int i = 1; i <= alphabet_.r; ++i) {
      buf.push_back({family::x, static_cast<uint8_t>(i)});
      self(self, cx - 1, cy);
      buf.pop_back();
    }
  };
  for (int d = 0; d <= max_degree; ++d)
    for (int cx = 0; cx <= d; ++cx) emit_x(emit_x, cx, d - cx);
  std::sort(words_.begin(), words_.end());
  for (int i = 0; i < size(); ++i)
    for (int j = 0; j < size(); ++j) {
      if (words_[i].degree() + words_[j].degree() > max_degree) continue;
      int k = index_of(words_[i].canonical_concat(words_[j]));
      products_.push_back({i, j, k});
    }
}

int word_table::index_of(const word& w) const {
  auto it = std::lower_bound(words_.begin(), words_.end(), w);
  if (it == words_.end() || !(*it == w)) return -1;
  return static_cast<int>(it - words_.begin());
}

std::vector<cplx> word_table::dense(const free_series& s) const {
  std::vector<cplx> v(size());
  for (const auto& [w, c] : s.terms()) {
    int i = index_of(w);
    if (i < 0) throw std::invalid_argument("series word outside table");
    v[i] = c;
  }
  return v;
}

free_series word_table::sparse(std::span<const cplx> v) const {
  free_series s(alphabet_, max_degree_);
  for (int i = 0; i < size(); ++i)
    if (v[i] != cplx{}) s.set_coeff(words_[i], v[i]);
  return s;
}

void word_table::mul(std::span<const cplx> a, std::span<const cplx> b,
                     std::span<cplx> c) const {
  std::fill(c.begin(), c.end(), cplx{});
  for (const auto& p : products_) c[p.out] += a[p.left] * b[p.right];
}

}  // namespace ncms
