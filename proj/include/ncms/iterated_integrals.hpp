// Iterated integrals of weight-2 cusp forms along geodesics, their
// generating series in noncommuting letters, and the symbol map
// gamma -> I_{gamma a}^a * conj-J_{gamma a}^a  computed either directly or
// through a generator factorization that scales to large coset sweeps.
#pragma once

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "ncms/common.hpp"
#include "ncms/cusp_forms.hpp"
#include "ncms/free_series.hpp"
#include "ncms/modular_group.hpp"

namespace ncms {

// Endpoint of an integration path: an interior point or a standard cusp.
class path_point {
 public:
  static path_point interior(upper_half_point z) { return path_point{z}; }
  static path_point at_infinity() { return path_point{cusp_label::infinity}; }
  static path_point at_zero() { return path_point{cusp_label::zero}; }

  bool is_cusp() const { return std::holds_alternative<cusp_label>(v_); }
  cusp_label cusp_at() const { return std::get<cusp_label>(v_); }
  upper_half_point point() const { return std::get<upper_half_point>(v_); }

 private:
  explicit path_point(std::variant<upper_half_point, cusp_label> v) : v_(v) {}
  std::variant<upper_half_point, cusp_label> v_;
};

// Endpoint in a fixed chart: finite with Im > 0, or i*infinity.
struct chart_point {
  bool at_infinity = false;
  cplx z{0.0, 1.0};
  static chart_point inf() { return {true, {}}; }
  static chart_point finite(cplx z);
  double height() const;  // +inf at the cusp
};

// Antiderivative state of the nested exponential integrals: constant plus
// terms coef * e(freq * w), all frequencies positive integers.
struct exp_term_list {
  cplx constant{};
  std::vector<std::pair<long long, cplx>> terms;

  // Integrate e(m w) * F from u: the recursion step appending frequency m.
  exp_term_list integrate_step(long long m, const chart_point& u) const;
  cplx value_at(const chart_point& v) const;
};

// Closed form of int_u^v e(m_n w_n) ... int_u^{w_2} e(m_1 w_1) dw_1 .. dw_n.
// Frequencies must be >= 1 (domain error otherwise).
cplx exp_iterated_integral(std::span<const long long> freqs, chart_point u,
                           chart_point v);

// Forms attached to the letters: f_1..f_r to X_1..X_r, g_1..g_t to Y_1..Y_t.
// Owns chart coefficient tables, extended on demand.
class symbol_context {
 public:
  symbol_context(gamma0 group, std::vector<cusp_form> f,
                 std::vector<cusp_form> g);

  const gamma0& group() const { return group_; }
  alphabet letters() const {
    return {static_cast<int>(f_.size()), static_cast<int>(g_.size())};
  }
  const cusp_form& form(family fam, int idx) const;  // idx 1-based

  // c(m; f |_2 sigma_b) as doubles for m = 0..M at least.
  const std::vector<double>& chart_coefficients(family fam, int idx,
                                                cusp_label b, int M) const;

 private:
  gamma0 group_;
  mutable std::vector<cusp_form> f_, g_;             // grown on demand
  mutable std::vector<std::vector<double>> tables_;  // (fam,idx,cusp) flat
  std::vector<double>& table_slot(family fam, int idx, cusp_label b) const;
};

// C_a^b(forms...) where forms picks letters (fam, idx) from the context.
// Chart rules: explicit chart if given (endpoints must be representable),
// else the cusp endpoint's chart, else infinity; a 0-to-infinity path splits
// at the interior waypoint i/sqrt(N).
struct form_ref {
  family fam = family::x;
  int idx = 1;
};
cplx compute_C(const symbol_context& ctx, path_point a, path_point b,
               std::span<const form_ref> forms, double tol,
               std::optional<cusp_label> chart = {});

// Generating series over words: coefficient of X_{i1}..X_{in} in I_series is
// C_a^b(f_{i1},..,f_{in}); J_series carries conjugated coefficients on
// Y-words; ij_series is their product (constant term 1).
free_series I_series(const symbol_context& ctx, path_point a, path_point b,
                     int D, double tol);
free_series J_series(const symbol_context& ctx, path_point a, path_point b,
                     int D, double tol);
free_series ij_series(const symbol_context& ctx, path_point a, path_point b,
                      int D, double tol);

// Symbol I_{gamma a}^a * conj-J_{gamma a}^a by direct integration.  For a
// cusp base the path is split at the isometric-circle midpoint; arbitrary
// group elements with huge entries belong to symbol_engine instead.
free_series noncommutative_modular_symbol(const symbol_context& ctx,
                                          const group_element& g,
                                          path_point base, int D, double tol);

// Factorized symbol evaluation: every member is rewritten as a short product
// of a fixed generator set whose symbols are integrated once up front; the
// symbol map reverses products, and parabolic generators contribute 1.
class symbol_engine {
 public:
  symbol_engine(symbol_context ctx, int D, double tol);

  const symbol_context& context() const { return ctx_; }
  const word_table& table() const { return table_; }
  int max_degree() const { return D_; }

  // sigma(g) at base i*infinity, as a dense coefficient vector over table().
  std::vector<cplx> symbol_dense(const group_element& g) const;
  free_series symbol(const group_element& g) const;

  // <g, f> = 2 pi i * C_{base}^{g base}(f), base-point free; accumulated
  // additively over the generator word (degree-1 route, no series algebra).
  cplx pairing(const group_element& g, family fam, int idx) const;

 private:
  struct token_data {
    bool trivial = true;
    std::vector<cplx> sym;    // dense symbol when not trivial
    std::vector<cplx> pair;   // <u, h> for h = f_1..f_r, g_1..g_t
  };
  const token_data& lookup(const schreier_token& tok) const;

  symbol_context ctx_;
  int D_;
  double tol_;
  word_table table_;
  std::vector<token_data> s_tokens_;               // per class
  std::vector<std::vector<token_data>> t_tokens_;  // per class, exponent
};

}  // namespace ncms
