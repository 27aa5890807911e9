#include "ncms/iterated_integrals.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ncms {

namespace {

constexpr int kMaxDepth = 8;              // nesting depth of the integrals
constexpr long long kFrequencyCap = 400000;
constexpr double kTupleCap = 3e8;         // enumeration size guard

cplx div2pii(cplx c, long long freq) {
  return c / cplx(0.0, kTwoPi * static_cast<double>(freq));
}

// Cached powers e(k * p) for k = 0..M; identically zero past k = 0 at the
// cusp.  |e(p)| < 1 keeps the recurrence stable, underflow to 0 is harmless.
struct power_table {
  bool at_inf = true;
  std::vector<cplx> pw;

  power_table(const chart_point& p, long long M) : at_inf(p.at_infinity) {
    if (at_inf) return;
    pw.resize(static_cast<size_t>(M) + 1);
    pw[0] = 1.0;
    cplx q = e_of(p.z);
    for (long long k = 1; k <= M; ++k) pw[k] = pw[k - 1] * q;
  }
};

void step_tabled(const exp_term_list& in, long long m, const power_table& pu,
                 exp_term_list& out) {
  out.terms.clear();
  if (in.constant != 0.0) out.terms.emplace_back(m, div2pii(in.constant, m));
  for (const auto& [S, c] : in.terms)
    out.terms.emplace_back(S + m, div2pii(c, S + m));
  cplx at_u = 0.0;
  if (!pu.at_inf)
    for (const auto& [S, c] : out.terms) at_u += c * pu.pw[S];
  out.constant = -at_u;
}

cplx value_tabled(const exp_term_list& F, const power_table& pv) {
  cplx v = F.constant;
  if (!pv.at_inf)
    for (const auto& [S, c] : F.terms) v += c * pv.pw[S];
  return v;
}

// Certified majorant of the summand block with total frequency T: the value
// of the nested integral is at most e^{-aT}/pi^n for a = 2 pi y_min, each
// coefficient is at most 2m, the product of frequencies at most (T/n)^n, and
// there are at most T^{n-1}/(n-1)! tuples.
double per_total_bound(long long T, int n, double a) {
  double K = std::pow(2.0 / kPi, n) / (std::pow(n, n) * std::tgamma(n));
  return K * std::pow(static_cast<double>(T), 2 * n - 1) *
         std::exp(-a * static_cast<double>(T));
}

double tail_beyond(long long M, int n, double a) {
  double peak = (2.0 * n - 1.0) / a;
  double s = 0.0;
  for (long long T = M + 1;; ++T) {
    double t = per_total_bound(T, n, a);
    s += t;
    if (static_cast<double>(T) > peak && t < 1e-9 * (s > 0 ? s : 1.0)) break;
    if (T - M > 5'000'000) return std::numeric_limits<double>::infinity();
  }
  return s;
}

// Smallest total-frequency cutoff whose simplex tail is below tol.
long long choose_total_cutoff(int n, double a, double tol, double* tail_out) {
  long long lo = n;  // smallest admissible total
  if (tail_beyond(lo, n, a) <= tol) {
    *tail_out = tail_beyond(lo, n, a);
    return lo;
  }
  long long hi = lo;
  for (;;) {
    hi = 2 * hi + n;
    if (hi > kFrequencyCap)
      throw truncation_error("frequency cutoff exceeds cap; endpoints too low",
                             tail_beyond(kFrequencyCap, n, a));
    if (tail_beyond(hi, n, a) <= tol) break;
    lo = hi;
  }
  while (hi - lo > 1) {
    long long mid = lo + (hi - lo) / 2;
    if (tail_beyond(mid, n, a) <= tol)
      hi = mid;
    else
      lo = mid;
  }
  *tail_out = tail_beyond(hi, n, a);
  return hi;
}

double compositions_below(long long M, int n) {
  double c = 1.0;  // C(M, n) counts tuples m_i >= 1 with sum <= M
  for (int i = 0; i < n; ++i)
    c *= static_cast<double>(M - i) / static_cast<double>(n - i);
  return c;
}

// Joint enumerator: sums over all frequency tuples (m_1..m_n), sum <= M,
// sharing the antiderivative state across common prefixes, and accumulates
// into one output cell per choice of candidate coefficient array per slot.
struct joint_sum {
  int n = 0;
  std::vector<std::vector<const double*>> coeff;  // [slot][candidate]
  std::vector<int> rk;                            // candidates per slot
  power_table pu, pv;
  std::vector<exp_term_list> F;          // F[k]: state after k steps
  std::vector<std::vector<cplx>> prods;  // prods[k]: per prefix-choice
  std::span<cplx> out;

  joint_sum(const chart_point& u, const chart_point& v, long long M)
      : pu(u, M), pv(v, M) {}

  void run(long long M) {
    F.assign(n + 1, {});
    F[0].constant = 1.0;
    prods.resize(n + 1);
    prods[0] = {cplx(1.0)};
    for (int k = 0; k < n; ++k)
      prods[k + 1].resize(prods[k].size() * rk[k]);
    descend(0, M);
  }

  void descend(int k, long long budget) {
    if (k == n) {
      cplx val = value_tabled(F[n], pv);
      for (size_t w = 0; w < out.size(); ++w) out[w] += val * prods[n][w];
      return;
    }
    long long top = budget - (n - 1 - k);  // leave >= 1 per later slot
    for (long long m = 1; m <= top; ++m) {
      bool any = false;
      size_t np = prods[k].size();
      for (size_t p = 0; p < np; ++p)
        for (int i = 0; i < rk[k]; ++i) {
          cplx v = prods[k][p] * coeff[k][i][m];
          prods[k + 1][p * rk[k] + i] = v;
          any = any || v != 0.0;
        }
      if (!any) continue;
      step_tabled(F[k], m, pu, F[k + 1]);
      descend(k + 1, budget - m);
    }
  }
};

cusp cusp_of(cusp_label l) {
  return l == cusp_label::infinity ? cusp::infinity() : cusp::zero();
}

// One integration leg with both endpoints expressed in a single chart.
struct chart_leg {
  cusp_label chart = cusp_label::infinity;
  path_point a, b;
};

chart_point to_chart(const gamma0& G, cusp_label chart, const path_point& p) {
  if (p.is_cusp()) {
    assert(p.cusp_at() == chart);
    return chart_point::inf();
  }
  cplx z = p.point().z();
  if (chart == cusp_label::zero)
    z = G.scaling(cusp::zero()).inverse().apply(z);
  return chart_point::finite(z);
}

bool representable(const path_point& p, cusp_label chart) {
  return !p.is_cusp() || p.cusp_at() == chart;
}

std::vector<chart_leg> resolve_path(const gamma0& G, const path_point& a,
                                    const path_point& b,
                                    std::optional<cusp_label> chart) {
  if (chart) {
    if (!representable(a, *chart) || !representable(b, *chart))
      throw std::domain_error("endpoint not representable in requested chart");
    return {{*chart, a, b}};
  }
  if (a.is_cusp() && b.is_cusp() && a.cusp_at() != b.cusp_at()) {
    // split at the self-dual waypoint i/sqrt(N)
    double yw = 1.0 / std::sqrt(static_cast<double>(G.level()));
    path_point w = path_point::interior({0.0, yw});
    return {{a.cusp_at(), a, w}, {b.cusp_at(), w, b}};
  }
  cusp_label c = a.is_cusp()   ? a.cusp_at()
                 : b.is_cusp() ? b.cusp_at()
                               : cusp_label::infinity;
  return {{c, a, b}};
}

// Core sum on a single leg.  slots[k] lists the candidate forms for slot k;
// out has one cell per odometer word (first slot most significant) and is
// accumulated into, so callers zero it.
double joint_chart_sum(const symbol_context& ctx, const chart_leg& leg,
                       const std::vector<std::vector<form_ref>>& slots,
                       double tol, std::span<cplx> out) {
  int n = static_cast<int>(slots.size());
  if (n > kMaxDepth) throw std::domain_error("integral nesting too deep");
  const gamma0& G = ctx.group();
  chart_point u = to_chart(G, leg.chart, leg.a);
  chart_point v = to_chart(G, leg.chart, leg.b);
  if (u.at_infinity && v.at_infinity) return 0.0;
  if (!u.at_infinity && !v.at_infinity && u.z == v.z) return 0.0;
  double ymin = std::min(u.height(), v.height());
  double a = kTwoPi * ymin;
  double tail = 0.0;
  long long M = choose_total_cutoff(n, a, tol, &tail);
  if (compositions_below(M, n) > kTupleCap)
    throw truncation_error("frequency enumeration too large", tail);

  // force table growth before borrowing pointers
  for (const auto& slot : slots)
    for (const form_ref& fr : slot)
      ctx.chart_coefficients(fr.fam, fr.idx, leg.chart, static_cast<int>(M));

  joint_sum js(u, v, M);
  js.n = n;
  js.coeff.resize(n);
  js.rk.resize(n);
  size_t cells = 1;
  for (int k = 0; k < n; ++k) {
    js.rk[k] = static_cast<int>(slots[k].size());
    cells *= slots[k].size();
    for (const form_ref& fr : slots[k])
      js.coeff[k].push_back(
          ctx.chart_coefficients(fr.fam, fr.idx, leg.chart, static_cast<int>(M))
              .data());
  }
  assert(out.size() == cells);
  js.out = out;
  js.run(M);
  return tail;
}

cplx scalar_leg(const symbol_context& ctx, const chart_leg& leg,
                std::span<const form_ref> forms, double tol) {
  if (forms.empty()) return 1.0;
  std::vector<std::vector<form_ref>> slots;
  for (const form_ref& fr : forms) slots.push_back({fr});
  cplx out[1] = {0.0};
  joint_chart_sum(ctx, leg, slots, tol, out);
  return out[0];
}

void validate_forms(const symbol_context& ctx, std::span<const form_ref> fs) {
  alphabet al = ctx.letters();
  for (const form_ref& fr : fs) {
    int limit = fr.fam == family::x ? al.r : al.t;
    if (fr.idx < 1 || fr.idx > limit)
      throw std::out_of_range("form index outside the attached families");
  }
}

// Series of one family on a single leg, all degrees 1..D.
free_series leg_series(const symbol_context& ctx, const chart_leg& leg,
                       family fam, int D, double tol, bool conjugate) {
  alphabet al = ctx.letters();
  int r = fam == family::x ? al.r : al.t;
  free_series s = free_series::one(al, D);
  for (int n = 1; n <= D; ++n) {
    std::vector<form_ref> cands;
    for (int i = 1; i <= r; ++i) cands.push_back({fam, i});
    std::vector<std::vector<form_ref>> slots(n, cands);
    size_t cells = 1;
    for (int k = 0; k < n; ++k) cells *= r;
    std::vector<cplx> out(cells, 0.0);
    joint_chart_sum(ctx, leg, slots, tol, out);
    for (size_t wi = 0; wi < cells; ++wi) {
      cplx v = conjugate ? std::conj(out[wi]) : out[wi];
      if (v == 0.0) continue;
      std::vector<letter> ls(n);
      size_t rest = wi;
      for (int k = n - 1; k >= 0; --k) {
        ls[k] = letter{fam, static_cast<uint8_t>(1 + rest % r)};
        rest /= r;
      }
      s.set_coeff(word::from_letters(ls, al), v);
    }
  }
  return s;
}

free_series family_series(const symbol_context& ctx, path_point a,
                          path_point b, int D, double tol,
                          std::optional<cusp_label> chart, family fam,
                          bool conjugate) {
  alphabet al = ctx.letters();
  free_series s = free_series::one(al, D);
  int r = fam == family::x ? al.r : al.t;
  if (r == 0 || D == 0) return s;
  auto legs = resolve_path(ctx.group(), a, b, chart);
  double sub_tol = tol / (2.0 * legs.size());
  for (const chart_leg& leg : legs)
    s = series_mul(s, leg_series(ctx, leg, fam, D, sub_tol, conjugate), D);
  return s;
}

}  // namespace

chart_point chart_point::finite(cplx z) {
  if (!(z.imag() > 0.0))
    throw std::domain_error("chart point must lie in the upper half plane");
  return {false, z};
}

double chart_point::height() const {
  return at_infinity ? std::numeric_limits<double>::infinity() : z.imag();
}

exp_term_list exp_term_list::integrate_step(long long m,
                                            const chart_point& u) const {
  if (m < 1) throw std::domain_error("frequencies must be positive integers");
  exp_term_list r;
  r.terms.reserve(terms.size() + 1);
  if (constant != 0.0) r.terms.emplace_back(m, div2pii(constant, m));
  for (const auto& [S, c] : terms) r.terms.emplace_back(S + m, div2pii(c, S + m));
  cplx at_u = 0.0;
  if (!u.at_infinity)
    for (const auto& [S, c] : r.terms)
      at_u += c * e_of(static_cast<double>(S) * u.z);
  r.constant = -at_u;
  return r;
}

cplx exp_term_list::value_at(const chart_point& v) const {
  cplx r = constant;
  if (!v.at_infinity)
    for (const auto& [S, c] : terms)
      r += c * e_of(static_cast<double>(S) * v.z);
  return r;
}

cplx exp_iterated_integral(std::span<const long long> freqs, chart_point u,
                           chart_point v) {
  exp_term_list F;
  F.constant = 1.0;
  for (long long m : freqs) F = F.integrate_step(m, u);
  return F.value_at(v);
}

symbol_context::symbol_context(gamma0 group, std::vector<cusp_form> f,
                               std::vector<cusp_form> g)
    : group_(std::move(group)),
      f_(std::move(f)),
      g_(std::move(g)),
      tables_(2 * (f_.size() + g_.size())) {
  for (const cusp_form& h : f_)
    if (h.level() != group_.level())
      throw std::domain_error("form level differs from the group level");
  for (const cusp_form& h : g_)
    if (h.level() != group_.level())
      throw std::domain_error("form level differs from the group level");
}

const cusp_form& symbol_context::form(family fam, int idx) const {
  const auto& v = fam == family::x ? f_ : g_;
  if (idx < 1 || idx > static_cast<int>(v.size()))
    throw std::out_of_range("form index outside the attached families");
  return v[idx - 1];
}

std::vector<double>& symbol_context::table_slot(family fam, int idx,
                                                cusp_label b) const {
  size_t base = fam == family::x ? 0 : 2 * f_.size();
  size_t off = 2 * static_cast<size_t>(idx - 1) +
               (b == cusp_label::infinity ? 0 : 1);
  return tables_[base + off];
}

const std::vector<double>& symbol_context::chart_coefficients(family fam,
                                                              int idx,
                                                              cusp_label b,
                                                              int M) const {
  form(fam, idx);  // bounds check
  std::vector<double>& slot = table_slot(fam, idx, b);
  if (static_cast<int>(slot.size()) < M + 1) {
    cusp_form& F = (fam == family::x ? f_ : g_)[idx - 1];
    int want = std::max(M, 2 * F.coefficient_count());
    F.ensure_coefficients(want);
    auto ints = F.coefficients_at_cusp(cusp_of(b));
    slot.assign(ints.begin(), ints.end());
  }
  return slot;
}

cplx compute_C(const symbol_context& ctx, path_point a, path_point b,
               std::span<const form_ref> forms, double tol,
               std::optional<cusp_label> chart) {
  validate_forms(ctx, forms);
  int n = static_cast<int>(forms.size());
  if (n == 0) return 1.0;
  auto legs = resolve_path(ctx.group(), a, b, chart);
  if (legs.size() == 1) return scalar_leg(ctx, legs[0], forms, tol);
  // concatenation across the waypoint
  double sub_tol = tol / (2.0 * (n + 1));
  cplx total = 0.0;
  for (int i = 0; i <= n; ++i)
    total += scalar_leg(ctx, legs[0], forms.subspan(0, i), sub_tol) *
             scalar_leg(ctx, legs[1], forms.subspan(i), sub_tol);
  return total;
}

free_series I_series(const symbol_context& ctx, path_point a, path_point b,
                     int D, double tol) {
  return family_series(ctx, a, b, D, tol, {}, family::x, false);
}

free_series J_series(const symbol_context& ctx, path_point a, path_point b,
                     int D, double tol) {
  return family_series(ctx, a, b, D, tol, {}, family::ybar, true);
}

free_series ij_series(const symbol_context& ctx, path_point a, path_point b,
                      int D, double tol) {
  return series_mul(I_series(ctx, a, b, D, tol),
                    J_series(ctx, a, b, D, tol), D);
}

namespace {

free_series ij_series_in_chart(const symbol_context& ctx, path_point a,
                               path_point b, int D, double tol,
                               cusp_label chart) {
  return series_mul(
      family_series(ctx, a, b, D, tol, chart, family::x, false),
      family_series(ctx, a, b, D, tol, chart, family::ybar, true), D);
}

}  // namespace

free_series noncommutative_modular_symbol(const symbol_context& ctx,
                                          const group_element& g,
                                          path_point base, int D, double tol) {
  alphabet al = ctx.letters();
  if (g.is_identity_up_to_sign()) return free_series::one(al, D);
  if (!base.is_cusp()) {
    upper_half_point z0 = base.point();
    upper_half_point gz0 = apply_moebius(g, z0);
    return ij_series(ctx, path_point::interior(gz0),
                     path_point::interior(z0), D, tol);
  }

  const gamma0& G = ctx.group();
  if (!G.is_member(g))
    throw std::domain_error("cusp-based symbol requires a group member");
  cusp_label cb = base.cusp_at();
  // conjugated matrix acting in the chart of the base cusp
  group_element B = g;
  if (cb == cusp_label::zero)
    B = group_element::make(g.d, -g.c / G.level(), -G.level() * g.b, g.a);
  if (B.c == 0) return free_series::one(al, D);  // parabolic at the base
  if (B.c < 0) B = {-B.a, -B.b, -B.c, -B.d};

  // isometric-circle midpoint: both chart heights are 1/c
  double c = static_cast<double>(B.c);
  cplx zs(-static_cast<double>(B.d) / c, 1.0 / c);
  cplx gzs(static_cast<double>(B.a) / c, 1.0 / c);
  scaling_matrix sb = G.scaling(cusp_of(cb));
  cplx zs_g = cb == cusp_label::infinity ? zs : sb.apply(zs);
  cplx gzs_g = cb == cusp_label::infinity ? gzs : sb.apply(gzs);
  path_point pz = path_point::interior({zs_g.real(), zs_g.imag()});
  path_point pg = path_point::interior({gzs_g.real(), gzs_g.imag()});

  // I_{g a}^{a} = I_a^{z*} . I_{g z*}^{z*} . I_{z*}^{a}, same for the
  // conjugate side; the blocks commute so the leg products interleave.
  double sub = tol / 6.0;
  free_series s1 = ij_series_in_chart(ctx, base, pz, D, sub, cb);
  free_series s2 = ij_series_in_chart(ctx, pg, pz, D, sub, cb);
  free_series s3 = ij_series_in_chart(ctx, pz, base, D, sub, cb);
  return series_mul(series_mul(s1, s2, D), s3, D);
}

symbol_engine::symbol_engine(symbol_context ctx, int D, double tol)
    : ctx_(std::move(ctx)), D_(D), tol_(tol), table_(ctx_.letters(), D) {
  const gamma0& G = ctx_.group();
  int classes = G.p1_size();  // forces the Schreier build
  alphabet al = ctx_.letters();

  auto build = [&](const group_element& u) {
    token_data td;
    td.pair.assign(al.r + al.t, 0.0);
    if (u.is_identity_up_to_sign() || is_parabolic(u)) return td;
    td.trivial = false;
    td.sym = table_.dense(noncommutative_modular_symbol(
        ctx_, u, path_point::at_infinity(), D_, tol_));
    // degree-1 pairing by direct scalar sums over the same midpoint split
    group_element B = u.c < 0 ? group_element{-u.a, -u.b, -u.c, -u.d} : u;
    double c = static_cast<double>(B.c);
    path_point pz = path_point::interior({-static_cast<double>(B.d) / c, 1.0 / c});
    path_point pg = path_point::interior({static_cast<double>(B.a) / c, 1.0 / c});
    path_point inf = path_point::at_infinity();
    for (int slot = 0; slot < al.r + al.t; ++slot) {
      form_ref fr[1] = {slot < al.r ? form_ref{family::x, slot + 1}
                                    : form_ref{family::ybar, slot + 1 - al.r}};
      cplx sum = compute_C(ctx_, inf, pz, fr, tol_) +
                 compute_C(ctx_, pg, pz, fr, tol_) +
                 compute_C(ctx_, pz, inf, fr, tol_);
      td.pair[slot] = cplx(0.0, -kTwoPi) * sum;
    }
    return td;
  };

  s_tokens_.resize(classes);
  t_tokens_.resize(classes);
  for (int cls = 0; cls < classes; ++cls) {
    s_tokens_[cls] = build(G.token_element({cls, true, 0}));
    int period = G.t_period(cls);
    t_tokens_[cls].resize(period);
    for (int e = 0; e < period; ++e)
      t_tokens_[cls][e] = build(G.token_element({cls, false, e}));
  }
}

const symbol_engine::token_data& symbol_engine::lookup(
    const schreier_token& tok) const {
  if (tok.s_letter) return s_tokens_[tok.cls];
  const auto& row = t_tokens_[tok.cls];
  long long p = static_cast<long long>(row.size());
  return row[static_cast<size_t>(((tok.e % p) + p) % p)];
}

std::vector<cplx> symbol_engine::symbol_dense(const group_element& g) const {
  auto tokens = ctx_.group().symbol_word(g);
  std::vector<cplx> acc(table_.size(), 0.0);
  acc[0] = 1.0;
  std::vector<cplx> tmp(table_.size());
  // sigma reverses products: sigma(g) = sigma(u_k) ... sigma(u_1)
  for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) {
    const token_data& td = lookup(*it);
    if (td.trivial) continue;
    table_.mul(acc, td.sym, tmp);
    std::swap(acc, tmp);
  }
  return acc;
}

free_series symbol_engine::symbol(const group_element& g) const {
  return table_.sparse(symbol_dense(g));
}

cplx symbol_engine::pairing(const group_element& g, family fam, int idx) const {
  alphabet al = ctx_.letters();
  int limit = fam == family::x ? al.r : al.t;
  if (idx < 1 || idx > limit)
    throw std::out_of_range("form index outside the attached families");
  int slot = fam == family::x ? idx - 1 : al.r + idx - 1;
  cplx s = 0.0;
  for (const schreier_token& tok : ctx_.group().symbol_word(g))
    s += lookup(tok).pair[slot];
  return s;
}

}  // namespace ncms
