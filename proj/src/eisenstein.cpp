#include "ncms/eisenstein.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ncms {

namespace detail {

namespace {

constexpr long long kCosetCap = 1000000;

struct row {
  long long C, D;
};

// Sum over the translate orbit: sum_l (y / |C w + D + l C|^2)^s, expanded
// symmetrically around the minimizing l until the integral-comparison tail
// drops below tol.
cplx translate_sum(long long Cll, long long Dll, cplx w, cplx s, double tol) {
  double C = static_cast<double>(Cll);
  double y = w.imag();
  double t0 = C * w.real() + static_cast<double>(Dll);
  double h = C * y;
  double sr = s.real();
  double ys = std::pow(y, sr);
  long long l0 = std::llround(-t0 / C);
  auto term = [&](long long l) {
    double t = t0 + static_cast<double>(l) * C;
    return real_pow(y / (t * t + h * h), s);
  };
  cplx acc = term(l0);
  for (long long k = 1;; ++k) {
    acc += term(l0 + k) + term(l0 - k);
    double dlo = -(t0 + static_cast<double>(l0 - k - 1) * C);
    double dhi = t0 + static_cast<double>(l0 + k + 1) * C;
    double d = std::min(dlo, dhi);
    if (d > 0.0) {
      double side = std::pow(d, -2.0 * sr) +
                    std::pow(d, 1.0 - 2.0 * sr) / ((2.0 * sr - 1.0) * C);
      if (2.0 * ys * side < tol) break;
    }
    if (k > 1000000)
      throw truncation_error("translate window failed to close", 2.0 * ys);
  }
  return acc;
}

// Dropped rows beyond cmax: per C the unit-spaced D-sum is at most
// 2 y^{-s} C^{-2s} + 2 I(s) y^{1-s} C^{1-2s} with I the beta-type constant;
// the C-sum is bounded by an integral comparison over multiples of N.
double coset_tail(long long N, double cmax, double ymin, double sr) {
  double I = 0.5 * std::sqrt(kPi) *
             std::exp(std::lgamma(sr - 0.5) - std::lgamma(sr));
  auto S = [&](double p) {
    double x = cmax / static_cast<double>(N);
    return std::pow(static_cast<double>(N), -p) *
           (std::pow(x, 1.0 - p) / (p - 1.0) + std::pow(x, -p));
  };
  return 2.0 * std::pow(ymin, -sr) * S(2.0 * sr) +
         2.0 * I * std::pow(ymin, 1.0 - sr) * S(2.0 * sr - 1.0);
}

}  // namespace

kernel_result run_kernel(const gamma0& G, const kernel_request& req,
                         bool force_serial) {
  if (req.s.real() <= 1.0)
    throw std::domain_error("Re(s) must exceed 1");
  if (req.cmax <= 0.0)
    throw std::domain_error("coset truncation must be positive");
  if (req.zs.empty() || req.channels < 1 || !req.weight)
    throw std::invalid_argument("kernel request incomplete");

  const long long N = G.level();
  const scaling_matrix sbi = G.scaling(req.b).inverse();
  const int nz = static_cast<int>(req.zs.size());
  const int K = req.channels;

  std::vector<cplx> ws(nz);
  double ymin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < nz; ++i) {
    ws[i] = sbi.apply(req.zs[i]);
    if (!(ws[i].imag() > 0.0))
      throw std::domain_error("evaluation point must lie in the upper half plane");
    ymin = std::min(ymin, ws[i].imag());
  }

  std::vector<row> rows;
  for (long long C = N; C <= static_cast<long long>(req.cmax); C += N) {
    for (long long D = 0; D < C; ++D)
      if (std::gcd(C, D) == 1) rows.push_back({C, D});
    if (static_cast<long long>(rows.size()) > kCosetCap)
      throw std::domain_error("coset truncation too large");
  }

  const double tol_class = req.tol / static_cast<double>(rows.size() + 1);

  kernel_result res;
  res.acc.assign(static_cast<size_t>(nz) * K, cplx(0.0));
  res.cosets = static_cast<long long>(rows.size()) + 1;

  double wmax = 0.0;

  // identity coset: plain Im(w)^s
  {
    std::vector<cplx> wbuf(K);
    req.weight(group_element{}, wbuf);
    for (const cplx& c : wbuf) wmax = std::max(wmax, std::abs(c));
    for (int i = 0; i < nz; ++i) {
      cplx p = real_pow(ws[i].imag(), req.s);
      for (int ch = 0; ch < K; ++ch)
        res.acc[static_cast<size_t>(i) * K + ch] += wbuf[ch] * p;
    }
  }

  auto accumulate_row = [&](const row& r, std::span<cplx> wbuf,
                            std::span<cplx> acc, double& local_wmax) {
    group_element g = G.element_from_row(req.b, r.C, r.D);
    req.weight(g, wbuf);
    bool any = false;
    for (const cplx& c : wbuf) {
      local_wmax = std::max(local_wmax, std::abs(c));
      any = any || c != 0.0;
    }
    if (!any) return;
    for (int i = 0; i < nz; ++i) {
      cplx p = translate_sum(r.C, r.D, ws[i], req.s, tol_class);
      for (int ch = 0; ch < K; ++ch)
        acc[static_cast<size_t>(i) * K + ch] += wbuf[ch] * p;
    }
  };

  [[maybe_unused]] const int threads =
      force_serial ? 1 : resolve_threads(req.threads);

#ifdef _OPENMP
  if (threads > 1) {
    const int T = threads;
    std::vector<std::vector<cplx>> parts(
        T, std::vector<cplx>(static_cast<size_t>(nz) * K, cplx(0.0)));
    std::vector<double> wmaxs(T, 0.0);
    std::string err;
#pragma omp parallel num_threads(T)
    {
      const int tid = omp_get_thread_num();
      std::vector<cplx> wbuf(K);
#pragma omp for schedule(static)
      for (long long idx = 0; idx < static_cast<long long>(rows.size());
           ++idx) {
        try {
          accumulate_row(rows[static_cast<size_t>(idx)], wbuf, parts[tid],
                         wmaxs[tid]);
        } catch (const std::exception& e) {
#pragma omp critical
          if (err.empty()) err = e.what();
        }
      }
    }
    if (!err.empty()) throw std::runtime_error(err);
    // combine in thread order: deterministic for a fixed thread count
    for (int t = 0; t < T; ++t) {
      wmax = std::max(wmax, wmaxs[t]);
      for (size_t j = 0; j < res.acc.size(); ++j) res.acc[j] += parts[t][j];
    }
  } else
#endif
  {
    std::vector<cplx> wbuf(K);
    for (const row& r : rows) accumulate_row(r, wbuf, res.acc, wmax);
  }

  res.tail = coset_tail(N, req.cmax, ymin, req.s.real()) * std::max(wmax, 1.0);
  return res;
}

}  // namespace detail

namespace {

cplx pow_int(cplx base, int p) {
  cplx r = 1.0;
  for (int i = 0; i < p; ++i) r *= base;
  return r;
}

word word_from_indices(const alphabet& al, std::span<const int> f_idx,
                       std::span<const int> g_idx) {
  std::vector<letter> ls;
  for (int i : f_idx) ls.push_back({family::x, static_cast<uint8_t>(i)});
  for (int j : g_idx) ls.push_back({family::ybar, static_cast<uint8_t>(j)});
  for (const letter& l : ls)
    if (l.index < 1 || !al.contains(l))
      throw std::out_of_range("form index outside the attached families");
  return word::from_letters(ls, al);
}

// sigma at an arbitrary base point: bridge series a -> infinity on the left,
// infinity -> a on the right.  Trivial bridges at the infinity cusp itself.
struct base_bridges {
  bool trivial = true;
  std::vector<cplx> left, right;
};

base_bridges make_bridges(const symbol_engine& eng, path_point base,
                          double tol) {
  base_bridges br;
  if (base.is_cusp() && base.cusp_at() == cusp_label::infinity) return br;
  br.trivial = false;
  path_point inf = path_point::at_infinity();
  const symbol_context& ctx = eng.context();
  int D = eng.max_degree();
  br.left = eng.table().dense(ij_series(ctx, base, inf, D, tol));
  br.right = eng.table().dense(ij_series(ctx, inf, base, D, tol));
  return br;
}

}  // namespace

eis_value classical_E(const gamma0& G, const cusp& b, cplx z,
                      const eis_params& p) {
  detail::kernel_request req;
  req.b = b;
  req.zs = {z};
  req.s = p.s;
  req.cmax = p.cmax;
  req.tol = p.tol;
  req.threads = p.threads;
  req.channels = 1;
  req.weight = [](const group_element&, std::span<cplx> w) { w[0] = 1.0; };
  auto res = detail::run_kernel(G, req);
  eis_value v;
  v.value = res.acc[0];
  v.truncation_estimate = res.tail;
  v.cosets_used = res.cosets;
  return v;
}

eis_value classical_E_reference(const gamma0& G, const cusp& b, cplx z,
                                const eis_params& p) {
  if (p.s.real() <= 1.0) throw std::domain_error("Re(s) must exceed 1");
  if (p.cmax <= 0.0) throw std::domain_error("coset truncation must be positive");
  const long long N = G.level();
  cplx w = G.scaling(b).inverse().apply(z);
  if (!(w.imag() > 0.0))
    throw std::domain_error("evaluation point must lie in the upper half plane");
  double y = w.imag();
  double sr = p.s.real();
  cplx total = real_pow(y, p.s);
  long long cosets = 1;
  for (long long C = N; C <= static_cast<long long>(p.cmax); C += N) {
    for (long long D = 0; D < C; ++D) {
      if (std::gcd(C, D) != 1) continue;
      ++cosets;
      // widen the translate window until the edge terms are negligible
      cplx sum = 0.0;
      long long l0 = std::llround(-(C * w.real() + D) / static_cast<double>(C));
      long long L = 2;
      for (;;) {
        sum = 0.0;
        for (long long l = l0 - L; l <= l0 + L; ++l) {
          cplx q = static_cast<double>(C) * w + static_cast<double>(D + l * C);
          sum += real_pow(y / std::norm(q), p.s);
        }
        double edge = static_cast<double>(L - 1) * static_cast<double>(C);
        double bound = 2.0 * std::pow(y, sr) *
                       (std::pow(edge, -2.0 * sr) +
                        std::pow(edge, 1.0 - 2.0 * sr) /
                            ((2.0 * sr - 1.0) * static_cast<double>(C)));
        if (bound < p.tol / 1e6 || L > 100000) break;
        L *= 2;
      }
      total += sum;
    }
  }
  eis_value v;
  v.value = total;
  v.cosets_used = cosets;
  v.truncation_estimate = detail::coset_tail(N, p.cmax, y, sr);
  return v;
}

std::vector<eis_value> E_calligraphic_batch(const symbol_engine& eng,
                                            const cusp& b,
                                            std::span<const cplx> zs,
                                            path_point base,
                                            const eis_params& p) {
  const word_table& tab = eng.table();
  const int K = tab.size();
  base_bridges br = make_bridges(eng, base, p.tol);

  detail::kernel_request req;
  req.b = b;
  req.zs.assign(zs.begin(), zs.end());
  req.s = p.s;
  req.cmax = p.cmax;
  req.tol = p.tol;
  req.threads = p.threads;
  req.channels = K;
  req.weight = [&eng, &tab, &br, K](const group_element& g,
                                    std::span<cplx> wout) {
    std::vector<cplx> sym = eng.symbol_dense(g);
    if (!br.trivial) {
      std::vector<cplx> tmp(K);
      tab.mul(br.left, sym, tmp);
      tab.mul(tmp, br.right, sym);
    }
    std::copy(sym.begin(), sym.end(), wout.begin());
  };

  auto res = detail::run_kernel(eng.context().group(), req);
  std::vector<eis_value> out(zs.size());
  for (size_t i = 0; i < zs.size(); ++i) {
    std::span<const cplx> rowspan(res.acc.data() + i * K, K);
    eis_value& v = out[i];
    v.series = tab.sparse(rowspan);
    v.value = v.series.coeff(word{});
    v.truncation_estimate = res.tail;
    v.cosets_used = res.cosets;
  }
  return out;
}

eis_value E_calligraphic(const symbol_engine& eng, const cusp& b, cplx z,
                         path_point base, const eis_params& p) {
  return E_calligraphic_batch(eng, b, std::span<const cplx>(&z, 1), base,
                              p)[0];
}

eis_value twisted_E(const symbol_engine& eng, const cusp& b, cplx z,
                    std::span<const int> f_idx, std::span<const int> g_idx,
                    path_point base, const eis_params& p) {
  word w = word_from_indices(eng.context().letters(), f_idx, g_idx);
  if (w.degree() > eng.max_degree())
    throw std::domain_error("word degree exceeds the engine's degree");
  eis_value v = E_calligraphic(eng, b, z, base, p);
  v.value = v.series.coeff(w);
  v.series = free_series(alphabet{0, 0}, 0);
  return v;
}

eis_value Q_series(const symbol_engine& eng, const cusp& b, cplx z,
                   std::span<const int> f_idx, std::span<const int> g_idx,
                   path_point base, const eis_params& p) {
  word w = word_from_indices(eng.context().letters(), f_idx, g_idx);
  if (w.degree() > eng.max_degree())
    throw std::domain_error("word degree exceeds the engine's degree");
  cplx wim = z;
  path_point pz = path_point::interior({wim.real(), wim.imag()});
  // integrals from gamma z split at gamma a; the z-to-base leg is shared by
  // every coset and multiplies the twisted sum on the left
  free_series zleg = ij_series(eng.context(), pz, base, eng.max_degree(),
                               p.tol);
  eis_value v = E_calligraphic(eng, b, z, base, p);
  free_series q = series_mul(zleg, v.series, eng.max_degree());
  double znorm = 0.0;
  for (const auto& [ww, c] : zleg.terms()) znorm += std::abs(c);
  v.series = q;
  v.value = q.coeff(w);
  v.truncation_estimate *= std::max(1.0, znorm);
  return v;
}

cplx pairing(const symbol_context& ctx, const group_element& g, form_ref f,
             path_point z0, double tol) {
  if (z0.is_cusp())
    throw std::domain_error("pairing base point must be interior");
  upper_half_point zz = z0.point();
  upper_half_point gz = apply_moebius(g, zz);
  form_ref fs[1] = {f};
  return cplx(0.0, kTwoPi) *
         compute_C(ctx, path_point::interior(zz), path_point::interior(gz),
                   fs, tol);
}

eis_value E_mn(const symbol_engine& eng, const cusp& b, cplx z, int m, int n,
               const eis_params& p) {
  if (m < 0 || n < 0) throw std::domain_error("powers must be nonnegative");
  alphabet al = eng.context().letters();
  if ((m > 0 && al.r < 1) || (n > 0 && al.t < 1))
    throw std::out_of_range("form index outside the attached families");

  detail::kernel_request req;
  req.b = b;
  req.zs = {z};
  req.s = p.s;
  req.cmax = p.cmax;
  req.tol = p.tol;
  req.threads = p.threads;
  req.channels = 1;
  req.weight = [&eng, m, n](const group_element& g, std::span<cplx> w) {
    cplx pf = m > 0 ? eng.pairing(g, family::x, 1) : cplx(0.0);
    cplx pg = n > 0 ? eng.pairing(g, family::ybar, 1) : cplx(0.0);
    w[0] = pow_int(pf, m) * pow_int(std::conj(pg), n);
  };
  auto res = detail::run_kernel(eng.context().group(), req);
  eis_value v;
  v.value = res.acc[0];
  v.truncation_estimate = res.tail;
  v.cosets_used = res.cosets;
  return v;
}

cplx fourier_coefficient(const std::function<cplx(cplx)>& chart_evaluator,
                         int k, double y, int Npoints) {
  if (Npoints < 8)
    throw std::invalid_argument("need at least 8 quadrature points");
  if (!(y > 0.0)) throw std::domain_error("height must be positive");
  cplx acc = 0.0;
  for (int j = 0; j < Npoints; ++j) {
    double x = static_cast<double>(j) / Npoints;
    acc += chart_evaluator(cplx(x, y)) * e_of(cplx(-k * x, 0.0));
  }
  return acc / static_cast<double>(Npoints);
}

laplace_report laplacian_residual(const std::function<cplx(cplx)>& F, cplx z,
                                  cplx s, double h) {
  if (!(h > 0.0)) throw std::domain_error("step must be positive");
  cplx f0 = F(z);
  cplx fxp = F(z + h), fxm = F(z - h);
  cplx fyp = F(z + cplx(0.0, h)), fym = F(z - cplx(0.0, h));
  double y = z.imag();
  cplx lap = y * y * (fxp + fxm + fyp + fym - 4.0 * f0) / (h * h);
  cplx resid = lap - s * (s - 1.0) * f0;
  laplace_report r;
  if (std::abs(f0) >= 1e-12) {
    r.residual = std::abs(resid) / std::abs(f0);
    r.relative = true;
  } else {
    r.residual = std::abs(resid);
    r.relative = false;
  }
  return r;
}

height_report heights(const gamma0& G, cplx z, double cmax) {
  if (!(z.imag() > 0.0))
    throw std::domain_error("evaluation point must lie in the upper half plane");
  const long long N = G.level();
  height_report rep;
  for (const cusp& a : G.cusps()) {
    cplx w = G.scaling(a).inverse().apply(z);
    double y = w.imag();
    rep.y_f = std::max(rep.y_f, y);
    double best = y;
    for (long long C = N; C <= static_cast<long long>(cmax); C += N)
      for (long long D = 0; D < C; ++D) {
        if (std::gcd(C, D) != 1) continue;
        double t0 = static_cast<double>(C) * w.real() + static_cast<double>(D);
        long long l0 = std::llround(-t0 / static_cast<double>(C));
        for (long long l = l0 - 1; l <= l0 + 1; ++l) {
          double t = t0 + static_cast<double>(l * C);
          double im = y / (t * t + static_cast<double>(C) * y *
                                       static_cast<double>(C) * y);
          best = std::max(best, im);
        }
      }
    rep.y_gamma = std::max(rep.y_gamma, best);
  }
  return rep;
}

namespace {

// u*a + v*b == gcd(a,b) for a >= 0, b arbitrary
void extended_gcd(long long a, long long b, long long& u, long long& v) {
  long long r0 = a, r1 = b, u0 = 1, u1 = 0, v0 = 0, v1 = 1;
  while (r1 != 0) {
    long long q = r0 / r1;
    r0 -= q * r1;
    std::swap(r0, r1);
    u0 -= q * u1;
    std::swap(u0, u1);
    v0 -= q * v1;
    std::swap(v0, v1);
  }
  if (r0 < 0) {
    u0 = -u0;
    v0 = -v0;
  }
  u = u0;
  v = v0;
}

}  // namespace

stats_summary pairing_stats(const symbol_engine& eng, double T, family fam,
                            int idx) {
  if (!(T >= 0.0) || T > 1e6)
    throw std::domain_error("row cutoff is limited to 1e6");
  const gamma0& G = eng.context().group();
  const long long N = G.level();
  stats_summary out;
  std::vector<double> samples;
  for (long long c = N; static_cast<double>(c) * static_cast<double>(c) <= T;
       c += N) {
    long long dmax = static_cast<long long>(
        std::floor(std::sqrt(T - static_cast<double>(c * c))));
    for (long long d = -dmax; d <= dmax; ++d) {
      if (std::gcd(c, d) != 1) continue;
      long long u = 0, v = 0;  // u*c + v*d = 1, so (v, -u; c, d) has det 1
      extended_gcd(c, d, u, v);
      group_element g = group_element::make(v, -u, c, d);
      cplx p = eng.pairing(g, fam, idx);
      out.rows.push_back({c, d, p});
      out.sum_sq += std::norm(p);
      double scale = std::sqrt(std::log(static_cast<double>(c * c + d * d)));
      samples.push_back(p.real() / scale);
    }
  }
  out.count = static_cast<long long>(out.rows.size());
  if (out.count > 0) {
    double m1 = 0;
    for (double x : samples) m1 += x;
    m1 /= static_cast<double>(out.count);
    double m2 = 0, m3 = 0;
    for (double x : samples) {
      double dx = x - m1;
      m2 += dx * dx;
      m3 += dx * dx * dx;
    }
    m2 /= static_cast<double>(out.count);
    m3 /= static_cast<double>(out.count);
    out.mean = m1;
    out.variance = m2;
    out.skewness = m2 > 0 ? m3 / std::pow(m2, 1.5) : 0.0;
  }
  return out;
}

double higher_order_residual(const std::function<cplx(cplx)>& F,
                             std::span<const group_element> gs, cplx z) {
  int n = static_cast<int>(gs.size());
  if (n > 4) throw std::domain_error("order capped at 4");
  cplx total = 0.0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    group_element prod;  // identity
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) prod = prod.mul(gs[i]);
    int sign = ((n - std::popcount(mask)) % 2 == 0) ? 1 : -1;
    upper_half_point zz{z.real(), z.imag()};
    upper_half_point pz = apply_moebius(prod, zz);
    total += static_cast<double>(sign) * F(cplx(pz.x, pz.y));
  }
  return std::abs(total);
}

}  // namespace ncms
