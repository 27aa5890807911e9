#include "ncms/bessel.hpp"

#include <cmath>

namespace ncms {

namespace {

cplx integrand(cplx v, double x, double t) {
  return std::exp(-x * std::cosh(t)) * std::cosh(v * t);
}

double simpson(cplx v, double x, double T, int panels, cplx* out) {
  double h = T / (2 * panels);
  cplx sum = integrand(v, x, 0.0) + integrand(v, x, T);
  for (int i = 1; i < 2 * panels; ++i)
    sum += integrand(v, x, i * h) * (i % 2 ? 4.0 : 2.0);
  *out = sum * (h / 3.0);
  return h;
}

}  // namespace

cplx bessel_k(cplx v, double x, double tol) {
  if (x < 1e-6)
    throw std::range_error("bessel_k: argument too small for the integral");
  if (x > 700.0) return 0.0;  // below double underflow; |K| < e^{-700}
  double a = std::abs(v.real());
  // Truncation T: integrand decays like exp(-x cosh t + a t); past the point
  // where x sinh t - a >= 1 the tail is bounded by the last integrand value.
  double T = 1.0;
  auto logg = [&](double t) { return -x * std::cosh(t) + a * t; };
  while (logg(T) > std::log(tol) - 3.0 || x * std::sinh(T) - a < 1.0) {
    T += 0.5;
    if (T > 200.0) break;
  }
  cplx prev, cur;
  simpson(v, x, T, 16, &prev);
  for (int panels = 32; panels <= 1 << 16; panels *= 2) {
    simpson(v, x, T, panels, &cur);
    if (std::abs(cur - prev) < tol * 0.5) return cur;
    prev = cur;
  }
  throw truncation_error("bessel_k quadrature did not converge",
                         std::abs(cur - prev));
}

cplx whittaker_w(long long k, cplx z, cplx s, double tol) {
  if (k == 0) throw std::domain_error("whittaker_w needs a nonzero frequency");
  double y = z.imag();
  if (y <= 0) throw std::domain_error("point not in the upper half plane");
  double arg = kTwoPi * std::abs(static_cast<double>(k)) * y;
  cplx kv = bessel_k(s - 0.5, arg, tol);
  return 2.0 * std::sqrt(std::abs(static_cast<double>(k)) * y) * kv *
         e_of(static_cast<double>(k) * z.real());
}

cplx log_gamma(cplx s) {
  if (s.real() <= 0)
    throw std::domain_error("log_gamma implemented for Re s > 0 only");
  // Lanczos, g = 7, 9 terms.
  static const double g = 7.0;
  static const double coef[9] = {
      0.99999999999980993,     676.5203681218851,   -1259.1392167224028,
      771.32342877765313,      -176.61502916214059, 12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6,
      1.5056327351493116e-7};
  cplx x = s - 1.0;
  cplx acc = coef[0];
  for (int i = 1; i < 9; ++i) acc += coef[i] / (x + static_cast<double>(i));
  cplx t = x + g + 0.5;
  return 0.5 * std::log(2.0 * kPi) + (x + 0.5) * std::log(t) - t +
         std::log(acc);
}

cplx gamma_ratio(cplx a, cplx b) { return std::exp(log_gamma(a) - log_gamma(b)); }

}  // namespace ncms
