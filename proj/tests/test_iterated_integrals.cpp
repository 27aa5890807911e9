#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <array>
#include <cmath>
#include <span>
#include <random>
#include <vector>

#include "doctest.h"
#include "ncms/cusp_forms.hpp"
#include "ncms/free_series.hpp"
#include "ncms/iterated_integrals.hpp"
#include "ncms/modular_group.hpp"
#include "support/chebyshev.hpp"

using namespace ncms;

namespace {

cplx two_pi_i_times(long long m) { return cplx(0.0, kTwoPi * m); }

struct fixture {
  gamma0 G{11};
  cusp_form f = cusp_form::builtin("11a");
  symbol_context ctx{G, {f}, {f}};
};

path_point ip(double x, double y) { return path_point::interior({x, y}); }

}  // namespace

TEST_CASE("single exponential integral against its antiderivative") {
  chart_point u = chart_point::finite(cplx(0.2, 1.1));
  chart_point v = chart_point::finite(cplx(-0.3, 0.8));
  for (long long m : {1, 2, 7}) {
    std::array<long long, 1> freqs{m};
    cplx got = exp_iterated_integral(freqs, u, v);
    cplx want = (e_of(double(m) * v.z) - e_of(double(m) * u.z)) /
                two_pi_i_times(m);
    CHECK(std::abs(got - want) < 1e-14);
  }
  // from the cusp the boundary term vanishes
  std::array<long long, 1> freqs{3};
  cplx from_inf = exp_iterated_integral(freqs, chart_point::inf(), v);
  CHECK(std::abs(from_inf - e_of(3.0 * v.z) / two_pi_i_times(3)) < 1e-15);
}

TEST_CASE("double exponential integral against the hand expansion") {
  chart_point u = chart_point::finite(cplx(0.0, 1.4));
  chart_point v = chart_point::finite(cplx(0.4, 0.9));
  for (auto [m1, m2] : std::vector<std::pair<long long, long long>>{
           {1, 1}, {2, 3}, {5, 1}}) {
    std::array<long long, 2> freqs{m1, m2};
    cplx got = exp_iterated_integral(freqs, u, v);
    cplx A = two_pi_i_times(m1), B = two_pi_i_times(m1 + m2);
    cplx want = (e_of(double(m1 + m2) * v.z) - e_of(double(m1 + m2) * u.z)) /
                    (A * B) +
                (e_of(double(m1 + m2) * u.z) -
                 e_of(double(m1) * u.z + double(m2) * v.z)) /
                    (A * two_pi_i_times(m2));
    CHECK(std::abs(got - want) < 1e-14);
  }
}

TEST_CASE("closed form matches the spectral quadrature oracle") {
  std::mt19937 rng(17);
  std::uniform_int_distribution<long long> M(1, 6);
  std::uniform_real_distribution<double> X(-0.4, 0.4), Y(0.6, 1.5);
  for (int trial = 0; trial < 6; ++trial) {
    cplx u(X(rng), Y(rng)), v(X(rng), Y(rng));
    int n = 1 + trial % 3;
    std::vector<long long> freqs;
    for (int i = 0; i < n; ++i) freqs.push_back(M(rng));
    cplx got = exp_iterated_integral(freqs, chart_point::finite(u),
                                     chart_point::finite(v));
    cplx want = ncms_test::nested_exponential_adaptive(freqs, u, v, 1e-12);
    CHECK(std::abs(got - want) < 1e-10);
  }
}

TEST_CASE("frequencies below one are rejected") {
  std::array<long long, 1> bad{0};
  CHECK_THROWS_AS(exp_iterated_integral(bad, chart_point::inf(),
                                        chart_point::finite(cplx(0, 1))),
                  std::domain_error);
}

TEST_CASE("empty tuple integrates to one") {
  fixture fx;
  CHECK(compute_C(fx.ctx, ip(0, 2), ip(0.3, 1), {}, 1e-10) == cplx(1.0));
}

TEST_CASE("single integral from the cusp matches the coefficient sum") {
  fixture fx;
  cplx z(0.13, 0.9);
  form_ref fr[1] = {{family::x, 1}};
  cplx got = compute_C(fx.ctx, path_point::at_infinity(), ip(z.real(), z.imag()),
                       fr, 1e-12);
  cplx want = 0.0;
  for (int m = 1; m <= 300; ++m)
    want += static_cast<double>(fx.f.coefficient(m)) * e_of(double(m) * z) /
            two_pi_i_times(m);
  CHECK(std::abs(got - want) < 1e-11);
}

TEST_CASE("double integral from the cusp matches the double sum") {
  fixture fx;
  cplx z(0.1, 1.1);
  form_ref fr[2] = {{family::x, 1}, {family::x, 1}};
  cplx got = compute_C(fx.ctx, path_point::at_infinity(), ip(z.real(), z.imag()),
                       fr, 1e-12);
  cplx want = 0.0;
  for (int m1 = 1; m1 <= 160; ++m1)
    for (int m2 = 1; m2 <= 160; ++m2)
      want += static_cast<double>(fx.f.coefficient(m1)) *
              static_cast<double>(fx.f.coefficient(m2)) *
              e_of(double(m1 + m2) * z) /
              (two_pi_i_times(m1) * two_pi_i_times(m1 + m2));
  CHECK(std::abs(got - want) < 1e-10);
}

TEST_CASE("the zero-cusp chart uses the scaled expansion") {
  fixture fx;
  double w = 1.0 / std::sqrt(11.0);
  form_ref fr[1] = {{family::x, 1}};
  cplx got = compute_C(fx.ctx, path_point::at_zero(), ip(0.0, w), fr, 1e-12);
  cplx want = 0.0;
  for (int m = 1; m <= 400; ++m)
    want += static_cast<double>(fx.f.coefficient_at_cusp(m, cusp::zero())) *
            e_of(double(m) * cplx(0.0, w)) / two_pi_i_times(m);
  CHECK(std::abs(got - want) < 1e-11);
}

TEST_CASE("the chart choice does not change the value") {
  fixture fx;
  form_ref fr[1] = {{family::x, 1}};
  form_ref ff[2] = {{family::x, 1}, {family::ybar, 1}};
  path_point a = ip(0.05, 0.7), b = ip(-0.2, 0.5);
  for (auto forms : {std::span<const form_ref>(fr), std::span<const form_ref>(ff)}) {
    cplx in_inf = compute_C(fx.ctx, a, b, forms, 1e-11, cusp_label::infinity);
    cplx in_zero = compute_C(fx.ctx, a, b, forms, 1e-11, cusp_label::zero);
    CHECK(std::abs(in_inf - in_zero) < 1e-9);
  }
}

TEST_CASE("mixed-cusp paths split at the waypoint consistently") {
  fixture fx;
  form_ref fr[1] = {{family::x, 1}};
  // C_0^infinity(f) = C_0^w + C_w^infinity through the interior waypoint
  double w = 1.0 / std::sqrt(11.0);
  cplx whole = compute_C(fx.ctx, path_point::at_zero(),
                         path_point::at_infinity(), fr, 1e-11);
  cplx first = compute_C(fx.ctx, path_point::at_zero(), ip(0.0, w), fr, 1e-11);
  cplx second =
      compute_C(fx.ctx, ip(0.0, w), path_point::at_infinity(), fr, 1e-11);
  CHECK(std::abs(whole - (first + second)) < 1e-10);
}

TEST_CASE("ij series have constant term one and matching blocks") {
  fixture fx;
  path_point a = ip(0.0, 1.8), b = ip(0.2, 1.0);
  free_series iser = I_series(fx.ctx, a, b, 2, 1e-10);
  free_series jser = J_series(fx.ctx, a, b, 2, 1e-10);
  free_series both = ij_series(fx.ctx, a, b, 2, 1e-10);
  CHECK(std::abs(iser.coeff(word{}) - 1.0) < 1e-14);
  alphabet al = fx.ctx.letters();
  word x = word::from_letters(std::array{letter{family::x, 1}}, al);
  word y = word::from_letters(std::array{letter{family::ybar, 1}}, al);
  // I carries only X words, J only Y words, the product carries both
  CHECK(iser.coeff(y) == cplx(0.0));
  CHECK(jser.coeff(x) == cplx(0.0));
  CHECK(std::abs(both.coeff(x) - iser.coeff(x)) < 1e-12);
  CHECK(std::abs(both.coeff(y) - jser.coeff(y)) < 1e-12);
  // same form on both sides: the Y coefficient is the conjugate
  CHECK(std::abs(jser.coeff(y) - std::conj(iser.coeff(x))) < 1e-12);
  // reversal inverts the series
  free_series back = ij_series(fx.ctx, b, a, 2, 1e-10);
  auto rep = series_approx_eq(series_mul(both, back),
                              free_series::one(al, 2), 1e-9);
  CHECK(rep.equal);
}

TEST_CASE("symbols of parabolic elements are trivial") {
  fixture fx;
  alphabet al = fx.ctx.letters();
  free_series unit = free_series::one(al, 2);
  for (const group_element& g :
       {t_power(1), t_power(-4), group_element::make(1, 0, 11, 1),
        group_element::make(1, 0, -33, 1)}) {
    free_series sym = noncommutative_modular_symbol(
        fx.ctx, g, path_point::at_infinity(), 2, 1e-10);
    auto rep = series_approx_eq(sym, unit, 1e-8);
    CHECK(rep.equal);
  }
}

TEST_CASE("engine symbols match direct integration") {
  fixture fx;
  symbol_engine eng(fx.ctx, 2, 1e-10);
  group_element u = group_element::make(7, -2, 11, -3);
  for (const group_element& g : {u, u.inverse(), u.mul(t_power(2))}) {
    free_series direct = noncommutative_modular_symbol(
        fx.ctx, g, path_point::at_infinity(), 2, 1e-10);
    free_series fast = eng.symbol(g);
    auto rep = series_approx_eq(direct, fast, 1e-8);
    CHECK(rep.equal);
  }
}

TEST_CASE("the symbol map reverses products") {
  fixture fx;
  symbol_engine eng(fx.ctx, 2, 1e-10);
  std::mt19937 rng(29);
  group_element u = group_element::make(7, -2, 11, -3);
  std::uniform_int_distribution<long long> sh(-2, 2);
  for (int trial = 0; trial < 5; ++trial) {
    group_element g = u.mul(t_power(sh(rng))).mul(u.inverse());
    group_element h = t_power(sh(rng)).mul(u);
    free_series lhs = eng.symbol(g.mul(h));
    free_series rhs = series_mul(eng.symbol(h), eng.symbol(g));
    auto rep = series_approx_eq(lhs, rhs, 1e-8);
    CHECK(rep.equal);
  }
}

TEST_CASE("engine pairing is additive and matches the direct route") {
  fixture fx;
  symbol_engine eng(fx.ctx, 2, 1e-10);
  group_element u = group_element::make(7, -2, 11, -3);
  cplx pu = eng.pairing(u, family::x, 1);
  CHECK(std::abs(pu) > 1e-6);  // nontrivial element, nonzero period
  // additivity over products with parabolic pieces
  cplx shifted = eng.pairing(t_power(3).mul(u).mul(t_power(-5)), family::x, 1);
  CHECK(std::abs(shifted - pu) < 1e-9);
  cplx doubled = eng.pairing(u.mul(u), family::x, 1);
  CHECK(std::abs(doubled - 2.0 * pu) < 1e-9);
  // the degree-1 series coefficient carries the same number scaled
  free_series sym = eng.symbol(u);
  alphabet al = fx.ctx.letters();
  word x = word::from_letters(std::array{letter{family::x, 1}}, al);
  cplx coeff = sym.coeff(x);
  CHECK(std::abs(coeff - pu / cplx(0.0, -kTwoPi)) < 1e-9);
}

TEST_CASE("cusp-based symbols require membership") {
  fixture fx;
  CHECK_THROWS_AS(noncommutative_modular_symbol(
                      fx.ctx, s_element(), path_point::at_infinity(), 2, 1e-8),
                  std::domain_error);
}

TEST_CASE("form references outside the context are rejected") {
  fixture fx;
  form_ref bad[1] = {{family::x, 2}};
  CHECK_THROWS_AS(compute_C(fx.ctx, ip(0, 2), ip(0, 1), bad, 1e-8),
                  std::out_of_range);
}

TEST_CASE("unreachable tolerances raise truncation errors") {
  fixture fx;
  form_ref fr[2] = {{family::x, 1}, {family::x, 1}};
  CHECK_THROWS_AS(
      compute_C(fx.ctx, ip(0.0, 1e-7), ip(0.1, 1e-7), fr, 1e-10),
      truncation_error);
}
