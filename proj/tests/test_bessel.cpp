#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "ncms/bessel.hpp"

using namespace ncms;

TEST_CASE("half-integer order has a closed form") {
  // K_{1/2}(x) = sqrt(pi/(2x)) e^{-x}
  for (double x : {0.5, 1.0, 2.0, 5.0, 10.0}) {
    cplx got = bessel_k(cplx(0.5, 0.0), x);
    double want = std::sqrt(kPi / (2.0 * x)) * std::exp(-x);
    CHECK(std::abs(got - want) < 1e-12 * want + 1e-15);
  }
  // K_{3/2}(x) = sqrt(pi/(2x)) e^{-x} (1 + 1/x)
  for (double x : {1.0, 3.0, 7.0}) {
    cplx got = bessel_k(cplx(1.5, 0.0), x);
    double want = std::sqrt(kPi / (2.0 * x)) * std::exp(-x) * (1.0 + 1.0 / x);
    CHECK(std::abs(got - want) < 1e-11 * want);
  }
}

TEST_CASE("the order is symmetric under negation") {
  cplx v(0.8, 1.3);
  for (double x : {0.7, 2.5, 6.0}) {
    cplx p = bessel_k(v, x);
    cplx m = bessel_k(-v, x);
    CHECK(std::abs(p - m) <= 1e-12 * std::abs(p));
  }
}

TEST_CASE("recurrence K_{v+1} = K_{v-1} + (2v/x) K_v") {
  for (double x : {1.5, 4.0}) {
    for (cplx v : {cplx(0.7, 0.0), cplx(1.1, 0.9)}) {
      cplx lhs = bessel_k(v + 1.0, x);
      cplx rhs = bessel_k(v - 1.0, x) + (2.0 * v / x) * bessel_k(v, x);
      CHECK(std::abs(lhs - rhs) < 1e-10 * std::abs(lhs));
    }
  }
}

TEST_CASE("known value at order 0") {
  // K_0(1) = 0.42102443824070833333...
  cplx got = bessel_k(cplx(0.0, 0.0), 1.0);
  CHECK(got.real() == doctest::Approx(0.4210244382407083).epsilon(1e-12));
  CHECK(std::abs(got.imag()) < 1e-14);
}

TEST_CASE("whittaker profile ties to bessel_k") {
  cplx s(2.5, 0.0);
  double y = 0.8;
  long long k = 3;
  cplx w = whittaker_w(k, cplx(0.25, y), s);
  cplx want = 2.0 * std::sqrt(3.0 * y) *
              bessel_k(s - 0.5, 2.0 * kPi * 3.0 * y) * e_of(cplx(3 * 0.25, 0));
  CHECK(std::abs(w - want) < 1e-12 * std::abs(want));
  // negative mode: |k| in the modulus, phase from e(kx)
  cplx wm = whittaker_w(-k, cplx(0.25, y), s);
  cplx wantm = 2.0 * std::sqrt(3.0 * y) *
               bessel_k(s - 0.5, 2.0 * kPi * 3.0 * y) *
               e_of(cplx(-3 * 0.25, 0));
  CHECK(std::abs(wm - wantm) < 1e-12 * std::abs(wantm));
}

TEST_CASE("log gamma agrees with lgamma on the real axis") {
  for (double x : {0.5, 1.0, 2.5, 7.3, 20.0}) {
    cplx got = log_gamma(cplx(x, 0.0));
    CHECK(got.real() == doctest::Approx(std::lgamma(x)).epsilon(1e-12));
    CHECK(std::abs(got.imag()) < 1e-12);
  }
}

TEST_CASE("gamma ratio satisfies the shift identity") {
  for (cplx a : {cplx(1.3, 0.0), cplx(2.0, 1.5), cplx(0.7, -0.4)}) {
    cplx r = gamma_ratio(a + 1.0, a);
    CHECK(std::abs(r - a) < 1e-11 * std::abs(a));
  }
}

TEST_CASE("tiny arguments are refused rather than wrong") {
  CHECK_THROWS(bessel_k(cplx(0.5, 0.0), 1e-12));
}
