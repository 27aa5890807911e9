#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "ncms/cusp_forms.hpp"

using namespace ncms;

TEST_CASE("euler product coefficients follow the pentagonal pattern") {
  auto e = euler_product_coefficients(30);
  REQUIRE(e.size() == 31);
  // prod (1-q^n) = 1 - q - q^2 + q^5 + q^7 - q^12 - q^15 + q^22 + q^26 - ...
  std::vector<long long> expect(31, 0);
  expect[0] = 1;
  expect[1] = -1;
  expect[2] = -1;
  expect[5] = 1;
  expect[7] = 1;
  expect[12] = -1;
  expect[15] = -1;
  expect[22] = 1;
  expect[26] = 1;
  for (int m = 0; m <= 30; ++m) CHECK(e[m] == expect[m]);
}

TEST_CASE("the level 11 eta product starts 1, -2, -1, 2, 1, 2, -2") {
  cusp_form f = cusp_form::builtin("11a", 100);
  CHECK(f.level() == 11);
  CHECK(f.coefficient(0) == 0);
  CHECK(f.coefficient(1) == 1);
  CHECK(f.coefficient(2) == -2);
  CHECK(f.coefficient(3) == -1);
  CHECK(f.coefficient(4) == 2);
  CHECK(f.coefficient(5) == 1);
  CHECK(f.coefficient(6) == 2);
  CHECK(f.coefficient(7) == -2);
  CHECK(f.coefficient(8) == 0);
  CHECK(f.coefficient(9) == -2);
  CHECK(f.coefficient(10) == -2);
}

TEST_CASE("hecke multiplicativity holds for the builtin form") {
  cusp_form f = cusp_form::builtin("11a", 200);
  // coprime indices multiply
  CHECK(f.coefficient(6) == f.coefficient(2) * f.coefficient(3));
  CHECK(f.coefficient(15) == f.coefficient(3) * f.coefficient(5));
  CHECK(f.coefficient(35) == f.coefficient(5) * f.coefficient(7));
  // prime power recursion a(p^2) = a(p)^2 - p for p != 11
  for (long long p : {2, 3, 5, 7, 13}) {
    CHECK(f.coefficient(static_cast<int>(p * p)) ==
          f.coefficient(static_cast<int>(p)) * f.coefficient(static_cast<int>(p)) - p);
  }
  // at the bad prime a(11^2) = a(11)^2
  CHECK(f.coefficient(121) == f.coefficient(11) * f.coefficient(11));
}

TEST_CASE("coefficient bound |c(m)| <= 2m") {
  cusp_form f = cusp_form::builtin("11a", 3000);
  for (int m = 1; m <= 3000; ++m) {
    long long c = f.coefficient(m);
    CHECK(std::llabs(c) <= 2LL * m);
  }
}

TEST_CASE("ensure_coefficients extends without changing the prefix") {
  cusp_form f = cusp_form::builtin("11a", 50);
  auto before = f.coefficients_at_cusp(cusp::infinity());
  f.ensure_coefficients(500);
  CHECK(f.coefficient_count() >= 500);
  auto after = f.coefficients_at_cusp(cusp::infinity());
  for (size_t m = 0; m < before.size(); ++m) CHECK(before[m] == after[m]);
}

TEST_CASE("the fricke eigenvalue of 11a is -1 and scales the zero cusp") {
  cusp_form f = cusp_form::builtin("11a");
  CHECK(f.atkin_lehner_sign() == -1);
  CHECK(measure_fricke_sign(f) == -1);
  for (int m = 1; m <= 20; ++m) {
    CHECK(f.coefficient_at_cusp(m, cusp::infinity()) == f.coefficient(m));
    CHECK(f.coefficient_at_cusp(m, cusp::zero()) == -f.coefficient(m));
  }
}

TEST_CASE("eval matches a direct q-expansion sum") {
  cusp_form f = cusp_form::builtin("11a", 400);
  cplx z(0.3, 0.8);
  cplx q = e_of(z), qk = 1.0, direct = 0.0;
  for (int m = 1; m <= 400; ++m) {
    qk *= q;
    direct += static_cast<double>(f.coefficient(m)) * qk;
  }
  form_value v = f.eval(z, cusp::infinity(), 1e-12);
  CHECK(std::abs(v.value - direct) < 1e-11);
  CHECK(v.tail_bound < 1e-12);
  CHECK(v.terms_used <= 400);
}

TEST_CASE("eval at the zero cusp is the scaled expansion") {
  cusp_form f = cusp_form::builtin("11a", 400);
  cplx z(0.1, 0.9);
  form_value at0 = f.eval(z, cusp::zero(), 1e-12);
  form_value atinf = f.eval(z, cusp::infinity(), 1e-12);
  CHECK(std::abs(at0.value + atinf.value) < 1e-11);
}

TEST_CASE("eval refuses points below the height floor") {
  cusp_form f = cusp_form::builtin("11a");
  CHECK_THROWS(f.eval(cplx(0.0, 0.01), cusp::infinity(), 1e-12, 0.05));
}

TEST_CASE("file round trip") {
  cusp_form f = cusp_form::builtin("11a", 80);
  auto path = std::filesystem::temp_directory_path() / "ncms_form_test.txt";
  f.write_file(path.string());
  cusp_form g = cusp_form::from_file(path.string());
  std::filesystem::remove(path);
  CHECK(g.level() == f.level());
  CHECK(g.label() == f.label());
  CHECK(g.atkin_lehner_sign() == f.atkin_lehner_sign());
  CHECK(g.coefficient_count() >= 80);
  for (int m = 1; m <= 80; ++m) CHECK(g.coefficient(m) == f.coefficient(m));
}

TEST_CASE("unknown labels are rejected") {
  CHECK_THROWS(cusp_form::builtin("37a"));
  CHECK_THROWS(eta_product_coefficients("nope", 10));
}
