#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "ncms/cusp_forms.hpp"
#include "ncms/eisenstein.hpp"
#include "ncms/iterated_integrals.hpp"
#include "ncms/modular_group.hpp"

using namespace ncms;

// The coset kernel has two execution paths: the OpenMP one used in
// production and a serial fold kept as the reference.  Everything here pins
// them against each other; the summation order differs, so comparisons are
// roundoff-tight rather than bit-exact.

TEST_CASE("threaded kernel reproduces the serial fold") {
  gamma0 G{11};
  detail::kernel_request req;
  req.b = cusp::infinity();
  req.zs = {cplx{0.2, 0.9}, cplx{-0.37, 1.4}};
  req.s = cplx{2.7, -0.4};
  req.cmax = 900.0;
  req.tol = 1e-10;
  req.channels = 2;
  req.weight = [](const group_element& g, std::span<cplx> out) {
    out[0] = cplx{1.0, 0.0};
    out[1] = cplx{static_cast<double>(g.c % 7), static_cast<double>(g.d % 5)};
  };

  req.threads = 2;
  auto par = detail::run_kernel(G, req, false);
  auto ser = detail::run_kernel(G, req, true);
  REQUIRE(par.acc.size() == ser.acc.size());
  REQUIRE(par.acc.size() == req.zs.size() * req.channels);
  CHECK(par.cosets == ser.cosets);
  CHECK(par.tail == doctest::Approx(ser.tail).epsilon(1e-12));
  for (size_t i = 0; i < par.acc.size(); ++i) {
    double scale = std::max(1.0, std::abs(ser.acc[i]));
    CHECK(std::abs(par.acc[i] - ser.acc[i]) < 1e-10 * scale);
  }
}

TEST_CASE("classical sum is thread-count independent") {
  gamma0 G{11};
  cplx z{0.31, 0.77};
  auto one = classical_E(G, cusp::infinity(), z, {cplx{2.5, 0.0}, 1500.0, 1e-10, 1});
  auto four = classical_E(G, cusp::infinity(), z, {cplx{2.5, 0.0}, 1500.0, 1e-10, 4});
  CHECK(one.cosets_used == four.cosets_used);
  CHECK(std::abs(one.value - four.value) < 1e-11 * std::abs(one.value));
}

TEST_CASE("series batch is thread-count independent") {
  gamma0 G{11};
  cusp_form f = cusp_form::builtin("11a");
  symbol_context ctx{G, {f}, {f}};
  symbol_engine eng(ctx, 2, 1e-9);
  auto base = path_point::interior(upper_half_point{0.0, 1.0});
  std::vector<cplx> zs{{0.15, 0.95}, {0.4, 1.25}};

  auto a = E_calligraphic_batch(eng, cusp::infinity(), zs, base,
                                {cplx{2.5, 0.0}, 500.0, 1e-9, 1});
  auto b = E_calligraphic_batch(eng, cusp::infinity(), zs, base,
                                {cplx{2.5, 0.0}, 500.0, 1e-9, 3});
  REQUIRE(a.size() == b.size());
  const alphabet& al = a[0].series.letters();
  word x1 = word::from_letters(std::array{letter{family::x, 1}}, al);
  word y1 = word::from_letters(std::array{letter{family::ybar, 1}}, al);
  for (size_t i = 0; i < a.size(); ++i) {
    for (const word& w : {word{}, x1, y1})
      CHECK(std::abs(a[i].series.coeff(w) - b[i].series.coeff(w)) < 1e-11);
  }
}

TEST_CASE("environment sentinel resolves to at least one thread") {
  // threads <= 0 means "use NCMS_THREADS, else 1"; the call must not hang or
  // throw whatever the environment says.
  gamma0 G{11};
  auto v = classical_E(G, cusp::infinity(), cplx{0.2, 1.1},
                       {cplx{2.5, 0.0}, 300.0, 1e-9, 0});
  CHECK(std::abs(v.value) > 0.0);
}
