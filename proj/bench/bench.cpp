// Timing comparison between the serial reference fold and the OpenMP coset
// kernel.  Not a correctness gate; the parallel test binary pins agreement.

#include <chrono>
#include <cstdio>
#include <thread>

#include "ncms/cusp_forms.hpp"
#include "ncms/eisenstein.hpp"
#include "ncms/iterated_integrals.hpp"
#include "ncms/modular_group.hpp"

using namespace ncms;

namespace {

template <class F>
double time_once(F&& f) {
  auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

int main() {
  gamma0 G{11};
  cplx z{0.21, 0.83};
  cplx s{2.5, 0.0};
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());

  std::printf("classical coset sum, level 11, z = %.2f + %.2fi, s = %.1f\n",
              z.real(), z.imag(), s.real());
  std::printf("%8s %10s %12s %12s %12s %9s\n", "cmax", "cosets", "reference",
              "kernel x1", "kernel xN", "speedup");

  // largest cmax keeps the coset count under the kernel's 1e6-row cap
  for (double cmax : {2000.0, 4000.0, 6000.0}) {
    eis_params p1{s, cmax, 1e-10, 1};
    eis_params pn{s, cmax, 1e-10, static_cast<int>(hw)};
    eis_value ref, k1, kn;
    double tr = time_once([&] { ref = classical_E_reference(G, cusp::infinity(), z, p1); });
    double t1 = time_once([&] { k1 = classical_E(G, cusp::infinity(), z, p1); });
    double tn = time_once([&] { kn = classical_E(G, cusp::infinity(), z, pn); });
    std::printf("%8.0f %10lld %10.3fms %10.3fms %10.3fms %8.2fx\n", cmax,
                ref.cosets_used, 1e3 * tr, 1e3 * t1, 1e3 * tn, t1 / tn);
    double dev = std::abs(ref.value - k1.value) + std::abs(ref.value - kn.value);
    if (dev > 1e-9 * std::abs(ref.value)) {
      std::printf("  disagreement %.3e, aborting\n", dev);
      return 1;
    }
  }

  std::printf("\nseries-valued sum (degree 2), %u threads vs 1\n", hw);
  cusp_form f = cusp_form::builtin("11a");
  symbol_context ctx{G, {f}, {f}};
  symbol_engine eng(ctx, 2, 1e-9);
  auto base = path_point::interior(upper_half_point{0.0, 1.0});
  for (double cmax : {1000.0, 3000.0}) {
    eis_value v1, vn;
    double t1 = time_once([&] {
      v1 = E_calligraphic(eng, cusp::infinity(), z, base, {s, cmax, 1e-9, 1});
    });
    double tn = time_once([&] {
      vn = E_calligraphic(eng, cusp::infinity(), z, base,
                          {s, cmax, 1e-9, static_cast<int>(hw)});
    });
    std::printf("  cmax %6.0f: %8.3fms -> %8.3fms (%.2fx), %lld cosets\n",
                cmax, 1e3 * t1, 1e3 * tn, t1 / tn, v1.cosets_used);
  }
  return 0;
}
