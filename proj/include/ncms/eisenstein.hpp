// Eisenstein series on Gamma_0(N): the classical series, versions twisted by
// noncommutative modular symbols, their Fourier analysis, and residual checks
// for the differential and higher-order transformation properties.
#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ncms/common.hpp"
#include "ncms/free_series.hpp"
#include "ncms/iterated_integrals.hpp"
#include "ncms/modular_group.hpp"

namespace ncms {

struct eis_params {
  cplx s{2.0, 0.0};
  double cmax = 1000.0;  // bottom-row truncation
  double tol = 1e-8;     // budget for the translate tails
  int threads = 1;       // non-positive: NCMS_THREADS, then 1
};

struct eis_value {
  cplx value{};                    // scalar result, or the extracted word
  free_series series{alphabet{0, 0}, 0};
  double truncation_estimate = 0;  // dropped-coset estimate
  long long cosets_used = 0;
};

struct height_report {
  double y_gamma = 0;  // invariant height, refined over truncated cosets
  double y_f = 0;      // max over cusps at the point itself
};

// E_b(z,s) = sum over cosets of Im(sigma_b^{-1} gamma z)^s, Re(s) > 1.
eis_value classical_E(const gamma0& G, const cusp& b, cplx z,
                      const eis_params& p);

// Series-valued sum: each coset contributes symbol(gamma) * Im^s, the symbol
// taken at the given base point.  Degree comes from the engine.
eis_value E_calligraphic(const symbol_engine& eng, const cusp& b, cplx z,
                         path_point base, const eis_params& p);

// Same sum evaluated at many points in one pass over cosets (the symbols do
// not depend on z, so they are shared).
std::vector<eis_value> E_calligraphic_batch(const symbol_engine& eng,
                                            const cusp& b,
                                            std::span<const cplx> zs,
                                            path_point base,
                                            const eis_params& p);

// Single word coefficient of the twisted series: f_idx picks X letters in
// order, g_idx picks Y letters.  Empty lists reduce to classical_E.
eis_value twisted_E(const symbol_engine& eng, const cusp& b, cplx z,
                    std::span<const int> f_idx, std::span<const int> g_idx,
                    path_point base, const eis_params& p);

// Q version: integrals run from gamma z instead of gamma a, which factors as
// the z-to-base series times the twisted sum.
eis_value Q_series(const symbol_engine& eng, const cusp& b, cplx z,
                   std::span<const int> f_idx, std::span<const int> g_idx,
                   path_point base, const eis_params& p);

// <gamma, f> = 2 pi i * C_{z0}^{gamma z0}(f); independent of z0.
cplx pairing(const symbol_context& ctx, const group_element& g, form_ref f,
             path_point z0, double tol = 1e-10);

// Sum of <gamma,f>^m * conj(<gamma,g>)^n * Im^s with pairings accumulated
// additively over generator words (degree-1 route, no series machinery).
eis_value E_mn(const symbol_engine& eng, const cusp& b, cplx z, int m, int n,
               const eis_params& p);

// Trapezoid Fourier extraction on the closed horocycle at height y in the
// chart the evaluator works in: (1/Npoints) sum F(x_j + i y) e(-k x_j).
// For k != 0 divide by whittaker_w at x = 0 to recover the coefficient
// function.  Npoints < 8 is refused.
cplx fourier_coefficient(const std::function<cplx(cplx)>& chart_evaluator,
                         int k, double y, int Npoints);

struct laplace_report {
  double residual = 0;
  bool relative = true;  // false when |F(z)| < 1e-12
};

// |Delta F - s(s-1) F| / |F| at z via 5-point central differences,
// Delta = y^2 (d^2/dx^2 + d^2/dy^2).
laplace_report laplacian_residual(const std::function<cplx(cplx)>& F, cplx z,
                                  cplx s, double h = 1e-3);

// Invariant height sup Im(sigma_a^{-1} gamma z) refined over truncated
// cosets, and the plain cusp height max.
height_report heights(const gamma0& G, cplx z, double cmax);

// |F|(gamma_1 - 1)...(gamma_n - 1)| at z by inclusion-exclusion; n <= 4.
double higher_order_residual(const std::function<cplx(cplx)>& F,
                             std::span<const group_element> gs, cplx z);

// Straight-line reference accumulation of the classical sum, kept as the
// comparison target for the parallel kernel.
eis_value classical_E_reference(const gamma0& G, const cusp& b, cplx z,
                                const eis_params& p);

struct stats_row {
  long long c = 0;
  long long d = 0;
  cplx value;  // <gamma, f> for any gamma with this bottom row
};

struct stats_summary {
  std::vector<stats_row> rows;  // c ascending, then d
  double sum_sq = 0;            // sum of |<gamma,f>|^2
  long long count = 0;
  // sample moments of Re<gamma,f> / sqrt(log(c^2+d^2))
  double mean = 0;
  double variance = 0;
  double skewness = 0;
};

// Pairings over all bottom rows (c,d) with c^2+d^2 <= T, c > 0 divisible by
// the level, gcd(c,d)=1.  The pairing only depends on the row up to sign, so
// one representative per row is enough.  T above 1e6 is refused.
stats_summary pairing_stats(const symbol_engine& eng, double T,
                            family fam = family::x, int idx = 1);

namespace detail {

// Shared coset-sum kernel.  weight fills `channels` complex values per coset
// element; the kernel multiplies them by the translate-summed Im^s factor for
// every z and accumulates into acc[z_index * channels + ch].
struct kernel_request {
  cusp b;
  std::vector<cplx> zs;
  cplx s;
  double cmax = 0;
  double tol = 1e-8;
  int threads = 1;
  int channels = 1;
  std::function<void(const group_element&, std::span<cplx>)> weight;
};

struct kernel_result {
  std::vector<cplx> acc;
  double tail = 0;          // scalar tail estimate scaled by max weight
  long long cosets = 0;
};

kernel_result run_kernel(const gamma0& G, const kernel_request& req,
                         bool force_serial = false);

}  // namespace detail

}  // namespace ncms
