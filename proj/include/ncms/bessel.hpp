// Modified Bessel K of complex order via the cosh integral representation,
// the Whittaker-type Fourier mode profile, and complex log-gamma.
#pragma once

#include "ncms/common.hpp"

namespace ncms {

// K_v(x) for real x > 0 and complex v: adaptive composite quadrature of
// int_0^infty exp(-x cosh t) cosh(v t) dt with a certified truncation point.
// Throws range_error when x is too small for the representation to be stable.
cplx bessel_k(cplx v, double x, double tol = 1e-12);

// W_s(k z) = 2 sqrt(|k| y) K_{s-1/2}(2 pi |k| y) e(k x) for integer k != 0.
cplx whittaker_w(long long k, cplx z, cplx s, double tol = 1e-12);

// log Gamma(s) for Re s > 0 (Lanczos); gamma_ratio(a, b) = Gamma(a)/Gamma(b).
cplx log_gamma(cplx s);
cplx gamma_ratio(cplx a, cplx b);

}  // namespace ncms
