// Shared scalar types, constants and small numeric helpers.
#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ncms {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// e(z) = exp(2*pi*i*z).  The workhorse character; |e(z)| = exp(-2*pi*Im z).
inline cplx e_of(cplx z) { return std::exp(cplx(0.0, kTwoPi) * z); }

// x^s for real x > 0 and complex s, as exp(s log x).
inline cplx real_pow(double x, cplx s) { return std::exp(s * std::log(x)); }

// Raised when a certified truncation cannot reach the requested tolerance
// within the configured caps.
class truncation_error : public std::runtime_error {
 public:
  truncation_error(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

// Thread-count resolution: non-positive request falls back to the
// NCMS_THREADS environment variable, then to 1.
int resolve_threads(int requested);

}  // namespace ncms
