// Weight-2 cusp forms given by integer Fourier coefficients at the cusps.
// Built-in: the level-11 eta product  q prod (1-q^n)^2 (1-q^{11n})^2.
#pragma once

#include <string>
#include <vector>

#include "ncms/common.hpp"
#include "ncms/modular_group.hpp"

namespace ncms {

// Coefficients of prod_{n>=1} (1 - q^n) up to q^M (pentagonal-number sum).
std::vector<long long> euler_product_coefficients(int M);

// Coefficients c(0..M) of the named eta product; only "11a" is built in.
std::vector<long long> eta_product_coefficients(const std::string& label,
                                                int M);

struct form_value {
  cplx value;
  double tail_bound;  // certified bound on the dropped tail
  int terms_used;
};

class cusp_form {
 public:
  static constexpr int default_coefficient_count = 5000;

  static cusp_form builtin(const std::string& label,
                           int M = default_coefficient_count);
  static cusp_form from_file(const std::string& path);
  void write_file(const std::string& path) const;

  long long level() const { return level_; }
  const std::string& label() const { return label_; }
  // Eigenvalue of f -> (f |_2 sigma_0), determined numerically for the
  // built-in form, read from the header for imports.
  int atkin_lehner_sign() const { return sign_; }
  int coefficient_count() const { return static_cast<int>(coeffs_.size()) - 1; }
  long long coefficient(int m) const;  // c(m), c(0) = 0

  // Expansion coefficients of f |_2 sigma_b: identical at infinity,
  // sign-scaled at zero.
  std::vector<long long> coefficients_at_cusp(const cusp& b) const;
  long long coefficient_at_cusp(int m, const cusp& b) const;

  // Value of (f |_2 sigma_b)(z) with a certified geometric tail below tol.
  // Requires Im z >= y_min.
  form_value eval(cplx z, const cusp& b, double tol = 1e-12,
                  double y_min = 0.05) const;

  // Extends the stored coefficient run (recomputes; built-in labels only).
  void ensure_coefficients(int M);

 private:
  cusp_form() = default;
  void check_bound() const;  // asserts |c(m)| <= 2m
  long long level_ = 0;
  std::string label_;
  int sign_ = 1;
  bool builtin_ = false;
  std::vector<long long> coeffs_;  // index m = 0..M
};

// Numerically determined Fricke sign: the eps with f|_2 sigma_0 = eps * f,
// compared at a test point; throws if neither sign fits.
int measure_fricke_sign(const cusp_form& f, double tol = 1e-8);

}  // namespace ncms
