#include "ncms/cusp_forms.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace ncms {

namespace {

std::vector<long long> poly_mul_trunc(const std::vector<long long>& A,
                                      const std::vector<long long>& B,
                                      int M) {
  std::vector<long long> C(M + 1, 0);
  for (int i = 0; i <= M && i < static_cast<int>(A.size()); ++i) {
    if (A[i] == 0) continue;
    int jmax = std::min<int>(M - i, static_cast<int>(B.size()) - 1);
    for (int j = 0; j <= jmax; ++j) C[i + j] += A[i] * B[j];
  }
  return C;
}

// Certified bound on |sum_{m>M} c(m) q^m| under |c(m)| <= 2m, |q| = x:
// 2 * x^{M+1} ((M+1) - M x) / (1-x)^2.
double qtail(int M, double x) {
  double num = std::pow(x, M + 1) * ((M + 1) - M * x);
  return 2.0 * num / ((1.0 - x) * (1.0 - x));
}

}  // namespace

std::vector<long long> euler_product_coefficients(int M) {
  if (M < 0) throw std::invalid_argument("negative truncation");
  std::vector<long long> phi(M + 1, 0);
  phi[0] = 1;
  // prod (1-q^n) = sum_k (-1)^k q^{k(3k-1)/2}, k over all integers.
  for (long long k = 1;; ++k) {
    long long p1 = k * (3 * k - 1) / 2, p2 = k * (3 * k + 1) / 2;
    if (p1 > M && p2 > M) break;
    long long s = (k % 2 == 0) ? 1 : -1;
    if (p1 <= M) phi[p1] += s;
    if (p2 <= M) phi[p2] += s;
  }
  return phi;
}

std::vector<long long> eta_product_coefficients(const std::string& label,
                                                int M) {
  if (label != "11a")
    throw std::invalid_argument("unknown built-in form label: " + label);
  auto phi = euler_product_coefficients(M);
  auto sq = poly_mul_trunc(phi, phi, M);
  std::vector<long long> sq11(M + 1, 0);
  for (int i = 0; 11 * i <= M; ++i) sq11[11 * i] = sq[i];
  auto prod = poly_mul_trunc(sq, sq11, M);
  std::vector<long long> c(M + 1, 0);  // shift by q
  for (int i = 0; i + 1 <= M; ++i) c[i + 1] = prod[i];
  return c;
}

long long cusp_form::coefficient(int m) const {
  if (m < 0 || m >= static_cast<int>(coeffs_.size()))
    throw std::out_of_range("coefficient index beyond stored run");
  return coeffs_[m];
}

std::vector<long long> cusp_form::coefficients_at_cusp(const cusp& b) const {
  if (b.label == cusp_label::infinity) return coeffs_;
  std::vector<long long> out = coeffs_;
  if (sign_ == -1)
    for (auto& v : out) v = -v;
  return out;
}

long long cusp_form::coefficient_at_cusp(int m, const cusp& b) const {
  long long v = coefficient(m);
  return b.label == cusp_label::infinity ? v : sign_ * v;
}

void cusp_form::check_bound() const {
  for (int m = 1; m < static_cast<int>(coeffs_.size()); ++m)
    if (std::abs(coeffs_[m]) > 2LL * m)
      throw std::invalid_argument("coefficient bound |c(m)| <= 2m violated");
  if (!coeffs_.empty() && coeffs_[0] != 0)
    throw std::invalid_argument("cusp form must vanish at the cusp");
}

form_value cusp_form::eval(cplx z, const cusp& b, double tol,
                           double y_min) const {
  double y = z.imag();
  if (y < y_min) throw std::domain_error("evaluation below the height floor");
  double x = std::exp(-kTwoPi * y);
  int M = static_cast<int>(coeffs_.size()) - 1;
  // Smallest truncation whose certified tail is below tol.
  int use = 1;
  while (use < M && qtail(use, x) > tol) ++use;
  if (qtail(use, x) > tol)
    throw truncation_error("stored coefficients cannot reach tolerance",
                           qtail(use, x));
  cplx q = e_of(z), qp = q, sum = 0.0;
  for (int m = 1; m <= use; ++m) {
    sum += static_cast<double>(coefficient_at_cusp(m, b)) * qp;
    qp *= q;
  }
  return {sum, qtail(use, x), use};
}

void cusp_form::ensure_coefficients(int M) {
  if (M <= coefficient_count()) return;
  if (!builtin_)
    throw truncation_error("imported form has a fixed coefficient run",
                           static_cast<double>(coefficient_count()));
  coeffs_ = eta_product_coefficients(label_, M);
  check_bound();
}

cusp_form cusp_form::builtin(const std::string& label, int M) {
  cusp_form f;
  f.level_ = 11;
  f.label_ = label;
  f.builtin_ = true;
  f.coeffs_ = eta_product_coefficients(label, M);
  f.check_bound();
  f.sign_ = measure_fricke_sign(f);
  return f;
}

cusp_form cusp_form::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open form file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("empty form file: " + path);
  cusp_form f;
  {
    std::istringstream hs(line);
    std::string hash, kw;
    long long N = 0;
    std::string label;
    int sign = 0;
    hs >> hash;
    if (hash != "#") throw std::invalid_argument("missing header line");
    while (hs >> kw) {
      if (kw == "level")
        hs >> N;
      else if (kw == "label")
        hs >> label;
      else if (kw == "sign")
        hs >> sign;
      else
        throw std::invalid_argument("unknown header keyword: " + kw);
    }
    if (N < 1 || label.empty() || (sign != 1 && sign != -1))
      throw std::invalid_argument("incomplete form header");
    f.level_ = N;
    f.label_ = label;
    f.sign_ = sign;
  }
  f.coeffs_.push_back(0);
  long long v;
  while (in >> v) f.coeffs_.push_back(v);
  if (f.coefficient_count() < 1)
    throw std::invalid_argument("form file has no coefficients");
  f.check_bound();
  return f;
}

void cusp_form::write_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write form file: " + path);
  out << "# level " << level_ << " label " << label_ << " sign "
      << (sign_ > 0 ? "+1" : "-1") << "\n";
  for (int m = 1; m <= coefficient_count(); ++m) out << coeffs_[m] << "\n";
}

int measure_fricke_sign(const cusp_form& f, double tol) {
  // Compare (f|_2 sigma_0)(z) = f(-1/(Nz)) / (N z^2) against +-f(z) at a
  // point where both q-series converge quickly.
  double N = static_cast<double>(f.level());
  cplx z(0.13, 0.52);
  cplx w = -1.0 / (N * z);
  cusp inf = cusp::infinity();
  cplx left = f.eval(w, inf, 1e-13).value / (N * z * z);
  cplx right = f.eval(z, inf, 1e-13).value;
  double dplus = std::abs(left - right), dminus = std::abs(left + right);
  double scale = std::max(1.0, std::abs(right));
  if (dplus < tol * scale && dminus > 100 * dplus) return 1;
  if (dminus < tol * scale && dplus > 100 * dminus) return -1;
  throw std::runtime_error("could not resolve the Fricke sign numerically");
}

}  // namespace ncms
