#include "zflow/complex_poly.hpp"

#include <cmath>

namespace zflow {

namespace {
void trim(std::vector<cplx>& c) {
  while (c.size() > 1 && c.back() == cplx(0.0)) c.pop_back();
  if (c.empty()) c.push_back(cplx(0.0));
}
}  // namespace

ComplexPoly::ComplexPoly(std::vector<cplx> coeffs) : c_(std::move(coeffs)) { trim(c_); }

bool ComplexPoly::is_zero() const { return c_.size() == 1 && c_[0] == cplx(0.0); }

cplx ComplexPoly::eval(cplx z) const {
  cplx v = 0.0;
  for (std::ptrdiff_t k = std::ssize(c_) - 1; k >= 0; --k) v = v * z + c_[k];
  return v;
}

ComplexPoly::Eval ComplexPoly::eval_d2(cplx z) const {
  cplx v = 0.0, d1 = 0.0, d2 = 0.0;
  double scale = 0.0;
  const double az = std::abs(z);
  for (std::ptrdiff_t k = std::ssize(c_) - 1; k >= 0; --k) {
    d2 = d2 * z + d1;
    d1 = d1 * z + v;
    v = v * z + c_[k];
    scale = scale * az + std::abs(c_[k]);
  }
  return {v, d1, 2.0 * d2, scale};
}

ComplexPoly ComplexPoly::derivative() const {
  if (degree() == 0) return ComplexPoly();
  std::vector<cplx> d(c_.size() - 1);
  for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
  return ComplexPoly(std::move(d));
}

ComplexPoly ComplexPoly::scale_arg(cplx lambda) const {
  std::vector<cplx> out(c_);
  cplx pw = 1.0;
  for (std::size_t k = 1; k < out.size(); ++k) {
    pw *= lambda;
    out[k] *= pw;
  }
  return ComplexPoly(std::move(out));
}

ComplexPoly ComplexPoly::shift_arg(cplx s) const {
  // Repeated synthetic division: in-place Taylor shift.
  std::vector<cplx> out(c_);
  const int n = static_cast<int>(out.size());
  for (int i = 0; i < n - 1; ++i)
    for (int j = n - 2; j >= i; --j) out[j] += s * out[j + 1];
  return ComplexPoly(std::move(out));
}

ComplexPoly operator*(const ComplexPoly& a, const ComplexPoly& b) {
  if (a.is_zero() || b.is_zero()) return ComplexPoly();
  std::vector<cplx> out(a.c_.size() + b.c_.size() - 1, cplx(0.0));
  for (std::size_t i = 0; i < a.c_.size(); ++i)
    for (std::size_t j = 0; j < b.c_.size(); ++j) out[i + j] += a.c_[i] * b.c_[j];
  return ComplexPoly(std::move(out));
}

ComplexPoly operator+(const ComplexPoly& a, const ComplexPoly& b) {
  std::vector<cplx> out(std::max(a.c_.size(), b.c_.size()), cplx(0.0));
  for (std::size_t i = 0; i < a.c_.size(); ++i) out[i] += a.c_[i];
  for (std::size_t i = 0; i < b.c_.size(); ++i) out[i] += b.c_[i];
  return ComplexPoly(std::move(out));
}

ComplexPoly operator*(cplx s, const ComplexPoly& a) {
  std::vector<cplx> out(a.c_);
  for (auto& c : out) c *= s;
  return ComplexPoly(std::move(out));
}

}  // namespace zflow
