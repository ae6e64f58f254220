#pragma once

#include <complex>
#include <span>
#include <vector>

namespace zflow {

using cplx = std::complex<double>;

// Coefficients ascending in degree. Trailing zeros are trimmed, so the leading
// coefficient is nonzero unless the polynomial is identically zero (kept as a
// single zero coefficient).
class ComplexPoly {
 public:
  ComplexPoly() : c_{cplx(0.0)} {}
  explicit ComplexPoly(std::vector<cplx> coeffs);

  static ComplexPoly one() { return ComplexPoly({cplx(1.0)}); }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const;
  std::span<const cplx> coeffs() const { return c_; }
  cplx coeff(int k) const { return k >= 0 && k < std::ssize(c_) ? c_[k] : cplx(0.0); }
  cplx leading() const { return c_.back(); }

  cplx eval(cplx z) const;
  // value, first and second derivative, plus sum of |term| magnitudes of the
  // value evaluation (backward-error scale).
  struct Eval {
    cplx value, d1, d2;
    double scale;
  };
  Eval eval_d2(cplx z) const;

  ComplexPoly derivative() const;
  ComplexPoly scale_arg(cplx lambda) const;  // p(lambda z)
  ComplexPoly shift_arg(cplx s) const;       // p(z + s)
  ComplexPoly affine_arg(cplx alpha, cplx beta) const { return scale_arg(alpha).shift_arg(beta / alpha); }

  friend ComplexPoly operator*(const ComplexPoly&, const ComplexPoly&);
  friend ComplexPoly operator+(const ComplexPoly&, const ComplexPoly&);
  friend ComplexPoly operator*(cplx, const ComplexPoly&);

 private:
  std::vector<cplx> c_;
};

}  // namespace zflow
