#pragma once

#include <complex>
#include <span>
#include <vector>

#include "zflow/complex_poly.hpp"

namespace zflow {

// He_n(x), probabilists' normalization, via the three-term recurrence
// He_{n+1}(x) = x He_n(x) - n He_{n-1}(x).
cplx hermite_eval(int n, cplx x);

struct OrderType {
  double order;  // rho
  double type;   // sigma
};

// Truncated power series in the Weyl basis: F(z) = sum_n weyl[n] z^n / sqrt(n!).
// Ordinary coefficients a_n = weyl[n]/sqrt(n!) are only handled through their
// log-magnitudes, so factorials never materialize.
class TaylorFunction {
 public:
  TaylorFunction() = default;

  // Runs the order/type estimator when n_max >= 32 and the tail allows it.
  static TaylorFunction from_weyl(std::vector<cplx> weyl);
  static TaylorFunction from_weyl_raw(std::vector<cplx> weyl, double est_order, double est_type);

  int n_max() const { return static_cast<int>(weyl_.size()) - 1; }
  std::span<const cplx> weyl() const { return weyl_; }
  cplx weyl_coeff(int n) const { return n >= 0 && n < std::ssize(weyl_) ? weyl_[n] : cplx(0.0); }
  double est_order() const { return est_order_; }
  double est_type() const { return est_type_; }

  // log|a_n|; -inf for a zero coefficient.
  double log_abs_ordinary(int n) const;

  cplx eval(cplx z) const;
  // Values at many points through the 4-wide series kernel.
  void eval_batch(std::span<const cplx> pts, std::span<cplx> out) const;
  struct Eval {
    cplx value, d1, d2;
    double scale;  // sum of |term| magnitudes of the value series
  };
  Eval eval_d2(cplx z) const;

  TaylorFunction derivative() const;   // exact coefficient shift
  TaylorFunction scale_arg(cplx s) const;  // F(sz)
  TaylorFunction truncated(int new_n_max) const;

  // Ordinary-coefficient polynomial a_n = weyl[n]/sqrt(n!). Throws
  // OverflowError when a coefficient leaves the double range (n_max beyond
  // roughly 280 for O(1) Weyl coefficients).
  ComplexPoly to_ordinary_poly() const;

 private:
  std::vector<cplx> weyl_;
  double est_order_ = 0.0;
  double est_type_ = 0.0;
};

// Least-squares limsup proxy over the tail window [n_max/2, n_max], skipping
// zero coefficients. Throws DomainError (n_max < 32) and DegenerateInputError
// (identically zero, or a nonempty but too-sparse tail). A nonzero function
// whose tail window is entirely zero is a polynomial: returns {0, 0}.
OrderType estimate_order_type(const TaylorFunction& f);

}  // namespace zflow
