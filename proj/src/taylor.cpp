#include "zflow/taylor.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "zflow/errors.hpp"
#include "zflow/kernels.hpp"

namespace zflow {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

cplx hermite_eval(int n, cplx x) {
  if (n < 0) throw DomainError("hermite_eval: n must be nonnegative");
  if (n == 0) return 1.0;
  cplx prev = 1.0, cur = x;
  for (int k = 1; k < n; ++k) {
    const cplx next = x * cur - static_cast<double>(k) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

TaylorFunction TaylorFunction::from_weyl(std::vector<cplx> weyl) {
  TaylorFunction f;
  if (weyl.empty()) weyl.push_back(cplx(0.0));
  f.weyl_ = std::move(weyl);
  if (f.n_max() >= 32) {
    try {
      const OrderType ot = estimate_order_type(f);
      f.est_order_ = ot.order;
      f.est_type_ = ot.type;
    } catch (const DegenerateInputError&) {
      f.est_order_ = 0.0;
      f.est_type_ = 0.0;
    }
  }
  return f;
}

TaylorFunction TaylorFunction::from_weyl_raw(std::vector<cplx> weyl, double est_order,
                                             double est_type) {
  TaylorFunction f;
  if (weyl.empty()) weyl.push_back(cplx(0.0));
  f.weyl_ = std::move(weyl);
  f.est_order_ = est_order;
  f.est_type_ = est_type;
  return f;
}

double TaylorFunction::log_abs_ordinary(int n) const {
  const cplx c = weyl_coeff(n);
  if (c == cplx(0.0)) return -kInf;
  return std::log(std::abs(c)) - 0.5 * std::lgamma(static_cast<double>(n) + 1.0);
}

cplx TaylorFunction::eval(cplx z) const {
  cplx t = 1.0, acc = weyl_[0];
  for (std::size_t n = 1; n < weyl_.size(); ++n) {
    t *= z / std::sqrt(static_cast<double>(n));
    acc += weyl_[n] * t;
  }
  return acc;
}

void TaylorFunction::eval_batch(std::span<const cplx> pts, std::span<cplx> out) const {
  std::size_t i = 0;
  for (; i + 4 <= pts.size(); i += 4) kernels::weyl_eval_x4(weyl_, pts.data() + i, out.data() + i);
  if (i < pts.size()) {
    cplx z4[4] = {}, v4[4];
    for (std::size_t l = i; l < pts.size(); ++l) z4[l - i] = pts[l];
    kernels::weyl_eval_x4(weyl_, z4, v4);
    for (std::size_t l = i; l < pts.size(); ++l) out[l] = v4[l - i];
  }
}

TaylorFunction::Eval TaylorFunction::eval_d2(cplx z) const {
  // F'(z) has Weyl coefficients sqrt(n+1) c_{n+1}; fold both shifts into one
  // pass over the shared powers t_n = z^n / sqrt(n!).
  cplx v = weyl_[0], d1 = 0.0, d2 = 0.0;
  double scale = std::abs(weyl_[0]);
  if (weyl_.size() > 1) d1 = weyl_[1];
  if (weyl_.size() > 2) d2 = std::sqrt(2.0) * weyl_[2];
  cplx t = 1.0;
  for (std::size_t n = 1; n < weyl_.size(); ++n) {
    t *= z / std::sqrt(static_cast<double>(n));
    v += weyl_[n] * t;
    scale += std::abs(weyl_[n]) * std::abs(t);
    if (n + 1 < weyl_.size()) d1 += std::sqrt(static_cast<double>(n + 1)) * weyl_[n + 1] * t;
    if (n + 2 < weyl_.size())
      d2 += std::sqrt(static_cast<double>((n + 1) * (n + 2))) * weyl_[n + 2] * t;
  }
  return {v, d1, d2, scale};
}

TaylorFunction TaylorFunction::derivative() const {
  if (weyl_.size() <= 1) return from_weyl_raw({cplx(0.0)}, 0.0, 0.0);
  std::vector<cplx> d(weyl_.size() - 1);
  for (std::size_t n = 0; n + 1 < weyl_.size(); ++n)
    d[n] = std::sqrt(static_cast<double>(n + 1)) * weyl_[n + 1];
  return from_weyl_raw(std::move(d), est_order_, est_type_);
}

TaylorFunction TaylorFunction::scale_arg(cplx s) const {
  std::vector<cplx> out(weyl_);
  cplx pw = 1.0;
  for (std::size_t n = 1; n < out.size(); ++n) {
    pw *= s;
    out[n] *= pw;
  }
  const double m = std::abs(s);
  return from_weyl_raw(std::move(out), est_order_, est_type_ * std::pow(m, est_order_));
}

TaylorFunction TaylorFunction::truncated(int new_n_max) const {
  std::vector<cplx> out(weyl_.begin(),
                        weyl_.begin() + std::min<std::size_t>(weyl_.size(), new_n_max + 1));
  return from_weyl(std::move(out));
}

ComplexPoly TaylorFunction::to_ordinary_poly() const {
  std::vector<cplx> out(weyl_.size());
  for (std::size_t n = 0; n < weyl_.size(); ++n) {
    const double f = std::exp(-0.5 * std::lgamma(static_cast<double>(n) + 1.0));
    out[n] = weyl_[n] * f;
    if (weyl_[n] != cplx(0.0) && out[n] == cplx(0.0))
      throw OverflowError("to_ordinary_poly: coefficient underflow at index " + std::to_string(n));
    if (!std::isfinite(out[n].real()) || !std::isfinite(out[n].imag()))
      throw OverflowError("to_ordinary_poly: coefficient overflow at index " + std::to_string(n));
  }
  return ComplexPoly(std::move(out));
}

OrderType estimate_order_type(const TaylorFunction& f) {
  const int n_max = f.n_max();
  if (n_max < 32) throw DomainError("estimate_order_type: needs n_max >= 32");
  const int lo = n_max / 2;

  int highest_nonzero = -1;
  for (int n = n_max; n >= 0; --n)
    if (f.weyl_coeff(n) != cplx(0.0)) {
      highest_nonzero = n;
      break;
    }
  if (highest_nonzero < 0)
    throw DegenerateInputError("estimate_order_type: identically zero function");

  // L(n) = log(1/|a_n|) fitted against {n log n, n} and, when the residuals
  // look smooth rather than coefficient-noise, against {n log n, n, log n}.
  // The log n regressor removes the Stirling-type bias (several percent in the
  // type) but amplifies i.i.d. coefficient noise, so it is only enabled when
  // the mean squared successive residual difference is small.
  std::vector<std::pair<double, double>> pts;  // (n, L)
  for (int n = lo; n <= n_max; ++n) {
    const double la = f.log_abs_ordinary(n);
    if (la == -kInf) continue;
    pts.emplace_back(static_cast<double>(n), -la);
  }
  if (pts.empty()) return {0.0, 0.0};  // nonzero polynomial relative to the window
  if (pts.size() < 8)
    throw DegenerateInputError("estimate_order_type: fewer than 8 usable tail coefficients");

  auto solve = [&](int dim, double out[3]) {
    double ata[3][3] = {};
    double atl[3] = {};
    for (const auto& [n, L] : pts) {
      const double x[3] = {n * std::log(n), n, std::log(n)};
      for (int i = 0; i < dim; ++i) {
        atl[i] += x[i] * L;
        for (int k = 0; k < dim; ++k) ata[i][k] += x[i] * x[k];
      }
    }
    for (int col = 0; col < dim; ++col) {
      int piv = col;
      for (int r = col + 1; r < dim; ++r)
        if (std::abs(ata[r][col]) > std::abs(ata[piv][col])) piv = r;
      for (int k = 0; k < dim; ++k) std::swap(ata[col][k], ata[piv][k]);
      std::swap(atl[col], atl[piv]);
      for (int r = col + 1; r < dim; ++r) {
        const double m = ata[r][col] / ata[col][col];
        for (int k = col; k < dim; ++k) ata[r][k] -= m * ata[col][k];
        atl[r] -= m * atl[col];
      }
    }
    for (int r = dim - 1; r >= 0; --r) {
      double acc = atl[r];
      for (int k = r + 1; k < dim; ++k) acc -= ata[r][k] * out[k];
      out[r] = acc / ata[r][r];
    }
  };

  double th2[3] = {};
  solve(2, th2);
  double msd = 0.0;
  double prev_resid = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& [n, L] = pts[i];
    const double resid = L - th2[0] * n * std::log(n) - th2[1] * n;
    if (i > 0) msd += (resid - prev_resid) * (resid - prev_resid);
    prev_resid = resid;
  }
  msd /= 2.0 * (pts.size() - 1);

  double alpha = th2[0], beta = th2[1];
  if (std::sqrt(msd) < 0.15) {
    double th3[3] = {};
    solve(3, th3);
    alpha = th3[0];
    beta = th3[1];
  }

  if (!(alpha > 1e-9))
    throw DegenerateInputError("estimate_order_type: coefficients do not decay like an entire "
                               "function of finite order");
  double rho = 1.0 / alpha;
  if (rho < 0.02) return {0.0, 0.0};
  const double c = -beta;
  const double sigma = std::exp(c * rho - 1.0) / rho;
  return {rho, sigma};
}

}  // namespace zflow
