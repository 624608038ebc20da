#include "fracmix/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fracmix/errors.hpp"
#include "fracmix/quadrature.hpp"

namespace fracmix {

namespace {

void check_bessel_args(double nu, double x) {
  if (!std::isfinite(nu)) throw DomainError("bessel_k: non-finite order");
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("bessel_k: argument must be positive and finite, got " + std::to_string(x));
}

// Hankel asymptotic series for log(e^x K_nu(x)); returns NaN when the terms
// stop shrinking before the requested accuracy is reached.
double log_scaled_asymptotic(double nu, double x, double rel_tol) {
  double mu = 4.0 * nu * nu;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    double next = term * (mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (8.0 * k * x);
    if (std::abs(next) >= std::abs(term) && k > 1) return std::numeric_limits<double>::quiet_NaN();
    term = next;
    sum += term;
    if (std::abs(term) <= 0.1 * rel_tol * std::abs(sum)) {
      return 0.5 * std::log(std::numbers::pi / (2.0 * x)) + std::log(sum);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// log(e^x K_nu(x)) from K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt.
// The exponent g(t) = -x(cosh t - 1) + |nu| t is peaked at t* = asinh(|nu|/x);
// the integrand is rescaled by exp(-g*) so it never overflows.
double log_scaled_integral(double nu, double x, double rel_tol) {
  double an = std::abs(nu);
  auto g = [&](double t) {
    double s = std::sinh(0.5 * t);
    return -2.0 * x * s * s + an * t;
  };
  double t_star = std::asinh(an / x);
  double g_star = g(t_star);
  auto integrand = [&](double t) {
    // cosh(nu t) e^{-x(cosh t - 1)} = 0.5 (e^{g(t)} + e^{g(t) - 2|nu| t})
    double gt = g(t) - g_star;
    return 0.5 * (std::exp(gt) + std::exp(gt - 2.0 * an * t));
  };
  // Beyond t_end the integrand is below e^{-60} of its peak and decays doubly exponentially.
  double t_end = t_star + 1.0;
  while (g(t_end) - g_star > -60.0) t_end = t_star + 2.0 * (t_end - t_star);
  QuadratureOptions opt;
  opt.rel_tol = 0.1 * rel_tol;
  opt.abs_tol = 0.0;
  opt.max_intervals = 4000;
  double lower = 0.0;
  QuadratureResult left{};
  left.converged = true;
  if (t_star > 0.0) {
    left = integrate(integrand, lower, t_star, opt);
  }
  QuadratureResult right = integrate(integrand, t_star, t_end, opt);
  double total = left.value + right.value;
  if (!(total > 0.0) || !std::isfinite(total)) throw NumericError("bessel_k: quadrature produced a non-positive value");
  double err = left.abs_error + right.abs_error;
  if (err > rel_tol * total) throw NumericError("bessel_k: quadrature did not reach the requested accuracy");
  return g_star + std::log(total);
}

}  // namespace

double log_bessel_k(double nu, double x, const SpecFunAccuracy& acc) {
  check_bessel_args(nu, x);
  double log_scaled = std::numeric_limits<double>::quiet_NaN();
  if (x >= 30.0) log_scaled = log_scaled_asymptotic(nu, x, acc.rel_tol);
  if (std::isnan(log_scaled)) log_scaled = log_scaled_integral(nu, x, acc.rel_tol);
  return log_scaled - x;
}

double bessel_k_scaled(double nu, double x, const SpecFunAccuracy& acc) {
  double v = std::exp(log_bessel_k(nu, x, acc) + x);
  if (!std::isfinite(v) || v <= acc.abs_tol) throw RangeError("bessel_k_scaled: value not representable");
  return v;
}

double bessel_k(double nu, double x, const SpecFunAccuracy& acc) {
  double v = std::exp(log_bessel_k(nu, x, acc));
  if (!std::isfinite(v) || v <= acc.abs_tol) throw RangeError("bessel_k: value not representable");
  return v;
}

double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2); }

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double log_std_normal_cdf(double x) {
  if (x > 5.0) return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
  if (x > -20.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
  // Mills-ratio continued fraction: Phi(x) = phi(x) / (|x| + 1/(|x| + 2/(|x| + ...))).
  double z = -x;
  double cf = z;
  for (int k = 60; k >= 1; --k) cf = z + k / cf;
  return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(cf);
}

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("std_normal_quantile: p must lie in (0, 1)");
  // Acklam's rational approximation followed by one Halley step.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01, -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  for (int it = 0; it < 2; ++it) {
    // Work with the smaller tail so the residual keeps full relative precision.
    double e = p < 0.5 ? std_normal_cdf(x) - p : (1.0 - p) - 0.5 * std::erfc(x / std::numbers::sqrt2);
    double u = e / std_normal_pdf(x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

}  // namespace fracmix
