#pragma once

namespace fracmix {

struct SpecFunAccuracy {
  double rel_tol = 1e-10;
  double abs_tol = 1e-300;
};

/// K_nu(x), the modified Bessel function of the second kind at real order.
/// Throws DomainError for x <= 0 or non-finite nu, RangeError when the value is
/// not representable as a finite positive double.
double bessel_k(double nu, double x, const SpecFunAccuracy& acc = {});

/// exp(x) * K_nu(x); finite over a much wider range than bessel_k.
double bessel_k_scaled(double nu, double x, const SpecFunAccuracy& acc = {});

/// log K_nu(x); finite wherever K_nu(x) is positive, including where bessel_k would overflow.
double log_bessel_k(double nu, double x, const SpecFunAccuracy& acc = {});

double std_normal_pdf(double x);
double std_normal_cdf(double x);
/// log Phi(x), accurate deep into the lower tail.
double log_std_normal_cdf(double x);
/// Phi^{-1}(p) for 0 < p < 1; DomainError otherwise.
double std_normal_quantile(double p);

}  // namespace fracmix
