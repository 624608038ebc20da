#pragma once

#include <cstddef>
#include <functional>

namespace fracmix {

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

struct QuadratureOptions {
  double abs_tol = 1e-14;
  double rel_tol = 1e-12;
  std::size_t max_intervals = 2000;
  /// Number of equal panels the interval is split into before adapting.
  std::size_t initial_panels = 1;
};

using Integrand = std::function<double(double)>;

/// Adaptive Gauss-Kronrod (7/15) on the finite interval [a, b]. Subdivides the
/// interval with the largest error estimate until the total estimate meets
/// max(abs_tol, rel_tol * |I|).
QuadratureResult integrate(const Integrand& f, double a, double b, const QuadratureOptions& opt = {});

/// Integral over [lower, +inf) through u = lower + scale * (1 - t) / t.
QuadratureResult integrate_upper_tail(const Integrand& f, double lower, double scale,
                                      const QuadratureOptions& opt = {});

/// Integral over (-inf, upper] through u = upper - scale * (1 - t) / t.
QuadratureResult integrate_lower_tail(const Integrand& f, double upper, double scale,
                                      const QuadratureOptions& opt = {});

/// Integral over the whole real line through u = center + scale * t / (1 - t^2).
QuadratureResult integrate_real_line(const Integrand& f, double center, double scale,
                                     const QuadratureOptions& opt = {});

}  // namespace fracmix
