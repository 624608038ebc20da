#include "fracmix/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fracmix/errors.hpp"
#include "fracmix/quadrature.hpp"
#include "fracmix/specfun.hpp"

namespace fracmix {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double checked_exp(double v, const char* what) {
  double out = std::exp(v);
  if (!std::isfinite(out)) throw RangeError(std::string(what) + ": value overflows");
  return out;
}

bool positive_finite(double v) { return v > 0.0 && std::isfinite(v); }

// Density of V = log X for the EIGD, written through s = eta v - log a so the
// exponent -b (x^eta - a)^2 / (2 x^eta a^2) = -2 (b/a) sinh^2(s/2) never cancels.
double eigd_log_density_of_log(double v, const EigdParams& p) {
  double s = p.eta * v - std::log(p.a);
  double sh = std::sinh(0.5 * s);
  double expo = -2.0 * (p.b / p.a) * sh * sh;
  if (!std::isfinite(expo)) return kNegInf;
  return std::log(p.eta) + 0.5 * std::log(p.b / (2.0 * std::numbers::pi * p.a)) - 0.5 * s + expo;
}

double esnd_log_pdf(double y, const LesndParams& p) {
  double z = (y - p.c) / p.d;
  double arg = p.tau * std::sqrt(1.0 + p.theta * p.theta) + p.theta * z;
  return -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(p.d) + log_std_normal_cdf(arg) -
         log_std_normal_cdf(p.tau);
}

double esnd_mean(const LesndParams& p) {
  double delta = p.theta / std::sqrt(1.0 + p.theta * p.theta);
  double mills = std::exp(-0.5 * p.tau * p.tau - 0.5 * std::log(2.0 * std::numbers::pi) - log_std_normal_cdf(p.tau));
  return p.c + p.d * delta * mills;
}

QuadratureOptions tail_options() {
  QuadratureOptions opt;
  opt.abs_tol = 1e-300;
  opt.rel_tol = 1e-11;
  opt.max_intervals = 4000;
  opt.initial_panels = 4;
  return opt;
}

// Tail masses of a density on the log axis, integrating whichever side of the
// cut lies away from the bulk.
TailMass log_axis_tails(double cut, double center, double scale, const Integrand& log_density, const char* what) {
  auto density = [&](double u) {
    double l = log_density(u);
    return l == kNegInf ? 0.0 : std::exp(l);
  };
  QuadratureResult r;
  bool lower = cut <= center;
  if (lower) {
    r = integrate_lower_tail(density, cut, scale, tail_options());
  } else {
    r = integrate_upper_tail(density, cut, scale, tail_options());
  }
  if (!r.converged && r.abs_error > 1e-14) {
    throw NumericError(std::string(what) + ": tail quadrature did not converge at log x = " + std::to_string(cut));
  }
  double tail = std::clamp(r.value, 0.0, 1.0);
  return lower ? TailMass{tail, 1.0 - tail} : TailMass{1.0 - tail, tail};
}

}  // namespace

IgdParams::IgdParams(double a_, double b_) : a(a_), b(b_) {
  if (!positive_finite(a) || !positive_finite(b)) throw DomainError("IGD parameters a, b must be positive");
}

EigdParams::EigdParams(double eta_, double a_, double b_) : eta(eta_), a(a_), b(b_) {
  if (!positive_finite(eta)) throw DomainError("EIGD parameter eta must be positive");
  if (!positive_finite(a) || !positive_finite(b)) throw DomainError("EIGD parameters a, b must be positive");
}

LesndParams::LesndParams(double c_, double d_, double theta_, double tau_) : c(c_), d(d_), theta(theta_), tau(tau_) {
  if (!positive_finite(d)) throw DomainError("LESND parameter d must be positive");
  if (!std::isfinite(c) || !std::isfinite(theta) || !std::isfinite(tau)) {
    throw DomainError("LESND parameters c, theta, tau must be finite");
  }
  if (log_std_normal_cdf(tau) < -700.0) throw RangeError("LESND: Phi(tau) underflows");
}

MixtureParams::MixtureParams(double w_, EigdParams eigd_, LesndParams lesnd_) : w(w_), eigd(eigd_), lesnd(lesnd_) {
  if (!(w >= 0.0 && w <= 1.0)) throw DomainError("mixture weight must lie in [0, 1]");
}

MixtureParams MixtureParams::from_array(const std::array<double, 8>& v) {
  return {v[0], EigdParams(v[1], v[2], v[3]), LesndParams(v[4], v[5], v[6], v[7])};
}

std::array<double, 8> MixtureParams::to_array() const {
  return {w, eigd.eta, eigd.a, eigd.b, lesnd.c, lesnd.d, lesnd.theta, lesnd.tau};
}

double igd_pdf(double z, const IgdParams& p) {
  if (!(z > 0.0)) return 0.0;
  if (!std::isfinite(z)) return 0.0;
  double dz = z - p.a;
  return std::sqrt(p.b / (2.0 * std::numbers::pi * z * z * z)) * std::exp(-p.b * dz * dz / (2.0 * p.a * p.a * z));
}

double igd_log_frac_moment(double r, const IgdParams& p) {
  if (r == 0.0) return 0.0;
  double x = p.b / p.a;
  return log_bessel_k(0.5 - r, x) + x + 0.5 * std::log(2.0 * p.b / std::numbers::pi) + (r - 0.5) * std::log(p.a);
}

double igd_frac_moment(double r, const IgdParams& p) { return checked_exp(igd_log_frac_moment(r, p), "igd_frac_moment"); }

double eigd_log_pdf(double x, const EigdParams& p) {
  if (!(x > 0.0) || !std::isfinite(x)) return kNegInf;
  double v = std::log(x);
  return eigd_log_density_of_log(v, p) - v;
}

double eigd_pdf(double x, const EigdParams& p) {
  double l = eigd_log_pdf(x, p);
  return l == kNegInf ? 0.0 : std::exp(l);
}

double eigd_log_frac_moment(double r, const EigdParams& p) { return igd_log_frac_moment(r / p.eta, IgdParams(p.a, p.b)); }

double eigd_frac_moment(double r, const EigdParams& p) {
  return checked_exp(eigd_log_frac_moment(r, p), "eigd_frac_moment");
}

double esnd_pdf(double y, const LesndParams& p) { return std::exp(esnd_log_pdf(y, p)); }

double esnd_log_mgf(double t, const LesndParams& p) {
  if (!std::isfinite(t)) throw DomainError("esnd_mgf: t must be finite");
  if (t == 0.0) return 0.0;
  double shift = p.tau + p.theta * p.d * t / std::sqrt(1.0 + p.theta * p.theta);
  return p.c * t + 0.5 * p.d * p.d * t * t + log_std_normal_cdf(shift) - log_std_normal_cdf(p.tau);
}

double esnd_mgf(double t, const LesndParams& p) { return checked_exp(esnd_log_mgf(t, p), "esnd_mgf"); }

double lesnd_log_pdf(double x, const LesndParams& p) {
  if (!(x > 0.0) || !std::isfinite(x)) return kNegInf;
  double y = std::log(x);
  return esnd_log_pdf(y, p) - y;
}

double lesnd_pdf(double x, const LesndParams& p) {
  double l = lesnd_log_pdf(x, p);
  return l == kNegInf ? 0.0 : std::exp(l);
}

double lesnd_log_frac_moment(double r, const LesndParams& p) { return esnd_log_mgf(r, p); }

double lesnd_frac_moment(double r, const LesndParams& p) { return esnd_mgf(r, p); }

double mixture_pdf(double x, const MixtureParams& p) {
  return p.w * eigd_pdf(x, p.eigd) + (1.0 - p.w) * lesnd_pdf(x, p.lesnd);
}

double mixture_frac_moment(double r, const MixtureParams& p) {
  double e = p.w > 0.0 ? p.w * eigd_frac_moment(r, p.eigd) : 0.0;
  double l = p.w < 1.0 ? (1.0 - p.w) * lesnd_frac_moment(r, p.lesnd) : 0.0;
  return e + l;
}

double mixture_log_frac_moment(double r, const MixtureParams& p) {
  if (p.w == 1.0) return eigd_log_frac_moment(r, p.eigd);
  if (p.w == 0.0) return lesnd_log_frac_moment(r, p.lesnd);
  double le = std::log(p.w) + eigd_log_frac_moment(r, p.eigd);
  double ll = std::log1p(-p.w) + lesnd_log_frac_moment(r, p.lesnd);
  double hi = std::max(le, ll);
  return hi + std::log1p(std::exp(std::min(le, ll) - hi));
}

TailMass eigd_tails(double x, const EigdParams& p) {
  if (!(x > 0.0)) return {0.0, 1.0};
  if (!std::isfinite(x)) return {1.0, 0.0};
  double center = std::log(p.a) / p.eta;
  double scale = std::sqrt(std::log1p(p.a / p.b)) / p.eta;
  return log_axis_tails(std::log(x), center, scale, [&](double v) { return eigd_log_density_of_log(v, p); }, "eigd_cdf");
}

TailMass lesnd_tails(double x, const LesndParams& p) {
  if (!(x > 0.0)) return {0.0, 1.0};
  if (!std::isfinite(x)) return {1.0, 0.0};
  return log_axis_tails(std::log(x), esnd_mean(p), p.d, [&](double y) { return esnd_log_pdf(y, p); }, "lesnd_cdf");
}

TailMass mixture_tails(double x, const MixtureParams& p) {
  TailMass e = p.w > 0.0 ? eigd_tails(x, p.eigd) : TailMass{0.0, 0.0};
  TailMass l = p.w < 1.0 ? lesnd_tails(x, p.lesnd) : TailMass{0.0, 0.0};
  double cdf = p.w * e.cdf + (1.0 - p.w) * l.cdf;
  double poe = p.w * e.poe + (1.0 - p.w) * l.poe;
  return {std::clamp(cdf, 0.0, 1.0), std::clamp(poe, 0.0, 1.0)};
}

double mixture_cdf(double x, const MixtureParams& p) { return mixture_tails(x, p).cdf; }

double mixture_poe(double x, const MixtureParams& p) { return mixture_tails(x, p).poe; }

}  // namespace fracmix
