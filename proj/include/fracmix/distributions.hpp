#pragma once

#include <array>

namespace fracmix {

/// Inverse Gaussian: mean a, shape b.
struct IgdParams {
  double a;
  double b;
  IgdParams(double a, double b);
};

/// X = Z^{1/eta} with Z inverse Gaussian(a, b).
struct EigdParams {
  double eta;
  double a;
  double b;
  EigdParams(double eta, double a, double b);
};

/// X = exp(Y) with Y extended skew-normal(location c, scale d, shape theta, truncation tau).
struct LesndParams {
  double c;
  double d;
  double theta;
  double tau;
  LesndParams(double c, double d, double theta, double tau);
};

/// w * EIGD + (1 - w) * LESND. Vector layout [w, eta, a, b, c, d, theta, tau].
struct MixtureParams {
  double w;
  EigdParams eigd;
  LesndParams lesnd;
  MixtureParams(double w, EigdParams eigd, LesndParams lesnd);

  static MixtureParams from_array(const std::array<double, 8>& v);
  std::array<double, 8> to_array() const;
};

double igd_pdf(double z, const IgdParams& p);
double igd_frac_moment(double r, const IgdParams& p);
double igd_log_frac_moment(double r, const IgdParams& p);

double eigd_pdf(double x, const EigdParams& p);
double eigd_log_pdf(double x, const EigdParams& p);
double eigd_frac_moment(double r, const EigdParams& p);
double eigd_log_frac_moment(double r, const EigdParams& p);

double esnd_pdf(double y, const LesndParams& p);
double esnd_mgf(double t, const LesndParams& p);
double esnd_log_mgf(double t, const LesndParams& p);

double lesnd_pdf(double x, const LesndParams& p);
double lesnd_log_pdf(double x, const LesndParams& p);
double lesnd_frac_moment(double r, const LesndParams& p);
double lesnd_log_frac_moment(double r, const LesndParams& p);

double mixture_pdf(double x, const MixtureParams& p);
double mixture_frac_moment(double r, const MixtureParams& p);
double mixture_log_frac_moment(double r, const MixtureParams& p);

/// Lower and upper tail mass at x, each accurate to relative 1e-10 on the
/// smaller side (computed directly rather than as a complement).
struct TailMass {
  double cdf;
  double poe;
};

TailMass eigd_tails(double x, const EigdParams& p);
TailMass lesnd_tails(double x, const LesndParams& p);
TailMass mixture_tails(double x, const MixtureParams& p);

double mixture_cdf(double x, const MixtureParams& p);
double mixture_poe(double x, const MixtureParams& p);

}  // namespace fracmix
