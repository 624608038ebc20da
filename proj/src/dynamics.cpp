#include "fracmix/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "fracmix/errors.hpp"

namespace fracmix {

namespace {

std::size_t grid_steps(double duration, double dt, const char* what) {
  double n = duration / dt;
  auto steps = static_cast<std::size_t>(std::llround(n));
  if (steps < 1 || std::abs(n - static_cast<double>(steps)) > 1e-9 * n) {
    throw ConfigError(std::string(what) + ": duration must be a whole number of time steps");
  }
  return steps;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

struct SdofState {
  double y;
  double v;
};

template <class Force>
SdofState rk4_sdof(SdofState s, double gamma, double eps, double t, double h, Force&& force) {
  auto acc = [&](double y, double v, double f) { return f - gamma * v - y - eps * y * y * y; };
  double f0 = force(t), fm = force(t + 0.5 * h), f1 = force(t + h);
  double k1y = s.v, k1v = acc(s.y, s.v, f0);
  double k2y = s.v + 0.5 * h * k1v, k2v = acc(s.y + 0.5 * h * k1y, s.v + 0.5 * h * k1v, fm);
  double k3y = s.v + 0.5 * h * k2v, k3v = acc(s.y + 0.5 * h * k2y, s.v + 0.5 * h * k2v, fm);
  double k4y = s.v + h * k3v, k4v = acc(s.y + h * k3y, s.v + h * k3v, f1);
  return {s.y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y), s.v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)};
}

template <class Visit>
void run_duffing_rk4(std::span<const double> u, const DuffingConfig& cfg, Visit&& visit) {
  double gamma = u[0], eps = u[1];
  double amp = std::sqrt(2.0 * std::numbers::pi * cfg.spectral_intensity / cfg.dt);
  std::size_t steps = cfg.steps();
  double h = cfg.dt / static_cast<double>(cfg.substeps);
  SdofState s{0.0, 0.0};
  visit(0.0, s);
  for (std::size_t k = 0; k < steps; ++k) {
    double f = amp * u[2 + k];
    for (std::size_t q = 0; q < cfg.substeps; ++q) {
      double t = static_cast<double>(k) * cfg.dt + static_cast<double>(q) * h;
      s = rk4_sdof(s, gamma, eps, t, h, [f](double) { return f; });
      if (!std::isfinite(s.y) || !std::isfinite(s.v)) {
        throw NumericError("duffing: non-finite state at step " + std::to_string(k));
      }
      if (q + 1 == cfg.substeps) visit(static_cast<double>(k + 1) * cfg.dt, s);
    }
  }
}

// Dormand-Prince 5(4) tableau with its free 4th-order dense output.
namespace dp {
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
}  // namespace dp

template <class Visit>
void run_duffing_dopri(std::span<const double> u, const DuffingConfig& cfg, Visit&& visit) {
  const double gamma = u[0], eps = u[1];
  const double amp = std::sqrt(2.0 * std::numbers::pi * cfg.spectral_intensity / cfg.dt);
  const std::size_t steps = cfg.steps();
  const double t_end = static_cast<double>(steps) * cfg.dt;
  const double rtol = cfg.rel_tol, atol = cfg.abs_tol;
  const std::size_t last = cfg.noise_count - 1;
  auto rhs = [&](double t, SdofState s) {
    double q = std::floor(t / cfg.dt);
    std::size_t k = q <= 0.0 ? 0 : std::min(static_cast<std::size_t>(q), last);
    double f = amp * u[2 + k];
    return SdofState{s.v, f - gamma * s.v - s.y - eps * s.y * s.y * s.y};
  };
  auto comb = [](SdofState s, double h, std::initializer_list<std::pair<double, SdofState>> terms) {
    for (const auto& [c, k] : terms) {
      s.y += h * c * k.y;
      s.v += h * c * k.v;
    }
    return s;
  };

  SdofState s{0.0, 0.0};
  visit(0.0, s);
  double t = 0.0, h = cfg.dt;
  std::size_t next = 1;
  SdofState k1 = rhs(0.0, s);
  const double floor_scale = atol / rtol;
  std::size_t rejected = 0;
  while (next <= steps) {
    h = std::min(h, t_end - t);
    if (!(h > 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, t))) {
      throw NumericError("duffing: step size underflow at t=" + std::to_string(t));
    }
    using namespace dp;
    SdofState k2 = rhs(t + c2 * h, comb(s, h, {{a21, k1}}));
    SdofState k3 = rhs(t + c3 * h, comb(s, h, {{a31, k1}, {a32, k2}}));
    SdofState k4 = rhs(t + c4 * h, comb(s, h, {{a41, k1}, {a42, k2}, {a43, k3}}));
    SdofState k5 = rhs(t + c5 * h, comb(s, h, {{a51, k1}, {a52, k2}, {a53, k3}, {a54, k4}}));
    SdofState k6 = rhs(t + h, comb(s, h, {{a61, k1}, {a62, k2}, {a63, k3}, {a64, k4}, {a65, k5}}));
    SdofState yn = comb(s, h, {{a71, k1}, {a73, k3}, {a74, k4}, {a75, k5}, {a76, k6}});
    SdofState k7 = rhs(t + h, yn);
    SdofState e = comb({0.0, 0.0}, h, {{e1, k1}, {e3, k3}, {e4, k4}, {e5, k5}, {e6, k6}, {e7, k7}});
    double sy = std::max({std::abs(s.y), std::abs(yn.y), floor_scale});
    double sv = std::max({std::abs(s.v), std::abs(yn.v), floor_scale});
    double err = std::max(std::abs(e.y) / sy, std::abs(e.v) / sv);
    if (!std::isfinite(err) || !std::isfinite(yn.y) || !std::isfinite(yn.v)) {
      if (++rejected > 200) throw NumericError("duffing: non-finite state at t=" + std::to_string(t));
      h *= 0.1;
      continue;
    }
    if (err > rtol) {
      h *= std::max(0.1, 0.8 * std::pow(rtol / err, 0.2));
      continue;
    }
    rejected = 0;
    const double t_new = t + h;
    while (next <= steps && static_cast<double>(next) * cfg.dt <= t_new + 1e-12) {
      double sg = (static_cast<double>(next) * cfg.dt - t) / h;
      double s2 = sg * sg, s3 = s2 * sg, s4 = s3 * sg;
      double b1 = sg - 183.0 / 64 * s2 + 37.0 / 12 * s3 - 145.0 / 128 * s4;
      double b3 = 1500.0 / 371 * s2 - 1000.0 / 159 * s3 + 1000.0 / 371 * s4;
      double b4 = -125.0 / 32 * s2 + 125.0 / 12 * s3 - 375.0 / 64 * s4;
      double b5 = 9477.0 / 3392 * s2 - 729.0 / 106 * s3 + 25515.0 / 6784 * s4;
      double b6 = -11.0 / 7 * s2 + 11.0 / 3 * s3 - 55.0 / 28 * s4;
      double b7 = 3.0 / 2 * s2 - 4.0 * s3 + 5.0 / 2 * s4;
      visit(static_cast<double>(next) * cfg.dt,
            comb(s, h, {{b1, k1}, {b3, k3}, {b4, k4}, {b5, k5}, {b6, k6}, {b7, k7}}));
      ++next;
    }
    t = t_new;
    s = yn;
    k1 = k7;
    double grow = 1.25 * std::pow(err / rtol, 0.2);
    h = grow > 0.2 ? h / grow : 5.0 * h;
  }
}

template <class Visit>
void run_duffing(std::span<const double> u, const DuffingConfig& cfg, Visit&& visit) {
  cfg.validate();
  if (u.size() != 2 + cfg.noise_count) throw ConfigError("duffing: input dimension mismatch");
  if (cfg.integrator == DuffingIntegrator::kRk4) {
    run_duffing_rk4(u, cfg, visit);
  } else {
    run_duffing_dopri(u, cfg, visit);
  }
}

}  // namespace

std::string to_string(DuffingIntegrator integrator) {
  return integrator == DuffingIntegrator::kRk4 ? "rk4" : "dopri45";
}

DuffingIntegrator duffing_integrator_from_string(const std::string& name) {
  if (name == "rk4") return DuffingIntegrator::kRk4;
  if (name == "dopri45") return DuffingIntegrator::kDopri45;
  throw ConfigError("duffing: unknown integrator '" + name + "'");
}

std::size_t DuffingConfig::steps() const { return grid_steps(duration, dt, "duffing"); }

void DuffingConfig::validate() const {
  require(dt > 0.0 && duration > 0.0, "duffing: dt and duration must be positive");
  require(gamma_mean > 0.0 && gamma_std > 0.0 && eps_mean > 0.0 && eps_std > 0.0,
          "duffing: lognormal parameters must be positive");
  require(spectral_intensity >= 0.0, "duffing: spectral intensity must be nonnegative");
  require(substeps >= 1, "duffing: substeps must be at least 1");
  require(rel_tol > 0.0 && rel_tol < 1.0 && abs_tol > 0.0, "duffing: tolerances must be positive");
  require(noise_count >= steps(), "duffing: noise_count must cover every forcing interval");
}

std::vector<double> white_noise_series(std::span<const double> theta, double spectral_intensity, double dt) {
  double amp = std::sqrt(2.0 * std::numbers::pi * spectral_intensity / dt);
  std::vector<double> g(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k) g[k] = theta[k] * amp;
  return g;
}

Trajectory integrate_forced_duffing(double gamma, double eps, const std::function<double(double)>& force, double y0,
                                    double v0, double dt, std::size_t steps) {
  Trajectory tr;
  SdofState s{y0, v0};
  tr.t.push_back(0.0);
  tr.y.push_back(y0);
  tr.v.push_back(v0);
  for (std::size_t k = 0; k < steps; ++k) {
    double t = static_cast<double>(k) * dt;
    s = rk4_sdof(s, gamma, eps, t, dt, force);
    if (!std::isfinite(s.y) || !std::isfinite(s.v)) throw NumericError("duffing: non-finite state at step " + std::to_string(k));
    tr.t.push_back(t + dt);
    tr.y.push_back(s.y);
    tr.v.push_back(s.v);
  }
  return tr;
}

double integrate_duffing(std::span<const double> u, const DuffingConfig& cfg) {
  double z = 0.0;
  run_duffing(u, cfg, [&](double, const SdofState& s) { z = std::max(z, std::abs(s.y)); });
  return z;
}

Trajectory duffing_trace(std::span<const double> u, const DuffingConfig& cfg) {
  Trajectory tr;
  run_duffing(u, cfg, [&](double t, const SdofState& s) {
    tr.t.push_back(t);
    tr.y.push_back(s.y);
    tr.v.push_back(s.v);
  });
  return tr;
}

void GroundMotionSpec::validate() const {
  require(phase_count >= 1, "ground motion: phase_count must be positive");
  require(omega_up > 0.0 && chi0 >= 0.0 && c0 > 0.0 && kappa > 0.0 && omega_g > 0.0 && zeta_g > 0.0 &&
              omega_f > 0.0 && zeta_f > 0.0 && gamma0 > 0.0 && duration > 0.0 && a_max >= 0.0,
          "ground motion: spectral parameters must be positive");
}

double clough_penzien_psd(double omega, const GroundMotionSpec& s) {
  double w2 = omega * omega;
  double g2 = s.omega_g * s.omega_g;
  double f2 = s.omega_f * s.omega_f;
  double num = (g2 * g2 + 4.0 * s.zeta_g * s.zeta_g * g2 * w2) * w2 * w2;
  double den = ((g2 - w2) * (g2 - w2) + 4.0 * s.zeta_g * s.zeta_g * g2 * w2) *
               ((f2 - w2) * (f2 - w2) + 4.0 * s.zeta_f * s.zeta_f * f2 * w2);
  double scale = s.a_max * s.a_max /
                 (s.gamma0 * s.gamma0 * std::numbers::pi * s.omega_g * (2.0 * s.zeta_g + 1.0 / (2.0 * s.zeta_g)));
  return num / den * scale;
}

double modulation(double omega, double t, const GroundMotionSpec& s) {
  if (t <= 0.0) return 0.0;
  double r = t / s.c0;
  return std::exp(-s.chi0 * omega * t / (s.omega_g * s.duration)) * std::pow(r * std::exp(1.0 - r), s.kappa);
}

double epsd(double omega, double t, const GroundMotionSpec& s) {
  double a = modulation(omega, t, s);
  return a * a * clough_penzien_psd(omega, s);
}

std::vector<double> srm_ground_motion(std::span<const double> phases, std::span<const double> times,
                                      const GroundMotionSpec& spec) {
  if (phases.size() != spec.phase_count) throw ConfigError("srm: phase count mismatch");
  double dw = spec.delta_omega();
  std::vector<double> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < phases.size(); ++j) {
      double w = static_cast<double>(j + 1) * dw;
      sum += std::sqrt(2.0 * epsd(w, times[i], spec) * dw) * std::cos(w * times[i] + phases[j]);
    }
    out[i] = std::numbers::sqrt2 * sum;
  }
  return out;
}

std::vector<double> srm_ground_motion_uniform(std::span<const double> phases, double h, std::size_t count,
                                              const GroundMotionSpec& spec) {
  const std::size_t n = phases.size();
  if (n != spec.phase_count) throw ConfigError("srm: phase count mismatch");
  const double dw = spec.delta_omega();
  const double decay = spec.chi0 / (spec.omega_g * spec.duration);
  // w_j(t) = c_j exp((-decay + i) omega_j t + i U_j); the signal is g(t) * sum_j Re w_j(t).
  std::vector<double> amp(n), omega(n), re(n), im(n), step_re(n), step_im(n);
  for (std::size_t j = 0; j < n; ++j) {
    omega[j] = static_cast<double>(j + 1) * dw;
    amp[j] = 2.0 * std::sqrt(clough_penzien_psd(omega[j], spec) * dw);
    double m = std::exp(-decay * omega[j] * h);
    step_re[j] = m * std::cos(omega[j] * h);
    step_im[j] = m * std::sin(omega[j] * h);
  }
  auto resync = [&](double t) {
    for (std::size_t j = 0; j < n; ++j) {
      double m = amp[j] * std::exp(-decay * omega[j] * t);
      double arg = omega[j] * t + phases[j];
      re[j] = m * std::cos(arg);
      im[j] = m * std::sin(arg);
    }
  };
  constexpr std::size_t kResync = 128;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    double t = static_cast<double>(i) * h;
    if (i % kResync == 0) resync(t);
    double r = t / spec.c0;
    double envelope = t > 0.0 ? std::pow(r * std::exp(1.0 - r), spec.kappa) : 0.0;
    std::array<double, 4> acc{};
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      for (std::size_t q = 0; q < 4; ++q) {
        double a = re[j + q], b = im[j + q];
        acc[q] += a;
        re[j + q] = a * step_re[j + q] - b * step_im[j + q];
        im[j + q] = a * step_im[j + q] + b * step_re[j + q];
      }
    }
    for (; j < n; ++j) {
      double a = re[j], b = im[j];
      acc[0] += a;
      re[j] = a * step_re[j] - b * step_im[j];
      im[j] = a * step_im[j] + b * step_re[j];
    }
    out[i] = envelope * ((acc[0] + acc[1]) + (acc[2] + acc[3]));
  }
  return out;
}

std::size_t FrameConfig::steps() const { return grid_steps(ground.duration, dt, "frame"); }

void FrameConfig::validate() const {
  ground.validate();
  require(storeys >= 1, "frame: at least one storey");
  require(mass_mean > 0.0 && mass_cov > 0.0 && stiffness_mean > 0.0 && stiffness_cov > 0.0,
          "frame: lognormal parameters must be positive");
  require(damping_ratio > 0.0 && damping_ratio < 1.0, "frame: damping ratio must lie in (0, 1)");
  require(a_tilde >= 0.0 && a_tilde <= 1.0, "frame: a_tilde must lie in [0, 1]");
  require(bw_a > 0.0 && bw_rho > 0.0 && bw_b + bw_xi > 0.0, "frame: Bouc-Wen parameters out of range");
  require(dt > 0.0 && substeps >= 1, "frame: dt must be positive and substeps at least 1");
  (void)steps();
}

std::pair<double, double> rayleigh_coefficients(std::span<const double> masses, std::span<const double> stiffnesses,
                                                double ratio) {
  const auto n = static_cast<Eigen::Index>(masses.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  // Mass-normalized shear-building stiffness M^{-1/2} K M^{-1/2}.
  for (Eigen::Index i = 0; i < n; ++i) {
    double kk = stiffnesses[static_cast<std::size_t>(i)] + (i + 1 < n ? stiffnesses[static_cast<std::size_t>(i + 1)] : 0.0);
    a(i, i) = kk / masses[static_cast<std::size_t>(i)];
    if (i + 1 < n) {
      double off = -stiffnesses[static_cast<std::size_t>(i + 1)] /
                   std::sqrt(masses[static_cast<std::size_t>(i)] * masses[static_cast<std::size_t>(i + 1)]);
      a(i, i + 1) = off;
      a(i + 1, i) = off;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  double w1 = std::sqrt(solver.eigenvalues()[0]);
  double w2 = n > 1 ? std::sqrt(solver.eigenvalues()[1]) : w1;
  if (n == 1) return {ratio * w1, ratio / w1};
  return {2.0 * ratio * w1 * w2 / (w1 + w2), 2.0 * ratio / (w1 + w2)};
}

namespace {

struct FrameSystem {
  std::size_t n;
  std::vector<double> m, k;
  double alpha, beta;
  const FrameConfig* cfg;

  // state = [y (n), y' (n), v (n)], floor displacements relative to the ground.
  void derivative(const std::vector<double>& s, double ag, std::vector<double>& ds, std::vector<double>& storey,
                  std::vector<double>& damp) const {
    const double* y = s.data();
    const double* yd = s.data() + n;
    const double* v = s.data() + 2 * n;
    double* dy = ds.data();
    double* dyd = ds.data() + n;
    double* dv = ds.data() + 2 * n;
    const double at = cfg->a_tilde;
    for (std::size_t i = 0; i < n; ++i) {
      double drift = y[i] - (i > 0 ? y[i - 1] : 0.0);
      double ddrift = yd[i] - (i > 0 ? yd[i - 1] : 0.0);
      storey[i] = k[i] * (at * drift + (1.0 - at) * v[i]);
      damp[i] = beta * k[i] * ddrift;
      double av = std::abs(v[i]);
      double pv = cfg->bw_rho == 1.0 ? av : std::pow(av, cfg->bw_rho);
      double sv = cfg->bw_rho == 1.0 ? v[i] : (av > 0.0 ? std::pow(av, cfg->bw_rho - 1.0) * v[i] : 0.0);
      dv[i] = cfg->bw_a * ddrift - cfg->bw_b * std::abs(ddrift) * sv - cfg->bw_xi * ddrift * pv;
    }
    for (std::size_t i = 0; i < n; ++i) {
      double above_s = i + 1 < n ? storey[i + 1] : 0.0;
      double above_d = i + 1 < n ? damp[i + 1] : 0.0;
      double force = (storey[i] - above_s) + (damp[i] - above_d) + alpha * m[i] * yd[i];
      dy[i] = yd[i];
      dyd[i] = -ag - force / m[i];
    }
  }
};

template <class Visit>
void run_frame(std::span<const double> u, const FrameConfig& cfg, Visit&& visit) {
  cfg.validate();
  const std::size_t n = cfg.storeys;
  if (u.size() != 2 * n + cfg.ground.phase_count) throw ConfigError("frame: input dimension mismatch");
  FrameSystem sys{n, {u.begin(), u.begin() + static_cast<std::ptrdiff_t>(n)},
                  {u.begin() + static_cast<std::ptrdiff_t>(n), u.begin() + static_cast<std::ptrdiff_t>(2 * n)}, 0.0, 0.0,
                  &cfg};
  std::tie(sys.alpha, sys.beta) = rayleigh_coefficients(sys.m, sys.k, cfg.damping_ratio);
  std::size_t steps = cfg.steps() * cfg.substeps;
  double h = cfg.dt / static_cast<double>(cfg.substeps);
  std::vector<double> ag = srm_ground_motion_uniform(u.subspan(2 * n), 0.5 * h, 2 * steps + 1, cfg.ground);

  std::vector<double> s(3 * n, 0.0), k1(3 * n), k2(3 * n), k3(3 * n), k4(3 * n), tmp(3 * n), storey(n), damp(n);
  visit(std::size_t{0}, 0.0, s, ag[0]);
  for (std::size_t step = 0; step < steps; ++step) {
    sys.derivative(s, ag[2 * step], k1, storey, damp);
    for (std::size_t i = 0; i < 3 * n; ++i) tmp[i] = s[i] + 0.5 * h * k1[i];
    sys.derivative(tmp, ag[2 * step + 1], k2, storey, damp);
    for (std::size_t i = 0; i < 3 * n; ++i) tmp[i] = s[i] + 0.5 * h * k2[i];
    sys.derivative(tmp, ag[2 * step + 1], k3, storey, damp);
    for (std::size_t i = 0; i < 3 * n; ++i) tmp[i] = s[i] + h * k3[i];
    sys.derivative(tmp, ag[2 * step + 2], k4, storey, damp);
    bool finite = true;
    for (std::size_t i = 0; i < 3 * n; ++i) {
      s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      finite = finite && std::isfinite(s[i]);
    }
    if (!finite) throw NumericError("frame: non-finite state at step " + std::to_string(step));
    visit(step + 1, static_cast<double>(step + 1) * h, s, ag[2 * step + 2]);
  }
}

}  // namespace

FrameResponse integrate_bouc_wen_frame(std::span<const double> u, const FrameConfig& cfg) {
  const std::size_t n = cfg.storeys;
  FrameResponse r;
  r.peak_drift_mm.assign(n, 0.0);
  run_frame(u, cfg, [&](std::size_t, double, const std::vector<double>& s, double) {
    for (std::size_t i = 0; i < n; ++i) {
      double drift = std::abs(s[i] - (i > 0 ? s[i - 1] : 0.0));
      r.peak_drift_mm[i] = std::max(r.peak_drift_mm[i], drift);
      r.max_abs_v = std::max(r.max_abs_v, std::abs(s[2 * n + i]));
    }
  });
  for (double& d : r.peak_drift_mm) {
    d *= 1000.0;
    r.max_drift_mm = std::max(r.max_drift_mm, d);
  }
  return r;
}

FrameTrace frame_trace(std::span<const double> u, const FrameConfig& cfg) {
  const std::size_t n = cfg.storeys;
  FrameTrace tr;
  tr.drift_mm.assign(n, {});
  run_frame(u, cfg, [&](std::size_t, double t, const std::vector<double>& s, double ag) {
    tr.t.push_back(t);
    tr.ground.push_back(ag);
    for (std::size_t i = 0; i < n; ++i) tr.drift_mm[i].push_back(1000.0 * (s[i] - (i > 0 ? s[i - 1] : 0.0)));
  });
  return tr;
}

namespace {

template <class T>
void read_field(const nlohmann::json& j, const char* key, T& field, std::vector<std::string>& seen) {
  if (j.contains(key)) {
    field = j.at(key).get<T>();
    seen.emplace_back(key);
  }
}

void reject_unknown(const nlohmann::json& j, const std::vector<std::string>& seen, const char* what) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(seen.begin(), seen.end(), it.key()) == seen.end()) {
      throw ConfigError(std::string(what) + ": unknown key '" + it.key() + "'");
    }
  }
}

nlohmann::json ground_to_json(const GroundMotionSpec& g) {
  return {{"phase_count", g.phase_count}, {"omega_up", g.omega_up}, {"chi0", g.chi0},       {"c0", g.c0},
          {"kappa", g.kappa},             {"omega_g", g.omega_g},   {"zeta_g", g.zeta_g},   {"omega_f", g.omega_f},
          {"zeta_f", g.zeta_f},           {"gamma0", g.gamma0},     {"duration", g.duration}, {"a_max", g.a_max}};
}

GroundMotionSpec ground_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("ground: expected an object");
  GroundMotionSpec g;
  std::vector<std::string> seen;
  read_field(j, "phase_count", g.phase_count, seen);
  read_field(j, "omega_up", g.omega_up, seen);
  read_field(j, "chi0", g.chi0, seen);
  read_field(j, "c0", g.c0, seen);
  read_field(j, "kappa", g.kappa, seen);
  read_field(j, "omega_g", g.omega_g, seen);
  read_field(j, "zeta_g", g.zeta_g, seen);
  read_field(j, "omega_f", g.omega_f, seen);
  read_field(j, "zeta_f", g.zeta_f, seen);
  read_field(j, "gamma0", g.gamma0, seen);
  read_field(j, "duration", g.duration, seen);
  read_field(j, "a_max", g.a_max, seen);
  reject_unknown(j, seen, "ground");
  return g;
}

}  // namespace

nlohmann::json to_json(const DuffingConfig& c) {
  return {{"gamma_mean", c.gamma_mean}, {"gamma_std", c.gamma_std},
          {"eps_mean", c.eps_mean},     {"eps_std", c.eps_std},
          {"spectral_intensity", c.spectral_intensity},
          {"dt", c.dt},                 {"duration", c.duration},
          {"noise_count", c.noise_count}, {"integrator", to_string(c.integrator)},
          {"rel_tol", c.rel_tol},       {"abs_tol", c.abs_tol},
          {"substeps", c.substeps}};
}

nlohmann::json to_json(const FrameConfig& c) {
  return {{"storeys", c.storeys},
          {"mass_mean", c.mass_mean},
          {"mass_cov", c.mass_cov},
          {"stiffness_mean", c.stiffness_mean},
          {"stiffness_cov", c.stiffness_cov},
          {"damping_ratio", c.damping_ratio},
          {"a_tilde", c.a_tilde},
          {"bw_a", c.bw_a},
          {"bw_b", c.bw_b},
          {"bw_xi", c.bw_xi},
          {"bw_rho", c.bw_rho},
          {"dt", c.dt},
          {"substeps", c.substeps},
          {"ground", ground_to_json(c.ground)}};
}

DuffingConfig duffing_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("duffing: expected an object");
  DuffingConfig c;
  std::vector<std::string> seen;
  try {
    read_field(j, "gamma_mean", c.gamma_mean, seen);
    read_field(j, "gamma_std", c.gamma_std, seen);
    read_field(j, "eps_mean", c.eps_mean, seen);
    read_field(j, "eps_std", c.eps_std, seen);
    read_field(j, "spectral_intensity", c.spectral_intensity, seen);
    read_field(j, "dt", c.dt, seen);
    read_field(j, "duration", c.duration, seen);
    read_field(j, "noise_count", c.noise_count, seen);
    if (j.contains("integrator")) {
      c.integrator = duffing_integrator_from_string(j.at("integrator").get<std::string>());
      seen.emplace_back("integrator");
    }
    read_field(j, "rel_tol", c.rel_tol, seen);
    read_field(j, "abs_tol", c.abs_tol, seen);
    read_field(j, "substeps", c.substeps, seen);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("duffing: ") + e.what());
  }
  reject_unknown(j, seen, "duffing");
  c.validate();
  return c;
}

FrameConfig frame_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("frame: expected an object");
  FrameConfig c;
  std::vector<std::string> seen;
  try {
    read_field(j, "storeys", c.storeys, seen);
    read_field(j, "mass_mean", c.mass_mean, seen);
    read_field(j, "mass_cov", c.mass_cov, seen);
    read_field(j, "stiffness_mean", c.stiffness_mean, seen);
    read_field(j, "stiffness_cov", c.stiffness_cov, seen);
    read_field(j, "damping_ratio", c.damping_ratio, seen);
    read_field(j, "a_tilde", c.a_tilde, seen);
    read_field(j, "bw_a", c.bw_a, seen);
    read_field(j, "bw_b", c.bw_b, seen);
    read_field(j, "bw_xi", c.bw_xi, seen);
    read_field(j, "bw_rho", c.bw_rho, seen);
    read_field(j, "dt", c.dt, seen);
    read_field(j, "substeps", c.substeps, seen);
    if (j.contains("ground")) {
      c.ground = ground_from_json(j.at("ground"));
      seen.emplace_back("ground");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("frame: ") + e.what());
  }
  reject_unknown(j, seen, "frame");
  c.validate();
  return c;
}

ExtremeResponseModel make_duffing_model(const DuffingConfig& cfg) {
  cfg.validate();
  ExtremeResponseModel m;
  m.name = "duffing";
  m.marginals.push_back(MarginalSpec::lognormal(cfg.gamma_mean, cfg.gamma_std));
  m.marginals.push_back(MarginalSpec::lognormal(cfg.eps_mean, cfg.eps_std));
  for (std::size_t k = 0; k < cfg.noise_count; ++k) m.marginals.push_back(MarginalSpec::normal(0.0, 1.0));
  m.labels = {"Z"};
  m.primary = 0;
  m.evaluate = [cfg](std::span<const double> u) { return std::vector<double>{integrate_duffing(u, cfg)}; };
  return m;
}

ExtremeResponseModel make_frame_model(const FrameConfig& cfg) {
  cfg.validate();
  ExtremeResponseModel m;
  m.name = "bouc_wen_frame";
  for (std::size_t i = 0; i < cfg.storeys; ++i) {
    m.marginals.push_back(MarginalSpec::lognormal(cfg.mass_mean, cfg.mass_cov * cfg.mass_mean));
  }
  for (std::size_t i = 0; i < cfg.storeys; ++i) {
    m.marginals.push_back(MarginalSpec::lognormal(cfg.stiffness_mean, cfg.stiffness_cov * cfg.stiffness_mean));
  }
  for (std::size_t j = 0; j < cfg.ground.phase_count; ++j) {
    m.marginals.push_back(MarginalSpec::uniform(0.0, 2.0 * std::numbers::pi));
  }
  for (std::size_t i = 0; i < cfg.storeys; ++i) m.labels.push_back("storey_" + std::to_string(i + 1));
  m.labels.emplace_back("max");
  m.primary = cfg.storeys;
  m.evaluate = [cfg](std::span<const double> u) {
    FrameResponse r = integrate_bouc_wen_frame(u, cfg);
    std::vector<double> out = r.peak_drift_mm;
    out.push_back(r.max_drift_mm);
    return out;
  };
  return m;
}

ExtremeResponseModel make_model(const std::string& name, const nlohmann::json& params) {
  nlohmann::json p = params.is_null() ? nlohmann::json::object() : params;
  if (name == "duffing") return make_duffing_model(duffing_config_from_json(p));
  if (name == "bouc_wen_frame") return make_frame_model(frame_config_from_json(p));
  throw ConfigError("unknown model '" + name + "'");
}

}  // namespace fracmix
