#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fracmix/model.hpp"

namespace fracmix {

enum class DuffingIntegrator { kRk4, kDopri45 };

std::string to_string(DuffingIntegrator integrator);
DuffingIntegrator duffing_integrator_from_string(const std::string& name);

struct DuffingConfig {
  double gamma_mean = 0.5;
  double gamma_std = 0.2;
  double eps_mean = 0.3;
  double eps_std = 0.1;
  double spectral_intensity = 1.0;
  double dt = 0.01;
  double duration = 30.0;
  std::size_t noise_count = 3001;
  /// kDopri45 is adaptive Dormand-Prince 5(4) with error-per-step control and
  /// the free 4th-order interpolant read at the grid points; kRk4 is fixed-step.
  DuffingIntegrator integrator = DuffingIntegrator::kDopri45;
  double rel_tol = 1e-3;
  double abs_tol = 1e-6;
  /// RK4 steps per forcing interval dt.
  std::size_t substeps = 1;

  std::size_t steps() const;
  void validate() const;
};

/// theta_k * sqrt(2 pi S / dt).
std::vector<double> white_noise_series(std::span<const double> theta, double spectral_intensity, double dt);

struct Trajectory {
  std::vector<double> t;
  std::vector<double> y;
  std::vector<double> v;
};

/// RK4 solution of y'' + gamma y' + y + eps y^3 = force(t) with the force
/// sampled at the RK stage times.
Trajectory integrate_forced_duffing(double gamma, double eps, const std::function<double(double)>& force, double y0,
                                    double v0, double dt, std::size_t steps);

/// Input layout (gamma, eps, theta_0 .. theta_{n-1}) in physical units. Forcing
/// is held constant on [t_k, t_{k+1}); the response starts from rest.
double integrate_duffing(std::span<const double> u, const DuffingConfig& cfg);
Trajectory duffing_trace(std::span<const double> u, const DuffingConfig& cfg);

struct GroundMotionSpec {
  std::size_t phase_count = 1600;
  double omega_up = 240.0;
  double chi0 = 0.15;
  double c0 = 9.0;
  double kappa = 2.0;
  double omega_g = 40.0 * 3.14159265358979323846 / 7.0;
  double zeta_g = 0.64;
  double omega_f = 4.0 * 3.14159265358979323846 / 7.0;
  double zeta_f = 0.64;
  double gamma0 = 2.85;
  double duration = 20.0;
  /// Peak ground acceleration in m/s^2.
  double a_max = 4.0;

  double delta_omega() const { return omega_up / static_cast<double>(phase_count); }
  void validate() const;
};

double clough_penzien_psd(double omega, const GroundMotionSpec& spec);
double modulation(double omega, double t, const GroundMotionSpec& spec);
double epsd(double omega, double t, const GroundMotionSpec& spec);

/// sqrt(2) sum_j sqrt(2 S(omega_j, t) d_omega) cos(omega_j t + U_j) with
/// omega_j = j d_omega, j = 1..n, evaluated term by term at each time.
std::vector<double> srm_ground_motion(std::span<const double> phases, std::span<const double> times,
                                      const GroundMotionSpec& spec);

/// The same sum on the uniform grid t_i = i h, i = 0..count-1, by complex
/// recurrence with periodic exact resynchronization.
std::vector<double> srm_ground_motion_uniform(std::span<const double> phases, double h, std::size_t count,
                                              const GroundMotionSpec& spec);

struct FrameConfig {
  std::size_t storeys = 15;
  double mass_mean = 6e4;
  double mass_cov = 0.1;
  double stiffness_mean = 7e7;
  double stiffness_cov = 0.1;
  double damping_ratio = 0.05;
  double a_tilde = 0.1;
  double bw_a = 1.0;
  double bw_b = 50.0;
  double bw_xi = 50.0;
  double bw_rho = 1.0;
  double dt = 0.01;
  std::size_t substeps = 1;
  GroundMotionSpec ground;

  std::size_t steps() const;
  void validate() const;
};

struct FrameResponse {
  /// Peak absolute interstorey drift per storey, in mm.
  std::vector<double> peak_drift_mm;
  double max_drift_mm = 0.0;
  /// Largest |v| reached by any hysteretic displacement, in m.
  double max_abs_v = 0.0;
};

/// Rayleigh coefficients (alpha, beta) giving `ratio` damping on the first two modes of (M, K).
std::pair<double, double> rayleigh_coefficients(std::span<const double> masses, std::span<const double> stiffnesses,
                                                double ratio);

/// Input layout (m_1..m_n, k_1..k_n, U_1..U_p) in physical units.
FrameResponse integrate_bouc_wen_frame(std::span<const double> u, const FrameConfig& cfg);

struct FrameTrace {
  std::vector<double> t;
  std::vector<double> ground;
  std::vector<std::vector<double>> drift_mm;
};
FrameTrace frame_trace(std::span<const double> u, const FrameConfig& cfg);

nlohmann::json to_json(const DuffingConfig& cfg);
nlohmann::json to_json(const FrameConfig& cfg);
/// Applies the keys present in `j` on top of defaults; ConfigError on unknown keys.
DuffingConfig duffing_config_from_json(const nlohmann::json& j);
FrameConfig frame_config_from_json(const nlohmann::json& j);

ExtremeResponseModel make_duffing_model(const DuffingConfig& cfg);
ExtremeResponseModel make_frame_model(const FrameConfig& cfg);

/// Builds "duffing" or "bouc_wen_frame", applying overrides from `params`
/// (keys mirror the config structs); ConfigError for unknown names or keys.
ExtremeResponseModel make_model(const std::string& name, const nlohmann::json& params);

}  // namespace fracmix
