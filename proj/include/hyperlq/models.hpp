#pragma once

#include <limits>
#include <string>
#include <vector>

#include "hyperlq/spectral_core.hpp"

namespace hyperlq {

/// Truncated second-order system w_tt + A w = B u with cost |C w|^2, stored in
/// the eigenbasis of A. Immutable after construction.
class SpectralSystem {
 public:
  /// `b_mod` is n_modes x m (control acting on the velocity equation);
  /// `q_obs` is the quadratic form of C^*C on the position coefficients a_n.
  SpectralSystem(Vec lambdas, Mat b_mod, Mat q_obs, std::string label);

  const Vec& lambdas() const { return lambdas_; }
  const Mat& B_mod() const { return b_mod_; }
  const Mat& Q_obs() const { return q_obs_; }
  /// B_mod B_mod^T, precomputed.
  const Mat& control_gram() const { return control_gram_; }
  const std::string& label() const { return label_; }
  int n_modes() const { return static_cast<int>(lambdas_.size()); }
  int n_controls() const { return static_cast<int>(b_mod_.cols()); }
  double lambda_max() const { return lambdas_[lambdas_.size() - 1]; }
  double lambda_min() const { return lambdas_[0]; }

  /// Same frequencies and control map with the observation replaced.
  SpectralSystem with_observation(Mat q_obs, std::string label) const;
  /// Same frequencies and observation with the control map replaced.
  SpectralSystem with_control(Mat b_mod, std::string label) const;

 private:
  Vec lambdas_;
  Mat b_mod_;
  Mat q_obs_;
  Mat control_gram_;
  std::string label_;
};

/// Region of the interval (0, pi) where control acts or the gradient is observed.
struct Region {
  enum class Kind { kNone, kFull, kSubinterval };
  Kind kind = Kind::kFull;
  double a = 0.0;
  double b = 0.0;

  static Region None() { return {Kind::kNone, 0.0, 0.0}; }
  static Region Full() { return {Kind::kFull, 0.0, 0.0}; }
  static Region Subinterval(double a, double b) { return {Kind::kSubinterval, a, b}; }
};

/// (2/pi) int_a^b sin(n x) sin(m x) dx in closed form.
double SineOverlap(int n, int m, double a, double b);
/// (2/pi) int_a^b cos(n x) cos(m x) dx in closed form.
double CosineOverlap(int n, int m, double a, double b);

/// Dirichlet wave on (0, pi): lambda_n = n, eigenfunctions sqrt(2/pi) sin(n x).
SpectralSystem build_interval_wave(int n_modes, Region control, Region observation);

/// Eigenpairs of the star graph with Dirichlet ends and a Kirchhoff center at
/// x = 0. Edge j carries coefficient c_j of sin(lambda (l_j - x)).
struct StarSpectrum {
  Vec lambdas;
  Mat coefficients;  // n_modes x n_edges, L2-normalized over the network
};

StarSpectrum star_spectrum(const std::vector<double>& lengths, double lambda_max);

/// Star network with distributed control on `controlled_edge` (projected on
/// `n_control_basis` sines of that edge; 0 picks enough to resolve lambda_max)
/// and gradient observation on `observed_edge`.
SpectralSystem build_star_network(const std::vector<double>& lengths, int controlled_edge,
                                  int observed_edge, double lambda_max,
                                  int n_control_basis = 0);

struct RectangleMode {
  int m;  // x1 index, the direction across the strip
  int n;  // x2 index
  double lambda;
};

/// Modes of (0,pi)^2 with sqrt(m^2+n^2) <= max_frequency, sorted by (lambda, m, n).
std::vector<RectangleMode> rectangle_modes(double max_frequency);

/// Square (0,pi)^2 controlled on the strip a < x1 < b, full gradient observed.
SpectralSystem build_rectangle(double a, double b, double max_frequency);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// B_mod = diag(lambda^{-1/rho}), Q_obs = diag(lambda^{2 - 2/eta}). rho or eta
/// equal to kInfinity gives unit weights. An empty `spectrum` means lambda_n = n.
SpectralSystem build_synthetic(double rho, double eta, int n_modes, Vec spectrum = Vec());

/// Exponential-weight family: B_mod = diag(e^{-alpha lambda}),
/// Q_obs = diag(lambda^2 e^{-2 beta lambda}).
SpectralSystem build_synthetic_exponential(double alpha, double beta, int n_modes,
                                           Vec spectrum = Vec());

/// W = int_0^T Phi(t)^T M Phi(t) dt in energy coordinates, where M observes
/// the velocity through B^* (use_control) or the position through C.
Mat observability_gramian(const SpectralSystem& system, double horizon, bool use_control);

/// Gramian restricted to the listed modes (rows/cols ordered xi then zeta).
Mat observability_gramian(const SpectralSystem& system, double horizon, bool use_control,
                          const std::vector<int>& modes);

struct ObservabilityReport {
  std::vector<double> shell_edges;      // lower edge Lambda of each fitted shell
  std::vector<double> shell_constants;  // min eigenvalue of W / T on the shell
  std::vector<int> shell_sizes;
  double slope = 0.0;
  double fitted_exponent = 0.0;  // -slope, the exponent of the weight Lambda^{-2/rho}
  double rho_hat = 0.0;          // 2/|slope|, kInfinity for flat fits
  double fit_r2 = 0.0;
  double horizon = 0.0;
  bool use_control = true;
  std::vector<std::string> warnings;
};

/// Shell constants over [Lambda, 2 Lambda) for each Lambda in `shells` and a
/// least-squares fit of log(constant) against log(Lambda).
ObservabilityReport fit_weak_observability(const SpectralSystem& system, double horizon,
                                           const std::vector<double>& shells,
                                           bool use_control = true);

}  // namespace hyperlq
