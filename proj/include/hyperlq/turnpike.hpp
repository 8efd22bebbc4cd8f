#pragma once

#include <vector>

#include "hyperlq/closed_loop.hpp"
#include "hyperlq/models.hpp"
#include "hyperlq/spectral_core.hpp"

namespace hyperlq {

/// ((T+1)^{1-p} - 1)/(1-p) with p = k * exponent, and ln(T+1) at p = 1.
double g_weight(double horizon, double k, double exponent);

/// Observation space coordinates: C w = C_mod a with C_mod = Q_obs^{1/2}, so
/// targets z live in R^{n_modes}.
Mat observation_operator(const SpectralSystem& system);

struct StationarySolution {
  ModalVector w_bar;  // velocity part zero
  Vec u_bar;
  ModalVector p_bar;  // velocity part zero
  Vec z;
  double state_residual = 0.0;    // |A w - B u|
  double adjoint_residual = 0.0;  // |A p - C^*(C w - z)|
  double control_residual = 0.0;  // |u + B^* p|
  double optimality_residual = 0.0;
  double cost = 0.0;  // |u|^2 + |C w - z|^2
};

StationarySolution solve_stationary(const SpectralSystem& system, const Vec& z);
double stationary_cost(const SpectralSystem& system, const Vec& z, const Vec& u);

struct TrackingResult {
  Trajectory trajectory;          // full state (w, w_t) in energy coordinates, with controls
  std::vector<Vec> adjoints;      // deviation costate at trajectory times
  std::vector<Vec> feedforward;   // h(t) at trajectory times, costate = E(T - t) x~ + h
  double cost = 0.0;              // J^T by quadrature of the integrand
  double cost_identity = 0.0;     // J^T from the Riccati value and boundary terms
  double deviation_integral = 0.0;  // int (|C (w - w_bar)|^2 + |u - u_bar|^2)
  Vec mean_deviation;             // (1/T) int (x - x_bar) dt, stacked
  double os_residual = 0.0;       // max relative residual over the five OS relations
  double horizon = 0.0;
};

/// Minimizes int_0^T (|u|^2 + |C w - z|^2) subject to the wave dynamics from x0,
/// through the deviation optimality system about the stationary pair.
/// `dt` is the output grid; 0 picks a grid resolving the fastest mode.
TrackingResult solve_tracking(const SpectralSystem& system, const Vec& z, const EnergyState& x0,
                              double horizon, double dt = 0.0);

/// Dense oracle: Hermite-Simpson (Pade 2,2) collocation of the Hamiltonian
/// two-point problem on `steps` intervals. Returns state and costate samples.
struct TpbvpSolution {
  std::vector<double> times;
  std::vector<Vec> states;    // deviation states
  std::vector<Vec> costates;  // deviation costates
  double cost = 0.0;          // J^T of the full problem
};
TpbvpSolution solve_tracking_tpbvp(const SpectralSystem& system, const Vec& z,
                                   const EnergyState& x0, double horizon, int steps);

struct TurnpikeReport {
  std::vector<double> horizons;
  std::vector<double> avg_tracking;
  std::vector<double> avg_state_gap;
  std::vector<double> bound_values;
  double k_used = 1.0;
  double ktilde_used = 1.0;
};

/// Averages over each run; all runs must share the system, z and x0.
TurnpikeReport averaged_metrics(const SpectralSystem& system, const std::vector<TrackingResult>& runs,
                                const std::vector<double>& horizons,
                                const StationarySolution& stationary, const EnergyState& x0,
                                double rho, double eta, double k = 1.0, double ktilde = 1.0);

/// Least-squares slope of log(y) against log(x); pairs with y <= 0 are skipped.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace hyperlq
