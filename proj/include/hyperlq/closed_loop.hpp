#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hyperlq/models.hpp"
#include "hyperlq/riccati.hpp"
#include "hyperlq/spectral_core.hpp"

namespace hyperlq {

/// Energy balance over the run: `lhs` is the change of the Lyapunov quantity,
/// `rhs` the integrated dissipation.
struct DissipationCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double relative_defect = 0.0;
};

struct Trajectory {
  Vec lambdas;
  /// Increasing sample times. For backward runs these are elapsed times
  /// T - t measured from the terminal time.
  std::vector<double> times;
  std::vector<EnergyState> states;
  std::vector<Vec> controls;      // empty when the loop has no control
  std::vector<double> energies;   // |x|_H^2
  std::vector<double> values;     // Lyapunov quantity (x^T E x, or |x|^2 / 2)
  std::vector<double> control_norm_sq;
  std::vector<double> obs_norm_sq;
  DissipationCheck identity;
  bool reverse_time = false;
};

enum class Integrator {
  kExact,   // exponential of the closed-loop generator, Van Loan dissipation integrals
  kStrang,  // exact rotation composed with the feedback part, Strang splitting (triple jump)
};

/// u = -B^* w_t. Samples every `dt`.
Trajectory simulate_collocated(const SpectralSystem& system, const EnergyState& x0,
                               double horizon, double dt, Integrator integrator = Integrator::kExact);

/// u = -B^T E x with E from solve_are.
Trajectory simulate_riccati_feedback(const SpectralSystem& system, const RiccatiSolution& e_hat,
                                     const EnergyState& x0, double horizon, double dt,
                                     Integrator integrator = Integrator::kExact);

/// phi_tt + A phi = C^*C phi_t run backward from t = T. The damping acts
/// through the lifted observation form diag(1/lambda) Q_obs diag(1/lambda).
Trajectory simulate_backward_observer(const SpectralSystem& system,
                                      const EnergyState& terminal_state, double horizon, double dt,
                                      Integrator integrator = Integrator::kExact);

/// Largest real part of the generator's eigenvalues; the slowest retained
/// mode decays like exp(-t / truncation_time).
double truncation_time(const Mat& generator);
Mat collocated_generator(const SpectralSystem& system);
Mat riccati_generator(const SpectralSystem& system, const RiccatiSolution& e_hat);

/// [10, min(300, T_trunc / 2)].
std::pair<double, double> default_decay_window(const Mat& generator);

/// Random-sign data with |xi_n| = |zeta_n| = lambda_n^{-sigma}.
EnergyState power_law_data(const Vec& lambdas, double sigma, std::uint64_t seed,
                           std::uint64_t stream = 0);
/// sigma placing power_law_data in the graded(k) class with margin eps.
inline double smoothness_exponent(double k, double eps = 0.1) { return k + 0.5 + eps; }

struct NullControlResult {
  std::vector<double> times;
  std::vector<Vec> controls;
  double cost = 0.0;
  double terminal_residual = 0.0;  // |x(t0)|_H by independent propagation
  double gramian_condition = 0.0;
  bool certified = true;
  std::string note;
};

/// int_0^t0 Phi(s) B B^T Phi(s)^T ds in energy coordinates (closed form).
Mat controllability_gramian(const SpectralSystem& system, double t0);

/// Minimal-norm control steering x0 to rest at t0:
/// u(t) = -B^T Phi(t0 - t)^T W(t0)^{-1} Phi(t0) x0.
NullControlResult hum_null_control(const SpectralSystem& system, const EnergyState& x0, double t0,
                                   int n_samples = 0);

struct DecayFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  double r2 = 0.0;
  int n_samples = 0;
  bool model_mismatch = false;  // r2 < 0.999
  NormScale norm_used = NormScale::Energy();
};

/// Least squares of log(value) against log(t + 1) over samples strictly inside
/// (t_start, t_end).
DecayFit fit_decay(const std::vector<double>& times, const std::vector<double>& values,
                   std::pair<double, double> window);
DecayFit fit_decay(const Trajectory& traj, const NormScale& norm, std::pair<double, double> window);

struct SequenceLemmaResult {
  double bound_constant = 0.0;  // sup_m a_m (m + 1)^{1/(1+alpha)}
  std::vector<long> violations;
  double final_product = 0.0;
  long m_max = 0;
};

/// Rolls out a_{m+1} + C a_{m+1}^{2+alpha} = a_m from a_0.
SequenceLemmaResult sequence_lemma_check(double c, double alpha, long m_max, double a0 = 1.0);

/// Whether a_m = M (m+1)^{-1/(1+alpha)} satisfies a_{m+1} <= a_m - C a_{m+1}^{2+alpha}
/// at every m in [m_from, m_to].
bool power_law_satisfies_recursion(double c, double alpha, double m_const, long m_from, long m_to);

}  // namespace hyperlq
