#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyperlq/models.hpp"
#include "hyperlq/spectral_core.hpp"

namespace hyperlq {

/// First-order form in energy coordinates x = [xi; zeta].
struct FirstOrderMatrices {
  Mat A;  // 2n x 2n, skew
  Mat B;  // 2n x m, zero on the xi half
  Mat Q;  // 2n x 2n, C^*C lifted; nonzero only on the xi block
  Mat G;  // B B^T
};

FirstOrderMatrices first_order_matrices(const SpectralSystem& system);

/// Quadratic form E with x^T E x = min over u of int (|u|^2 + |C w|^2) dt.
struct RiccatiSolution {
  Mat E;
  double horizon = 0.0;  // kInfinity for the algebraic equation
  double residual = 0.0;
  std::string method;

  bool infinite_horizon() const { return horizon == std::numeric_limits<double>::infinity(); }
};

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, std::vector<RiccatiSolution> partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const std::vector<RiccatiSolution>& partial() const { return partial_; }

 private:
  std::vector<RiccatiSolution> partial_;
};

enum class DreMethod {
  kHamiltonian,    // exact flow of the Hamiltonian system, one exponential per gap
  kDormandPrince,  // adaptive explicit RK5(4) on the matrix vector field
};

/// Snapshots of E(tau) solving E' = Q + E A + A^T E - E G E with E(0) = 0.
/// `snapshot_times` must be nondecreasing and lie in [0, horizon].
std::vector<RiccatiSolution> integrate_dre(const SpectralSystem& system, double horizon,
                                           const std::vector<double>& snapshot_times,
                                           DreMethod method = DreMethod::kHamiltonian);

/// Riccati residual |Q + E A + A^T E - E G E|_F.
double are_residual(const FirstOrderMatrices& fo, const Mat& e);

enum class AreMethod { kNewtonKleinman, kDreLimit };

RiccatiSolution solve_are(const SpectralSystem& system, AreMethod method = AreMethod::kDreLimit);

/// x0^T E x0.
double value(const RiccatiSolution& solution, const EnergyState& x0);

struct BoundsReport {
  double c1_hat = 0.0;
  double c2_hat = 0.0;
  int probe_count = 0;
  int excluded = 0;  // probes whose weak norm vanished while the value did not
  NormScale weak_scale = NormScale::Energy();
  NormScale strong_scale = NormScale::Energy();
};

/// Columns of `probes` are stacked energy states.
BoundsReport bounds_report(const RiccatiSolution& e_hat, const SpectralSystem& system,
                           const NormScale& weak, const NormScale& strong, const Mat& probes);

/// Canonical basis vectors of R^{2n} followed by `n_random` random unit vectors.
Mat make_probes(int n_modes, int n_random, std::uint64_t seed);

}  // namespace hyperlq
