#pragma once

#include <string>

#include <Eigen/Dense>

namespace hyperlq {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Truncated state as per-mode position/velocity coefficients in the eigenbasis.
struct ModalVector {
  Vec a;
  Vec b;

  ModalVector() = default;
  ModalVector(Vec a_in, Vec b_in);

  static ModalVector Zero(int n_modes);
  int n_modes() const { return static_cast<int>(a.size()); }
};

/// Energy coordinates: xi_n = lambda_n a_n, zeta_n = b_n. The energy norm is
/// the Euclidean norm of (xi, zeta).
struct EnergyState {
  Vec xi;
  Vec zeta;

  EnergyState() = default;
  EnergyState(Vec xi_in, Vec zeta_in);

  static EnergyState Zero(int n_modes);
  /// Inverse of stacked(); the vector length must be even.
  static EnergyState FromStacked(const Eigen::Ref<const Vec>& x);

  int n_modes() const { return static_cast<int>(xi.size()); }
  /// [xi; zeta], the layout used by all first-order matrices.
  Vec stacked() const;
  double energy() const { return xi.squaredNorm() + zeta.squaredNorm(); }
};

/// Per-mode weight on the energy density lambda^2 a^2 + b^2.
class NormScale {
 public:
  enum class Kind { kSobolevState, kGraded, kGradedDual, kExpWeight };

  static NormScale SobolevState(double beta);
  static NormScale Graded(double s);
  static NormScale GradedDual(double s);
  static NormScale ExpWeight(double alpha);
  static NormScale Energy() { return Graded(0.0); }

  Kind kind() const { return kind_; }
  double parameter() const { return param_; }

  /// Weight applied to the energy density of a mode with frequency lambda.
  /// For kSobolevState this is the weight on a^2 alone (lambda^{4 beta}).
  double weight(double lambda) const;
  /// Weight vector matching the stacked energy layout [xi; zeta]. For
  /// kSobolevState the zeta half is zero and the xi half is lambda^{4 beta - 2}.
  Vec stacked_weights(const Eigen::Ref<const Vec>& lambdas) const;

  std::string describe() const;

 private:
  NormScale(Kind kind, double param) : kind_(kind), param_(param) {}
  Kind kind_;
  double param_;
};

/// Throws DomainError unless every lambda is finite, positive and the sequence
/// is nondecreasing.
void ValidateFrequencies(const Eigen::Ref<const Vec>& lambdas);

double norm_squared(const ModalVector& v, const Eigen::Ref<const Vec>& lambdas,
                    const NormScale& scale);
double norm_squared(const EnergyState& x, const Eigen::Ref<const Vec>& lambdas,
                    const NormScale& scale);
/// Same as above on a stacked [xi; zeta] vector.
double norm_squared_stacked(const Eigen::Ref<const Vec>& x,
                            const Eigen::Ref<const Vec>& lambdas,
                            const NormScale& scale);

/// a_n <- lambda_n^{2 beta} a_n, b_n <- lambda_n^{2 beta} b_n.
ModalVector apply_fractional_power(const ModalVector& v,
                                   const Eigen::Ref<const Vec>& lambdas,
                                   double beta);

EnergyState to_energy(const ModalVector& v, const Eigen::Ref<const Vec>& lambdas);
ModalVector from_energy(const EnergyState& x, const Eigen::Ref<const Vec>& lambdas);

/// RHS minus LHS of the interpolation inequality bounding the D(A^{1/rho})
/// norm by the weak (H2) norm and the D(A^{1/rho + s}) norm.
double interpolation_gap(const ModalVector& v, const Eigen::Ref<const Vec>& lambdas,
                         double rho, double eta, double s);

}  // namespace hyperlq
