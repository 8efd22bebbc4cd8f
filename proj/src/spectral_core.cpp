#include "hyperlq/spectral_core.hpp"

#include <cmath>
#include <sstream>

#include "hyperlq/errors.hpp"

namespace hyperlq {

namespace {

void CheckFinite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw DomainError(std::string(what) + " has non-finite entries");
}

void CheckLengths(int n, const Eigen::Ref<const Vec>& lambdas) {
  if (lambdas.size() != n) {
    throw DimensionError("state has " + std::to_string(n) + " modes but " +
                         std::to_string(lambdas.size()) + " frequencies were given");
  }
}

}  // namespace

ModalVector::ModalVector(Vec a_in, Vec b_in) : a(std::move(a_in)), b(std::move(b_in)) {
  if (a.size() != b.size()) throw DimensionError("ModalVector: a and b differ in length");
  CheckFinite(a, "ModalVector.a");
  CheckFinite(b, "ModalVector.b");
}

ModalVector ModalVector::Zero(int n_modes) {
  return ModalVector(Vec::Zero(n_modes), Vec::Zero(n_modes));
}

EnergyState::EnergyState(Vec xi_in, Vec zeta_in)
    : xi(std::move(xi_in)), zeta(std::move(zeta_in)) {
  if (xi.size() != zeta.size()) throw DimensionError("EnergyState: xi and zeta differ in length");
  CheckFinite(xi, "EnergyState.xi");
  CheckFinite(zeta, "EnergyState.zeta");
}

EnergyState EnergyState::Zero(int n_modes) {
  return EnergyState(Vec::Zero(n_modes), Vec::Zero(n_modes));
}

EnergyState EnergyState::FromStacked(const Eigen::Ref<const Vec>& x) {
  if (x.size() % 2 != 0) throw DimensionError("stacked energy state must have even length");
  const Eigen::Index n = x.size() / 2;
  return EnergyState(x.head(n), x.tail(n));
}

Vec EnergyState::stacked() const {
  Vec x(2 * xi.size());
  x << xi, zeta;
  return x;
}

NormScale NormScale::SobolevState(double beta) { return NormScale(Kind::kSobolevState, beta); }
NormScale NormScale::Graded(double s) { return NormScale(Kind::kGraded, s); }
NormScale NormScale::GradedDual(double s) { return NormScale(Kind::kGradedDual, s); }
NormScale NormScale::ExpWeight(double alpha) {
  if (!(alpha >= 0.0)) throw DomainError("exp_weight requires alpha >= 0");
  return NormScale(Kind::kExpWeight, alpha);
}

double NormScale::weight(double lambda) const {
  if (!(lambda > 0.0)) throw DomainError("norm weight needs a positive frequency");
  switch (kind_) {
    case Kind::kSobolevState: return std::pow(lambda, 4.0 * param_);
    case Kind::kGraded: return std::pow(lambda, 2.0 * param_);
    case Kind::kGradedDual: return std::pow(lambda, -2.0 * (param_ + 1.0));
    case Kind::kExpWeight: return std::exp(-2.0 * param_ * lambda);
  }
  return 0.0;
}

Vec NormScale::stacked_weights(const Eigen::Ref<const Vec>& lambdas) const {
  const Eigen::Index n = lambdas.size();
  Vec w(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lam = lambdas[i];
    if (kind_ == Kind::kSobolevState) {
      w[i] = weight(lam) / (lam * lam);
      w[n + i] = 0.0;
    } else {
      w[i] = w[n + i] = weight(lam);
    }
  }
  return w;
}

std::string NormScale::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::kSobolevState: os << "sobolev_state(" << param_ << ")"; break;
    case Kind::kGraded: os << "graded(" << param_ << ")"; break;
    case Kind::kGradedDual: os << "graded_dual(" << param_ << ")"; break;
    case Kind::kExpWeight: os << "exp_weight(" << param_ << ")"; break;
  }
  return os.str();
}

void ValidateFrequencies(const Eigen::Ref<const Vec>& lambdas) {
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    if (!std::isfinite(lambdas[i]) || !(lambdas[i] > 0.0)) {
      throw DomainError("frequency " + std::to_string(i) + " is not a positive finite number");
    }
    if (i > 0 && lambdas[i] < lambdas[i - 1]) {
      throw DomainError("frequencies must be sorted ascending");
    }
  }
}

double norm_squared_stacked(const Eigen::Ref<const Vec>& x, const Eigen::Ref<const Vec>& lambdas,
                            const NormScale& scale) {
  if (x.size() != 2 * lambdas.size()) throw DimensionError("stacked state and frequencies differ");
  ValidateFrequencies(lambdas);
  return (scale.stacked_weights(lambdas).array() * x.array().square()).sum();
}

double norm_squared(const EnergyState& x, const Eigen::Ref<const Vec>& lambdas,
                    const NormScale& scale) {
  CheckLengths(x.n_modes(), lambdas);
  return norm_squared_stacked(x.stacked(), lambdas, scale);
}

double norm_squared(const ModalVector& v, const Eigen::Ref<const Vec>& lambdas,
                    const NormScale& scale) {
  CheckLengths(v.n_modes(), lambdas);
  ValidateFrequencies(lambdas);
  double total = 0.0;
  for (int i = 0; i < v.n_modes(); ++i) {
    const double lam = lambdas[i];
    const double a2 = v.a[i] * v.a[i];
    if (scale.kind() == NormScale::Kind::kSobolevState) {
      total += scale.weight(lam) * a2;
    } else {
      total += scale.weight(lam) * (lam * lam * a2 + v.b[i] * v.b[i]);
    }
  }
  return total;
}

ModalVector apply_fractional_power(const ModalVector& v, const Eigen::Ref<const Vec>& lambdas,
                                   double beta) {
  CheckLengths(v.n_modes(), lambdas);
  ModalVector out = v;
  for (int i = 0; i < v.n_modes(); ++i) {
    const double lam = lambdas[i];
    if (!(lam > 0.0) && beta < 0.0) {
      throw DomainError("negative fractional power of a nonpositive frequency");
    }
    const double f = std::pow(lam, 2.0 * beta);
    out.a[i] *= f;
    out.b[i] *= f;
  }
  return out;
}

EnergyState to_energy(const ModalVector& v, const Eigen::Ref<const Vec>& lambdas) {
  CheckLengths(v.n_modes(), lambdas);
  ValidateFrequencies(lambdas);
  return EnergyState(v.a.cwiseProduct(lambdas), v.b);
}

ModalVector from_energy(const EnergyState& x, const Eigen::Ref<const Vec>& lambdas) {
  CheckLengths(x.n_modes(), lambdas);
  ValidateFrequencies(lambdas);
  return ModalVector(x.xi.cwiseQuotient(lambdas), x.zeta);
}

double interpolation_gap(const ModalVector& v, const Eigen::Ref<const Vec>& lambdas, double rho,
                         double eta, double s) {
  if (!(rho > 0.0 && eta > 0.0 && s > 0.0)) {
    throw DomainError("interpolation_gap needs positive rho, eta and s");
  }
  const double weak = norm_squared(v, lambdas, NormScale::Graded(-1.0 / eta));
  if (weak == 0.0) throw DomainError("interpolation_gap of the zero vector");
  const double lhs = norm_squared(v, lambdas, NormScale::Graded(1.0 / rho));
  const double strong = norm_squared(v, lambdas, NormScale::Graded(1.0 / rho + s));
  const double d = 1.0 + eta / rho + s * eta;
  // (weak)^{s eta / d} (strong)^{(1 + eta/rho) / d}, both as squared norms.
  const double log_rhs = (s * eta / d) * std::log(weak) + ((1.0 + eta / rho) / d) * std::log(strong);
  return std::exp(log_rhs) - lhs;
}

}  // namespace hyperlq
