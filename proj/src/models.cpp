#include "hyperlq/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "hyperlq/errors.hpp"
#include "linalg.hpp"

namespace hyperlq {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Antiderivative of sin(n x) sin(m x) (sign = -1) or cos(n x) cos(m x) (+1).
double ProductAntiderivative(int n, int m, double x, double sign) {
  if (n == m) return 0.5 * x + sign * std::sin(2.0 * n * x) / (4.0 * n);
  const int d = n - m;
  const int s = n + m;
  return std::sin(d * x) / (2.0 * d) + sign * std::sin(s * x) / (2.0 * s);
}

void CheckSubinterval(double a, double b) {
  if (!(a >= 0.0 && b <= kPi && a < b)) {
    throw DomainError("subinterval must satisfy 0 <= a < b <= pi");
  }
}

}  // namespace

SpectralSystem::SpectralSystem(Vec lambdas, Mat b_mod, Mat q_obs, std::string label)
    : lambdas_(std::move(lambdas)),
      b_mod_(std::move(b_mod)),
      q_obs_(std::move(q_obs)),
      label_(std::move(label)) {
  if (lambdas_.size() == 0) throw DimensionError("system needs at least one mode");
  ValidateFrequencies(lambdas_);
  const Eigen::Index n = lambdas_.size();
  if (b_mod_.rows() != n) throw DimensionError("B_mod must have one row per mode");
  if (q_obs_.rows() != n || q_obs_.cols() != n) throw DimensionError("Q_obs must be n x n");
  if (!b_mod_.allFinite() || !q_obs_.allFinite()) throw DomainError("system has non-finite entries");
  const double qn = std::max(1.0, q_obs_.cwiseAbs().maxCoeff());
  if ((q_obs_ - q_obs_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * qn) {
    throw DomainError("Q_obs is not symmetric");
  }
  q_obs_ = detail::Symmetrize(q_obs_);
  control_gram_ = Mat::Zero(n, n);
  control_gram_.selfadjointView<Eigen::Lower>().rankUpdate(b_mod_);
  control_gram_ = control_gram_.selfadjointView<Eigen::Lower>();
}

SpectralSystem SpectralSystem::with_observation(Mat q_obs, std::string label) const {
  return SpectralSystem(lambdas_, b_mod_, std::move(q_obs), std::move(label));
}

SpectralSystem SpectralSystem::with_control(Mat b_mod, std::string label) const {
  return SpectralSystem(lambdas_, std::move(b_mod), q_obs_, std::move(label));
}

double SineOverlap(int n, int m, double a, double b) {
  return (2.0 / kPi) *
         (ProductAntiderivative(n, m, b, -1.0) - ProductAntiderivative(n, m, a, -1.0));
}

double CosineOverlap(int n, int m, double a, double b) {
  return (2.0 / kPi) *
         (ProductAntiderivative(n, m, b, 1.0) - ProductAntiderivative(n, m, a, 1.0));
}

SpectralSystem build_interval_wave(int n_modes, Region control, Region observation) {
  if (n_modes < 1) throw DomainError("n_modes must be at least 1");
  Vec lambdas = Vec::LinSpaced(n_modes, 1.0, n_modes);
  Mat b_mod;
  std::string label = "interval";
  switch (control.kind) {
    case Region::Kind::kNone: b_mod = Mat::Zero(n_modes, 1); label += "-uncontrolled"; break;
    case Region::Kind::kFull: b_mod = Mat::Identity(n_modes, n_modes); break;
    case Region::Kind::kSubinterval: {
      CheckSubinterval(control.a, control.b);
      Mat m(n_modes, n_modes);
      for (int i = 0; i < n_modes; ++i)
        for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = SineOverlap(i + 1, j + 1, control.a, control.b);
      b_mod = detail::SymmetricSqrt(m);
      label += "-ctrl(" + std::to_string(control.a) + "," + std::to_string(control.b) + ")";
      break;
    }
  }
  Mat q_obs = Mat::Zero(n_modes, n_modes);
  switch (observation.kind) {
    case Region::Kind::kNone: label += "-unobserved"; break;
    case Region::Kind::kFull: q_obs.diagonal() = lambdas.array().square(); break;
    case Region::Kind::kSubinterval:
      CheckSubinterval(observation.a, observation.b);
      for (int i = 0; i < n_modes; ++i)
        for (int j = 0; j <= i; ++j)
          q_obs(i, j) = q_obs(j, i) = (i + 1.0) * (j + 1.0) *
                                      CosineOverlap(i + 1, j + 1, observation.a, observation.b);
      label += "-obs(" + std::to_string(observation.a) + "," + std::to_string(observation.b) + ")";
      break;
  }
  return SpectralSystem(std::move(lambdas), std::move(b_mod), std::move(q_obs), label);
}

std::vector<RectangleMode> rectangle_modes(double max_frequency) {
  if (!(max_frequency >= std::sqrt(2.0))) throw DomainError("max_frequency must be at least sqrt(2)");
  std::vector<RectangleMode> modes;
  const int kmax = static_cast<int>(std::floor(max_frequency));
  const double cap2 = max_frequency * max_frequency;
  for (int m = 1; m <= kmax; ++m)
    for (int n = 1; n <= kmax; ++n) {
      const int l2 = m * m + n * n;
      if (l2 <= cap2 * (1.0 + 1e-14)) modes.push_back({m, n, std::sqrt(static_cast<double>(l2))});
    }
  std::sort(modes.begin(), modes.end(), [](const RectangleMode& x, const RectangleMode& y) {
    const int lx = x.m * x.m + x.n * x.n;
    const int ly = y.m * y.m + y.n * y.n;
    if (lx != ly) return lx < ly;
    if (x.m != y.m) return x.m < y.m;
    return x.n < y.n;
  });
  return modes;
}

SpectralSystem build_rectangle(double a, double b, double max_frequency) {
  if (!(a < b)) throw DomainError("a < b required");
  if (a < 0.0 || b > kPi) throw DomainError("strip must lie in [0, pi]");
  const auto modes = rectangle_modes(max_frequency);
  const int n_modes = static_cast<int>(modes.size());
  Vec lambdas(n_modes);
  for (int i = 0; i < n_modes; ++i) lambdas[i] = modes[i].lambda;
  // The Gram matrix couples only modes sharing the x2 index n.
  std::map<int, std::vector<int>> by_n;
  for (int i = 0; i < n_modes; ++i) by_n[modes[i].n].push_back(i);
  Mat b_mod = Mat::Zero(n_modes, n_modes);
  for (const auto& [n, idx] : by_n) {
    const int k = static_cast<int>(idx.size());
    Mat m(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j <= i; ++j)
        m(i, j) = m(j, i) = SineOverlap(modes[idx[i]].m, modes[idx[j]].m, a, b);
    const Mat r = detail::SymmetricSqrt(m);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) b_mod(idx[i], idx[j]) = r(i, j);
  }
  Mat q_obs = Mat::Zero(n_modes, n_modes);
  q_obs.diagonal() = lambdas.array().square();
  return SpectralSystem(std::move(lambdas), std::move(b_mod), std::move(q_obs),
                        "rectangle-strip(" + std::to_string(a) + "," + std::to_string(b) + ")");
}

namespace {

Vec ResolveSpectrum(int n_modes, Vec spectrum) {
  if (spectrum.size() == 0) {
    if (n_modes < 1) throw DomainError("n_modes must be at least 1");
    return Vec::LinSpaced(n_modes, 1.0, n_modes);
  }
  if (n_modes > 0 && spectrum.size() != n_modes) {
    throw DimensionError("custom spectrum length differs from n_modes");
  }
  ValidateFrequencies(spectrum);
  return spectrum;
}

double InversePower(double x) { return std::isinf(x) ? 0.0 : 1.0 / x; }

}  // namespace

SpectralSystem build_synthetic(double rho, double eta, int n_modes, Vec spectrum) {
  if (!(rho > 0.0) || !(eta > 0.0)) throw DomainError("rho and eta must be positive");
  Vec lambdas = ResolveSpectrum(n_modes, std::move(spectrum));
  const double ir = InversePower(rho);
  const double ie = InversePower(eta);
  Vec gains = lambdas.array().pow(-ir);
  Mat b_mod = gains.asDiagonal();
  Mat q_obs = Mat::Zero(lambdas.size(), lambdas.size());
  q_obs.diagonal() = lambdas.array().square() * lambdas.array().pow(-2.0 * ie);
  std::ostringstream lab;
  lab.precision(6);
  lab << "synthetic(rho=" << rho << ",eta=" << eta << ")";
  return SpectralSystem(std::move(lambdas), std::move(b_mod), std::move(q_obs), lab.str());
}

SpectralSystem build_synthetic_exponential(double alpha, double beta, int n_modes, Vec spectrum) {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) throw DomainError("exponential weights must be nonnegative");
  Vec lambdas = ResolveSpectrum(n_modes, std::move(spectrum));
  Vec gains = (-alpha * lambdas.array()).exp();
  Mat b_mod = gains.asDiagonal();
  Mat q_obs = Mat::Zero(lambdas.size(), lambdas.size());
  q_obs.diagonal() = lambdas.array().square() * (-2.0 * beta * lambdas.array()).exp();
  std::ostringstream lab;
  lab.precision(6);
  lab << "synthetic-exp(alpha=" << alpha << ",beta=" << beta << ")";
  return SpectralSystem(std::move(lambdas), std::move(b_mod), std::move(q_obs), lab.str());
}

}  // namespace hyperlq
