#include <cmath>
#include <numeric>

#include "hyperlq/errors.hpp"
#include "hyperlq/models.hpp"
#include "linalg.hpp"

namespace hyperlq {

namespace {

// int_0^T cos(w t) dt
double CosIntegral(double w, double t) { return t * detail::Sinc(w * t); }
// int_0^T sin(w t) dt
double SinIntegral(double w, double t) {
  const double h = 0.5 * w * t;
  return t * std::sin(h) * detail::Sinc(h);
}

Mat ObservedForm(const SpectralSystem& system, bool use_control) {
  if (use_control) return system.control_gram();
  const Vec inv = system.lambdas().cwiseInverse();
  return inv.asDiagonal() * system.Q_obs() * inv.asDiagonal();
}

Mat GramianOnModes(const Vec& lambdas, const Mat& m, double horizon, bool use_control,
                   const std::vector<int>& modes) {
  const int k = static_cast<int>(modes.size());
  Mat w = Mat::Zero(2 * k, 2 * k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      const double mij = m(modes[a], modes[b]);
      if (mij == 0.0) continue;
      const double p = lambdas[modes[a]];
      const double q = lambdas[modes[b]];
      const double cc = 0.5 * (CosIntegral(p - q, horizon) + CosIntegral(p + q, horizon));
      const double ss = 0.5 * (CosIntegral(p - q, horizon) - CosIntegral(p + q, horizon));
      const double sc = 0.5 * (SinIntegral(p + q, horizon) + SinIntegral(p - q, horizon));
      const double cs = 0.5 * (SinIntegral(q + p, horizon) + SinIntegral(q - p, horizon));
      if (use_control) {
        // observed signal is zeta(t) = -s xi0 + c zeta0
        w(a, b) = mij * ss;
        w(a, k + b) = -mij * sc;
        w(k + a, b) = -mij * cs;
        w(k + a, k + b) = mij * cc;
      } else {
        // observed signal is xi(t) = c xi0 + s zeta0
        w(a, b) = mij * cc;
        w(a, k + b) = mij * cs;
        w(k + a, b) = mij * sc;
        w(k + a, k + b) = mij * ss;
      }
    }
  }
  return detail::Symmetrize(w);
}

int Find(std::vector<int>& parent, int i) {
  while (parent[i] != i) i = parent[i] = parent[parent[i]];
  return i;
}

}  // namespace

Mat observability_gramian(const SpectralSystem& system, double horizon, bool use_control,
                          const std::vector<int>& modes) {
  if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
  for (int i : modes)
    if (i < 0 || i >= system.n_modes()) throw DimensionError("mode index out of range");
  return GramianOnModes(system.lambdas(), ObservedForm(system, use_control), horizon, use_control,
                        modes);
}

Mat observability_gramian(const SpectralSystem& system, double horizon, bool use_control) {
  std::vector<int> all(system.n_modes());
  std::iota(all.begin(), all.end(), 0);
  return observability_gramian(system, horizon, use_control, all);
}

ObservabilityReport fit_weak_observability(const SpectralSystem& system, double horizon,
                                           const std::vector<double>& shells, bool use_control) {
  if (shells.size() < 3) throw DomainError("fit_weak_observability needs at least 3 shells");
  if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
  const Mat m = ObservedForm(system, use_control);
  const Vec& lam = system.lambdas();
  ObservabilityReport report;
  report.horizon = horizon;
  report.use_control = use_control;

  for (double edge : shells) {
    std::vector<int> shell;
    for (int i = 0; i < system.n_modes(); ++i)
      if (lam[i] >= edge && lam[i] < 2.0 * edge) shell.push_back(i);
    if (shell.empty()) {
      report.warnings.push_back("shell [" + std::to_string(edge) + ", " +
                                std::to_string(2.0 * edge) + ") is empty; skipped");
      continue;
    }
    // Modes that the observed form does not couple give independent blocks.
    const int k = static_cast<int>(shell.size());
    std::vector<int> parent(k);
    std::iota(parent.begin(), parent.end(), 0);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < a; ++b)
        if (m(shell[a], shell[b]) != 0.0) parent[Find(parent, a)] = Find(parent, b);
    std::vector<std::vector<int>> groups(k);
    for (int a = 0; a < k; ++a) groups[Find(parent, a)].push_back(shell[a]);
    double min_eig = std::numeric_limits<double>::infinity();
    for (const auto& g : groups) {
      if (g.empty()) continue;
      const Mat w = GramianOnModes(lam, m, horizon, use_control, g);
      Eigen::SelfAdjointEigenSolver<Mat> es(w, Eigen::EigenvaluesOnly);
      min_eig = std::min(min_eig, es.eigenvalues()[0]);
    }
    const double constant = std::max(0.0, min_eig) / horizon;
    if (!(constant > 0.0)) {
      report.warnings.push_back("shell at " + std::to_string(edge) +
                                " has a numerically zero constant; excluded from the fit");
      continue;
    }
    report.shell_edges.push_back(edge);
    report.shell_constants.push_back(constant);
    report.shell_sizes.push_back(k);
  }

  const int p = static_cast<int>(report.shell_edges.size());
  if (p < 2) throw NumericError("fewer than two usable shells for the observability fit");
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < p; ++i) {
    mx += std::log(report.shell_edges[i]);
    my += std::log(report.shell_constants[i]);
  }
  mx /= p;
  my /= p;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < p; ++i) {
    const double dx = std::log(report.shell_edges[i]) - mx;
    const double dy = std::log(report.shell_constants[i]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  report.slope = sxy / sxx;
  report.fitted_exponent = -report.slope;
  report.fit_r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  report.rho_hat = std::abs(report.slope) < 0.05 ? kInfinity : 2.0 / std::abs(report.slope);
  return report;
}

}  // namespace hyperlq
