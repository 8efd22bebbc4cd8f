#include <algorithm>
#include <cmath>
#include <numeric>

#include "hyperlq/errors.hpp"
#include "hyperlq/models.hpp"
#include "linalg.hpp"

namespace hyperlq {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Pole {
  double lambda;
  std::vector<int> edges;  // edges with sin(lambda l_j) = 0
};

// Distinct values k pi / l_j below lambda_max, merged across edges.
std::vector<Pole> MergedPoles(const std::vector<double>& lengths, double lambda_max) {
  std::vector<std::pair<double, int>> raw;
  for (int j = 0; j < static_cast<int>(lengths.size()); ++j) {
    for (int k = 1;; ++k) {
      const double p = k * kPi / lengths[j];
      if (p > lambda_max + kPi / lengths[j]) break;
      raw.emplace_back(p, j);
    }
  }
  std::sort(raw.begin(), raw.end());
  std::vector<Pole> poles;
  for (const auto& [p, j] : raw) {
    if (!poles.empty() && std::abs(p - poles.back().lambda) <= 1e-12 * p) {
      poles.back().edges.push_back(j);
    } else {
      poles.push_back({p, {j}});
    }
  }
  return poles;
}

double Secular(const std::vector<double>& lengths, double lambda) {
  double f = 0.0;
  for (double l : lengths) f += 1.0 / std::tan(lambda * l);
  return f;
}

// The secular function decreases from +inf to -inf between consecutive poles.
double BisectRoot(const std::vector<double>& lengths, double lo, double hi) {
  for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (Secular(lengths, mid) > 0.0) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double EdgeMass(double c, double lambda, double l) {
  return c * c * (0.5 * l - std::sin(2.0 * lambda * l) / (4.0 * lambda));
}

}  // namespace

StarSpectrum star_spectrum(const std::vector<double>& lengths, double lambda_max) {
  const int n_edges = static_cast<int>(lengths.size());
  if (n_edges < 2) throw DomainError("star network needs at least two edges");
  for (double l : lengths)
    if (!(l > 0.0) || !std::isfinite(l)) throw DomainError("edge lengths must be positive");
  if (!(lambda_max > 0.0)) throw DomainError("lambda_max must be positive");

  const auto poles = MergedPoles(lengths, lambda_max);
  std::vector<double> lam;
  std::vector<Eigen::RowVectorXd> coef;

  auto add_center_mode = [&](double lambda) {
    Eigen::RowVectorXd c(n_edges);
    double mass = 0.0;
    for (int j = 0; j < n_edges; ++j) {
      c[j] = 1.0 / std::sin(lambda * lengths[j]);
      mass += EdgeMass(c[j], lambda, lengths[j]);
    }
    lam.push_back(lambda);
    coef.push_back(c / std::sqrt(mass));
  };

  double left = 0.0;
  for (const Pole& pole : poles) {
    const double root = BisectRoot(lengths, left, pole.lambda);
    if (left < root && root <= lambda_max) add_center_mode(root);
    if (pole.edges.size() >= 2 && pole.lambda <= lambda_max) {
      // Center value zero: coefficients live on the vanishing edges and their
      // Kirchhoff sum of cos(lambda l_j) c_j vanishes.
      const int k = static_cast<int>(pole.edges.size());
      Vec w(k);
      Vec scale(k);
      for (int i = 0; i < k; ++i) {
        const double l = lengths[pole.edges[i]];
        scale[i] = std::sqrt(0.5 * l);
        w[i] = std::cos(pole.lambda * l) / scale[i];
      }
      Eigen::HouseholderQR<Mat> qr(w);
      const Mat q = qr.householderQ() * Mat::Identity(k, k);
      for (int col = 1; col < k; ++col) {
        Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(n_edges);
        for (int i = 0; i < k; ++i) c[pole.edges[i]] = q(i, col) / scale[i];
        lam.push_back(pole.lambda);
        coef.push_back(c);
      }
    }
    left = pole.lambda;
    if (left > lambda_max) break;
  }

  const double total = std::accumulate(lengths.begin(), lengths.end(), 0.0);
  const double weyl = lambda_max * total / kPi;
  const double slack = std::max(2.0, static_cast<double>(n_edges));
  if (std::abs(static_cast<double>(lam.size()) - weyl) > slack) {
    throw ConsistencyError("star network eigenvalue count " + std::to_string(lam.size()) +
                           " departs from the Weyl estimate " + std::to_string(weyl));
  }
  if (lam.empty()) throw ConsistencyError("no star network eigenvalue below lambda_max");

  StarSpectrum out;
  out.lambdas.resize(static_cast<Eigen::Index>(lam.size()));
  out.coefficients.resize(static_cast<Eigen::Index>(lam.size()), n_edges);
  for (size_t i = 0; i < lam.size(); ++i) {
    out.lambdas[static_cast<Eigen::Index>(i)] = lam[i];
    Eigen::RowVectorXd c = coef[i];
    for (int j = 0; j < n_edges; ++j) {
      if (std::abs(c[j]) > 1e-14) {
        if (c[j] < 0.0) c = -c;
        break;
      }
    }
    out.coefficients.row(static_cast<Eigen::Index>(i)) = c;
  }
  return out;
}

SpectralSystem build_star_network(const std::vector<double>& lengths, int controlled_edge,
                                  int observed_edge, double lambda_max, int n_control_basis) {
  const int n_edges = static_cast<int>(lengths.size());
  if (controlled_edge < 0 || controlled_edge >= n_edges || observed_edge < 0 ||
      observed_edge >= n_edges) {
    throw DomainError("edge index out of range");
  }
  const StarSpectrum spec = star_spectrum(lengths, lambda_max);
  const Eigen::Index n = spec.lambdas.size();

  const double lc = lengths[controlled_edge];
  int k_basis = n_control_basis;
  if (k_basis <= 0) k_basis = static_cast<int>(std::ceil(2.0 * lambda_max * lc / kPi)) + 16;
  Mat b_mod(n, k_basis);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lambda = spec.lambdas[i];
    const double c = spec.coefficients(i, controlled_edge);
    for (int k = 1; k <= k_basis; ++k) {
      const double mu = k * kPi / lc;
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      // int_0^l sin(lambda (l - x)) sin(mu x) dx, written via sinc to stay
      // accurate when lambda is close to mu.
      const double overlap = -sign * mu * lc * detail::Sinc((lambda - mu) * lc) / (lambda + mu);
      b_mod(i, k - 1) = c * std::sqrt(2.0 / lc) * overlap;
    }
  }

  const double lo = lengths[observed_edge];
  Mat q_obs(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double li = spec.lambdas[i];
      const double lj = spec.lambdas[j];
      const double cc = 0.5 * lo * (detail::Sinc((li - lj) * lo) + detail::Sinc((li + lj) * lo));
      q_obs(i, j) = q_obs(j, i) =
          li * lj * spec.coefficients(i, observed_edge) * spec.coefficients(j, observed_edge) * cc;
    }
  }
  std::string label = "star(";
  for (int j = 0; j < n_edges; ++j) label += (j ? "," : "") + std::to_string(lengths[j]);
  label += ")";
  return SpectralSystem(spec.lambdas, std::move(b_mod), std::move(q_obs), label);
}

}  // namespace hyperlq
