#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "hyperlq/errors.hpp"
#include "hyperlq/models.hpp"

namespace hyperlq {
namespace {

constexpr double kPi = 3.14159265358979323846;

template <class F>
double Quad(F f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

// Squared frequencies of the P1 (lumped mass) discretization of the star graph
// with `per_unit` elements per unit length on each edge.
Vec FiniteElementSquared(const std::vector<double>& lengths, int per_unit) {
  std::vector<int> cells;
  int dim = 1;  // center node
  for (double l : lengths) {
    cells.push_back(std::max(4, static_cast<int>(std::round(l * per_unit))));
    dim += cells.back() - 1;
  }
  Mat k = Mat::Zero(dim, dim);
  Vec m = Vec::Zero(dim);
  int offset = 1;
  for (size_t e = 0; e < lengths.size(); ++e) {
    const int c = cells[e];
    const double h = lengths[e] / c;
    // nodes: center, offset .. offset + c - 2, Dirichlet end dropped
    auto index = [&](int node) { return node == 0 ? 0 : offset + node - 1; };
    for (int cell = 0; cell < c; ++cell) {
      const int i = cell, j = cell + 1;
      const bool jin = j < c;
      k(index(i), index(i)) += 1.0 / h;
      m[index(i)] += 0.5 * h;
      if (jin) {
        k(index(j), index(j)) += 1.0 / h;
        k(index(i), index(j)) -= 1.0 / h;
        k(index(j), index(i)) -= 1.0 / h;
        m[index(j)] += 0.5 * h;
      }
    }
    offset += c - 1;
  }
  const Vec s = m.cwiseSqrt().cwiseInverse();
  Eigen::SelfAdjointEigenSolver<Mat> es(s.asDiagonal() * k * s.asDiagonal(), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

Vec RichardsonFrequencies(const std::vector<double>& lengths, int per_unit, int count) {
  const Vec coarse = FiniteElementSquared(lengths, per_unit);
  const Vec fine = FiniteElementSquared(lengths, 2 * per_unit);
  Vec out(count);
  for (int i = 0; i < count; ++i) out[i] = std::sqrt((4.0 * fine[i] - coarse[i]) / 3.0);
  return out;
}

TEST(StarSpectrum, TwoEqualEdgesMatchLongInterval) {
  const StarSpectrum s = star_spectrum({kPi, kPi}, 12.0);
  ASSERT_GE(s.lambdas.size(), 20);
  for (int n = 1; n <= 20; ++n) EXPECT_NEAR(s.lambdas[n - 1], 0.5 * n, 1e-8 * 0.5 * n);
  const SpectralSystem sys = build_star_network({kPi, kPi}, 0, 1, 12.0);
  EXPECT_EQ(sys.n_modes(), 24);
}

TEST(StarSpectrum, EqualEdgesHaveCenterVanishingModesAtIntegers) {
  const StarSpectrum s = star_spectrum({kPi, kPi}, 6.0);
  for (int k = 1; k <= 6; ++k) {
    bool found = false;
    for (Eigen::Index i = 0; i < s.lambdas.size(); ++i) {
      if (std::abs(s.lambdas[i] - k) < 1e-12) {
        found = true;
        // sin(k pi) = 0 on both edges, so Kirchhoff forces c1 = -c2
        EXPECT_NEAR(s.coefficients(i, 0), -s.coefficients(i, 1), 1e-9);
      }
    }
    EXPECT_TRUE(found) << k;
  }
}

TEST(StarSpectrum, MatchesFiniteElementOracle) {
  for (const std::vector<double>& lengths :
       {std::vector<double>{kPi, kPi}, std::vector<double>{1.0, 1.7, 2.3},
        std::vector<double>{1.0, 1.0, 2.0}, std::vector<double>{1.0, std::sqrt(2.0)}}) {
    const StarSpectrum s = star_spectrum(lengths, 10.0);
    const int count = std::min<int>(8, static_cast<int>(s.lambdas.size()));
    const Vec oracle = RichardsonFrequencies(lengths, 200, count);
    for (int i = 0; i < count; ++i) {
      EXPECT_NEAR(s.lambdas[i], oracle[i], 1e-6 * oracle[i]) << "edge set " << lengths.size() << " mode " << i;
    }
  }
}

TEST(StarSpectrum, EigenfunctionsSatisfyVertexConditionsAndNormalization) {
  const std::vector<double> lengths{1.0, 1.0, 2.0};
  const StarSpectrum s = star_spectrum(lengths, 15.0);
  for (Eigen::Index i = 0; i < s.lambdas.size(); ++i) {
    const double lam = s.lambdas[i];
    double kirchhoff = 0.0, mass = 0.0;
    std::vector<double> center;
    for (size_t j = 0; j < lengths.size(); ++j) {
      const double c = s.coefficients(i, j);
      kirchhoff += c * std::cos(lam * lengths[j]);
      center.push_back(c * std::sin(lam * lengths[j]));
      mass += Quad([&](double x) { return std::pow(c * std::sin(lam * (lengths[j] - x)), 2); }, 0.0, lengths[j]);
    }
    EXPECT_NEAR(kirchhoff, 0.0, 1e-9) << i;
    for (double v : center) EXPECT_NEAR(v, center.front(), 1e-9) << i;
    EXPECT_NEAR(mass, 1.0, 1e-10) << i;
  }
  // Modes on the two unit edges with zero center value repeat at k pi.
  int at_pi = 0;
  for (Eigen::Index i = 0; i < s.lambdas.size(); ++i)
    if (std::abs(s.lambdas[i] - kPi) < 1e-9) ++at_pi;
  EXPECT_EQ(at_pi, 3 - 1);  // three edges vanish at pi (2 pi on the long edge) => multiplicity 2
}

TEST(StarNetwork, ControlAndObservationMatchQuadrature) {
  const std::vector<double> lengths{1.0, 1.7};
  const SpectralSystem sys = build_star_network(lengths, 0, 1, 12.0, 20);
  const StarSpectrum s = star_spectrum(lengths, 12.0);
  const double l1 = lengths[0], l2 = lengths[1];
  for (Eigen::Index i = 0; i < s.lambdas.size(); i += 2) {
    const double lam = s.lambdas[i];
    const double c1 = s.coefficients(i, 0);
    for (int k = 1; k <= 20; k += 3) {
      const double q = Quad(
          [&](double x) { return c1 * std::sin(lam * (l1 - x)) * std::sqrt(2.0 / l1) * std::sin(k * kPi * x / l1); },
          0.0, l1);
      EXPECT_NEAR(sys.B_mod()(i, k - 1), q, 1e-10);
    }
    for (Eigen::Index j = 0; j < s.lambdas.size(); j += 3) {
      const double mu = s.lambdas[j];
      const double q = Quad(
          [&](double x) {
            return lam * s.coefficients(i, 1) * std::cos(lam * (l2 - x)) * mu * s.coefficients(j, 1) *
                   std::cos(mu * (l2 - x));
          },
          0.0, l2);
      EXPECT_NEAR(sys.Q_obs()(i, j), q, 1e-9 * std::max(1.0, lam * mu));
    }
  }
}

TEST(StarNetwork, ControlGainsConvergeToEdgeMass) {
  const std::vector<double> lengths{1.0, 1.7};
  const SpectralSystem sys = build_star_network(lengths, 0, 1, 10.0, 400);
  const StarSpectrum s = star_spectrum(lengths, 10.0);
  for (Eigen::Index i = 0; i < s.lambdas.size(); ++i) {
    const double lam = s.lambdas[i];
    const double c = s.coefficients(i, 0);
    const double mass = c * c * (0.5 - std::sin(2.0 * lam) / (4.0 * lam));
    EXPECT_NEAR(sys.control_gram()(i, i), mass, 2e-3 * std::max(mass, 1e-3));
  }
}

double EdgeMassOnFirst(const StarSpectrum& s, double length, Eigen::Index i) {
  const double lam = s.lambdas[i];
  const double c = s.coefficients(i, 0);
  return c * c * (0.5 * length - std::sin(2.0 * lam * length) / (4.0 * lam));
}

TEST(StarNetwork, TwoEdgeGainsStayBoundedBelow) {
  const StarSpectrum s = star_spectrum({1.0, 2.0}, 400.0);
  double low = 1e300;
  for (Eigen::Index i = 0; i < s.lambdas.size(); ++i) low = std::min(low, EdgeMassOnFirst(s, 1.0, i));
  EXPECT_GT(low, 0.15);
}

TEST(StarNetwork, ThreeEdgeGainsArePositiveButSmallAlongASubsequence) {
  // the uncontrolled pair sqrt(2), sqrt(3) nearly share poles infinitely often
  const StarSpectrum s = star_spectrum({1.0, std::sqrt(2.0), std::sqrt(3.0)}, 400.0);
  const Eigen::Index n = s.lambdas.size();
  double low_band = 1e300, all = 1e300;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double g = EdgeMassOnFirst(s, 1.0, i);
    EXPECT_GT(g, 0.0) << i;
    all = std::min(all, g);
    if (s.lambdas[i] < 20.0) low_band = std::min(low_band, g);
  }
  EXPECT_LT(all, 1e-3);
  EXPECT_LT(all, low_band);
}

TEST(StarNetwork, Errors) {
  EXPECT_THROW(star_spectrum({1.0}, 5.0), DomainError);
  EXPECT_THROW(star_spectrum({1.0, -2.0}, 5.0), DomainError);
  EXPECT_THROW(build_star_network({1.0, 2.0}, 2, 0, 5.0), DomainError);
}

}  // namespace
}  // namespace hyperlq
