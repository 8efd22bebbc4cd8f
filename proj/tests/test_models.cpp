#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "hyperlq/errors.hpp"
#include "hyperlq/models.hpp"

namespace hyperlq {
namespace {

constexpr double kPi = 3.14159265358979323846;

template <class F>
double Quad(F f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

TEST(IntervalWave, FullControlIsIdentity) {
  const SpectralSystem s = build_interval_wave(3, Region::Full(), Region::Full());
  EXPECT_EQ(s.B_mod(), Mat::Identity(3, 3));
  EXPECT_EQ(s.lambdas(), (Vec(3) << 1, 2, 3).finished());
  Mat q = Mat::Zero(3, 3);
  q.diagonal() << 1, 4, 9;
  EXPECT_EQ(s.Q_obs(), q);
}

TEST(IntervalWave, WholeSubintervalMatchesFull) {
  const SpectralSystem s = build_interval_wave(6, Region::Subinterval(0.0, kPi), Region::Subinterval(0.0, kPi));
  EXPECT_LE((s.control_gram() - Mat::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-12);
  Mat q = Mat::Zero(6, 6);
  q.diagonal() = s.lambdas().array().square();
  EXPECT_LE((s.Q_obs() - q).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(IntervalWave, SubintervalGramMatchesQuadrature) {
  const double a = 0.4, b = 1.9;
  const SpectralSystem s = build_interval_wave(12, Region::Subinterval(a, b), Region::Subinterval(a, b));
  for (int n = 1; n <= 12; ++n) {
    for (int m = 1; m <= 12; ++m) {
      const double ctrl = Quad([&](double x) { return (2.0 / kPi) * std::sin(n * x) * std::sin(m * x); }, a, b);
      EXPECT_NEAR(s.control_gram()(n - 1, m - 1), ctrl, 1e-10) << n << "," << m;
      const double obs =
          Quad([&](double x) { return (2.0 / kPi) * n * m * std::cos(n * x) * std::cos(m * x); }, a, b);
      EXPECT_NEAR(s.Q_obs()(n - 1, m - 1), obs, 1e-10) << n << "," << m;
    }
  }
}

TEST(IntervalWave, InvalidSubintervals) {
  EXPECT_THROW(build_interval_wave(4, Region::Subinterval(1.0, 0.5), Region::Full()), DomainError);
  EXPECT_THROW(build_interval_wave(4, Region::Subinterval(-0.1, 0.5), Region::Full()), DomainError);
  EXPECT_THROW(build_interval_wave(4, Region::Full(), Region::Subinterval(0.5, 4.0)), DomainError);
  EXPECT_THROW(build_interval_wave(0, Region::Full(), Region::Full()), DomainError);
}

TEST(Rectangle, FullStripIsIdentity) {
  const SpectralSystem s = build_rectangle(0.0, kPi, 8.0);
  EXPECT_LE((s.control_gram() - Mat::Identity(s.n_modes(), s.n_modes())).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Rectangle, ModesAreCompleteAndSorted) {
  const auto modes = rectangle_modes(10.0);
  int count = 0;
  for (int m = 1; m <= 10; ++m)
    for (int n = 1; n <= 10; ++n)
      if (m * m + n * n <= 100) ++count;
  EXPECT_EQ(static_cast<int>(modes.size()), count);
  for (size_t i = 1; i < modes.size(); ++i) EXPECT_LE(modes[i - 1].lambda, modes[i].lambda);
}

TEST(Rectangle, OverlapsMatchQuadrature) {
  const double a = 1.0, b = 2.0;
  const auto modes = rectangle_modes(12.0);
  const SpectralSystem s = build_rectangle(a, b, 12.0);
  for (size_t i = 0; i < modes.size(); ++i) {
    for (size_t j = 0; j < modes.size(); ++j) {
      double expect = 0.0;
      if (modes[i].n == modes[j].n) {
        expect = Quad([&](double x) { return (2.0 / kPi) * std::sin(modes[i].m * x) * std::sin(modes[j].m * x); },
                      a, b);
      }
      ASSERT_NEAR(s.control_gram()(i, j), expect, 1e-10) << i << "," << j;
    }
  }
  EXPECT_LE((s.Q_obs().diagonal() - s.lambdas().array().square().matrix()).norm(), 1e-12);
}

TEST(Rectangle, ClosedFormEntries) {
  const double a = 0.3, b = 2.2;
  for (int m = 1; m <= 9; ++m) {
    const double diag = (2.0 / kPi) * ((b - a) / 2.0 - (std::sin(2 * m * b) - std::sin(2 * m * a)) / (4.0 * m));
    EXPECT_NEAR(SineOverlap(m, m, a, b), diag, 1e-14);
    EXPECT_NEAR(SineOverlap(m, m, a, b),
                Quad([&](double x) { return (2.0 / kPi) * std::sin(m * x) * std::sin(m * x); }, a, b), 1e-12);
    for (int mp = 1; mp <= 9; ++mp) {
      if (mp == m) continue;
      auto f = [&](double x) {
        return std::sin((m - mp) * x) / (2.0 * (m - mp)) - std::sin((m + mp) * x) / (2.0 * (m + mp));
      };
      EXPECT_NEAR(SineOverlap(m, mp, a, b), (2.0 / kPi) * (f(b) - f(a)), 1e-14);
      EXPECT_NEAR(SineOverlap(m, mp, a, b),
                  Quad([&](double x) { return (2.0 / kPi) * std::sin(m * x) * std::sin(mp * x); }, a, b), 1e-12);
    }
  }
}

TEST(Rectangle, RejectsReversedStrip) {
  try {
    build_rectangle(2.0, 1.0, 5.0);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("a < b required"), std::string::npos);
  }
}

TEST(Synthetic, Definitions) {
  const SpectralSystem s = build_synthetic(1.0, 2.0, 5);
  for (int i = 0; i < 5; ++i) {
    const double lam = i + 1.0;
    EXPECT_NEAR(s.B_mod()(i, i), 1.0 / lam, 1e-15);
    EXPECT_NEAR(s.Q_obs()(i, i), lam * lam * std::pow(lam, -1.0), 1e-13);
  }
  const SpectralSystem exact = build_synthetic(kInfinity, kInfinity, 4);
  EXPECT_EQ(exact.B_mod(), Mat::Identity(4, 4));
  EXPECT_LE((exact.Q_obs().diagonal() - exact.lambdas().array().square().matrix()).norm(), 1e-14);
}

TEST(Synthetic, CustomSpectrumAndExponentialFamily) {
  const Vec spec = (Vec(3) << 0.5, 2.0, 2.0).finished();
  const SpectralSystem s = build_synthetic(2.0, 2.0, 3, spec);
  EXPECT_EQ(s.lambdas(), spec);
  EXPECT_THROW(build_synthetic(2.0, 2.0, 3, (Vec(3) << 2.0, 1.0, 3.0).finished()), DomainError);
  const SpectralSystem e = build_synthetic_exponential(0.1, 0.2, 4);
  EXPECT_NEAR(e.B_mod()(3, 3), std::exp(-0.4), 1e-15);
  EXPECT_NEAR(e.Q_obs()(3, 3), 16.0 * std::exp(-1.6), 1e-13);
}

TEST(SpectralSystem, Validation) {
  EXPECT_THROW(SpectralSystem(Vec::Ones(2), Mat::Zero(3, 1), Mat::Zero(2, 2), "x"), DimensionError);
  Mat q = Mat::Zero(2, 2);
  q(0, 1) = 1.0;
  EXPECT_THROW(SpectralSystem(Vec::Ones(2), Mat::Zero(2, 1), q, "x"), DomainError);
  EXPECT_THROW(SpectralSystem((Vec(2) << 1.0, 0.0).finished(), Mat::Zero(2, 1), Mat::Zero(2, 2), "x"),
               DomainError);
}

}  // namespace
}  // namespace hyperlq
