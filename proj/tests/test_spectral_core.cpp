#include <cmath>

#include <gtest/gtest.h>

#include "hyperlq/errors.hpp"
#include "hyperlq/random.hpp"
#include "hyperlq/spectral_core.hpp"

namespace hyperlq {
namespace {

Vec One(double x) { return Vec::Constant(1, x); }

TEST(NormSquared, HandEvaluatedGraded) {
  const ModalVector v(One(1.0), One(0.0));
  EXPECT_DOUBLE_EQ(norm_squared(v, One(2.0), NormScale::Graded(1.0)), 16.0);
}

TEST(NormSquared, HandEvaluatedDual) {
  const ModalVector v(One(1.0), One(0.0));
  EXPECT_DOUBLE_EQ(norm_squared(v, One(2.0), NormScale::GradedDual(0.0)), 1.0);
}

TEST(NormSquared, ZeroVectorIsZeroForEveryScale) {
  const Vec lam = Vec::LinSpaced(4, 1.0, 4.0);
  const ModalVector z = ModalVector::Zero(4);
  for (const NormScale& s : {NormScale::Graded(2.5), NormScale::GradedDual(1.0),
                             NormScale::ExpWeight(0.3), NormScale::SobolevState(-1.0)}) {
    EXPECT_EQ(norm_squared(z, lam, s), 0.0);
  }
}

TEST(NormSquared, SobolevStateIgnoresVelocity) {
  const ModalVector v(One(2.0), One(7.0));
  EXPECT_DOUBLE_EQ(norm_squared(v, One(3.0), NormScale::SobolevState(0.5)), 9.0 * 4.0);
}

TEST(NormSquared, ExpWeight) {
  const ModalVector v(One(1.0), One(1.0));
  EXPECT_NEAR(norm_squared(v, One(2.0), NormScale::ExpWeight(0.5)), std::exp(-2.0) * 5.0, 1e-15);
}

TEST(NormSquared, Errors) {
  const ModalVector v(Vec::Ones(2), Vec::Ones(2));
  EXPECT_THROW(norm_squared(v, One(1.0), NormScale::Energy()), DimensionError);
  Vec bad(2);
  bad << 1.0, -1.0;
  EXPECT_THROW(norm_squared(v, bad, NormScale::Energy()), DomainError);
  Vec unsorted(2);
  unsorted << 2.0, 1.0;
  EXPECT_THROW(norm_squared(v, unsorted, NormScale::Energy()), DomainError);
  EXPECT_THROW(ModalVector(Vec::Ones(2), Vec::Ones(3)), DimensionError);
}

TEST(FractionalPower, Examples) {
  const Vec lam = One(3.0);
  const ModalVector v(One(1.0), One(2.0));
  const ModalVector id = apply_fractional_power(v, lam, 0.0);
  EXPECT_EQ(id.a[0], 1.0);
  EXPECT_EQ(id.b[0], 2.0);
  EXPECT_NEAR(apply_fractional_power(v, lam, 0.5).a[0], 3.0, 1e-15);
  EXPECT_NEAR(apply_fractional_power(ModalVector(One(9.0), One(0.0)), lam, -1.0).a[0], 1.0, 1e-15);
  EXPECT_THROW(apply_fractional_power(v, One(0.0), -1.0), DomainError);
}

TEST(EnergyCoordinates, Definition) {
  const EnergyState x = to_energy(ModalVector(One(1.0), One(0.0)), One(2.0));
  EXPECT_EQ(x.xi[0], 2.0);
  EXPECT_EQ(x.zeta[0], 0.0);
  const EnergyState z = to_energy(ModalVector::Zero(3), Vec::LinSpaced(3, 1, 3));
  EXPECT_EQ(z.energy(), 0.0);
}

TEST(EnergyCoordinates, RoundTripAndParseval) {
  CounterRng rng(7, 0);
  const Vec lam = (Vec(5) << 0.5, 1.0, 2.0, 2.0, 9.5).finished();
  for (int trial = 0; trial < 50; ++trial) {
    Vec a(5), b(5);
    for (int i = 0; i < 5; ++i) {
      a[i] = rng.normal();
      b[i] = rng.normal();
    }
    const ModalVector v(a, b);
    const ModalVector back = from_energy(to_energy(v, lam), lam);
    EXPECT_LE((back.a - a).norm(), 1e-14 * a.norm());
    EXPECT_LE((back.b - b).norm(), 1e-14 * b.norm());
    const double e = to_energy(v, lam).energy();
    EXPECT_NEAR(e, norm_squared(v, lam, NormScale::Graded(0.0)), 1e-13 * e);
    const EnergyState x = to_energy(v, lam);
    EXPECT_NEAR(norm_squared(x, lam, NormScale::Graded(1.3)), norm_squared(v, lam, NormScale::Graded(1.3)),
                1e-12 * norm_squared(v, lam, NormScale::Graded(1.3)));
    EXPECT_NEAR(norm_squared(x, lam, NormScale::SobolevState(0.7)),
                norm_squared(v, lam, NormScale::SobolevState(0.7)),
                1e-12 * norm_squared(v, lam, NormScale::SobolevState(0.7)));
  }
}

TEST(NormScaleProperties, MonotoneInSmoothness) {
  CounterRng rng(11, 0);
  const Vec lam = Vec::LinSpaced(8, 1.0, 8.0);
  for (int trial = 0; trial < 100; ++trial) {
    Vec a(8), b(8);
    for (int i = 0; i < 8; ++i) {
      a[i] = rng.normal();
      b[i] = rng.normal();
    }
    const ModalVector v(a, b);
    const double s1 = -2.0 + 4.0 * rng.uniform();
    const double s2 = s1 + 2.0 * rng.uniform();
    EXPECT_LE(norm_squared(v, lam, NormScale::Graded(s1)), norm_squared(v, lam, NormScale::Graded(s2)));
  }
}

TEST(NormScaleProperties, DualityConsistency) {
  CounterRng rng(13, 0);
  const Vec lam = (Vec(6) << 0.3, 1.0, 1.7, 4.0, 4.0, 11.0).finished();
  for (int trial = 0; trial < 100; ++trial) {
    Vec a(6), b(6);
    for (int i = 0; i < 6; ++i) {
      a[i] = rng.normal();
      b[i] = rng.normal();
    }
    const ModalVector v(a, b);
    const double s = -1.0 + 3.0 * rng.uniform();
    const double d = norm_squared(v, lam, NormScale::GradedDual(s));
    EXPECT_NEAR(d, norm_squared(v, lam, NormScale::Graded(-(s + 1.0))), 1e-14 * d);
  }
}

TEST(InterpolationGap, SingleModeIsTight) {
  const ModalVector v(One(0.7), One(-1.3));
  const double gap = interpolation_gap(v, One(3.7), 1.5, 0.8, 2.0);
  const double lhs = norm_squared(v, One(3.7), NormScale::Graded(1.0 / 1.5));
  EXPECT_NEAR(gap, 0.0, 1e-12 * lhs);
}

TEST(InterpolationGap, TwoModeExample) {
  const ModalVector v(Vec::Ones(2), Vec::Zero(2));
  const Vec lam = (Vec(2) << 1.0, 2.0).finished();
  // weak = 1 + 1, lhs = 1 + 16, strong = 1 + 64, exponents 1/3 and 2/3.
  const double expect = std::cbrt(2.0) * std::cbrt(65.0 * 65.0) - 17.0;
  const double gap = interpolation_gap(v, lam, 1.0, 1.0, 1.0);
  EXPECT_NEAR(gap, expect, 1e-12);
  EXPECT_GE(gap, 0.0);
}

TEST(InterpolationGap, HomogeneousOfDegreeTwo) {
  const ModalVector v((Vec(3) << 1.0, -0.5, 0.25).finished(), (Vec(3) << 0.2, 0.0, 1.0).finished());
  const Vec lam = Vec::LinSpaced(3, 1.0, 5.0);
  const double g1 = interpolation_gap(v, lam, 2.0, 1.5, 0.7);
  const ModalVector w(3.0 * v.a, 3.0 * v.b);
  const double g3 = interpolation_gap(w, lam, 2.0, 1.5, 0.7);
  EXPECT_NEAR(g3, 9.0 * g1, 1e-12 * std::abs(9.0 * g1));
  EXPECT_GT(g1 * g3, 0.0);
}

TEST(InterpolationGap, NonnegativeOnRandomVectors) {
  CounterRng rng(17, 0);
  const Vec lam = Vec::LinSpaced(10, 1.0, 10.0);
  for (int trial = 0; trial < 1000; ++trial) {
    Vec a(10), b(10);
    for (int i = 0; i < 10; ++i) {
      a[i] = rng.normal();
      b[i] = rng.normal();
    }
    const double rho = 0.2 + 4.8 * rng.uniform();
    const double eta = 0.2 + 4.8 * rng.uniform();
    const double s = 0.2 + 4.8 * rng.uniform();
    EXPECT_GE(interpolation_gap(ModalVector(a, b), lam, rho, eta, s), -1e-10);
  }
}

TEST(InterpolationGap, ZeroVectorIsDomainError) {
  EXPECT_THROW(interpolation_gap(ModalVector::Zero(2), Vec::Ones(2), 1, 1, 1), DomainError);
}

}  // namespace
}  // namespace hyperlq
