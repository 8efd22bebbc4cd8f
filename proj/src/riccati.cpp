#include "hyperlq/riccati.hpp"

#include <algorithm>
#include <cmath>

#include "hyperlq/errors.hpp"
#include "hyperlq/random.hpp"
#include "linalg.hpp"
#include "riccati_flow.hpp"

namespace hyperlq {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

namespace detail {

FlowTriple HamiltonianTriple(const FirstOrderMatrices& fo, double step) {
  const Eigen::Index n = fo.A.rows();
  Mat ham(2 * n, 2 * n);
  ham << -fo.A, fo.G, fo.Q, fo.A.transpose();
  const Mat phi = Expm(ham * step);
  Eigen::PartialPivLU<Mat> p11(phi.topLeftCorner(n, n));
  FlowTriple t;
  t.a = p11.inverse();
  t.g = Symmetrize(t.a * phi.topRightCorner(n, n));
  t.h = Symmetrize(phi.bottomLeftCorner(n, n) * t.a);
  return t;
}

Mat ApplyTriple(const FlowTriple& t, const Mat& e) {
  const Eigen::Index n = e.rows();
  const Mat inner = (Mat::Identity(n, n) + t.g * e).partialPivLu().solve(t.a);
  return Symmetrize(t.h + t.a.transpose() * e * inner);
}

FlowTriple Compose(const FlowTriple& first, const FlowTriple& second) {
  const Eigen::Index n = first.a.rows();
  const Mat id = Mat::Identity(n, n);
  const Eigen::PartialPivLU<Mat> w(id + second.g * first.h);
  FlowTriple c;
  c.a = first.a * w.solve(second.a);
  c.g = Symmetrize(first.g + first.a * w.solve(second.g) * first.a.transpose());
  c.h = Symmetrize(second.h +
                   second.a.transpose() * first.h * w.solve(second.a));
  return c;
}

FlowTriple Power(const FlowTriple& t, long k) {
  FlowTriple result = t;
  FlowTriple base = t;
  long rest = k - 1;
  while (rest > 0) {
    if (rest & 1L) result = Compose(result, base);
    rest >>= 1;
    if (rest > 0) base = Compose(base, base);
  }
  return result;
}

}  // namespace detail

namespace {

using detail::FlowTriple;
using detail::HamiltonianTriple;
using detail::ApplyTriple;

FlowTriple Double(const FlowTriple& t) { return detail::Compose(t, t); }

Mat RiccatiField(const FirstOrderMatrices& fo, const Mat& e) {
  return fo.Q + e * fo.A + fo.A.transpose() * e - e * fo.G * e;
}

std::vector<RiccatiSolution> IntegrateHamiltonian(const FirstOrderMatrices& fo,
                                                  const std::vector<double>& times) {
  const Eigen::Index n = fo.A.rows();
  std::vector<RiccatiSolution> out;
  Mat e = Mat::Zero(n, n);
  double t_prev = 0.0;
  double cached_step = -1.0;
  FlowTriple triple;
  for (double t : times) {
    const double gap = t - t_prev;
    if (gap > 0.0) {
      const int steps = std::max(1, static_cast<int>(std::ceil(gap - 1e-12)));
      const double h = gap / steps;
      if (h != cached_step) {
        triple = HamiltonianTriple(fo, h);
        cached_step = h;
      }
      if (steps <= 8) {
        for (int k = 0; k < steps; ++k) e = ApplyTriple(triple, e);
      } else {
        e = ApplyTriple(detail::Power(triple, steps), e);
      }
      if (!e.allFinite()) throw IntegrationError("Riccati flow produced non-finite values", out);
    }
    out.push_back({e, t, 0.0, "dre-hamiltonian"});
    t_prev = t;
  }
  return out;
}

std::vector<RiccatiSolution> IntegrateDormandPrince(const FirstOrderMatrices& fo,
                                                    const std::vector<double>& times,
                                                    double max_step) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  (void)c2; (void)c3; (void)c4; (void)c5;  // autonomous field
  const double rtol = 1e-11, atol = 1e-13;

  const Eigen::Index n = fo.A.rows();
  std::vector<RiccatiSolution> out;
  Mat e = Mat::Zero(n, n);
  double t = 0.0;
  double h = std::min(max_step, 1e-3);
  Mat k1 = RiccatiField(fo, e);
  for (double target : times) {
    while (t < target - 1e-14) {
      const bool clip = t + h >= target;
      const double step = clip ? target - t : h;
      const Mat k2 = RiccatiField(fo, e + step * (a21 * k1));
      const Mat k3 = RiccatiField(fo, e + step * (a31 * k1 + a32 * k2));
      const Mat k4 = RiccatiField(fo, e + step * (a41 * k1 + a42 * k2 + a43 * k3));
      const Mat k5 = RiccatiField(fo, e + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const Mat k6 =
          RiccatiField(fo, e + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      const Mat y = e + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const Mat k7 = RiccatiField(fo, y);
      const Mat err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const double scale = atol + rtol * std::max(e.cwiseAbs().maxCoeff(), y.cwiseAbs().maxCoeff());
      const double ratio = err.cwiseAbs().maxCoeff() / scale;
      if (ratio <= 1.0) {
        t = clip ? target : t + step;
        e = detail::Symmetrize(y);
        k1 = RiccatiField(fo, e);
      }
      const double factor = ratio == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(ratio, -0.2), 0.2, 5.0);
      if (!clip || ratio > 1.0) h = std::min(max_step, step * factor);
      if (h < 1e-13 * std::max(1.0, t)) {
        throw IntegrationError("Riccati step size underflow at tau = " + std::to_string(t), out);
      }
      if (!e.allFinite()) throw IntegrationError("Riccati integration diverged", out);
    }
    out.push_back({e, target, 0.0, "dre-dormand-prince"});
  }
  return out;
}

double MaxRealEigenvalue(const Mat& f) {
  Eigen::EigenSolver<Mat> es(f, false);
  return es.eigenvalues().real().maxCoeff();
}

void CheckStabilizable(const SpectralSystem& system) {
  const Vec& lam = system.lambdas();
  const Mat& gram = system.control_gram();
  const Vec inv = lam.cwiseInverse();
  const Mat q_xi = inv.asDiagonal() * system.Q_obs() * inv.asDiagonal();
  const double gtol = 1e-14 * std::max(1.0, gram.cwiseAbs().maxCoeff());
  const double qtol = 1e-12 * std::max(1.0, q_xi.cwiseAbs().maxCoeff());
  int start = 0;
  const int n = system.n_modes();
  while (start < n) {
    int stop = start + 1;
    while (stop < n && lam[stop] - lam[start] <= 1e-12 * lam[start]) ++stop;
    const int k = stop - start;
    Eigen::SelfAdjointEigenSolver<Mat> es(gram.block(start, start, k, k));
    std::vector<int> null_cols;
    for (int i = 0; i < k; ++i)
      if (es.eigenvalues()[i] <= gtol) null_cols.push_back(i);
    if (!null_cols.empty()) {
      Mat basis(k, static_cast<Eigen::Index>(null_cols.size()));
      for (size_t c = 0; c < null_cols.size(); ++c) basis.col(c) = es.eigenvectors().col(null_cols[c]);
      const Mat cost = basis.transpose() * q_xi.block(start, start, k, k) * basis;
      Eigen::SelfAdjointEigenSolver<Mat> cs(cost, Eigen::EigenvaluesOnly);
      if (cs.eigenvalues().maxCoeff() > qtol) {
        throw StabilizabilityError("mode at frequency " + std::to_string(lam[start]) +
                                   " is uncontrolled but has positive cost");
      }
    }
    start = stop;
  }
}

RiccatiSolution DreLimit(const FirstOrderMatrices& fo) {
  // Doubling of the exact flow: tau = 2^k h0.
  const double h0 = 1.0;
  FlowTriple t = HamiltonianTriple(fo, h0);
  double tau = h0;
  Mat prev = t.h;
  for (int k = 0; k < 80; ++k) {
    t = Double(t);
    tau *= 2.0;
    const Mat& e = t.h;
    if (!e.allFinite()) throw NumericError("Riccati doubling produced non-finite values");
    const double change = (e - prev).norm();
    if (change <= 1e-8 * std::max(1.0, e.norm())) {
      RiccatiSolution s{e, kInfinity, are_residual(fo, e), "dre_limit"};
      s.E = detail::Symmetrize(s.E);
      return s;
    }
    prev = e;
  }
  throw NumericError("Riccati doubling did not settle; the value function may be unbounded");
}

RiccatiSolution NewtonKleinman(const SpectralSystem& system, const FirstOrderMatrices& fo) {
  // Stabilizing start: the finite-horizon Riccati matrix at tau = 10/lambda_min,
  // extended by doubling until the feedback is Hurwitz.
  const double tau0 = 10.0 / system.lambda_min();
  const long steps = std::max(1L, static_cast<long>(std::ceil(tau0)));
  FlowTriple t = detail::Power(HamiltonianTriple(fo, tau0 / steps), steps);
  Mat e = t.h;
  int grow = 0;
  while (MaxRealEigenvalue(fo.A - fo.G * e) >= 0.0) {
    if (++grow > 30) {
      throw MethodError("Newton-Kleinman found no stabilizing start; use dre_limit");
    }
    t = Double(t);
    e = t.h;
  }
  double res = are_residual(fo, e);
  const double res0 = res;
  for (int it = 0; it < 60; ++it) {
    const Mat f = fo.A - fo.G * e;
    Mat next;
    try {
      next = detail::SolveLyapunov(f, fo.Q + e * fo.G * e);
    } catch (const NumericError&) {
      throw MethodError("Newton-Kleinman iterate lost stability; use dre_limit");
    }
    if (!next.allFinite()) throw MethodError("Newton-Kleinman diverged; use dre_limit");
    const double change = (next - e).norm();
    e = next;
    res = are_residual(fo, e);
    if (res > 1e6 * std::max(1.0, res0)) throw MethodError("Newton-Kleinman diverged; use dre_limit");
    if (change <= 1e-14 * std::max(1.0, e.norm())) break;
  }
  if (res > 1e-9 * (1.0 + e.squaredNorm())) {
    throw MethodError("Newton-Kleinman did not reach the residual target; use dre_limit");
  }
  return {e, kInfinity, res, "newton_kleinman"};
}

}  // namespace

FirstOrderMatrices first_order_matrices(const SpectralSystem& system) {
  const int n = system.n_modes();
  const int m = system.n_controls();
  const Vec& lam = system.lambdas();
  FirstOrderMatrices fo;
  fo.A = Mat::Zero(2 * n, 2 * n);
  fo.A.topRightCorner(n, n).diagonal() = lam;
  fo.A.bottomLeftCorner(n, n).diagonal() = -lam;
  fo.B = Mat::Zero(2 * n, m);
  fo.B.bottomRows(n) = system.B_mod();
  fo.Q = Mat::Zero(2 * n, 2 * n);
  const Vec inv = lam.cwiseInverse();
  fo.Q.topLeftCorner(n, n) = detail::Symmetrize(inv.asDiagonal() * system.Q_obs() * inv.asDiagonal());
  fo.G = Mat::Zero(2 * n, 2 * n);
  fo.G.bottomRightCorner(n, n) = system.control_gram();
  return fo;
}

double are_residual(const FirstOrderMatrices& fo, const Mat& e) { return RiccatiField(fo, e).norm(); }

std::vector<RiccatiSolution> integrate_dre(const SpectralSystem& system, double horizon,
                                           const std::vector<double>& snapshot_times,
                                           DreMethod method) {
  if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
  for (size_t i = 0; i < snapshot_times.size(); ++i) {
    const double t = snapshot_times[i];
    if (!(t >= 0.0 && t <= horizon)) throw DomainError("snapshot outside [0, horizon]");
    if (i > 0 && t < snapshot_times[i - 1]) throw DomainError("snapshots must be nondecreasing");
  }
  const FirstOrderMatrices fo = first_order_matrices(system);
  if (method == DreMethod::kHamiltonian) return IntegrateHamiltonian(fo, snapshot_times);
  return IntegrateDormandPrince(fo, snapshot_times, kPi / (4.0 * system.lambda_max()));
}

RiccatiSolution solve_are(const SpectralSystem& system, AreMethod method) {
  CheckStabilizable(system);
  const FirstOrderMatrices fo = first_order_matrices(system);
  if (method == AreMethod::kNewtonKleinman) return NewtonKleinman(system, fo);
  return DreLimit(fo);
}

double value(const RiccatiSolution& solution, const EnergyState& x0) {
  const Vec x = x0.stacked();
  if (x.size() != solution.E.rows()) throw DimensionError("state and Riccati matrix differ in size");
  return x.dot(solution.E * x);
}

BoundsReport bounds_report(const RiccatiSolution& e_hat, const SpectralSystem& system,
                           const NormScale& weak, const NormScale& strong, const Mat& probes) {
  const Eigen::Index dim = 2 * system.n_modes();
  if (e_hat.E.rows() != dim || probes.rows() != dim) {
    throw DimensionError("probe dimension does not match the system");
  }
  const Vec ww = weak.stacked_weights(system.lambdas());
  const Vec ws = strong.stacked_weights(system.lambdas());
  BoundsReport r;
  r.weak_scale = weak;
  r.strong_scale = strong;
  r.probe_count = static_cast<int>(probes.cols());
  double c1 = kInfinity;
  double c2 = 0.0;
  for (Eigen::Index j = 0; j < probes.cols(); ++j) {
    const Vec x = probes.col(j);
    const double v = x.dot(e_hat.E * x);
    const double nw = (ww.array() * x.array().square()).sum();
    const double ns = (ws.array() * x.array().square()).sum();
    if (nw > 0.0) {
      c1 = std::min(c1, v / nw);
    } else if (v > 0.0) {
      ++r.excluded;
    }
    if (ns > 0.0) {
      c2 = std::max(c2, v / ns);
    } else if (v > 0.0) {
      ++r.excluded;
      c2 = kInfinity;
    }
  }
  r.c1_hat = std::isinf(c1) ? 0.0 : std::max(0.0, c1);
  r.c2_hat = c2;
  return r;
}

Mat make_probes(int n_modes, int n_random, std::uint64_t seed) {
  const int dim = 2 * n_modes;
  Mat p = Mat::Zero(dim, dim + n_random);
  p.leftCols(dim).setIdentity();
  CounterRng rng(seed, 0x70726f6265ULL);
  for (int j = 0; j < n_random; ++j) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = rng.normal();
    p.col(dim + j) = v / v.norm();
  }
  return p;
}

}  // namespace hyperlq
