#include "hyperlq/closed_loop.hpp"

#include <algorithm>
#include <cmath>

#include "hyperlq/errors.hpp"
#include "hyperlq/random.hpp"
#include "linalg.hpp"

namespace hyperlq {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct LoopSpec {
  Mat generator;    // closed-loop F
  Mat dissipation;  // M with d/dt (x^T V x) = -x^T M x
  Mat lyapunov;     // V
  Mat control_map;  // u = K x, zero rows when uncontrolled
  Mat obs_form;
  double rotation_sign = 1.0;
  bool reverse_time = false;
};

void Record(Trajectory* tr, const LoopSpec& spec, double t, const Vec& x) {
  tr->times.push_back(t);
  tr->states.push_back(EnergyState::FromStacked(x));
  tr->energies.push_back(x.squaredNorm());
  tr->values.push_back(x.dot(spec.lyapunov * x));
  if (spec.control_map.rows() > 0) {
    Vec u = spec.control_map * x;
    tr->control_norm_sq.push_back(u.squaredNorm());
    tr->controls.push_back(std::move(u));
  } else {
    tr->control_norm_sq.push_back(0.0);
  }
  tr->obs_norm_sq.push_back(x.dot(spec.obs_form * x));
}

Trajectory Simulate(const Vec& lambdas, const LoopSpec& spec, const Vec& x0, double horizon,
                    double dt, Integrator integrator) {
  if (!(horizon > 0.0) || !(dt > 0.0)) throw DomainError("horizon and dt must be positive");
  if (x0.size() != 2 * lambdas.size()) throw DimensionError("initial state has the wrong size");
  const long steps = std::max(1L, static_cast<long>(std::ceil(horizon / dt - 1e-9)));
  const double h = horizon / steps;
  Trajectory tr;
  tr.lambdas = lambdas;
  tr.reverse_time = spec.reverse_time;
  Vec x = x0;
  Record(&tr, spec, 0.0, x);
  double dissipated = 0.0;

  if (integrator == Integrator::kExact) {
    const auto [phi, w] = detail::VanLoan(spec.generator, spec.dissipation, h);
    for (long k = 1; k <= steps; ++k) {
      dissipated += x.dot(w * x);
      x = phi * x;
      Record(&tr, spec, k * h, x);
    }
  } else {
    const double lmax = lambdas.maxCoeff();
    const double cap = std::min(0.1, kPi / (8.0 * lmax));
    const long sub = std::max(1L, static_cast<long>(std::ceil(h / cap - 1e-9)));
    const double hs = h / sub;
    // Non-rotational part of the generator.
    const Eigen::Index n = lambdas.size();
    Mat rot = Mat::Zero(2 * n, 2 * n);
    rot.topRightCorner(n, n).diagonal() = spec.rotation_sign * lambdas;
    rot.bottomLeftCorner(n, n).diagonal() = -spec.rotation_sign * lambdas;
    // Triple-jump composition of Strang steps, fourth order.
    const double c1 = 1.0 / (2.0 - std::cbrt(2.0));
    const double c0 = 1.0 - 2.0 * c1;
    const double half = 0.5 * hs;
    const Mat nonrot = spec.generator - rot;
    const Mat kick1 = detail::Expm(nonrot * (c1 * half));
    const Mat kick0 = detail::Expm(nonrot * (c0 * half));
    const Vec signed_lambdas = spec.rotation_sign * lambdas;
    auto strang = [&](const Mat& kick, double tau, Vec& y) {
      y = detail::FreeFlow(signed_lambdas, 0.5 * tau, y);
      y = kick * y;
      y = detail::FreeFlow(signed_lambdas, 0.5 * tau, y);
    };
    auto advance = [&](Vec& y) {
      strang(kick1, c1 * half, y);
      strang(kick0, c0 * half, y);
      strang(kick1, c1 * half, y);
    };
    double q_old = x.dot(spec.dissipation * x);
    for (long k = 1; k <= steps; ++k) {
      for (long j = 0; j < sub; ++j) {
        advance(x);
        const double q_mid = x.dot(spec.dissipation * x);
        advance(x);
        const double q_new = x.dot(spec.dissipation * x);
        dissipated += hs / 6.0 * (q_old + 4.0 * q_mid + q_new);
        q_old = q_new;
      }
      Record(&tr, spec, k * h, x);
    }
  }

  const double v0 = tr.values.front();
  DissipationCheck& id = tr.identity;
  id.lhs = v0 - tr.values.back();
  id.rhs = dissipated;
  const double scale = std::max(std::abs(id.lhs), std::abs(id.rhs));
  const double diff = std::abs(id.lhs - id.rhs);
  if (scale > 1e-12 * std::abs(v0)) {
    id.relative_defect = diff / scale;
  } else {
    id.relative_defect = v0 != 0.0 ? diff / std::abs(v0) : 0.0;
  }
  return tr;
}

void CheckState(const SpectralSystem& system, const EnergyState& x) {
  if (x.n_modes() != system.n_modes()) throw DimensionError("state and system differ in size");
}

Mat LiftedObservation(const SpectralSystem& system) {
  const Vec inv = system.lambdas().cwiseInverse();
  return detail::Symmetrize(inv.asDiagonal() * system.Q_obs() * inv.asDiagonal());
}

}  // namespace

Mat collocated_generator(const SpectralSystem& system) {
  const FirstOrderMatrices fo = first_order_matrices(system);
  return fo.A - fo.G;
}

Mat riccati_generator(const SpectralSystem& system, const RiccatiSolution& e_hat) {
  const FirstOrderMatrices fo = first_order_matrices(system);
  if (e_hat.E.rows() != fo.A.rows()) throw DimensionError("Riccati matrix and system differ in size");
  return fo.A - fo.G * e_hat.E;
}

Trajectory simulate_collocated(const SpectralSystem& system, const EnergyState& x0, double horizon,
                               double dt, Integrator integrator) {
  CheckState(system, x0);
  const FirstOrderMatrices fo = first_order_matrices(system);
  const Eigen::Index d = fo.A.rows();
  LoopSpec spec;
  spec.generator = fo.A - fo.G;
  spec.dissipation = fo.G;
  spec.lyapunov = 0.5 * Mat::Identity(d, d);
  spec.control_map = -fo.B.transpose();
  spec.obs_form = fo.Q;
  return Simulate(system.lambdas(), spec, x0.stacked(), horizon, dt, integrator);
}

Trajectory simulate_riccati_feedback(const SpectralSystem& system, const RiccatiSolution& e_hat,
                                     const EnergyState& x0, double horizon, double dt,
                                     Integrator integrator) {
  CheckState(system, x0);
  const FirstOrderMatrices fo = first_order_matrices(system);
  if (e_hat.E.rows() != fo.A.rows() || e_hat.E.cols() != fo.A.cols()) {
    throw DimensionError("Riccati matrix and system differ in size");
  }
  LoopSpec spec;
  spec.generator = fo.A - fo.G * e_hat.E;
  spec.dissipation = detail::Symmetrize(e_hat.E * fo.G * e_hat.E + fo.Q);
  spec.lyapunov = e_hat.E;
  spec.control_map = -fo.B.transpose() * e_hat.E;
  spec.obs_form = fo.Q;
  return Simulate(system.lambdas(), spec, x0.stacked(), horizon, dt, integrator);
}

Trajectory simulate_backward_observer(const SpectralSystem& system, const EnergyState& terminal_state,
                                      double horizon, double dt, Integrator integrator) {
  CheckState(system, terminal_state);
  const FirstOrderMatrices fo = first_order_matrices(system);
  const Eigen::Index n = system.n_modes();
  Mat damping = Mat::Zero(2 * n, 2 * n);
  damping.bottomRightCorner(n, n) = LiftedObservation(system);
  LoopSpec spec;
  // Forward generator A + D; in elapsed reverse time s = T - t it is -(A + D).
  spec.generator = -(fo.A + damping);
  spec.dissipation = damping;
  spec.lyapunov = 0.5 * Mat::Identity(2 * n, 2 * n);
  spec.obs_form = damping;
  spec.rotation_sign = -1.0;
  spec.reverse_time = true;
  return Simulate(system.lambdas(), spec, terminal_state.stacked(), horizon, dt, integrator);
}

double truncation_time(const Mat& generator) {
  Eigen::EigenSolver<Mat> es(generator, false);
  const double re = es.eigenvalues().real().maxCoeff();
  if (!(re < 0.0)) return kInfinity;
  return 1.0 / std::abs(re);
}

std::pair<double, double> default_decay_window(const Mat& generator) {
  return {10.0, std::min(300.0, 0.5 * truncation_time(generator))};
}

EnergyState power_law_data(const Vec& lambdas, double sigma, std::uint64_t seed, std::uint64_t stream) {
  CounterRng rng(seed, stream);
  const Eigen::Index n = lambdas.size();
  Vec xi(n), zeta(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double amp = std::pow(lambdas[i], -sigma);
    xi[i] = rng.sign() * amp;
    zeta[i] = rng.sign() * amp;
  }
  return EnergyState(xi, zeta);
}

Mat controllability_gramian(const SpectralSystem& system, double t0) {
  const Vec& lam = system.lambdas();
  const Mat& g = system.control_gram();
  const int n = system.n_modes();
  Mat w = Mat::Zero(2 * n, 2 * n);
  auto cos_int = [t0](double om) { return t0 * detail::Sinc(om * t0); };
  auto sin_int = [t0](double om) {
    const double h = 0.5 * om * t0;
    return t0 * std::sin(h) * detail::Sinc(h);
  };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double gij = g(i, j);
      if (gij == 0.0) continue;
      const double p = lam[i];
      const double q = lam[j];
      // Column i of Phi(s) restricted to the zeta input: (s_i, c_i).
      const double ss = 0.5 * (cos_int(p - q) - cos_int(p + q));
      const double cc = 0.5 * (cos_int(p - q) + cos_int(p + q));
      const double sc = 0.5 * (sin_int(p + q) + sin_int(p - q));  // int s_p c_q
      const double cs = 0.5 * (sin_int(q + p) + sin_int(q - p));  // int c_p s_q
      w(i, j) = gij * ss;
      w(i, n + j) = gij * sc;
      w(n + i, j) = gij * cs;
      w(n + i, n + j) = gij * cc;
    }
  }
  return detail::Symmetrize(w);
}

NullControlResult hum_null_control(const SpectralSystem& system, const EnergyState& x0, double t0,
                                   int n_samples) {
  CheckState(system, x0);
  if (!(t0 > 0.0)) throw DomainError("t0 must be positive");
  const Vec& lam = system.lambdas();
  const int n = system.n_modes();
  const Mat& b_mod = system.B_mod();
  NullControlResult r;
  const Vec x = x0.stacked();
  if (n_samples <= 0) {
    n_samples = std::max(2001, static_cast<int>(std::ceil(8.0 * system.lambda_max() * t0)) + 1);
  }
  r.times.resize(n_samples);
  for (int k = 0; k < n_samples; ++k) r.times[k] = t0 * k / (n_samples - 1);

  if (x.squaredNorm() == 0.0) {
    r.controls.assign(n_samples, Vec::Zero(system.n_controls()));
    r.gramian_condition = 1.0;
    return r;
  }

  const Mat w = controllability_gramian(system, t0);
  Eigen::SelfAdjointEigenSolver<Mat> es(w);
  const double emax = es.eigenvalues().maxCoeff();
  const double emin = es.eigenvalues().minCoeff();
  r.gramian_condition = emin > 0.0 ? emax / emin : kInfinity;
  const Vec target = detail::FreeFlow(lam, t0, x);
  Vec p;
  if (r.gramian_condition < 1e12) {
    p = w.ldlt().solve(target);
  } else {
    const double delta = 1e-12 * emax;
    const Vec d = (es.eigenvalues().array() + delta).inverse();
    p = es.eigenvectors() * (d.asDiagonal() * (es.eigenvectors().transpose() * target));
    r.certified = false;
    r.note = "weakly controllable: residual not certified";
  }

  auto control_at = [&](double t) -> Vec {
    const Vec lifted = detail::FreeFlowTransposed(lam, t0 - t, p);
    return -b_mod.transpose() * lifted.tail(n);
  };
  r.controls.reserve(n_samples);
  for (double t : r.times) r.controls.push_back(control_at(t));
  r.cost = p.dot(w * p);

  // Independent check: x(t0) = Phi(t0) x0 + int_0^t0 Phi(t0 - t) B u(t) dt by
  // composite Gauss-Legendre on panels resolving the fastest oscillation.
  std::vector<double> nodes, weights;
  detail::GaussLegendre01(8, &nodes, &weights);
  const long panels = std::max(16L, static_cast<long>(std::ceil(2.0 * system.lambda_max() * t0)));
  const double hp = t0 / panels;
  Vec forced = Vec::Zero(2 * n);
  for (long k = 0; k < panels; ++k) {
    for (int q = 0; q < 8; ++q) {
      const double t = (k + nodes[q]) * hp;
      Vec input = Vec::Zero(2 * n);
      input.tail(n) = b_mod * control_at(t);
      forced += (weights[q] * hp) * detail::FreeFlow(lam, t0 - t, input);
    }
  }
  r.terminal_residual = (target + forced).norm();
  return r;
}

DecayFit fit_decay(const std::vector<double>& times, const std::vector<double>& values,
                   std::pair<double, double> window) {
  if (times.size() != values.size()) throw DimensionError("times and values differ in length");
  double t_end = window.second;
  for (size_t i = 0; i < times.size(); ++i) {
    if (times[i] > window.first && times[i] < t_end && !(values[i] > 0.0)) {
      t_end = times[i];  // shrink at the first nonpositive sample
      break;
    }
  }
  std::vector<double> lx, ly;
  for (size_t i = 0; i < times.size(); ++i) {
    if (times[i] > window.first && times[i] < t_end) {
      lx.push_back(std::log(times[i] + 1.0));
      ly.push_back(std::log(values[i]));
    }
  }
  const int m = static_cast<int>(lx.size());
  if (m < 20) throw NumericError("fewer than 20 positive samples in the decay window");
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < m; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  DecayFit fit;
  const double slope = sxy / sxx;
  fit.exponent = -slope;
  fit.prefactor = std::exp(my - slope * mx);
  fit.t_start = window.first;
  fit.t_end = t_end;
  fit.n_samples = m;
  fit.r2 = syy > 1e-300 ? std::min(1.0, sxy * sxy / (sxx * syy)) : 1.0;
  fit.model_mismatch = fit.r2 < 0.999;
  return fit;
}

DecayFit fit_decay(const Trajectory& traj, const NormScale& norm, std::pair<double, double> window) {
  std::vector<double> vals;
  vals.reserve(traj.states.size());
  for (const auto& s : traj.states) vals.push_back(norm_squared(s, traj.lambdas, norm));
  DecayFit fit = fit_decay(traj.times, vals, window);
  fit.norm_used = norm;
  return fit;
}

}  // namespace hyperlq
