#include "hyperlq/turnpike.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "hyperlq/errors.hpp"
#include "hyperlq/riccati.hpp"
#include "linalg.hpp"

namespace hyperlq {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct TrackingData {
  FirstOrderMatrices fo;
  Mat c_full;  // n x 2n, C on stacked energy states
  StationarySolution st;
  Vec x_bar;
  Vec mu_bar;  // stationary costate (0, p_bar)
  Vec r_s;     // C w_bar - z
  Mat ham;     // [[A, -G], [-Q, -A^T]]
};

TrackingData Prepare(const SpectralSystem& system, const Vec& z) {
  TrackingData d;
  d.fo = first_order_matrices(system);
  const int n = system.n_modes();
  const Vec& lam = system.lambdas();
  d.c_full = Mat::Zero(n, 2 * n);
  d.c_full.leftCols(n) = observation_operator(system) * lam.cwiseInverse().asDiagonal();
  d.st = solve_stationary(system, z);
  d.x_bar = Vec::Zero(2 * n);
  d.x_bar.head(n) = lam.cwiseProduct(d.st.w_bar.a);
  d.mu_bar = Vec::Zero(2 * n);
  d.mu_bar.tail(n) = d.st.p_bar.a;
  d.r_s = d.c_full * d.x_bar - z;
  d.ham.resize(4 * n, 4 * n);
  d.ham << d.fo.A, -d.fo.G, -d.fo.Q, -d.fo.A.transpose();
  return d;
}

// |u|^2 + |C x - z|^2 at deviation state x~ and deviation costate.
double FullIntegrand(const TrackingData& d, const Vec& xt, const Vec& lt) {
  const Vec u = d.st.u_bar - d.fo.B.transpose() * lt;
  return u.squaredNorm() + (d.r_s + d.c_full * xt).squaredNorm();
}

double DeviationIntegrand(const TrackingData& d, const Vec& xt, const Vec& lt) {
  return xt.dot(d.fo.Q * xt) + (d.fo.B.transpose() * lt).squaredNorm();
}

}  // namespace

double g_weight(double horizon, double k, double exponent) {
  if (!(horizon >= 0.0)) throw DomainError("g_weight needs T >= 0");
  const double q = 1.0 - k * exponent;
  const double l = std::log1p(horizon);
  if (q == 0.0) return l;
  return std::expm1(q * l) / q;
}

Mat observation_operator(const SpectralSystem& system) { return detail::SymmetricSqrt(system.Q_obs()); }

StationarySolution solve_stationary(const SpectralSystem& system, const Vec& z) {
  const int n = system.n_modes();
  if (z.size() != n) throw DimensionError("target z must have one entry per mode");
  const Vec& lam = system.lambdas();
  const Vec inv2 = lam.array().square().inverse();
  const Mat c_mod = observation_operator(system);
  const Mat& b = system.B_mod();
  const Mat g = c_mod * inv2.asDiagonal() * b;
  const int m = system.n_controls();
  const Mat normal = Mat::Identity(m, m) + g.transpose() * g;
  StationarySolution s;
  s.z = z;
  s.u_bar = normal.ldlt().solve(g.transpose() * z);
  const Vec w = inv2.asDiagonal() * (b * s.u_bar);
  const Vec misfit = c_mod * w - z;
  const Vec p = inv2.asDiagonal() * (c_mod.transpose() * misfit);
  s.w_bar = ModalVector(w, Vec::Zero(n));
  s.p_bar = ModalVector(p, Vec::Zero(n));
  const Vec l2 = lam.array().square();
  s.state_residual = (l2.cwiseProduct(w) - b * s.u_bar).norm();
  s.adjoint_residual = (l2.cwiseProduct(p) - c_mod.transpose() * misfit).norm();
  s.control_residual = (s.u_bar + b.transpose() * p).norm();
  const double un = 1.0 + s.u_bar.norm();
  const double zn = 1.0 + z.norm();
  s.optimality_residual =
      std::max({s.state_residual / un, s.adjoint_residual / zn, s.control_residual / un});
  s.cost = s.u_bar.squaredNorm() + misfit.squaredNorm();
  return s;
}

double stationary_cost(const SpectralSystem& system, const Vec& z, const Vec& u) {
  const Vec inv2 = system.lambdas().array().square().inverse();
  const Vec w = inv2.asDiagonal() * (system.B_mod() * u);
  return u.squaredNorm() + (observation_operator(system) * w - z).squaredNorm();
}

TrackingResult solve_tracking(const SpectralSystem& system, const Vec& z, const EnergyState& x0,
                              double horizon, double dt) {
  if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
  if (x0.n_modes() != system.n_modes()) throw DimensionError("x0 and system differ in size");
  const TrackingData d = Prepare(system, z);
  const int n = system.n_modes();
  const int n2 = 2 * n;
  const Vec& lam = system.lambdas();

  const long n_coarse = std::max(1L, static_cast<long>(std::ceil(horizon / 0.5 - 1e-9)));
  const double big = horizon / n_coarse;
  const double fine_target = dt > 0.0 ? dt : kPi / (8.0 * system.lambda_max());
  long j_fine = std::max(2L, static_cast<long>(std::ceil(big / fine_target - 1e-9)));
  if (j_fine % 2) ++j_fine;  // Simpson on each coarse interval
  const double small = big / j_fine;

  // Hamiltonian flow matrices inside one coarse interval.
  std::vector<Mat> psi(j_fine + 1);
  psi[0] = Mat::Identity(2 * n2, 2 * n2);
  const Mat step = detail::Expm(d.ham * small);
  for (long j = 1; j <= j_fine; ++j) psi[j] = step * psi[j - 1];
  psi[j_fine] = detail::Expm(d.ham * big);
  std::vector<double> gl_x, gl_w;
  detail::GaussLegendre01(8, &gl_x, &gl_w);
  std::vector<Mat> node(8);
  for (int q = 0; q < 8; ++q) node[q] = detail::Expm(d.ham * (gl_x[q] * small));

  auto sweep = [&](const Mat& ps, const Mat& p1, const Vec& h1, Mat* p0, Vec* h0) {
    const Mat s11 = ps.topLeftCorner(n2, n2), s12 = ps.topRightCorner(n2, n2);
    const Mat s21 = ps.bottomLeftCorner(n2, n2), s22 = ps.bottomRightCorner(n2, n2);
    const Eigen::PartialPivLU<Mat> lu(s22 - p1 * s12);
    if (p0) *p0 = detail::Symmetrize(lu.solve(p1 * s11 - s21));
    *h0 = lu.solve(h1);
  };

  // Backward sweep: costate = P x~ + h with P(T) = 0, h(T) = -mu_bar.
  std::vector<Mat> p_node(n_coarse + 1);
  std::vector<Vec> h_node(n_coarse + 1);
  std::vector<std::vector<Vec>> h_fine(n_coarse);
  p_node[n_coarse] = Mat::Zero(n2, n2);
  h_node[n_coarse] = -d.mu_bar;
  for (long k = n_coarse - 1; k >= 0; --k) {
    sweep(psi[j_fine], p_node[k + 1], h_node[k + 1], &p_node[k], &h_node[k]);
    h_fine[k].resize(j_fine + 1);
    h_fine[k][0] = h_node[k];
    h_fine[k][j_fine] = h_node[k + 1];
    for (long j = 1; j < j_fine; ++j) sweep(psi[j_fine - j], p_node[k + 1], h_node[k + 1], nullptr, &h_fine[k][j]);
  }

  TrackingResult r;
  r.horizon = horizon;
  Trajectory& tr = r.trajectory;
  tr.lambdas = lam;
  const Vec xt0 = x0.stacked() - d.x_bar;
  Vec xt = xt0;
  std::vector<Vec> zs;  // (x~, costate) at each fine sample
  std::vector<double> hgh;
  zs.reserve(n_coarse * j_fine + 1);
  for (long k = 0; k < n_coarse; ++k) {
    Vec zk(2 * n2);
    zk << xt, p_node[k] * xt + h_node[k];
    for (long j = 0; j < j_fine; ++j) {
      zs.push_back(j == 0 ? zk : Vec(psi[j] * zk));
      tr.times.push_back(k * big + j * small);
      r.feedforward.push_back(h_fine[k][j]);
    }
    xt = (psi[j_fine] * zk).head(n2);
    if (k == n_coarse - 1) {
      // Record the propagated terminal costate so the terminal condition is tested.
      zs.push_back(psi[j_fine] * zk);
      tr.times.push_back(horizon);
      r.feedforward.push_back(h_fine[k][j_fine]);
    }
  }

  const size_t samples = zs.size();
  double cost_q = 0.0, dev_q = 0.0;
  Vec mean = Vec::Zero(n2);
  double res_state = 0.0, res_adj = 0.0, res_ctrl = 0.0, scale = 1.0;
  for (const Vec& zz : zs) scale = std::max(scale, zz.norm());
  for (size_t i = 0; i < samples; ++i) {
    const Vec xi = zs[i].head(n2);
    const Vec li = zs[i].tail(n2);
    const Vec x = xi + d.x_bar;
    const Vec u = d.st.u_bar - d.fo.B.transpose() * li;
    tr.states.push_back(EnergyState::FromStacked(x));
    tr.controls.push_back(u);
    tr.energies.push_back(x.squaredNorm());
    tr.values.push_back(xi.squaredNorm());
    tr.control_norm_sq.push_back(u.squaredNorm());
    tr.obs_norm_sq.push_back((d.c_full * x - z).squaredNorm());
    r.adjoints.push_back(li);
    // The recorded control must satisfy u = -B^T (full costate).
    res_ctrl = std::max(res_ctrl, (u + d.fo.B.transpose() * (li + d.mu_bar)).norm() / scale);
    if (i + 1 == samples) break;
    const double h = tr.times[i + 1] - tr.times[i];
    // Gauss-Legendre on the sub-interval for the cost and for the variation of
    // constants form of the state and adjoint equations.
    Vec forced_x = Vec::Zero(n2), forced_l = Vec::Zero(n2);
    for (int q = 0; q < 8; ++q) {
      const Vec zq = node[q] * zs[i];
      const Vec xq = zq.head(n2), lq = zq.tail(n2);
      cost_q += gl_w[q] * h * FullIntegrand(d, xq, lq);
      dev_q += gl_w[q] * h * DeviationIntegrand(d, xq, lq);
      mean += gl_w[q] * h * xq;
      const double rest = (1.0 - gl_x[q]) * h;
      forced_x += (gl_w[q] * h) * detail::FreeFlow(lam, rest, -(d.fo.G * lq));
      forced_l += (gl_w[q] * h) * detail::FreeFlow(lam, rest, -(d.fo.Q * xq));
    }
    const Vec x_next = detail::FreeFlow(lam, h, xi) + forced_x;
    const Vec l_next = detail::FreeFlow(lam, h, li) + forced_l;
    res_state = std::max(res_state, (zs[i + 1].head(n2) - x_next).norm() / scale);
    res_adj = std::max(res_adj, (zs[i + 1].tail(n2) - l_next).norm() / scale);
  }
  const double res_init = (zs.front().head(n2) - xt0).norm() / scale;
  const double res_term = (zs.back().tail(n2) + d.mu_bar).norm() / scale;
  r.os_residual = std::max({res_state, res_adj, res_ctrl, res_init, res_term});
  r.cost = cost_q;
  r.deviation_integral = dev_q;
  r.mean_deviation = mean / horizon;

  // Value identity: J = T J_s + x~0^T E(T) x~0 + 2 h(0)^T x~0 - int |B^T h|^2 + 2 mu_bar^T x~0.
  double ff = 0.0;
  for (long k = 0; k < n_coarse; ++k) {
    for (long j = 0; j <= j_fine; ++j) {
      const double wgt = (j == 0 || j == j_fine) ? 1.0 : (j % 2 ? 4.0 : 2.0);
      ff += wgt * small / 3.0 * (d.fo.B.transpose() * h_fine[k][j]).squaredNorm();
    }
  }
  r.cost_identity = horizon * d.st.cost + xt0.dot(p_node[0] * xt0) + 2.0 * h_node[0].dot(xt0) - ff +
                    2.0 * d.mu_bar.dot(xt0);
  return r;
}

TpbvpSolution solve_tracking_tpbvp(const SpectralSystem& system, const Vec& z, const EnergyState& x0,
                                   double horizon, int steps) {
  if (steps < 2 || steps % 2) throw DomainError("steps must be even and at least 2");
  const TrackingData d = Prepare(system, z);
  const int n2 = 2 * system.n_modes();
  const int dim = 2 * n2;
  const double h = horizon / steps;
  const Mat id = Mat::Identity(dim, dim);
  const Mat h2 = d.ham * d.ham;
  const Mat left = id - 0.5 * h * d.ham + (h * h / 12.0) * h2;
  const Mat right = id + 0.5 * h * d.ham + (h * h / 12.0) * h2;
  const long unknowns = static_cast<long>(dim) * (steps + 1);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(steps) * 2 * dim * dim + dim);
  Vec rhs = Vec::Zero(unknowns);
  for (int k = 0; k < steps; ++k) {
    const long row = static_cast<long>(k) * dim;
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        if (left(i, j) != 0.0) trip.emplace_back(row + i, (k + 1L) * dim + j, left(i, j));
        if (right(i, j) != 0.0) trip.emplace_back(row + i, static_cast<long>(k) * dim + j, -right(i, j));
      }
  }
  const long bc = static_cast<long>(steps) * dim;
  const Vec xt0 = x0.stacked() - d.x_bar;
  for (int i = 0; i < n2; ++i) {
    trip.emplace_back(bc + i, i, 1.0);
    rhs[bc + i] = xt0[i];
    trip.emplace_back(bc + n2 + i, static_cast<long>(steps) * dim + n2 + i, 1.0);
    rhs[bc + n2 + i] = -d.mu_bar[i];
  }
  Eigen::SparseMatrix<double> a(unknowns, unknowns);
  a.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) throw NumericError("TPBVP collocation matrix is singular");
  const Vec sol = lu.solve(rhs);
  TpbvpSolution out;
  double cost = 0.0;
  for (int k = 0; k <= steps; ++k) {
    const Vec zk = sol.segment(static_cast<long>(k) * dim, dim);
    out.times.push_back(k * h);
    out.states.push_back(zk.head(n2));
    out.costates.push_back(zk.tail(n2));
    const double wgt = (k == 0 || k == steps) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    cost += wgt * h / 3.0 * FullIntegrand(d, zk.head(n2), zk.tail(n2));
  }
  out.cost = cost;
  return out;
}

TurnpikeReport averaged_metrics(const SpectralSystem& system, const std::vector<TrackingResult>& runs,
                                const std::vector<double>& horizons,
                                const StationarySolution& stationary, const EnergyState& x0,
                                double rho, double eta, double k, double ktilde) {
  if (runs.size() != horizons.size()) throw DimensionError("one run per horizon is required");
  for (size_t i = 0; i < runs.size(); ++i) {
    if (std::abs(runs[i].horizon - horizons[i]) > 1e-12 * std::max(1.0, horizons[i])) {
      throw DomainError("run horizon does not match the grid");
    }
    if (i > 0 && !(horizons[i] > horizons[i - 1])) throw DomainError("horizons must increase");
    if (runs[i].mean_deviation.size() != 2 * system.n_modes()) {
      throw DimensionError("run does not match the system");
    }
  }
  TurnpikeReport rep;
  rep.horizons = horizons;
  rep.k_used = k;
  rep.ktilde_used = ktilde;
  const Vec& lam = system.lambdas();
  const int n = system.n_modes();
  Vec xbar = Vec::Zero(2 * n);
  xbar.head(n) = lam.cwiseProduct(stationary.w_bar.a);
  const Vec dev0 = x0.stacked() - xbar;
  const double data_norm = norm_squared_stacked(dev0, lam, NormScale::Graded(k));
  const double p_norm = norm_squared(stationary.p_bar, lam, NormScale::SobolevState(0.5 * (ktilde + 1.0)));
  for (size_t i = 0; i < runs.size(); ++i) {
    const double t = horizons[i];
    rep.avg_tracking.push_back(runs[i].deviation_integral / t);
    // X_{1/2} norm of the averaged position deviation is the xi block.
    rep.avg_state_gap.push_back(runs[i].mean_deviation.head(n).squaredNorm());
    rep.bound_values.push_back(g_weight(t, k, rho) / t * data_norm +
                               g_weight(t, ktilde, eta) / t * p_norm);
  }
  return rep;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DimensionError("x and y differ in length");
  std::vector<double> lx, ly;
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) throw NumericError("need two positive pairs for a log-log slope");
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i] / n;
    my += ly[i] / n;
  }
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw NumericError("log-log slope needs distinct x values");
  return sxy / sxx;
}

}  // namespace hyperlq
