#include "linalg.hpp"

#include <cmath>
#include <complex>

#include <unsupported/Eigen/MatrixFunctions>

#include "hyperlq/errors.hpp"

namespace hyperlq::detail {

Mat Expm(const Mat& m) { return m.exp(); }

Mat SolveLyapunov(const Mat& f, const Mat& c) {
  using Cplx = std::complex<double>;
  using CMat = Eigen::MatrixXcd;
  const Eigen::Index n = f.rows();
  Eigen::ComplexSchur<CMat> schur(f.cast<Cplx>());
  const CMat& t = schur.matrixT();
  const CMat& u = schur.matrixU();
  // F^T = U T^H U^H for real F, so T^H Y + Y T = -U^H C U with Y = U^H X U.
  const CMat rhs = -(u.adjoint() * c.cast<Cplx>() * u);
  CMat y = CMat::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::VectorXcd r = rhs.col(j);
    for (Eigen::Index k = 0; k < j; ++k) r -= y.col(k) * t(k, j);
    // (T^H + t_jj I) y_j = r, lower triangular.
    for (Eigen::Index i = 0; i < n; ++i) {
      Cplx acc = r[i];
      for (Eigen::Index k = 0; k < i; ++k) acc -= std::conj(t(k, i)) * y(k, j);
      const Cplx diag = std::conj(t(i, i)) + t(j, j);
      if (std::abs(diag) < 1e-300) throw NumericError("Lyapunov equation is singular");
      y(i, j) = acc / diag;
    }
  }
  return Symmetrize((u * y * u.adjoint()).real());
}

std::pair<Mat, Mat> VanLoan(const Mat& f, const Mat& m, double h) {
  const Eigen::Index n = f.rows();
  Mat big = Mat::Zero(2 * n, 2 * n);
  big.topLeftCorner(n, n) = -f.transpose();
  big.topRightCorner(n, n) = m;
  big.bottomRightCorner(n, n) = f;
  const Mat e = Expm(big * h);
  Mat phi = e.bottomRightCorner(n, n);
  Mat integral = Symmetrize(phi.transpose() * e.topRightCorner(n, n));
  return {std::move(phi), std::move(integral)};
}

Mat SymmetricSqrt(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(Symmetrize(m));
  Vec d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return Symmetrize(es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose());
}

void GaussLegendre01(int n, std::vector<double>* nodes, std::vector<double>* weights) {
  // Golub-Welsch on the Legendre Jacobi matrix.
  Mat j = Mat::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    j(k, k - 1) = j(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(j);
  nodes->resize(n);
  weights->resize(n);
  for (int k = 0; k < n; ++k) {
    (*nodes)[k] = 0.5 * (es.eigenvalues()[k] + 1.0);
    const double v0 = es.eigenvectors()(0, k);
    (*weights)[k] = v0 * v0;  // 2 v0^2 on [-1,1], halved for [0,1]
  }
}

double Sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

Vec FreeFlow(const Vec& lambdas, double t, const Vec& x) {
  const Eigen::Index n = lambdas.size();
  Vec out(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double c = std::cos(lambdas[i] * t);
    const double s = std::sin(lambdas[i] * t);
    out[i] = c * x[i] + s * x[n + i];
    out[n + i] = -s * x[i] + c * x[n + i];
  }
  return out;
}

}  // namespace hyperlq::detail
