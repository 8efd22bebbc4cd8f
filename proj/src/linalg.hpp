#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hyperlq::detail {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

Mat Expm(const Mat& m);

/// Solves F^T X + X F + C = 0 for Hurwitz F by complex Schur (Bartels-Stewart).
Mat SolveLyapunov(const Mat& f, const Mat& c);

/// (e^{F h}, int_0^h e^{F^T s} M e^{F s} ds) from one exponential of the
/// block matrix [[-F^T, M], [0, F]] h.
std::pair<Mat, Mat> VanLoan(const Mat& f, const Mat& m, double h);

/// Symmetric PSD square root; negative eigenvalues from rounding are clipped.
Mat SymmetricSqrt(const Mat& m);

/// Gauss-Legendre rule with n points mapped to [0, 1].
void GaussLegendre01(int n, std::vector<double>* nodes, std::vector<double>* weights);

/// sin(x)/x with the removable singularity filled in.
double Sinc(double x);

/// Exact free flow x(t) = Phi(t) x in stacked energy coordinates.
Vec FreeFlow(const Vec& lambdas, double t, const Vec& x);
/// Phi(t)^T x; equals FreeFlow at -t since each block is a rotation.
inline Vec FreeFlowTransposed(const Vec& lambdas, double t, const Vec& x) {
  return FreeFlow(lambdas, -t, x);
}

inline Mat Symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

}  // namespace hyperlq::detail
