#include "rlab/lsq.hpp"

#include <cmath>

#include "rlab/errors.hpp"

namespace rlab {

LsqResult weighted_lsq(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& w) {
  const Eigen::Index m = a.rows(), p = a.cols();
  if (m < p) throw IllPosedError("least squares: fewer samples than unknowns");
  Eigen::MatrixXd aw = w.asDiagonal() * a;
  Eigen::VectorXd bw = w.asDiagonal() * b;
  Eigen::VectorXd scale(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    scale(j) = aw.col(j).norm();
    if (scale(j) == 0) throw IllPosedError("least squares: zero column in design matrix");
    aw.col(j) /= scale(j);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(aw, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  LsqResult r;
  r.condition = sv(0) / sv(p - 1);
  r.rank = 0;
  for (Eigen::Index j = 0; j < p; ++j)
    if (sv(j) > 1e-14 * sv(0)) ++r.rank;
  if (r.rank < p) throw IllPosedError("least squares: rank-deficient basis");
  Eigen::VectorXd x = svd.solve(bw);
  const Eigen::VectorXd res = aw * x - bw;
  r.residual_norm = res.norm();
  const double dof = m > p ? static_cast<double>(m - p) : 1.0;
  const double s2 = res.squaredNorm() / dof;
  // covariance = V diag(1/sv^2) V^T
  const Eigen::MatrixXd v = svd.matrixV();
  r.stderr_.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    double c = 0;
    for (Eigen::Index l = 0; l < p; ++l) c += v(j, l) * v(j, l) / (sv(l) * sv(l));
    r.stderr_(j) = std::sqrt(s2 * c) / scale(j);
  }
  r.coeff = x.cwiseQuotient(scale);
  return r;
}

}  // namespace rlab
