#pragma once

#include <Eigen/Dense>

namespace rlab {

struct LsqResult {
  Eigen::VectorXd coeff;
  Eigen::VectorXd stderr_;
  double residual_norm = 0;  // weighted
  double condition = 0;      // of the column-equilibrated design matrix
  int rank = 0;
};

// Weighted linear least squares; standard errors from the normal-equation covariance scaled by the residual variance.
LsqResult weighted_lsq(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& w);

}  // namespace rlab
