#pragma once

#include <Eigen/Dense>

namespace wsnkf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// Largest singular value.
double spectral_norm(const Matrix& m);

// Largest eigenvalue magnitude.
double spectral_radius(const Matrix& m);

// Square-root factor L with L*Lᵀ = cov for a symmetric PSD matrix (eigen-based,
// so singular covariances such as diag(q, 0) are accepted).
Matrix covariance_factor(const Matrix& cov);

bool is_symmetric_psd(const Matrix& m, double tol = 1e-9);

}  // namespace wsnkf
