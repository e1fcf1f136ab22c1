#include "wsnkf/filter.hpp"

#include <string>

#include "wsnkf/error.hpp"

namespace wsnkf {

FilterState FilterState::initial(const PlantModel& model) {
  const int n = model.dim();
  FilterState fs;
  fs.x_hat = Vector::Zero(n);
  fs.x_pred = Vector::Zero(n);
  fs.P_prior = model.P0;
  fs.P_post = model.P0;
  return fs;
}

int StackedMeasurement::active_count() const {
  int c = 0;
  for (int a : active) c += a;
  return c;
}

StackedMeasurement stack_measurement(const ReconstructionFlags& flags, const std::vector<double>& y_hat,
                                     const std::vector<double>& distortion, const PlantModel& model) {
  const int M = model.sensor_count();
  const int n = model.dim();
  if (static_cast<int>(flags.theta.size()) != M || static_cast<int>(y_hat.size()) != M ||
      static_cast<int>(distortion.size()) != M)
    throw ContractViolation("stack_measurement: per-sensor inputs must have M entries");
  StackedMeasurement s;
  s.C = Matrix::Zero(M, n);
  s.y = Vector::Zero(M);
  s.R_diag = Vector::Zero(M);
  s.active.assign(M, 0);
  for (int m = 0; m < M; ++m) {
    s.R_diag(m) = model.sensors[m].R + distortion[m];
    if (flags.theta[m]) {
      s.active[m] = 1;
      s.C.row(m) = model.sensors[m].C;
      s.y(m) = y_hat[m];
    }
  }
  return s;
}

void kf_update(FilterState& fs, const StackedMeasurement& meas, const PlantModel& model, bool joseph) {
  const int n = model.dim();
  const Matrix& A = model.A;
  const Matrix& P = fs.P_prior;
  const Vector& xp = fs.x_pred;

  std::vector<int> idx;
  for (int m = 0; m < static_cast<int>(meas.active.size()); ++m)
    if (meas.active[m]) idx.push_back(m);

  if (idx.empty()) {
    fs.x_hat = xp;
    fs.P_post = P;
  } else {
    const int p = static_cast<int>(idx.size());
    Matrix C(p, n);
    Vector y(p);
    Matrix R = Matrix::Zero(p, p);
    for (int i = 0; i < p; ++i) {
      C.row(i) = meas.C.row(idx[i]);
      y(i) = meas.y(idx[i]);
      R(i, i) = meas.R_diag(idx[i]);
    }
    const Matrix PCt = P * C.transpose();
    const Matrix S = symmetrize(C * PCt + R);
    Eigen::LLT<Matrix> llt(S);
    if (llt.info() != Eigen::Success)
      throw NumericalError("kf_update: innovation covariance of " + std::to_string(p) +
                           " active rows is not positive definite");
    // K = P Cᵀ S⁻¹
    const Matrix K = llt.solve(PCt.transpose()).transpose();
    fs.x_hat = xp + K * (y - C * xp);
    const Matrix IKC = Matrix::Identity(n, n) - K * C;
    if (joseph) {
      fs.P_post = IKC * P * IKC.transpose() + K * R * K.transpose();
    } else {
      fs.P_post = IKC * P;
    }
    fs.P_post = symmetrize(fs.P_post);
  }
  fs.x_pred = A * fs.x_hat;
  fs.P_prior = symmetrize(A * fs.P_post * A.transpose() + model.Q);
}

Matrix posterior_covariance(const Matrix& P_prior, const std::vector<const RowVector*>& rows,
                            const std::vector<double>& noise) {
  Matrix P = P_prior;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const RowVector& c = *rows[i];
    const Vector pc = P * c.transpose();
    const double s = c.dot(pc) + noise[i];
    if (!(s > 0.0)) throw NumericalError("posterior_covariance: non-positive innovation variance");
    P.noalias() -= (pc * pc.transpose()) / s;
  }
  return symmetrize(P);
}

}  // namespace wsnkf
