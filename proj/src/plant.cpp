#include "wsnkf/plant.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wsnkf/error.hpp"

namespace wsnkf {

void PlantModel::validate() const {
  const auto n = A.rows();
  if (n == 0 || A.cols() != n) throw ConfigError("plant.A must be a non-empty square matrix");
  if (Q.rows() != n || Q.cols() != n) throw ConfigError("plant.Q must be n×n");
  if (P0.rows() != n || P0.cols() != n) throw ConfigError("plant.P0 must be n×n");
  if (!is_symmetric_psd(Q)) throw ConfigError("plant.Q must be symmetric positive semidefinite");
  if (!is_symmetric_psd(P0)) throw ConfigError("plant.P0 must be symmetric positive semidefinite");
  if (!A.allFinite()) throw ConfigError("plant.A has non-finite entries");
  if (sensors.empty()) throw ConfigError("plant.sensors must not be empty");
  for (std::size_t m = 0; m < sensors.size(); ++m) {
    const auto& s = sensors[m];
    const std::string where = "plant.sensors[" + std::to_string(m) + "]";
    if (s.C.size() != n) throw ConfigError(where + ".C must have n entries");
    if (s.C.cwiseAbs().maxCoeff() == 0.0) throw ConfigError(where + ".C must have a nonzero entry");
    if (!(s.R >= 0.0)) throw ConfigError(where + ".R must be >= 0");
    if (s.rate_set.empty()) throw ConfigError(where + ".rates must not be empty");
    if (!std::is_sorted(s.rate_set.begin(), s.rate_set.end()) ||
        std::adjacent_find(s.rate_set.begin(), s.rate_set.end()) != s.rate_set.end())
      throw ConfigError(where + ".rates must be strictly ascending");
    if (!(s.rate_set.front() > 0.0)) throw ConfigError(where + ".rates must be positive");
    if (s.variance && !(*s.variance > 0.0)) throw ConfigError(where + ".variance must be > 0");
  }
}

Matrix PlantModel::stacked_C() const {
  Matrix C(sensor_count(), dim());
  for (int m = 0; m < sensor_count(); ++m) C.row(m) = sensors[m].C;
  return C;
}

namespace {

Vector gaussian(const Matrix& cov, RandomStream& rng) {
  const Matrix L = covariance_factor(cov);
  Vector z(cov.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return L * z;
}

}  // namespace

PlantState initial_state(const PlantModel& model, RandomStream& rng) {
  return PlantState{gaussian(model.P0, rng), 0};
}

PlantState step_plant(const PlantState& state, const PlantModel& model, const Vector& w) {
  if (state.x.size() != model.dim() || w.size() != model.dim())
    throw ConfigError("step_plant: state/noise dimension does not match plant.A");
  return PlantState{model.A * state.x + w, state.k + 1};
}

PlantState step_plant(const PlantState& state, const PlantModel& model, RandomStream& rng) {
  if (state.x.size() != model.dim())
    throw ConfigError("step_plant: state dimension does not match plant.A");
  return step_plant(state, model, gaussian(model.Q, rng));
}

double measure(const PlantState& state, int m, const PlantModel& model, double v) {
  if (m < 0 || m >= model.sensor_count())
    throw ConfigError("measure: sensor index " + std::to_string(m) + " out of range");
  const auto& s = model.sensors[m];
  if (s.C.size() != state.x.size()) throw ConfigError("measure: C and x dimensions differ");
  return s.C.dot(state.x) + v;
}

double measure(const PlantState& state, int m, const PlantModel& model, RandomStream& rng) {
  if (m < 0 || m >= model.sensor_count())
    throw ConfigError("measure: sensor index " + std::to_string(m) + " out of range");
  return measure(state, m, model, std::sqrt(model.sensors[m].R) * rng.normal());
}

Matrix stationary_covariance(const PlantModel& model) {
  const Matrix& A = model.A;
  const auto n = A.rows();
  const double radius = spectral_radius(A);
  if (!(radius < 1.0))
    throw NoStationaryDistribution("no stationary distribution: spectral radius of A is " +
                                   std::to_string(radius));
  // Vectorized Lyapunov equation (I - A⊗A) vec(Σ) = vec(Q).
  Matrix kron(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) kron.block(i * n, j * n, n, n) = A(i, j) * A;
  const Matrix lhs = Matrix::Identity(n * n, n * n) - kron;
  const Vector q = Eigen::Map<const Vector>(model.Q.data(), n * n);
  const Vector sigma = lhs.partialPivLu().solve(q);
  Matrix out = Eigen::Map<const Matrix>(sigma.data(), n, n);
  return symmetrize(out);
}

Matrix measurement_covariance(const PlantModel& model) {
  const int M = model.sensor_count();
  Matrix cov = Matrix::Zero(M, M);
  std::optional<Matrix> sigma;
  try {
    sigma = stationary_covariance(model);
  } catch (const NoStationaryDistribution&) {
    for (const auto& s : model.sensors)
      if (!s.variance)
        throw NoStationaryDistribution(
            "plant has no stationary distribution; every sensor needs an explicit variance");
  }
  if (sigma) {
    const Matrix C = model.stacked_C();
    cov = C * (*sigma) * C.transpose();
    for (int m = 0; m < M; ++m) cov(m, m) += model.sensors[m].R;
  }
  for (int m = 0; m < M; ++m) {
    if (const auto& v = model.sensors[m].variance) {
      // Keep the correlation coefficient when rescaling a stationary entry.
      if (sigma && cov(m, m) > 0.0) {
        const double scale = std::sqrt(*v / cov(m, m));
        cov.row(m) *= scale;
        cov.col(m) *= scale;
      }
      cov(m, m) = *v;
    }
  }
  return symmetrize(cov);
}

std::vector<double> measurement_variances(const PlantModel& model) {
  const Matrix cov = measurement_covariance(model);
  std::vector<double> out(cov.rows());
  for (Eigen::Index m = 0; m < cov.rows(); ++m) out[m] = cov(m, m);
  return out;
}

}  // namespace wsnkf
