#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wsnkf/linalg.hpp"
#include "wsnkf/random.hpp"

namespace wsnkf {

struct SensorSpec {
  RowVector C;                    // observation row, 1×n
  double R = 0.0;                 // measurement-noise variance
  std::vector<double> rate_set;   // admissible bit-rates, ascending
  // Measurement variance used to scale the quantizer when the plant has no
  // stationary distribution. Overrides C Σ Cᵀ + R when set.
  std::optional<double> variance;

  double min_rate() const { return rate_set.front(); }
  double max_rate() const { return rate_set.back(); }
};

struct PlantModel {
  Matrix A;
  Matrix Q;
  Matrix P0;
  std::vector<SensorSpec> sensors;

  int dim() const { return static_cast<int>(A.rows()); }
  int sensor_count() const { return static_cast<int>(sensors.size()); }

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// Stacks every sensor row into an M×n matrix.
  Matrix stacked_C() const;
};

struct PlantState {
  Vector x;
  std::int64_t k = 0;
};

PlantState initial_state(const PlantModel& model, RandomStream& rng);

PlantState step_plant(const PlantState& state, const PlantModel& model, RandomStream& rng);
/// Deterministic variant with the driving noise supplied by the caller.
PlantState step_plant(const PlantState& state, const PlantModel& model, const Vector& w);

double measure(const PlantState& state, int m, const PlantModel& model, RandomStream& rng);
double measure(const PlantState& state, int m, const PlantModel& model, double v);

/// Unique Σ with Σ = AΣAᵀ + Q. Throws NoStationaryDistribution when the
/// spectral radius of A is not below one.
Matrix stationary_covariance(const PlantModel& model);

/// Joint covariance of the measurement vector (y_1, ..., y_M): C Σ Cᵀ + diag(R).
/// Sensors with an explicit variance override their diagonal entry; for an
/// unstable plant every sensor must carry one and cross terms are zero.
Matrix measurement_covariance(const PlantModel& model);

/// Diagonal of measurement_covariance.
std::vector<double> measurement_variances(const PlantModel& model);

}  // namespace wsnkf
