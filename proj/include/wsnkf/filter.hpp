#pragma once

#include <vector>

#include "wsnkf/link.hpp"
#include "wsnkf/plant.hpp"

namespace wsnkf {

struct FilterState {
  Vector x_hat;    // x̂(k)
  Vector x_pred;   // x̂(k+1|k)
  Matrix P_prior;  // P(k|k-1) before the update, P(k+1|k) after it
  Matrix P_post;   // P(k|k)

  /// P(0|-1) = P0 and x̂(0|-1) = 0.
  static FilterState initial(const PlantModel& model);
};

/// Stacked intermittent measurement: rows θ_m C_m, entries θ_m ŷ_m and
/// R_m + D_m on the diagonal.
struct StackedMeasurement {
  Matrix C;
  Vector y;
  Vector R_diag;
  std::vector<int> active;

  int active_count() const;
};

/// `distortion[m]` is D_m for the count actually received.
StackedMeasurement stack_measurement(const ReconstructionFlags& flags, const std::vector<double>& y_hat,
                                     const std::vector<double>& distortion, const PlantModel& model);

/// One measurement update followed by the time update. On return P_prior
/// and x_pred hold P(k+1|k) and x̂(k+1|k). Only active rows enter the gain.
/// Throws NumericalError if the innovation covariance of the active rows is
/// not positive definite.
void kf_update(FilterState& fs, const StackedMeasurement& meas, const PlantModel& model,
               bool joseph = false);

/// Posterior covariance only, by sequential scalar updates. `rows[i]` are
/// observation rows with noise variances `noise[i]`. Equivalent to the batch
/// update because the stacked noise is diagonal.
Matrix posterior_covariance(const Matrix& P_prior, const std::vector<const RowVector*>& rows,
                            const std::vector<double>& noise);

}  // namespace wsnkf
