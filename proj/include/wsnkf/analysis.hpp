#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "wsnkf/channel.hpp"
#include "wsnkf/plant.hpp"
#include "wsnkf/trace.hpp"

namespace wsnkf {

struct BoundParams {
  double c = 0.0;           // max ‖C†ᵀC†‖ over full-rank patterns
  double varpi = 0.0;       // ϖ
  double decay_rate = 0.0;  // ρ
  double A_norm2 = 0.0;     // ‖A‖²
};

/// Full-rank test of the stacked rows selected by `theta`.
bool pattern_full_rank(const PlantModel& model, const std::vector<int>& theta);

/// c, ϖ and ‖A‖² for `model`; decay_rate is left at 0. ϖ uses the smallest
/// rate of each sensor and the measurement variances of the model.
/// Throws NumericalError if no pattern gives a full-rank stacked C.
BoundParams bound_constants(const PlantModel& model);

/// ρ^k tr P0 + (ϖc + tr Q)/(1-ρ)·(1-ρ^k) for k = 0..k_max.
std::vector<double> bound_curve(const BoundParams& params, const Matrix& P0, const Matrix& Q, int k_max);

/// Certified upper bound on ν for SDC-only operation with every sensor power
/// at least u_min > 0 and at most `max_bits` per packet: each packet succeeds
/// with probability at least (1 - β_max)^max_bits, where β_max is the BER at
/// zero received power, and all M packets arriving gives full rank.
double certified_nu_bound(const BerModel& ber, double u_min, double max_bits, int sensors);

struct RunMetrics {
  std::size_t steps = 0;
  double V_bar = 0.0;
  double phi = 0.0;
  double D_emp = 0.0;
  double E_total = 0.0;
  std::size_t relay_slots = 0;
  std::size_t relay_delivered = 0;
  std::optional<double> relay_efficiency;
};

/// Streaming form of compute_metrics; adding records one at a time gives the
/// same sums in the same order as the batch call.
class MetricsAccumulator {
 public:
  void add(const TraceRecord& r);
  RunMetrics result() const;

 private:
  std::size_t n_ = 0;
  double cost_ = 0.0, trace_ = 0.0, err_ = 0.0, energy_ = 0.0;
  std::size_t slots_ = 0, delivered_ = 0;
};

RunMetrics compute_metrics(std::span<const TraceRecord> trace);

}  // namespace wsnkf
