#include "wsnkf/analysis.hpp"

#include <cmath>

#include "wsnkf/codec.hpp"
#include "wsnkf/error.hpp"

namespace wsnkf {

namespace {

Matrix stacked_rows(const PlantModel& model, const std::vector<int>& theta) {
  int p = 0;
  for (int t : theta) p += t ? 1 : 0;
  Matrix C(p, model.dim());
  int i = 0;
  for (int m = 0; m < model.sensor_count(); ++m)
    if (theta[m]) C.row(i++) = model.sensors[m].C;
  return C;
}

}  // namespace

bool pattern_full_rank(const PlantModel& model, const std::vector<int>& theta) {
  const Matrix C = stacked_rows(model, theta);
  if (C.rows() < model.dim()) return false;
  Eigen::FullPivLU<Matrix> lu(C);
  lu.setThreshold(1e-10);
  return lu.rank() == model.dim();
}

BoundParams bound_constants(const PlantModel& model) {
  const int M = model.sensor_count();
  if (M > 20) throw ContractViolation("bound_constants: too many sensors to enumerate patterns");
  BoundParams out;
  bool any = false;
  for (unsigned mask = 1; mask < (1u << M); ++mask) {
    std::vector<int> theta(M);
    for (int m = 0; m < M; ++m) theta[m] = (mask >> m) & 1u;
    if (!pattern_full_rank(model, theta)) continue;
    any = true;
    const Matrix C = stacked_rows(model, theta);
    const Matrix pinv = C.completeOrthogonalDecomposition().pseudoInverse();
    const Matrix gram = symmetrize(pinv.transpose() * pinv);
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
    out.c = std::max(out.c, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  if (!any) throw NumericalError("unobservable under all patterns: no θ gives a full-rank stacked C");

  const double a = spectral_norm(model.A);
  out.A_norm2 = a * a;
  const auto var = measurement_variances(model);
  double quant = 0.0, noise = 0.0;
  for (int m = 0; m < M; ++m) {
    quant += var[m] * std::exp2(-2.0 * model.sensors[m].min_rate());
    noise += model.sensors[m].R;
  }
  out.varpi = out.A_norm2 * (kHighResolutionFactor * quant + noise);
  return out;
}

std::vector<double> bound_curve(const BoundParams& params, const Matrix& P0, const Matrix& Q, int k_max) {
  const double rho = params.decay_rate;
  if (!(rho >= 0.0 && rho < 1.0)) throw ContractViolation("bound_curve: decay rate must lie in [0, 1)");
  const double head = P0.trace();
  const double drive = params.varpi * params.c + Q.trace();
  std::vector<double> out(k_max + 1);
  double rk = 1.0;
  for (int k = 0; k <= k_max; ++k) {
    out[k] = rk * head + drive / (1.0 - rho) * (1.0 - rk);
    rk *= rho;
  }
  return out;
}

double certified_nu_bound(const BerModel& ber_model, double u_min, double max_bits, int sensors) {
  if (!(u_min > 0.0)) return 1.0;
  const double beta_max = ber(0.0, ber_model);
  const double p_min = std::pow(1.0 - beta_max, max_bits);
  return 1.0 - std::pow(p_min, sensors);
}

void MetricsAccumulator::add(const TraceRecord& r) {
  ++n_;
  cost_ += r.cost_total;
  trace_ += r.trace_post;
  err_ += r.sq_error;
  energy_ += r.energy;
  for (const auto& rel : r.relays) {
    if (rel.mu > 0.0) {
      ++slots_;
      delivered_ += rel.gamma_tilde ? 1 : 0;
    }
  }
}

RunMetrics MetricsAccumulator::result() const {
  if (n_ == 0) throw ContractViolation("compute_metrics: empty trace");
  RunMetrics m;
  m.steps = n_;
  const double n = static_cast<double>(n_);
  m.V_bar = cost_ / n;
  m.phi = trace_ / n;
  m.D_emp = err_ / n;
  m.E_total = energy_;
  m.relay_slots = slots_;
  m.relay_delivered = delivered_;
  if (slots_ > 0) m.relay_efficiency = static_cast<double>(delivered_) / static_cast<double>(slots_);
  return m;
}

RunMetrics compute_metrics(std::span<const TraceRecord> trace) {
  MetricsAccumulator acc;
  for (const auto& r : trace) acc.add(r);
  return acc.result();
}

}  // namespace wsnkf
