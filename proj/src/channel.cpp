#include "wsnkf/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wsnkf/error.hpp"

namespace wsnkf {

namespace {
// Coefficients closer to one than this behave as a random walk over any
// practical horizon and are rejected.
constexpr double kMaxArCoefficient = 1.0 - 1e-6;
}  // namespace

double db_to_power(double db) { return std::pow(10.0, db / 10.0); }
double power_to_db(double power) { return 10.0 * std::log10(power); }

void ArLinkModel::validate() const {
  if (!(a >= 0.0 && a <= kMaxArCoefficient))
    throw ConfigError("AR coefficient a must lie in [0, 1), got " + std::to_string(a));
  if (!(noise_var > 0.0)) throw ConfigError("AR innovation variance must be > 0");
  if (!std::isfinite(mean_power_dB)) throw ConfigError("mean_power_dB must be finite");
}

ArLinkModel ArLinkModel::calibrated(double a, double mean_power_dB) {
  return ArLinkModel{a, (1.0 - a * a) / 2.0, mean_power_dB};
}

LinkState ar_step(const LinkState& link, const ArLinkModel& model, Complex innovation) {
  return LinkState{model.a * link.g + innovation, link.id};
}

LinkState ar_step(const LinkState& link, const ArLinkModel& model, RandomStream& rng) {
  const double sd = std::sqrt(model.noise_var);
  const double re = sd * rng.normal();
  const double im = sd * rng.normal();
  return ar_step(link, model, Complex(re, im));
}

LinkState ar_initial(const LinkId& id, const ArLinkModel& model, RandomStream& rng) {
  const double sd = std::sqrt(model.stationary_power() / 2.0);
  const double re = sd * rng.normal();
  const double im = sd * rng.normal();
  return LinkState{Complex(re, im), id};
}

void BerModel::validate() const {
  if (kind == Kind::Constant) {
    if (!(value >= 0.0 && value <= 1.0)) throw ConfigError("constant BER must lie in [0, 1]");
  } else if (!(value > 0.0)) {
    throw ConfigError("BER noise level N0 must be > 0");
  }
}

double ber(double received_power, const BerModel& model) {
  if (!(received_power >= 0.0))
    throw ContractViolation("ber: received power must be >= 0");
  switch (model.kind) {
    case BerModel::Kind::Constant:
      return model.value;
    case BerModel::Kind::Exponential:
      return std::min(0.5, 0.5 * std::exp(-received_power / (2.0 * model.value)));
    case BerModel::Kind::QFunction:
      // BPSK: Q(sqrt(2x/N0)) = erfc(sqrt(x/N0)) / 2
      return 0.5 * std::erfc(std::sqrt(received_power / model.value));
  }
  return 0.5;
}

double packet_success(double u, double g2, double bits, const BerModel& model) {
  if (!(bits > 0.0)) throw ContractViolation("packet_success: bits must be > 0");
  if (u <= 0.0) return 0.0;
  return std::pow(1.0 - ber(u * g2, model), bits);
}

int FsmcModel::state_of(double g2) const {
  // thresholds[0] = 0 and thresholds.back() = inf bracket every state.
  const auto it = std::upper_bound(thresholds.begin() + 1, thresholds.end() - 1, g2);
  return static_cast<int>(it - (thresholds.begin() + 1));
}

void FsmcModel::validate() const {
  const int N = size();
  if (N < 1) throw ConfigError("FSMC needs at least one state");
  if (static_cast<int>(thresholds.size()) != N + 1)
    throw ConfigError("FSMC needs N+1 thresholds");
  if (thresholds.front() != 0.0 || !std::isinf(thresholds.back()))
    throw ConfigError("FSMC thresholds must start at 0 and end at infinity");
  for (int n = 0; n < N; ++n)
    if (!(thresholds[n] < thresholds[n + 1]))
      throw ConfigError("FSMC thresholds must be strictly increasing");
  for (int n = 1; n < N; ++n)
    if (!(state_gains[n - 1] < state_gains[n]))
      throw ConfigError("FSMC state gains must be strictly increasing");
  if (P.rows() != N || P.cols() != N) throw ConfigError("FSMC transition matrix must be N×N");
  for (int n = 0; n < N; ++n) {
    double sum = 0.0;
    for (int j = 0; j < N; ++j) {
      if (P(n, j) < 0.0) throw ConfigError("FSMC transition probabilities must be >= 0");
      if (std::abs(n - j) > 1 && P(n, j) != 0.0)
        throw ConfigError("FSMC transition matrix must be tridiagonal");
      sum += P(n, j);
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ConfigError("FSMC rows must sum to one");
  }
}

FsmcModel build_fsmc_from_trace(std::span<const double> gain_trace, int states) {
  if (states < 2) throw ConfigError("FSMC construction needs at least 2 states");
  const std::size_t L = gain_trace.size();
  if (L < 100 * static_cast<std::size_t>(states))
    throw NumericalError("FSMC estimation needs a trace of at least 100·N samples, got " +
                         std::to_string(L));

  std::vector<double> sorted(gain_trace.begin(), gain_trace.end());
  std::sort(sorted.begin(), sorted.end());

  // Equal-frequency interval edges, deduplicated when quantiles tie.
  std::vector<double> inner;
  for (int i = 1; i < states; ++i) {
    const std::size_t idx = i * L / states;
    const double edge = 0.5 * (sorted[idx - 1] + sorted[idx]);
    if (edge > 0.0 && (inner.empty() || edge > inner.back())) inner.push_back(edge);
  }

  FsmcModel model;
  auto rebuild = [&] {
    model.thresholds.assign(1, 0.0);
    model.thresholds.insert(model.thresholds.end(), inner.begin(), inner.end());
    model.thresholds.push_back(std::numeric_limits<double>::infinity());
    model.state_gains.assign(inner.size() + 1, 0.0);
  };
  rebuild();

  // Drop edges that leave an interval empty.
  std::vector<std::size_t> occupancy(model.state_gains.size(), 0);
  for (double g : gain_trace) ++occupancy[model.state_of(g)];
  for (std::size_t n = occupancy.size(); n-- > 0;) {
    if (occupancy[n] == 0 && !inner.empty()) inner.erase(inner.begin() + (n == 0 ? 0 : n - 1));
  }
  rebuild();

  const int N = model.size();
  std::vector<int> labels(L);
  std::vector<double> sums(N, 0.0);
  std::vector<std::size_t> counts(N, 0);
  for (std::size_t t = 0; t < L; ++t) {
    labels[t] = model.state_of(gain_trace[t]);
    sums[labels[t]] += gain_trace[t];
    ++counts[labels[t]];
  }
  for (int n = 0; n < N; ++n) model.state_gains[n] = sums[n] / static_cast<double>(counts[n]);

  Matrix transitions = Matrix::Zero(N, N);
  for (std::size_t t = 0; t + 1 < L; ++t) {
    const int from = labels[t];
    int to = labels[t + 1];
    to = std::clamp(to, from - 1, from + 1);
    transitions(from, to) += 1.0;
  }
  model.P = Matrix::Zero(N, N);
  for (int n = 0; n < N; ++n) {
    const double total = transitions.row(n).sum();
    if (total > 0.0) {
      model.P.row(n) = transitions.row(n) / total;
    } else {
      model.P(n, n) = 1.0;
    }
  }
  model.validate();
  return model;
}

double GainBelief::mean() const {
  double m = 0.0;
  for (const auto& [g2, w] : support) m += g2 * w;
  return m;
}

GainBelief predict_gain(const LinkState& link, const ArLinkModel& model, const PredictionSpec& spec,
                        std::optional<Complex> next_g) {
  switch (spec.mode) {
    case PredictionMode::Known:
      if (!next_g) throw ContractViolation("predict_gain: known mode needs the next gain");
      return GainBelief::point(model.power_gain(*next_g));
    case PredictionMode::Predicted:
      return GainBelief::point(model.power_gain(model.a * link.g));
    case PredictionMode::Fixed:
      return GainBelief::point(db_to_power(spec.fixed_dB));
    case PredictionMode::Fsmc:
      throw ContractViolation("predict_gain: FSMC beliefs come from fsmc_belief");
  }
  return GainBelief{};
}

GainBelief fsmc_belief(double current_g2, const FsmcModel& model) {
  const int n = model.state_of(current_g2);
  GainBelief belief;
  for (int j = std::max(0, n - 1); j <= std::min(model.size() - 1, n + 1); ++j) {
    if (model.P(n, j) > 0.0) belief.support.emplace_back(model.state_gains[j], model.P(n, j));
  }
  return belief;
}

double expected_success(double u, const GainBelief& belief, double bits, const BerModel& model) {
  double p = 0.0;
  for (const auto& [g2, w] : belief.support) p += w * packet_success(u, g2, bits, model);
  return p;
}

}  // namespace wsnkf
