#pragma once

#include <complex>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "wsnkf/linalg.hpp"
#include "wsnkf/random.hpp"

namespace wsnkf {

using Complex = std::complex<double>;

double db_to_power(double db);
double power_to_db(double power);

/// First-order autoregressive Rayleigh fading, g(k) = a g(k-1) + e(k).
///
/// The recursion runs on a normalized gain; the physical power gain is
/// |g|² scaled by 10^(mean_power_dB/10). With noise_var = (1 - a²)/2 the
/// normalized process has unit mean power and mean_power_dB is exactly the
/// mean physical power gain.
struct ArLinkModel {
  double a = 0.999;
  double noise_var = (1.0 - 0.999 * 0.999) / 2.0;  // per real/imag component
  double mean_power_dB = 0.0;

  void validate() const;
  double scale() const { return db_to_power(mean_power_dB); }
  double power_gain(Complex g) const { return std::norm(g) * scale(); }
  /// E|g|² of the normalized recursion: 2·noise_var/(1 - a²).
  double stationary_power() const { return 2.0 * noise_var / (1.0 - a * a); }

  /// Parameters whose stationary mean power gain is `mean_power_dB`.
  static ArLinkModel calibrated(double a, double mean_power_dB);
};

enum class LinkRole { SensorGw, SensorRelay, RelayGw };

struct LinkId {
  LinkRole role = LinkRole::SensorGw;
  int sensor = -1;
  int relay = -1;
};

struct LinkState {
  Complex g{0.0, 0.0};
  LinkId id;
};

LinkState ar_step(const LinkState& link, const ArLinkModel& model, RandomStream& rng);
LinkState ar_step(const LinkState& link, const ArLinkModel& model, Complex innovation);

/// Draws the initial gain from the stationary distribution of the recursion.
LinkState ar_initial(const LinkId& id, const ArLinkModel& model, RandomStream& rng);

struct BerModel {
  enum class Kind { Constant, Exponential, QFunction };
  Kind kind = Kind::Exponential;
  double value = 2.5e-16;  // β₀ for Constant, N₀ otherwise

  static BerModel constant(double beta0) { return {Kind::Constant, beta0}; }
  static BerModel exponential(double n0 = 2.5e-16) { return {Kind::Exponential, n0}; }
  static BerModel q_function(double n0 = 2.5e-16) { return {Kind::QFunction, n0}; }
  void validate() const;
};

/// Bit-error rate at a received power u·|g|².
double ber(double received_power, const BerModel& model);

/// Probability that a packet of `bits` bits arrives error free. Zero power
/// means no transmission, so the result is 0.
double packet_success(double u, double g2, double bits, const BerModel& model);

struct FsmcModel {
  std::vector<double> thresholds;   // Γ₀ = 0 < Γ₁ < ... < Γ_N = ∞
  std::vector<double> state_gains;  // representative power gain per state
  Matrix P;                         // tridiagonal transition matrix

  int size() const { return static_cast<int>(state_gains.size()); }
  /// Index n with Γ_n ≤ g2 < Γ_{n+1}.
  int state_of(double g2) const;
  void validate() const;
};

/// Equiprobable-partition FSMC estimated from a power-gain trace by
/// transition counting. Transitions skipping more than one state are folded
/// into the nearest neighbour cell. Quantile ties collapse states, so the
/// result may have fewer than `states` states (one for a constant trace).
FsmcModel build_fsmc_from_trace(std::span<const double> gain_trace, int states);

/// A discrete belief over the next physical power gain of a link.
struct GainBelief {
  std::vector<std::pair<double, double>> support;  // (power gain, probability)

  static GainBelief point(double g2) { return GainBelief{{{g2, 1.0}}}; }
  double mean() const;
};

enum class PredictionMode { Known, Predicted, Fixed, Fsmc };

struct PredictionSpec {
  PredictionMode mode = PredictionMode::Predicted;
  double fixed_dB = -110.0;
};

/// Known uses the oracle `next_g`; Predicted the conditional mean a·g; Fixed a
/// constant power gain. FSMC beliefs come from fsmc_belief instead.
GainBelief predict_gain(const LinkState& link, const ArLinkModel& model, const PredictionSpec& spec,
                        std::optional<Complex> next_g = std::nullopt);

/// Row of P for the state containing `current_g2`, over the state gains.
/// Zero-probability neighbours are dropped.
GainBelief fsmc_belief(double current_g2, const FsmcModel& model);

/// Expected packet success under a gain belief.
double expected_success(double u, const GainBelief& belief, double bits, const BerModel& model);

}  // namespace wsnkf
