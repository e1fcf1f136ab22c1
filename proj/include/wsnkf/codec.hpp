#pragma once

#include <array>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace wsnkf {

/// πe/6: ratio between the high-resolution distortion of a uniform
/// quantizer on a Gaussian source and σ²·2^{-2b}.
inline constexpr double kHighResolutionFactor = std::numbers::pi * std::numbers::e / 6.0;

/// Differential entropy of N(0, var) in bits.
double gaussian_entropy_bits(double source_var);

/// Step size Δ = 2^(h - b) of the uniform quantizer whose entropy-coded
/// output has rate b.
double step_size_for_rate(double source_var, double b);

struct QuantizerSpec {
  double step = 1.0;
  double support_sigma = 6.0;
  double source_var = 1.0;

  void validate() const;
  static QuantizerSpec for_rate(double source_var, double b, double support_sigma = 6.0);
};

/// Mid-tread uniform quantizer; inputs beyond ±support_sigma·σ are clipped
/// into the extreme cell. Ties round away from zero.
double quantize(double y, const QuantizerSpec& spec);

/// High-resolution distortion (πe/6)·σ²·2^{-2b} = Δ²/12.
double sdc_distortion(double source_var, double b);

enum class SchemeKind { Sdc, Zec, Mdc };

const char* to_string(SchemeKind kind);
SchemeKind scheme_kind_from_string(const std::string& s);

/// Coding scheme of one sensor for one step.
///
/// `rate` is the nominal rate b, which fixes the quantizer. `coded_rate` is
/// the number of bits actually sent: equal to `rate` except for a ZEC
/// dependent sensor, whose entropy coder conditions on `dominant`.
struct SchemeSpec {
  SchemeKind kind = SchemeKind::Sdc;
  double rate = 8.0;
  double coded_rate = 8.0;
  int descriptions = 1;    // J, MDC only
  double redundancy = 0.0; // shared bits a, MDC only
  int dominant = -1;       // ZEC only

  static SchemeSpec sdc(double b);
  static SchemeSpec mdc(double b, int J, double a);
  static SchemeSpec zec(double b, double coded_rate, int dominant);

  int packets() const { return kind == SchemeKind::Mdc ? descriptions : 1; }
  double packet_bits() const { return coded_rate / packets(); }

  bool operator==(const SchemeSpec&) const = default;
};

struct ZecRates {
  double dominant = 0.0;
  double dependent = 0.0;
};

inline constexpr double kZecRateFloor = 0.5;

/// Rates under asymmetric zero-error coding of the pair (y_0, y_1) described
/// by `joint_cov`. The dominant sensor keeps its nominal rate; the other
/// codes relative to it and saves ½·log₂(σ²/σ²_cond) bits, floored at
/// kZecRateFloor.
ZecRates zec_rates(const Eigen::Matrix2d& joint_cov, const std::array<double, 2>& nominal,
                   int dominant);

struct MdcProfile {
  double per_description_rate = 0.0;
  std::vector<double> D;  // D[j]: distortion with j descriptions received
};

/// Shared-refinement MDC: each of the J descriptions carries a common layer
/// of `a` bits plus an independent refinement of b/J - a bits, so
/// D[j] = (πe/6)·σ²·2^{-2(a + j(b/J - a))} for j ≥ 1 and D[0] = σ².
MdcProfile mdc_profile(double source_var, double b, int J, double a);

/// Rate whose SDC distortion equals D[j] of the profile; used to synthesize
/// a reconstruction from j received descriptions.
double mdc_effective_rate(double b, int J, double a, int received);

/// Distortion of the reconstruction available after `received` packets of
/// `scheme` arrived (σ² when nothing usable arrived).
double realized_distortion(const SchemeSpec& scheme, int received, double source_var);

/// Expected measurement-domain distortion given the per-packet success
/// probability (the full packet for SDC/ZEC, one description for MDC).
double expected_scheme_distortion(const SchemeSpec& scheme, double per_packet_success,
                                  double source_var);

/// Binomial probability of exactly j successes in J i.i.d. trials.
double binomial_pmf(int J, int j, double p);

}  // namespace wsnkf
