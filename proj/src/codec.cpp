#include "wsnkf/codec.hpp"

#include <algorithm>
#include <cmath>

#include "wsnkf/error.hpp"

namespace wsnkf {

double gaussian_entropy_bits(double source_var) {
  return 0.5 * std::log2(2.0 * std::numbers::pi * std::numbers::e * source_var);
}

double step_size_for_rate(double source_var, double b) {
  if (!(source_var > 0.0) || !(b > 0.0))
    throw ContractViolation("step_size_for_rate: variance and rate must be > 0");
  return std::exp2(gaussian_entropy_bits(source_var) - b);
}

void QuantizerSpec::validate() const {
  if (!(step > 0.0)) throw ConfigError("quantizer step must be > 0");
  if (!(support_sigma >= 4.0)) throw ConfigError("quantizer support must be at least 4 sigma");
  if (!(source_var > 0.0)) throw ConfigError("quantizer source variance must be > 0");
}

QuantizerSpec QuantizerSpec::for_rate(double source_var, double b, double support_sigma) {
  return QuantizerSpec{step_size_for_rate(source_var, b), support_sigma, source_var};
}

double quantize(double y, const QuantizerSpec& spec) {
  const double limit = spec.support_sigma * std::sqrt(spec.source_var);
  const double clipped = std::clamp(y, -limit, limit);
  // std::round rounds halfway cases away from zero.
  return std::round(clipped / spec.step) * spec.step;
}

double sdc_distortion(double source_var, double b) {
  if (!(source_var > 0.0) || !(b > 0.0))
    throw ContractViolation("sdc_distortion: variance and rate must be > 0");
  return kHighResolutionFactor * source_var * std::exp2(-2.0 * b);
}

const char* to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Sdc: return "SDC";
    case SchemeKind::Zec: return "ZEC";
    case SchemeKind::Mdc: return "MDC";
  }
  return "?";
}

SchemeKind scheme_kind_from_string(const std::string& s) {
  if (s == "SDC") return SchemeKind::Sdc;
  if (s == "ZEC") return SchemeKind::Zec;
  if (s == "MDC") return SchemeKind::Mdc;
  throw ConfigError("unknown coding scheme '" + s + "' (expected SDC, ZEC or MDC)");
}

SchemeSpec SchemeSpec::sdc(double b) { return SchemeSpec{SchemeKind::Sdc, b, b, 1, 0.0, -1}; }

SchemeSpec SchemeSpec::mdc(double b, int J, double a) {
  if (J < 2) throw ConfigError("MDC needs at least two descriptions");
  if (a < 0.0 || a > b / J + 1e-12)
    throw ConfigError("MDC redundancy must lie in [0, b/J]");
  return SchemeSpec{SchemeKind::Mdc, b, b, J, a, -1};
}

SchemeSpec SchemeSpec::zec(double b, double coded_rate, int dominant) {
  return SchemeSpec{SchemeKind::Zec, b, coded_rate, 1, 0.0, dominant};
}

ZecRates zec_rates(const Eigen::Matrix2d& joint_cov, const std::array<double, 2>& nominal,
                   int dominant) {
  if (dominant != 0 && dominant != 1) throw ContractViolation("zec_rates: dominant must be 0 or 1");
  const double v0 = joint_cov(0, 0);
  const double v1 = joint_cov(1, 1);
  const double c = 0.5 * (joint_cov(0, 1) + joint_cov(1, 0));
  if (!(v0 > 0.0) || !(v1 > 0.0)) throw ConfigError("zec_rates: variances must be > 0");
  if (c * c > v0 * v1 * (1.0 + 1e-12))
    throw ConfigError("zec_rates: joint covariance is not positive semidefinite");

  const int dependent = 1 - dominant;
  const double var_dep = dependent == 0 ? v0 : v1;
  const double var_dom = dominant == 0 ? v0 : v1;
  const double conditional = std::max(0.0, var_dep - c * c / var_dom);

  ZecRates out;
  out.dominant = nominal[dominant];
  if (conditional <= 0.0) {
    out.dependent = kZecRateFloor;
  } else {
    const double saving = 0.5 * std::log2(var_dep / conditional);
    out.dependent = std::max(kZecRateFloor, nominal[dependent] - saving);
  }
  return out;
}

double mdc_effective_rate(double b, int J, double a, int received) {
  return a + received * (b / J - a);
}

MdcProfile mdc_profile(double source_var, double b, int J, double a) {
  if (J < 2) throw ConfigError("mdc_profile: J must be >= 2");
  if (a < 0.0 || a > b / J + 1e-12) throw ConfigError("mdc_profile: redundancy must lie in [0, b/J]");
  MdcProfile p;
  p.per_description_rate = b / J;
  p.D.resize(J + 1);
  p.D[0] = source_var;
  for (int j = 1; j <= J; ++j)
    p.D[j] = kHighResolutionFactor * source_var * std::exp2(-2.0 * mdc_effective_rate(b, J, a, j));
  return p;
}

double realized_distortion(const SchemeSpec& scheme, int received, double source_var) {
  if (received <= 0) return source_var;
  if (scheme.kind == SchemeKind::Mdc) {
    const int j = std::min(received, scheme.descriptions);
    return kHighResolutionFactor * source_var *
           std::exp2(-2.0 * mdc_effective_rate(scheme.rate, scheme.descriptions, scheme.redundancy, j));
  }
  return sdc_distortion(source_var, scheme.rate);
}

double binomial_pmf(int J, int j, double p) {
  if (j < 0 || j > J) return 0.0;
  double coeff = 1.0;
  for (int i = 1; i <= j; ++i) coeff = coeff * (J - j + i) / i;
  return coeff * std::pow(p, j) * std::pow(1.0 - p, J - j);
}

double expected_scheme_distortion(const SchemeSpec& scheme, double per_packet_success,
                                  double source_var) {
  const double p = per_packet_success;
  if (!(p >= 0.0 && p <= 1.0)) throw ContractViolation("expected_scheme_distortion: λ must lie in [0,1]");
  if (scheme.kind != SchemeKind::Mdc)
    return p * sdc_distortion(source_var, scheme.rate) + (1.0 - p) * source_var;
  const MdcProfile profile =
      mdc_profile(source_var, scheme.rate, scheme.descriptions, scheme.redundancy);
  double d = 0.0;
  for (int j = 0; j <= scheme.descriptions; ++j)
    d += binomial_pmf(scheme.descriptions, j, p) * profile.D[j];
  return d;
}

}  // namespace wsnkf
