#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "wsnkf/codec.hpp"
#include "wsnkf/error.hpp"
#include "wsnkf/random.hpp"

using namespace wsnkf;

namespace {
const double kFactor = std::numbers::pi * std::numbers::e / 6.0;
}

TEST(Codec, StepSizeExamples) {
  const double h = gaussian_entropy_bits(1.0);
  EXPECT_NEAR(step_size_for_rate(1.0, h), 1.0, 1e-15);
  EXPECT_NEAR(h, 2.0471, 1e-4);
  EXPECT_NEAR(step_size_for_rate(1.0, 3.0), 0.5166, 1e-4);
}

TEST(Codec, QuantizeExamples) {
  const QuantizerSpec q{0.5, 6.0, 1.0};
  EXPECT_EQ(quantize(0.0, q), 0.0);
  EXPECT_DOUBLE_EQ(quantize(0.74, q), 0.5);
  EXPECT_DOUBLE_EQ(quantize(0.76, q), 1.0);
  EXPECT_DOUBLE_EQ(quantize(100.0, q), 6.0);
  EXPECT_DOUBLE_EQ(quantize(-100.0, q), -6.0);
  const QuantizerSpec odd{0.7, 6.0, 1.0};
  EXPECT_NEAR(quantize(100.0, odd), 0.7 * std::round(6.0 / 0.7), 1e-12);
}

TEST(Codec, QuantizerValidation) {
  EXPECT_THROW((QuantizerSpec{0.0, 6.0, 1.0}.validate()), ConfigError);
  EXPECT_THROW((QuantizerSpec{0.1, 3.0, 1.0}.validate()), ConfigError);
}

TEST(Codec, SdcDistortionExamples) {
  EXPECT_NEAR(sdc_distortion(1.0, 3.0), kFactor / 64.0, 1e-15);
  EXPECT_NEAR(sdc_distortion(1.0, 3.0), 0.02224, 1e-5);
  EXPECT_NEAR(sdc_distortion(1.0, 4.0), sdc_distortion(1.0, 3.0) / 4.0, 1e-15);
  EXPECT_NEAR(sdc_distortion(4.0, 3.0), 4.0 * sdc_distortion(1.0, 3.0), 1e-15);
}

TEST(Codec, SdcDistortionIsStepSquaredOverTwelve) {
  for (double var : {0.1, 1.0, 21.5, 322.0})
    for (double b = 0.5; b <= 12.0; b += 0.5) {
      const double d = step_size_for_rate(var, b);
      EXPECT_NEAR(sdc_distortion(var, b), d * d / 12.0, 1e-12 * var);
    }
}

TEST(Codec, MonteCarloQuantizationMatchesHighResolution) {
  RandomStream rng(99);
  const int n = 1000000;
  std::vector<double> samples(n);
  for (double& s : samples) s = rng.normal();
  for (int b = 3; b <= 8; ++b) {
    const QuantizerSpec q = QuantizerSpec::for_rate(1.0, b);
    double acc = 0.0;
    for (double y : samples) {
      const double e = y - quantize(y, q);
      acc += e * e;
    }
    EXPECT_NEAR(acc / n, sdc_distortion(1.0, b), 0.03 * sdc_distortion(1.0, b)) << "b=" << b;
  }
}

TEST(Codec, ZecRateExamples) {
  Eigen::Matrix2d indep;
  indep << 1.0, 0.0, 0.0, 1.0;
  EXPECT_DOUBLE_EQ(zec_rates(indep, {6.0, 5.0}, 0).dependent, 5.0);

  Eigen::Matrix2d full;
  full << 1.0, 1.0, 1.0, 1.0;
  EXPECT_DOUBLE_EQ(zec_rates(full, {6.0, 5.0}, 0).dependent, kZecRateFloor);

  Eigen::Matrix2d c9;
  c9 << 1.0, 0.9, 0.9, 1.0;
  const ZecRates r = zec_rates(c9, {6.0, 5.0}, 0);
  EXPECT_DOUBLE_EQ(r.dominant, 6.0);
  EXPECT_NEAR(5.0 - r.dependent, 0.5 * std::log2(1.0 / 0.19), 1e-12);
  EXPECT_NEAR(5.0 - r.dependent, 1.20, 5e-3);

  Eigen::Matrix2d bad;
  bad << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(zec_rates(bad, {6.0, 5.0}, 0), ConfigError);
}

TEST(Codec, MdcProfileExamples) {
  const MdcProfile full = mdc_profile(1.0, 8.0, 2, 4.0);
  EXPECT_NEAR(full.D[1], sdc_distortion(1.0, 4.0), 1e-15);
  EXPECT_NEAR(full.D[2], sdc_distortion(1.0, 4.0), 1e-15);

  const MdcProfile none = mdc_profile(1.0, 8.0, 2, 0.0);
  EXPECT_NEAR(none.D[2], sdc_distortion(1.0, 8.0), 1e-15);
  EXPECT_DOUBLE_EQ(none.D[0], 1.0);

  const MdcProfile p = mdc_profile(1.0, 9.0, 3, 1.0);
  EXPECT_NEAR(p.D[1], kFactor * std::exp2(-6.0), 1e-15);
  EXPECT_NEAR(p.D[1], 2.224e-2, 1e-5);
  EXPECT_NEAR(p.D[3], kFactor * std::exp2(-14.0), 1e-17);
  EXPECT_NEAR(p.D[3], 8.69e-5, 1e-7);

  EXPECT_THROW(mdc_profile(1.0, 9.0, 3, 3.5), ConfigError);
  EXPECT_THROW(mdc_profile(1.0, 9.0, 3, -0.1), ConfigError);
  EXPECT_THROW(SchemeSpec::mdc(9.0, 3, 4.0), ConfigError);
}

TEST(Codec, MdcProfileOrdering) {
  for (int J : {2, 3, 4})
    for (double b : {4.0, 6.0, 9.0}) {
      double prev_d1 = 1e300, prev_dJ = 0.0;
      for (double a = 0.0; a < b / J; a += 0.25) {
        const MdcProfile p = mdc_profile(2.0, b, J, a);
        for (int j = 1; j <= J; ++j) EXPECT_LT(p.D[j], p.D[j - 1]);
        EXPECT_LE(p.D[1], prev_d1);
        EXPECT_GE(p.D[J], prev_dJ);
        prev_d1 = p.D[1];
        prev_dJ = p.D[J];
      }
    }
}

TEST(Codec, ExpectedDistortionExamples) {
  EXPECT_DOUBLE_EQ(expected_scheme_distortion(SchemeSpec::sdc(5), 1.0, 2.0), sdc_distortion(2.0, 5));
  for (const SchemeSpec& s : {SchemeSpec::sdc(5), SchemeSpec::mdc(6, 2, 1), SchemeSpec::mdc(9, 3, 0)})
    EXPECT_DOUBLE_EQ(expected_scheme_distortion(s, 0.0, 2.0), 2.0);

  const MdcProfile p = mdc_profile(3.0, 8.0, 2, 1.0);
  const double want = 0.25 * 3.0 + 0.5 * p.D[1] + 0.25 * p.D[2];
  EXPECT_NEAR(expected_scheme_distortion(SchemeSpec::mdc(8.0, 2, 1.0), 0.5, 3.0), want, 1e-15);
}

TEST(Codec, ExpectedDistortionMonotoneInSuccess) {
  for (const SchemeSpec& s : {SchemeSpec::sdc(5), SchemeSpec::zec(5, 3, 1), SchemeSpec::mdc(6, 2, 1),
                              SchemeSpec::mdc(9, 3, 0), SchemeSpec::mdc(9, 3, 3)}) {
    double prev = 1e300;
    for (double p = 0.0; p <= 1.0; p += 0.01) {
      const double d = expected_scheme_distortion(s, p, 1.5);
      EXPECT_LE(d, prev + 1e-15);
      prev = d;
    }
  }
}

TEST(Codec, RealizedDistortion) {
  EXPECT_DOUBLE_EQ(realized_distortion(SchemeSpec::sdc(4), 0, 5.0), 5.0);
  EXPECT_DOUBLE_EQ(realized_distortion(SchemeSpec::sdc(4), 1, 5.0), sdc_distortion(5.0, 4));
  EXPECT_DOUBLE_EQ(realized_distortion(SchemeSpec::zec(4, 2.5, 0), 1, 5.0), sdc_distortion(5.0, 4));
  const MdcProfile p = mdc_profile(5.0, 9.0, 3, 1.0);
  for (int j = 0; j <= 3; ++j)
    EXPECT_NEAR(realized_distortion(SchemeSpec::mdc(9.0, 3, 1.0), j, 5.0), p.D[j], 1e-15);
}

TEST(Codec, SchemeNames) {
  for (SchemeKind k : {SchemeKind::Sdc, SchemeKind::Zec, SchemeKind::Mdc})
    EXPECT_EQ(scheme_kind_from_string(to_string(k)), k);
  EXPECT_THROW(scheme_kind_from_string("XYZ"), ConfigError);
  EXPECT_EQ(SchemeSpec::mdc(9, 3, 1).packets(), 3);
  EXPECT_DOUBLE_EQ(SchemeSpec::mdc(9, 3, 1).packet_bits(), 3.0);
}
