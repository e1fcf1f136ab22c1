#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

namespace wsnkf {

/// A seeded random source for one noise origin.
///
/// Streams are derived from a master seed and a name ("plant", "sensor/0",
/// "outcomes", ...) so that adding a new noise source never perturbs the
/// realizations of existing ones. Uniform and Gaussian variates are produced
/// from the raw 64-bit engine output with fixed arithmetic, which keeps runs
/// reproducible across standard-library implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  static RandomStream derive(std::uint64_t master_seed, std::string_view name,
                             std::uint64_t index = 0);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

std::uint64_t mix_seed(std::uint64_t value);
std::uint64_t hash_name(std::string_view name);

}  // namespace wsnkf
