#pragma once

#include <cstdint>
#include <random>

namespace hpl {

// Independent generator per (seed, stream_id). Replicate i of an experiment
// always draws from stream i, so results do not depend on the worker count.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  // Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }
  double normal() { return normal_(engine_); }
  double exponential();
  double gamma(double shape, double scale);
  std::uint64_t poisson(double mean);

  // Child stream keyed by (stream_id, key); used for auxiliary loops such as
  // permutation tests that must not perturb the parent sequence.
  RngStream substream(std::uint64_t key) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace hpl
