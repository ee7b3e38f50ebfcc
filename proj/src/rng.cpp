#include "hpl/rng.hpp"

#include <cmath>

#include "hpl/error.hpp"

namespace hpl {

namespace {

std::uint64_t splitmix(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed ^ 0x6a09e667f3bcc908ULL;
  std::uint64_t t = stream ^ 0xbb67ae8584caa73bULL;
  std::uint64_t a = splitmix(s), b = splitmix(t), c = splitmix(s) ^ splitmix(t);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

double RngStream::exponential() { return -std::log(uniform()); }

double RngStream::gamma(double shape, double scale) {
  require(shape > 0 && scale > 0, ErrorKind::domain, "gamma: shape and scale must be positive");
  std::gamma_distribution<double> d(shape, scale);
  return d(engine_);
}

std::uint64_t RngStream::poisson(double mean) {
  require(mean >= 0 && std::isfinite(mean), ErrorKind::domain, "poisson: bad mean");
  if (mean == 0) return 0;
  std::poisson_distribution<std::uint64_t> d(mean);
  return d(engine_);
}

RngStream RngStream::substream(std::uint64_t key) const {
  std::uint64_t k = stream_id_ * 0x9e3779b97f4a7c15ULL + key + 1;
  return RngStream(seed_ ^ splitmix(k), stream_id_ + (key << 40) + 0x5bd1e995ULL);
}

}  // namespace hpl
