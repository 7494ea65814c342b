#pragma once

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <cstdint>
#include <random>

namespace fsar::rng {

// mt19937_64 and seed_seq are fully specified by the standard and the boost
// distributions are header code, so a (seed, stream, index) triple yields the
// same draws on every platform.
using Engine = std::mt19937_64;

enum class Stream : std::uint32_t {
  network = 1,
  truth = 2,
  covariates = 3,
  factors = 4,
  noise = 5,
  partition = 6,
  probes = 7,
  hadamard = 8,
  pick = 9,
};

inline Engine make_engine(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(index & 0xffffffffu),
                    static_cast<std::uint32_t>(index >> 32)};
  return Engine(seq);
}

inline double uniform(Engine& eng, double lo = 0.0, double hi = 1.0) {
  if (lo == hi) return lo;  // boost rejects until x < hi, which never happens here
  return boost::random::uniform_real_distribution<double>(lo, hi)(eng);
}

inline double normal(Engine& eng, double mean = 0.0, double sd = 1.0) {
  return boost::random::normal_distribution<double>(mean, sd)(eng);
}

inline bool bernoulli(Engine& eng, double p) {
  return boost::random::bernoulli_distribution<double>(p)(eng);
}

inline int uniform_int(Engine& eng, int lo, int hi) {
  return boost::random::uniform_int_distribution<int>(lo, hi)(eng);
}

}  // namespace fsar::rng
