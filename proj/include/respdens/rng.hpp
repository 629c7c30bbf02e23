#pragma once

#include <cstdint>
#include <limits>

namespace respdens {

//! SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z)
{
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

//! Counter-based generator: the i-th output is a pure function of
//! (key, i), where the key is derived from (master seed, replication,
//! stream). Streams never share state, so replications can run on any
//! number of workers with identical results.
class CounterRng
{
public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t master_seed, std::uint64_t replication,
             std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return at(counter_++); }
  result_type at(std::uint64_t index) const
  {
    return mix64(key_ + 0x9e3779b97f4a7c15ULL * (index + 1));
  }

  //! Uniform on the open interval (0, 1).
  double uniform01()
  {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t key() const { return key_; }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

//! Seed for replication `rep` of a study keyed by `master_seed`.
std::uint64_t replication_seed(std::uint64_t master_seed, std::uint64_t rep);

} // namespace respdens
