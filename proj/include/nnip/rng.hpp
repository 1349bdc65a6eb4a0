#pragma once

#include <cstdint>
#include <random>

namespace nnip {

// std::uniform_*_distribution differs between standard libraries, so draws are
// derived directly from the engine output to keep seeded runs portable.
class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// uniform in [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// uniform in [0, bound), unbiased by rejection
  std::uint64_t index(std::uint64_t bound)
  {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t       v;
    do
      v = engine_();
    while (v >= limit);
    return v % bound;
  }

private:
  std::mt19937_64 engine_;
};

template <typename Seq>
void shuffle(Seq& seq, Rng& rng)
{
  for (std::size_t i = seq.size(); i > 1; --i)
  {
    const auto j = static_cast<std::size_t>(rng.index(i));
    std::swap(seq[i - 1], seq[j]);
  }
}

} // namespace nnip
