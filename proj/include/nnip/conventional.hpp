#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "nnip/block_spec.hpp"
#include "nnip/model.hpp"
#include "nnip/references.hpp"

namespace nnip {

// HEVC numbering: 0 planar, 1 DC, 2..34 angular (10 pure horizontal,
// 26 pure vertical). No reference smoothing or boundary filters.
inline constexpr int kPlanarMode  = 0;
inline constexpr int kDcMode      = 1;
inline constexpr int kHorizontal  = 10;
inline constexpr int kVertical    = 26;
inline constexpr int kHevcModes   = 35;

inline constexpr std::array<int, 33> kAngleTable = {32,  26,  21,  17,  13,  9,  5,  2,  0,  -2, -5,
                                                    -9,  -13, -17, -21, -26, -32, -26, -21, -17, -13, -9,
                                                    -5,  -2,  0,   2,   5,   9,  13, 17, 21, 26, 32};

/// 256·32 / |angle| for the negative angles, used to project the side reference.
inline constexpr int inverse_angle(int angle)
{
  switch (angle)
  {
  case -2: return -4096;
  case -5: return -1638;
  case -9: return -910;
  case -13: return -630;
  case -17: return -482;
  case -21: return -390;
  case -26: return -315;
  case -32: return -256;
  default: return 0;
  }
}

/// Ordered list of conventional modes taking part in mode decision.
struct ConventionalModeSet
{
  std::vector<int> modes;

  static ConventionalModeSet hevc35()
  {
    ConventionalModeSet set;
    for (int i = 0; i < kHevcModes; ++i)
      set.modes.push_back(i);
    return set;
  }

  static ConventionalModeSet planar_dc() { return {{kPlanarMode, kDcMode}}; }

  std::size_t size() const { return modes.size(); }

  void validate() const
  {
    bool planar = false, dc = false;
    for (int mode : modes)
    {
      if (mode < 0 || mode >= kHevcModes)
        throw std::invalid_argument("conventional mode " + std::to_string(mode) + " outside 0..34");
      planar = planar || mode == kPlanarMode;
      dc     = dc || mode == kDcMode;
    }
    if (!planar || !dc)
      throw std::invalid_argument("conventional mode set must contain planar and DC");
  }
};

namespace detail {

inline PredBlock predict_dc(const OneLineRefs& refs, std::size_t N)
{
  double sum = 0.0;
  for (std::size_t i = 0; i < N; ++i)
    sum += refs.top[i] + refs.left[i];
  return PredBlock(N * N, sum / static_cast<double>(2 * N));
}

inline PredBlock predict_planar(const OneLineRefs& refs, std::size_t N)
{
  PredBlock      pred(N * N);
  const double   top_right   = refs.top[N];
  const double   bottom_left = refs.left[N];
  for (std::size_t y = 0; y < N; ++y)
    for (std::size_t x = 0; x < N; ++x)
    {
      const double horizontal = static_cast<double>(N - 1 - x) * refs.left[y] + static_cast<double>(x + 1) * top_right;
      const double vertical   = static_cast<double>(N - 1 - y) * refs.top[x] + static_cast<double>(y + 1) * bottom_left;
      pred[y * N + x]         = (horizontal + vertical) / static_cast<double>(2 * N);
    }
  return pred;
}

inline PredBlock predict_angular(const OneLineRefs& refs, int mode, std::size_t N)
{
  const int  size     = static_cast<int>(N);
  const bool vertical = mode >= 18;
  const int  angle    = kAngleTable[static_cast<std::size_t>(mode - 2)];

  const auto& main_refs = vertical ? refs.top : refs.left;
  const auto& side_refs = vertical ? refs.left : refs.top;

  // main[offset + i] holds reference i, where index 0 is the corner and
  // negative indices are projected from the side reference.
  const int           offset = size;
  std::vector<double> main(static_cast<std::size_t>(3 * size + 1), 0.0);
  main[offset] = refs.corner;
  for (int i = 0; i < 2 * size; ++i)
    main[offset + 1 + i] = main_refs[i];
  if (angle < 0)
  {
    const int inv  = inverse_angle(angle);
    const int last = (size * angle) >> 5;
    for (int i = -1; i >= last; --i)
    {
      const int side = (i * inv + 128) >> 8; // >= 1
      main[offset + i] = side_refs[side - 1];
    }
  }

  PredBlock pred(N * N);
  for (int y = 0; y < size; ++y)
  {
    const int pos  = (y + 1) * angle;
    const int idx  = pos >> 5;
    const int fact = pos & 31;
    for (int x = 0; x < size; ++x)
    {
      const double a = main[offset + x + idx + 1];
      const double v = fact ? ((32 - fact) * a + fact * main[offset + x + idx + 2]) / 32.0 : a;
      if (vertical)
        pred[static_cast<std::size_t>(y) * N + x] = v;
      else
        pred[static_cast<std::size_t>(x) * N + y] = v;
    }
  }
  return pred;
}

} // namespace detail

/// Prediction of one conventional mode (HEVC numbering) from a single reference line.
inline PredBlock conventional_predict(const OneLineRefs& refs, int mode, const BlockSpec& spec)
{
  if (mode < 0 || mode >= kHevcModes)
    throw std::out_of_range("conventional mode " + std::to_string(mode) + " outside 0..34");
  require_dims(refs.top.size() == 2 * spec.side() && refs.left.size() == 2 * spec.side(), "one-line reference length");
  if (mode == kPlanarMode)
    return detail::predict_planar(refs, spec.side());
  if (mode == kDcMode)
    return detail::predict_dc(refs, spec.side());
  return detail::predict_angular(refs, mode, spec.side());
}

} // namespace nnip
