#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nnip/block_spec.hpp"
#include "nnip/image.hpp"
#include "nnip/model.hpp"
#include "nnip/reference_layout.hpp"

namespace nnip {

class RegionError : public std::out_of_range
{
public:
  using std::out_of_range::out_of_range;
};

/// Fill value when no reference sample at all is available.
inline constexpr double kMidGray = 0.5;

inline bool block_inside(const LumaImage& img, int x, int y, const BlockSpec& spec)
{
  return x >= 0 && y >= 0 && x + spec.N <= img.width && y + spec.N <= img.height;
}

inline bool reference_region_inside(const LumaImage& img, int x, int y, const BlockSpec& spec)
{
  return block_inside(img, x, y, spec) && x >= kReferenceLines && y >= kReferenceLines;
}

/// Target block of (x, y), row-major and normalised.
inline PredBlock read_block(const LumaImage& img, int x, int y, const BlockSpec& spec)
{
  if (!block_inside(img, x, y, spec))
    throw RegionError("block outside image");
  PredBlock block(spec.n());
  for (int r = 0; r < spec.N; ++r)
    for (int c = 0; c < spec.N; ++c)
      block[static_cast<std::size_t>(r) * spec.side() + c] = img.normalized(x + c, y + r);
  return block;
}

/// Four-line reference region of a block whose region lies inside the image.
inline RefVector read_interior_references(const LumaImage& img, int x, int y, const BlockSpec& spec)
{
  if (!reference_region_inside(img, x, y, spec))
    throw RegionError("reference region outside image");
  std::vector<double> r(spec.m());
  for (std::size_t i = 0; i < r.size(); ++i)
  {
    const auto off = pixel_offset(layout_cell(spec, i));
    r[i]           = img.normalized(x + off.dx, y + off.dy);
  }
  return RefVector(std::move(r));
}

namespace detail {

struct Pixel
{
  int x, y;
};

// Fills `values` in scan order: leading unavailable samples take the first
// available one, later gaps repeat their predecessor. Returns false when
// nothing in the scan is available.
inline bool substitute_scan(const LumaImage& img, const std::vector<Pixel>& scan, std::vector<double>& values)
{
  values.assign(scan.size(), 0.0);
  std::optional<std::size_t> first;
  for (std::size_t i = 0; i < scan.size(); ++i)
    if (img.contains(scan[i].x, scan[i].y))
    {
      first = i;
      break;
    }
  if (!first)
    return false;
  double last = img.normalized(scan[*first].x, scan[*first].y);
  for (std::size_t i = 0; i < scan.size(); ++i)
  {
    if (img.contains(scan[i].x, scan[i].y))
      last = img.normalized(scan[i].x, scan[i].y);
    values[i] = i < *first ? img.normalized(scan[*first].x, scan[*first].y) : last;
  }
  return true;
}

} // namespace detail

/// Four-line references of the block at (x, y) with border substitution.
///
/// The region is the union of four L-shaped lines; line j (0 = adjacent)
/// is column x−1−j from row y+N−1 up to y−1−j, then row y−1−j from column
/// x−j to x+N−1. Each line is scanned in that order and gaps are replaced
/// by the nearest earlier available sample. A line with no available
/// sample copies the padded line inside it (position clamped towards the
/// block); when even the adjacent line is empty everything is mid-gray.
inline RefVector gather_references(const LumaImage& img, int x, int y, const BlockSpec& spec)
{
  if (!block_inside(img, x, y, spec))
    throw RegionError("block outside image");

  // padded[dy + 4][dx + 4] for the (N+4)×(N+4) window around the block
  const int                        span = spec.N + kReferenceLines;
  std::vector<std::vector<double>> padded(span, std::vector<double>(span, kMidGray));
  auto at = [&](int dx, int dy) -> double& { return padded[dy + kReferenceLines][dx + kReferenceLines]; };

  bool inner_available = false;
  for (int j = 0; j < kReferenceLines; ++j)
  {
    std::vector<detail::Pixel> rel;
    for (int dy = spec.N - 1; dy >= -1 - j; --dy)
      rel.push_back({-1 - j, dy});
    for (int dx = -j; dx < spec.N; ++dx)
      rel.push_back({dx, -1 - j});

    std::vector<detail::Pixel> scan;
    for (const auto& p : rel)
      scan.push_back({x + p.x, y + p.y});

    std::vector<double> values;
    if (detail::substitute_scan(img, scan, values))
    {
      inner_available = true;
      for (std::size_t i = 0; i < rel.size(); ++i)
        at(rel[i].x, rel[i].y) = values[i];
    }
    else if (inner_available)
    {
      for (const auto& p : rel)
        at(p.x, p.y) = at(std::max(p.x, -j), std::max(p.y, -j));
    }
  }

  std::vector<double> r(spec.m());
  for (std::size_t i = 0; i < r.size(); ++i)
  {
    const auto off = pixel_offset(layout_cell(spec, i));
    r[i]           = at(off.dx, off.dy);
  }
  return RefVector(std::move(r));
}

/// Single reference line for the conventional modes: the corner sample,
/// 2N samples above (left to right) and 2N samples to the left (top to
/// bottom).
struct OneLineRefs
{
  double              corner = kMidGray;
  std::vector<double> top;
  std::vector<double> left;
};

inline OneLineRefs gather_one_line(const LumaImage& img, int x, int y, const BlockSpec& spec)
{
  if (!block_inside(img, x, y, spec))
    throw RegionError("block outside image");
  const int N2 = 2 * spec.N;

  std::vector<detail::Pixel> scan;
  for (int i = N2 - 1; i >= 0; --i)
    scan.push_back({x - 1, y + i});
  scan.push_back({x - 1, y - 1});
  for (int i = 0; i < N2; ++i)
    scan.push_back({x + i, y - 1});

  std::vector<double> values;
  if (!detail::substitute_scan(img, scan, values))
    values.assign(scan.size(), kMidGray);

  OneLineRefs refs;
  refs.left.resize(N2);
  refs.top.resize(N2);
  for (int i = 0; i < N2; ++i)
    refs.left[i] = values[N2 - 1 - i];
  refs.corner = values[N2];
  for (int i = 0; i < N2; ++i)
    refs.top[i] = values[N2 + 1 + i];
  return refs;
}

} // namespace nnip
