#pragma once

#include <cstddef>
#include <stdexcept>

#include "nnip/block_spec.hpp"

namespace nnip {

// Canonical flattening of the four-line reference region of an N×N block at
// (x, y):
//   corner  4×4 at rows y−4..y−1, cols x−4..x−1   indices [0, 16)
//   top     4×N at rows y−4..y−1, cols x..x+N−1   indices [16, 16 + 4N)
//   left    N×4 at rows y..y+N−1, cols x−4..x−1   indices [16 + 4N, 16 + 8N)
// each region row-major.

enum class Region
{
  corner,
  top,
  left
};

struct LayoutCell
{
  Region      region;
  std::size_t row;
  std::size_t col;

  friend bool operator==(const LayoutCell&, const LayoutCell&) = default;
};

inline constexpr std::size_t region_rows(const BlockSpec& spec, Region r)
{
  return r == Region::left ? spec.side() : kReferenceLines;
}

inline constexpr std::size_t region_cols(const BlockSpec& spec, Region r)
{
  return r == Region::top ? spec.side() : kReferenceLines;
}

inline constexpr std::size_t region_offset(const BlockSpec& spec, Region r)
{
  switch (r)
  {
  case Region::corner: return 0;
  case Region::top: return kReferenceLines * kReferenceLines;
  case Region::left: return kReferenceLines * kReferenceLines + kReferenceLines * spec.side();
  }
  return 0;
}

inline LayoutCell layout_cell(const BlockSpec& spec, std::size_t index)
{
  if (index >= spec.m())
    throw std::out_of_range("reference index outside layout");
  for (Region r : {Region::left, Region::top, Region::corner})
  {
    const auto off = region_offset(spec, r);
    if (index >= off)
    {
      const auto local = index - off;
      const auto cols  = region_cols(spec, r);
      return {r, local / cols, local % cols};
    }
  }
  return {Region::corner, 0, 0};
}

inline std::size_t layout_index(const BlockSpec& spec, const LayoutCell& cell)
{
  if (cell.row >= region_rows(spec, cell.region) || cell.col >= region_cols(spec, cell.region))
    throw std::out_of_range("layout cell outside its region");
  return region_offset(spec, cell.region) + cell.row * region_cols(spec, cell.region) + cell.col;
}

/// Pixel offset (dx, dy) of a layout cell relative to the block's top-left sample.
struct PixelOffset
{
  int dx;
  int dy;
};

inline PixelOffset pixel_offset(const LayoutCell& cell)
{
  const int row = static_cast<int>(cell.row), col = static_cast<int>(cell.col);
  switch (cell.region)
  {
  case Region::corner: return {col - kReferenceLines, row - kReferenceLines};
  case Region::top: return {col, row - kReferenceLines};
  case Region::left: return {col - kReferenceLines, row};
  }
  return {0, 0};
}

} // namespace nnip
