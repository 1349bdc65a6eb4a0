#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nnip/collapse.hpp"
#include "nnip/harness.hpp"
#include "nnip/image.hpp"
#include "nnip/trainer.hpp"

namespace nnip {

namespace detail {

inline std::string format_real(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline const char* region_name(Region r)
{
  switch (r)
  {
  case Region::corner: return "corner";
  case Region::top: return "top";
  case Region::left: return "left";
  }
  return "?";
}

inline Region parse_region(const std::string& s)
{
  if (s == "corner")
    return Region::corner;
  if (s == "top")
    return Region::top;
  if (s == "left")
    return Region::left;
  throw std::invalid_argument("unknown region '" + s + "'");
}

} // namespace detail

// ---------------------------------------------------------------------------
// loss traces

inline std::string loss_trace_csv(const std::vector<LossRecord>& trace)
{
  std::ostringstream out;
  out << "step,epoch,loss,lr\n";
  for (const auto& r : trace)
    out << r.step << ',' << r.epoch << ',' << detail::format_real(r.loss) << ',' << detail::format_real(r.lr) << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// heatmaps

/// Maps a coefficient to 8 bits: 128 is zero, ±scale saturate at 255 / 1.
inline std::uint8_t diverging_level(double v, double scale)
{
  if (!(scale > 0.0))
    return 128;
  const double t = std::clamp(v / scale, -1.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(128.0 + 127.0 * t));
}

/// Renders the grid over the (N+4)×(N+4) window around the block. Reference
/// cells carry their coefficient; block cells are left at the zero level.
inline LumaImage render_heatmap(const HeatmapGrid& grid, double scale)
{
  const int side = grid.spec.N + kReferenceLines;
  LumaImage img(side, side, 128);
  for (std::size_t i = 0; i < grid.spec.m(); ++i)
  {
    const auto cell = layout_cell(grid.spec, i);
    const auto off  = pixel_offset(cell);
    img.at(off.dx + kReferenceLines, off.dy + kReferenceLines) =
      diverging_level(grid.region(cell.region)(cell.row, cell.col), scale);
  }
  return img;
}

inline std::string heatmap_csv(const HeatmapGrid& grid)
{
  std::ostringstream out;
  out << "# N=" << grid.spec.N << " target_row=" << grid.target_row << " target_col=" << grid.target_col << '\n';
  out << "index,region,row,col,value\n";
  const auto row = grid.flatten();
  for (std::size_t i = 0; i < row.size(); ++i)
  {
    const auto cell = layout_cell(grid.spec, i);
    out << i << ',' << detail::region_name(cell.region) << ',' << cell.row << ',' << cell.col << ','
        << detail::format_real(row[i]) << '\n';
  }
  return out.str();
}

/// Rebuilds the predictor row from heatmap_csv output.
inline std::vector<double> parse_heatmap_csv(const std::string& text, const BlockSpec& spec)
{
  std::istringstream  in(text);
  std::string         line;
  std::vector<double> row(spec.m(), 0.0);
  std::vector<bool>   seen(spec.m(), false);
  while (std::getline(in, line))
  {
    if (line.empty() || line[0] == '#' || line.rfind("index,", 0) == 0)
      continue;
    std::istringstream       fields(line);
    std::vector<std::string> parts;
    std::string              part;
    while (std::getline(fields, part, ','))
      parts.push_back(part);
    if (parts.size() != 5)
      throw std::invalid_argument("malformed heatmap CSV line: " + line);
    const LayoutCell cell{detail::parse_region(parts[1]), std::stoul(parts[2]), std::stoul(parts[3])};
    const auto       index = layout_index(spec, cell);
    if (index != std::stoul(parts[0]))
      throw std::invalid_argument("heatmap CSV index disagrees with its cell: " + line);
    row[index]  = std::stod(parts[4]);
    seen[index] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw std::invalid_argument("heatmap CSV does not cover every reference sample");
  return row;
}

// ---------------------------------------------------------------------------
// reports

inline nlohmann::json report_json(const PredictionReport& report, bool with_blocks)
{
  using nlohmann::json;
  json pools = json::array();
  for (std::size_t p = 0; p < report.pools.size(); ++p)
  {
    const auto& pool = report.pools[p];
    pools.push_back({{"kind", to_string(pool.kind)},
                     {"K", pool.mode_histogram.size()},
                     {"learned_blocks", pool.learned_blocks},
                     {"learned_usage_percent", report.usage_percent(pool)},
                     {"conventional_usage_percent", report.conventional_percent(pool)},
                     {"mode_histogram", pool.mode_histogram},
                     {"total_cost", pool.total_cost},
                     {"mean_cost", report.blocks ? pool.total_cost / static_cast<double>(report.blocks) : 0.0},
                     {"multiplications", pool.multiplications}});
  }
  json j = {{"N", report.spec.N},
            {"metric", metric_name(report.metric)},
            {"blocks", report.blocks},
            {"conventional",
             {{"modes", report.conventional_modes},
              {"histogram", report.conventional_histogram},
              {"total_cost", report.conventional_cost},
              {"mean_cost", report.blocks ? report.conventional_cost / static_cast<double>(report.blocks) : 0.0}}},
            {"pools", pools},
            {"complexity",
             {{"nn_per_block", report.complexity.nn_per_block},
              {"simplified_per_block", report.complexity.simplified_per_block},
              {"total", report.complexity.total}}}};
  if (with_blocks)
  {
    json blocks = json::array();
    for (const auto& b : report.decisions)
    {
      json per_pool = json::array();
      for (const auto& d : b.pools)
        per_pool.push_back({{"family", d.family == Family::learned ? "learned" : "conventional"},
                            {"mode", d.mode},
                            {"cost", d.cost}});
      blocks.push_back({{"x", b.x},
                        {"y", b.y},
                        {"conventional", {{"mode", report.conventional_modes[b.conventional.mode]}, {"cost", b.conventional.cost}}},
                        {"pools", per_pool}});
    }
    j["blocks"] = blocks;
  }
  return j;
}

/// One row per (block size, pool); a pool-less report yields one
/// conventional-only row.
inline std::string report_csv(const std::vector<PredictionReport>& reports)
{
  std::ostringstream out;
  out << "N,kind,metric,blocks,learned_usage_percent,conventional_cost,pool_cost,multiplications_per_block\n";
  for (const auto& r : reports)
  {
    if (r.pools.empty())
    {
      out << r.spec.N << ",conventional," << metric_name(r.metric) << ',' << r.blocks << ",0," << detail::format_real(r.conventional_cost) << ','
          << detail::format_real(r.conventional_cost) << ",0\n";
      continue;
    }
    for (const auto& pool : r.pools)
      out << r.spec.N << ',' << to_string(pool.kind) << ',' << metric_name(r.metric) << ',' << r.blocks << ','
          << detail::format_real(r.usage_percent(pool)) << ',' << detail::format_real(r.conventional_cost) << ','
          << detail::format_real(pool.total_cost) << ',' << multiplication_count(r.spec, pool.kind) << '\n';
  }
  return out.str();
}

} // namespace nnip
