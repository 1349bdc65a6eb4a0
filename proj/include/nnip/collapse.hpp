#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "nnip/model.hpp"
#include "nnip/reference_layout.hpp"

namespace nnip {

/// Rows whose |sum| falls below this are treated as degenerate.
inline constexpr double kDegenerateRowSum = 1e-8;

/// Γ(k) = W4(k)·W3·W2·W1, evaluated as ((W4·W3)·W2)·W1.
template <typename Real>
Matrix<Real> master_matrix(const BasicNNModel<Real>& model, std::size_t k)
{
  require_mode(k, model.modes());
  model.validate();
  return matmul(matmul(matmul(model.W4[k], model.W3), model.W2), model.W1);
}

/// β(k) = W4(k)·(W3·(W2·b1 + b2) + b3) + b4(k)
template <typename Real>
Vector<Real> intercept(const BasicNNModel<Real>& model, std::size_t k)
{
  require_mode(k, model.modes());
  model.validate();
  const auto inner  = affine<Real>(model.W2, model.b1, model.b2);
  const auto hidden = affine<Real>(model.W3, inner, model.b3);
  return affine<Real>(model.W4[k], hidden, model.b4[k]);
}

struct NormalizedRows
{
  Matrix<double>           A;
  std::vector<std::size_t> degenerate_rows;
};

/// Divides each row by its signed sum. Degenerate rows become uniform 1/m
/// and are listed in the result.
inline NormalizedRows normalize_rows(const Matrix<double>& Gamma)
{
  NormalizedRows out{Gamma, {}};
  const double   uniform = Gamma.cols() ? 1.0 / static_cast<double>(Gamma.cols()) : 0.0;
  for (std::size_t i = 0; i < Gamma.rows(); ++i)
  {
    auto row = out.A.row(i);
    // Rows of a collapsed network often nearly cancel, so the sum is
    // accumulated with Neumaier compensation.
    double sum = 0.0, carry = 0.0;
    for (double v : row)
    {
      const double t = sum + v;
      carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
      sum = t;
    }
    sum += carry;
    if (!(std::abs(sum) >= kDegenerateRowSum))
    {
      std::fill(row.begin(), row.end(), uniform);
      out.degenerate_rows.push_back(i);
      continue;
    }
    for (double& v : row)
      v /= sum;
  }
  return out;
}

struct CollapsedNoIntercept
{
  LinearNoIntercept                     model;
  std::vector<std::vector<std::size_t>> degenerate_rows; ///< per mode

  std::size_t degenerate_count() const
  {
    std::size_t total = 0;
    for (const auto& d : degenerate_rows)
      total += d.size();
    return total;
  }
};

inline CollapsedNoIntercept collapse_no_intercept(const NNModel& model)
{
  model.validate();
  CollapsedNoIntercept out{{model.spec, {}}, {}};
  for (std::size_t k = 0; k < model.modes(); ++k)
  {
    auto normalized = normalize_rows(master_matrix(model, k));
    out.model.A.push_back(std::move(normalized.A));
    out.degenerate_rows.push_back(std::move(normalized.degenerate_rows));
  }
  return out;
}

inline LinearWithIntercept collapse_with_intercept(const NNModel& model)
{
  model.validate();
  LinearWithIntercept out{model.spec, {}, {}};
  for (std::size_t k = 0; k < model.modes(); ++k)
  {
    out.Gamma.push_back(master_matrix(model, k));
    out.beta.push_back(intercept(model, k));
  }
  return out;
}

/// One predictor row laid out over the reference region, for rendering the
/// contribution of every reference sample to a single target sample.
struct HeatmapGrid
{
  BlockSpec      spec;
  std::size_t    target_row = 0;
  std::size_t    target_col = 0;
  Matrix<double> corner; ///< 4×4
  Matrix<double> top;    ///< 4×N
  Matrix<double> left;   ///< N×4
  double         min = 0.0;
  double         max = 0.0;

  const Matrix<double>& region(Region r) const { return r == Region::corner ? corner : r == Region::top ? top : left; }
  Matrix<double>&       region(Region r) { return r == Region::corner ? corner : r == Region::top ? top : left; }

  std::vector<double> flatten() const
  {
    std::vector<double> row(spec.m());
    for (std::size_t i = 0; i < row.size(); ++i)
    {
      const auto cell = layout_cell(spec, i);
      row[i]          = region(cell.region)(cell.row, cell.col);
    }
    return row;
  }
};

inline HeatmapGrid predictor_heatmap(std::span<const double> row, const BlockSpec& spec, std::size_t target_index)
{
  require_dims(row.size() == spec.m(), "heatmap row length != m");
  if (target_index >= spec.n())
    throw std::out_of_range("target sample index outside block");
  HeatmapGrid grid{spec,
                   target_index / spec.side(),
                   target_index % spec.side(),
                   Matrix<double>(kReferenceLines, kReferenceLines),
                   Matrix<double>(kReferenceLines, spec.side()),
                   Matrix<double>(spec.side(), kReferenceLines),
                   std::numeric_limits<double>::infinity(),
                   -std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < row.size(); ++i)
  {
    const auto cell                          = layout_cell(spec, i);
    grid.region(cell.region)(cell.row, cell.col) = row[i];
    grid.min                                 = std::min(grid.min, row[i]);
    grid.max                                 = std::max(grid.max, row[i]);
  }
  return grid;
}

} // namespace nnip
