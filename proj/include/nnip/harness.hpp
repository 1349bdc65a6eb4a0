#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "nnip/block_spec.hpp"
#include "nnip/conventional.hpp"
#include "nnip/image.hpp"
#include "nnip/model.hpp"
#include "nnip/op_count.hpp"
#include "nnip/references.hpp"

namespace nnip {

enum class Family
{
  conventional,
  learned
};

enum class ModelKind
{
  nn,
  linear_no_intercept,
  linear_with_intercept
};

inline const char* to_string(ModelKind kind)
{
  switch (kind)
  {
  case ModelKind::nn: return "nn";
  case ModelKind::linear_no_intercept: return "linear_no_intercept";
  case ModelKind::linear_with_intercept: return "linear_with_intercept";
  }
  return "?";
}

inline ModelKind parse_model_kind(const std::string& s)
{
  if (s == "nn")
    return ModelKind::nn;
  if (s == "linear_no_intercept")
    return ModelKind::linear_no_intercept;
  if (s == "linear_with_intercept")
    return ModelKind::linear_with_intercept;
  throw std::invalid_argument("unknown model kind '" + s + "'");
}

enum class Metric
{
  sse,
  satd
};

inline const char* metric_name(Metric m) { return m == Metric::sse ? "sse" : "satd"; }

struct Candidate
{
  Family      family;
  std::size_t mode; ///< index into the conventional mode set, or 0-based k for learned
  PredBlock   block;
};

struct ModeDecision
{
  int         x      = 0;
  int         y      = 0;
  Family      family = Family::conventional;
  std::size_t mode   = 0;
  double      cost   = 0.0; ///< in 8-bit sample units (squared for SSE)
};

/// Sum of squared errors in 8-bit units.
inline double block_sse(std::span<const double> pred, std::span<const double> target)
{
  require_dims(pred.size() == target.size(), "block size");
  double sse = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i)
  {
    const double d = (pred[i] - target[i]) * 255.0;
    sse += d * d;
  }
  return sse;
}

/// Sum of absolute 4×4 Hadamard coefficients of the difference, halved, in 8-bit units.
inline double block_satd(std::span<const double> pred, std::span<const double> target, std::size_t N)
{
  require_dims(pred.size() == target.size() && pred.size() == N * N && N % 4 == 0, "block size");
  double total = 0.0;
  for (std::size_t by = 0; by < N; by += 4)
    for (std::size_t bx = 0; bx < N; bx += 4)
    {
      std::array<double, 16> d{}, t{};
      for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c)
        {
          const auto i = (by + r) * N + bx + c;
          d[r * 4 + c] = (pred[i] - target[i]) * 255.0;
        }
      for (std::size_t r = 0; r < 4; ++r)
      {
        const double* s  = &d[r * 4];
        const double  a0 = s[0] + s[3], a1 = s[1] + s[2], a2 = s[1] - s[2], a3 = s[0] - s[3];
        t[r * 4 + 0]     = a0 + a1;
        t[r * 4 + 1]     = a3 + a2;
        t[r * 4 + 2]     = a0 - a1;
        t[r * 4 + 3]     = a3 - a2;
      }
      for (std::size_t c = 0; c < 4; ++c)
      {
        const double a0 = t[c] + t[12 + c], a1 = t[4 + c] + t[8 + c];
        const double a2 = t[4 + c] - t[8 + c], a3 = t[c] - t[12 + c];
        total += std::abs(a0 + a1) + std::abs(a3 + a2) + std::abs(a0 - a1) + std::abs(a3 - a2);
      }
    }
  return total / 2.0;
}

/// Picks the cheapest candidate after clipping; the earliest wins on ties.
inline ModeDecision select_mode(const std::vector<Candidate>& candidates, std::span<const double> target,
                                Metric metric = Metric::sse)
{
  if (candidates.empty())
    throw std::invalid_argument("select_mode needs at least one candidate");
  const auto   N = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(target.size()))));
  ModeDecision best;
  bool         have = false;
  for (const auto& c : candidates)
  {
    const auto   clipped = clip_block(c.block);
    const double cost    = metric == Metric::sse ? block_sse(clipped, target) : block_satd(clipped, target, N);
    if (!have || cost < best.cost)
    {
      best.family = c.family;
      best.mode   = c.mode;
      best.cost   = cost;
      have        = true;
    }
  }
  return best;
}

/// Closed-form multiplications to generate one predicted block with one mode
/// (biases and activations excluded).
inline std::uint64_t multiplication_count(const BlockSpec& spec, ModelKind kind)
{
  const std::uint64_t n = spec.n(), N = spec.side();
  if (kind == ModelKind::nn)
    return 4 * n * (N + 41) + 32 * (19 * N + 18);
  return 8 * n * (N + 2);
}

/// Multiplications actually performed by the reference forward pass,
/// counted through CountedReal.
inline std::uint64_t instrumented_multiplications(const BlockSpec& spec, ModelKind kind)
{
  const std::vector<CountedReal> r(spec.m(), CountedReal(0.5));
  MultiplyScope                  scope;
  switch (kind)
  {
  case ModelKind::nn: (void)nn_forward(BasicNNModel<CountedReal>::zeros(spec, 1), r, 0); break;
  case ModelKind::linear_no_intercept:
  {
    const BasicLinearNoIntercept<CountedReal> model{spec, {Matrix<CountedReal>(spec.n(), spec.m())}};
    (void)linear_forward(model, r, 0);
    break;
  }
  case ModelKind::linear_with_intercept:
    (void)affine_forward(BasicLinearWithIntercept<CountedReal>::zeros(spec, 1), r, 0);
    break;
  }
  return scope.count();
}

/// Non-owning view of the learned predictors to evaluate. Each supplied
/// model forms its own pool together with the conventional modes.
struct LearnedModels
{
  const NNModel*             nn     = nullptr;
  const LinearNoIntercept*   linear = nullptr;
  const LinearWithIntercept* affine = nullptr;
};

struct ComplexityTally
{
  std::uint64_t nn_per_block         = 0; ///< one mode, one block
  std::uint64_t simplified_per_block = 0;
  std::uint64_t total                = 0; ///< over all learned predictions generated
};

struct PoolResult
{
  ModelKind                kind = ModelKind::nn;
  std::size_t              learned_blocks = 0;
  std::vector<std::size_t> mode_histogram; ///< over k = 0..K−1
  double                   total_cost     = 0.0;
  std::uint64_t            multiplications = 0;
};

struct BlockRecord
{
  int                       x = 0, y = 0;
  ModeDecision              conventional;
  std::vector<ModeDecision> pools; ///< parallel to PredictionReport::pools
};

struct PredictionReport
{
  BlockSpec                spec;
  Metric                   metric = Metric::sse;
  std::size_t              blocks = 0;
  double                   conventional_cost = 0.0;
  std::vector<int>         conventional_modes;
  std::vector<std::size_t> conventional_histogram; ///< parallel to conventional_modes
  std::vector<PoolResult>  pools;
  ComplexityTally          complexity;
  std::vector<BlockRecord> decisions; ///< filled when requested

  static double percent(std::size_t part, std::size_t whole)
  {
    return whole ? 100.0 * static_cast<double>(part) / static_cast<double>(whole) : 0.0;
  }

  double usage_percent(const PoolResult& pool) const { return percent(pool.learned_blocks, blocks); }
  double conventional_percent(const PoolResult& pool) const { return percent(blocks - pool.learned_blocks, blocks); }

  /// Accumulates another report over the same block size and pools.
  void merge(const PredictionReport& other)
  {
    if (other.spec != spec || other.pools.size() != pools.size() || other.conventional_modes != conventional_modes)
      throw std::invalid_argument("cannot merge reports with different configurations");
    blocks += other.blocks;
    conventional_cost += other.conventional_cost;
    for (std::size_t i = 0; i < conventional_histogram.size(); ++i)
      conventional_histogram[i] += other.conventional_histogram[i];
    for (std::size_t p = 0; p < pools.size(); ++p)
    {
      if (pools[p].kind != other.pools[p].kind || pools[p].mode_histogram.size() != other.pools[p].mode_histogram.size())
        throw std::invalid_argument("cannot merge reports with different pools");
      pools[p].learned_blocks += other.pools[p].learned_blocks;
      pools[p].total_cost += other.pools[p].total_cost;
      pools[p].multiplications += other.pools[p].multiplications;
      for (std::size_t k = 0; k < pools[p].mode_histogram.size(); ++k)
        pools[p].mode_histogram[k] += other.pools[p].mode_histogram[k];
    }
    complexity.total += other.complexity.total;
    decisions.insert(decisions.end(), other.decisions.begin(), other.decisions.end());
  }
};

struct EvalOptions
{
  Metric metric       = Metric::sse;
  bool   keep_blocks  = false;
};

/// Tiles the image into non-overlapping N×N blocks (partial edge tiles are
/// skipped) and picks the best mode per block, once with the conventional
/// modes alone and once per supplied learned model. References are taken
/// from the original picture.
inline PredictionReport evaluate_image(const LumaImage& img, const BlockSpec& spec, const LearnedModels& models,
                                       const ConventionalModeSet& mode_set, const EvalOptions& options = {})
{
  if (img.width < spec.N || img.height < spec.N)
    throw std::invalid_argument("image smaller than one block");
  mode_set.validate();

  PredictionReport report;
  report.spec               = spec;
  report.metric             = options.metric;
  report.conventional_modes = mode_set.modes;
  report.conventional_histogram.assign(mode_set.size(), 0);
  report.complexity.nn_per_block         = multiplication_count(spec, ModelKind::nn);
  report.complexity.simplified_per_block = multiplication_count(spec, ModelKind::linear_with_intercept);

  auto add_pool = [&](ModelKind kind, std::size_t K, auto&& check) {
    check();
    if (K == 0)
      throw std::invalid_argument("learned model has no modes");
    PoolResult pool;
    pool.kind = kind;
    pool.mode_histogram.assign(K, 0);
    report.pools.push_back(std::move(pool));
  };
  auto check_spec = [&](const BlockSpec& s) {
    if (s != spec)
      throw std::invalid_argument("model block size " + std::to_string(s.N) + " does not match requested N=" +
                                  std::to_string(spec.N));
  };
  if (models.nn)
    add_pool(ModelKind::nn, models.nn->modes(), [&] { check_spec(models.nn->spec); models.nn->validate(); });
  if (models.linear)
    add_pool(ModelKind::linear_no_intercept, models.linear->modes(),
             [&] { check_spec(models.linear->spec); models.linear->validate(); });
  if (models.affine)
    add_pool(ModelKind::linear_with_intercept, models.affine->modes(),
             [&] { check_spec(models.affine->spec); models.affine->validate(); });

  auto learned_predictions = [&](ModelKind kind, const RefVector& r) {
    std::vector<Candidate> out;
    switch (kind)
    {
    case ModelKind::nn:
      for (std::size_t k = 0; k < models.nn->modes(); ++k)
        out.push_back({Family::learned, k, nn_forward(*models.nn, r, k)});
      break;
    case ModelKind::linear_no_intercept:
      for (std::size_t k = 0; k < models.linear->modes(); ++k)
        out.push_back({Family::learned, k, linear_forward(*models.linear, r, k)});
      break;
    case ModelKind::linear_with_intercept:
      for (std::size_t k = 0; k < models.affine->modes(); ++k)
        out.push_back({Family::learned, k, affine_forward(*models.affine, r, k)});
      break;
    }
    return out;
  };

  for (int y = 0; y + spec.N <= img.height; y += spec.N)
    for (int x = 0; x + spec.N <= img.width; x += spec.N)
    {
      const auto target = read_block(img, x, y, spec);
      const auto line   = gather_one_line(img, x, y, spec);

      std::vector<Candidate> conventional;
      for (std::size_t i = 0; i < mode_set.size(); ++i)
        conventional.push_back({Family::conventional, i, conventional_predict(line, mode_set.modes[i], spec)});

      BlockRecord record;
      record.x            = x;
      record.y            = y;
      record.conventional = select_mode(conventional, target, options.metric);
      record.conventional.x = x;
      record.conventional.y = y;
      report.conventional_cost += record.conventional.cost;
      ++report.conventional_histogram[record.conventional.mode];

      if (!report.pools.empty())
      {
        const auto refs = gather_references(img, x, y, spec);
        for (auto& pool : report.pools)
        {
          auto candidates = conventional;
          auto learned    = learned_predictions(pool.kind, refs);
          const auto per_mode = multiplication_count(spec, pool.kind);
          pool.multiplications += per_mode * learned.size();
          report.complexity.total += per_mode * learned.size();
          candidates.insert(candidates.end(), std::make_move_iterator(learned.begin()),
                            std::make_move_iterator(learned.end()));
          auto decision = select_mode(candidates, target, options.metric);
          decision.x    = x;
          decision.y    = y;
          pool.total_cost += decision.cost;
          if (decision.family == Family::learned)
          {
            ++pool.learned_blocks;
            ++pool.mode_histogram[decision.mode];
          }
          record.pools.push_back(decision);
        }
      }
      ++report.blocks;
      if (options.keep_blocks)
        report.decisions.push_back(std::move(record));
    }
  return report;
}

} // namespace nnip
