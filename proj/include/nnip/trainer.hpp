#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nnip/block_spec.hpp"
#include "nnip/image.hpp"
#include "nnip/model.hpp"
#include "nnip/references.hpp"
#include "nnip/rng.hpp"

namespace nnip {

/// One training example: reference samples and the block they should predict.
struct PatchSample
{
  RefVector r;
  PredBlock target;
};

struct PatchPosition
{
  std::size_t image;
  int         x, y;

  friend bool operator==(const PatchPosition&, const PatchPosition&) = default;
};

enum class Optimizer
{
  sgd,
  adam
};

enum class InitScheme
{
  fan_in_uniform ///< U(−√(3/fan_in), √(3/fan_in)) weights, zero biases
};

struct TrainConfig
{
  std::uint64_t seed          = 1;
  double        learning_rate = 1e-3;
  std::size_t   batch_size    = 256;
  std::size_t   steps         = 1000;
  Optimizer     optimizer     = Optimizer::adam;
  std::size_t   K             = 8;
  InitScheme    init          = InitScheme::fan_in_uniform;

  void validate() const
  {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
      throw std::invalid_argument("learning rate must be > 0");
    if (batch_size < 1)
      throw std::invalid_argument("batch size must be >= 1");
    if (steps < 1)
      throw std::invalid_argument("steps must be >= 1");
    if (K < 1)
      throw std::invalid_argument("mode count K must be >= 1");
  }

  /// Stable textual form, used for provenance digests.
  std::string canonical() const
  {
    std::ostringstream s;
    s.precision(17);
    s << "seed=" << seed << ";lr=" << learning_rate << ";batch=" << batch_size << ";steps=" << steps
      << ";optimizer=" << (optimizer == Optimizer::adam ? "adam" : "sgd") << ";K=" << K << ";init=fan_in_uniform";
    return s.str();
  }
};

struct LossRecord
{
  std::size_t step;
  std::size_t epoch;
  double      loss; ///< mean min-mode loss of the step's batch, before the update
  double      lr;
};

template <typename Model>
struct TrainResult
{
  Model                   model;
  std::vector<LossRecord> trace;
};

class TrainingDiverged : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Reads the reference region and target block at (x, y); the whole region
/// must be inside the image.
inline PatchSample extract_patch(const LumaImage& img, int x, int y, const BlockSpec& spec)
{
  return {read_interior_references(img, x, y, spec), read_block(img, x, y, spec)};
}

inline std::uint64_t valid_positions(const LumaImage& img, const BlockSpec& spec)
{
  const long long w = img.width - spec.N - kReferenceLines + 1;
  const long long h = img.height - spec.N - kReferenceLines + 1;
  return w > 0 && h > 0 ? static_cast<std::uint64_t>(w * h) : 0;
}

/// Uniform draws (with replacement) over every valid (image, x, y).
inline std::vector<PatchPosition> sample_positions(const std::vector<LumaImage>& images, std::size_t count,
                                                   const BlockSpec& spec, std::uint64_t seed)
{
  std::vector<std::uint64_t> cumulative;
  std::uint64_t              total = 0;
  for (const auto& img : images)
  {
    total += valid_positions(img, spec);
    cumulative.push_back(total);
  }
  if (count == 0)
    return {};
  if (total == 0)
    throw std::invalid_argument("no valid patch positions for N=" + std::to_string(spec.N));

  Rng                        rng(seed);
  std::vector<PatchPosition> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
  {
    std::uint64_t flat = rng.index(total);
    const auto    img  = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), flat) -
                                              cumulative.begin());
    if (img > 0)
      flat -= cumulative[img - 1];
    const auto cols = static_cast<std::uint64_t>(images[img].width - spec.N - kReferenceLines + 1);
    out.push_back({img, kReferenceLines + static_cast<int>(flat % cols), kReferenceLines + static_cast<int>(flat / cols)});
  }
  return out;
}

inline std::vector<PatchSample> sample_dataset(const std::vector<LumaImage>& images, std::size_t count,
                                               const BlockSpec& spec, std::uint64_t seed)
{
  std::vector<PatchSample> out;
  for (const auto& p : sample_positions(images, count, spec, seed))
    out.push_back(extract_patch(images[p.image], p.x, p.y, spec));
  return out;
}

inline double mse(std::span<const double> pred, std::span<const double> target)
{
  require_dims(pred.size() == target.size() && !pred.empty(), "mse operands");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i)
  {
    const double d = pred[i] - target[i];
    sum += d * d;
  }
  return sum / static_cast<double>(pred.size());
}

struct MinModeLoss
{
  double      loss;
  std::size_t best;
};

/// Smallest per-mode MSE and its mode; ties go to the lowest k.
inline MinModeLoss min_mode_loss(const std::vector<PredBlock>& predictions, std::span<const double> target)
{
  if (predictions.empty())
    throw std::invalid_argument("min_mode_loss needs at least one mode");
  MinModeLoss out{mse(predictions[0], target), 0};
  for (std::size_t k = 1; k < predictions.size(); ++k)
  {
    const double l = mse(predictions[k], target);
    if (l < out.loss)
      out = {l, k};
  }
  return out;
}

// ---------------------------------------------------------------------------
// parameters and gradients

inline std::vector<std::span<double>> parameters(NNModel& model)
{
  std::vector<std::span<double>> p{model.W1.values(), model.b1, model.W2.values(), model.b2, model.W3.values(),
                                   model.b3};
  for (std::size_t k = 0; k < model.modes(); ++k)
  {
    p.push_back(model.W4[k].values());
    p.push_back(model.b4[k]);
  }
  return p;
}

inline std::vector<std::span<double>> parameters(LinearWithIntercept& model)
{
  std::vector<std::span<double>> p;
  for (std::size_t k = 0; k < model.modes(); ++k)
  {
    p.push_back(model.Gamma[k].values());
    p.push_back(model.beta[k]);
  }
  return p;
}

namespace detail {

// g += scale · u·vᵀ
inline void add_outer(Matrix<double>& g, std::span<const double> u, std::span<const double> v, double scale = 1.0)
{
  for (std::size_t i = 0; i < u.size(); ++i)
  {
    const double a = scale * u[i];
    if (a == 0.0)
      continue;
    auto row = g.row(i);
    for (std::size_t j = 0; j < v.size(); ++j)
      row[j] += a * v[j];
  }
}

// Mᵀ·x
inline std::vector<double> matvec_transposed(const Matrix<double>& M, std::span<const double> x)
{
  std::vector<double> y(M.cols(), 0.0);
  for (std::size_t i = 0; i < M.rows(); ++i)
  {
    const double a = x[i];
    if (a == 0.0)
      continue;
    const auto row = M.row(i);
    for (std::size_t j = 0; j < row.size(); ++j)
      y[j] += a * row[j];
  }
  return y;
}

inline void add(std::span<double> acc, std::span<const double> v, double scale = 1.0)
{
  for (std::size_t i = 0; i < acc.size(); ++i)
    acc[i] += scale * v[i];
}

} // namespace detail

/// Mean min-mode loss over `batch`; when `grad` is given, adds the gradient of
/// that mean (only the winning head of each sample receives gradient).
inline double nn_loss_and_gradient(const NNModel& model, std::span<const PatchSample> batch, NNModel* grad)
{
  require_dims(!batch.empty(), "empty batch");
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  double       total     = 0.0;

  for (const auto& sample : batch)
  {
    std::span<const double> r = sample.r;
    require_dims(r.size() == model.spec.m() && sample.target.size() == model.spec.n(), "patch dimensions");

    const auto z1 = affine<double>(model.W1, r, model.b1);
    auto       t1 = z1;
    for (auto& v : t1)
      v = elu(v);
    const auto z2 = affine<double>(model.W2, t1, model.b2);
    auto       t2 = z2;
    for (auto& v : t2)
      v = elu(v);
    const auto z3 = affine<double>(model.W3, t2, model.b3);
    auto       t3 = z3;
    for (auto& v : t3)
      v = elu(v);

    std::vector<PredBlock> heads;
    heads.reserve(model.modes());
    for (std::size_t k = 0; k < model.modes(); ++k)
      heads.push_back(affine<double>(model.W4[k], t3, model.b4[k]));
    const auto winner = min_mode_loss(heads, sample.target);
    total += winner.loss;
    if (!grad)
      continue;

    const auto& p = heads[winner.best];
    std::vector<double> g(p.size());
    for (std::size_t i = 0; i < p.size(); ++i)
      g[i] = 2.0 * (p[i] - sample.target[i]) / static_cast<double>(p.size()) * inv_batch;

    auto backward = [](std::vector<double> d, const std::vector<double>& z, const std::vector<double>& t) {
      for (std::size_t i = 0; i < d.size(); ++i)
        d[i] *= z[i] > 0.0 ? 1.0 : t[i] + 1.0; // elu'(z) = e^z = elu(z) + 1 for z <= 0
      return d;
    };

    detail::add_outer(grad->W4[winner.best], g, t3);
    detail::add(grad->b4[winner.best], g);
    const auto d3 = backward(detail::matvec_transposed(model.W4[winner.best], g), z3, t3);
    detail::add_outer(grad->W3, d3, t2);
    detail::add(grad->b3, d3);
    const auto d2 = backward(detail::matvec_transposed(model.W3, d3), z2, t2);
    detail::add_outer(grad->W2, d2, t1);
    detail::add(grad->b2, d2);
    const auto d1 = backward(detail::matvec_transposed(model.W2, d2), z1, t1);
    detail::add_outer(grad->W1, d1, r);
    detail::add(grad->b1, d1);
  }
  return total * inv_batch;
}

inline double linear_loss_and_gradient(const LinearWithIntercept& model, std::span<const PatchSample> batch,
                                       LinearWithIntercept* grad)
{
  require_dims(!batch.empty(), "empty batch");
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  double       total     = 0.0;
  for (const auto& sample : batch)
  {
    std::span<const double> r = sample.r;
    require_dims(r.size() == model.spec.m() && sample.target.size() == model.spec.n(), "patch dimensions");
    std::vector<PredBlock> heads;
    heads.reserve(model.modes());
    for (std::size_t k = 0; k < model.modes(); ++k)
      heads.push_back(affine_forward(model, r, k));
    const auto winner = min_mode_loss(heads, sample.target);
    total += winner.loss;
    if (!grad)
      continue;
    const auto&         p = heads[winner.best];
    std::vector<double> g(p.size());
    for (std::size_t i = 0; i < p.size(); ++i)
      g[i] = 2.0 * (p[i] - sample.target[i]) / static_cast<double>(p.size()) * inv_batch;
    detail::add_outer(grad->Gamma[winner.best], g, r);
    detail::add(grad->beta[winner.best], g);
  }
  return total * inv_batch;
}

// ---------------------------------------------------------------------------
// optimisers

class ParameterUpdater
{
public:
  ParameterUpdater(Optimizer kind, double lr) : kind_(kind), lr_(lr) {}

  void step(const std::vector<std::span<double>>& params, const std::vector<std::span<double>>& grads)
  {
    require_dims(params.size() == grads.size(), "parameter/gradient groups");
    if (kind_ == Optimizer::sgd)
    {
      for (std::size_t g = 0; g < params.size(); ++g)
        for (std::size_t i = 0; i < params[g].size(); ++i)
          params[g][i] -= lr_ * grads[g][i];
      return;
    }
    if (first_.empty())
      for (const auto& p : params)
      {
        first_.emplace_back(p.size(), 0.0);
        second_.emplace_back(p.size(), 0.0);
      }
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t g = 0; g < params.size(); ++g)
      for (std::size_t i = 0; i < params[g].size(); ++i)
      {
        const double gi = grads[g][i];
        first_[g][i]    = kBeta1 * first_[g][i] + (1.0 - kBeta1) * gi;
        second_[g][i]   = kBeta2 * second_[g][i] + (1.0 - kBeta2) * gi * gi;
        params[g][i] -= lr_ * (first_[g][i] / c1) / (std::sqrt(second_[g][i] / c2) + kEpsilon);
      }
  }

  double learning_rate() const { return lr_; }

private:
  static constexpr double kBeta1   = 0.9;
  static constexpr double kBeta2   = 0.999;
  static constexpr double kEpsilon = 1e-8;

  Optimizer                        kind_;
  double                           lr_;
  std::uint64_t                    t_ = 0;
  std::vector<std::vector<double>> first_, second_;
};

namespace detail {

inline void init_uniform(std::span<double> w, std::size_t fan_in, Rng& rng)
{
  const double s = std::sqrt(3.0 / static_cast<double>(fan_in));
  for (auto& v : w)
    v = rng.uniform(-s, s);
}

template <typename Model, typename LossGrad, typename ZeroGrad>
TrainResult<Model> fit(Model model, const std::vector<PatchSample>& dataset, const TrainConfig& config, Rng& rng,
                       LossGrad loss_grad, ZeroGrad zero_grad)
{
  if (dataset.empty())
    throw std::invalid_argument("training dataset is empty");
  const std::size_t batch = std::min(config.batch_size, dataset.size());

  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = i;
  shuffle(order, rng);

  ParameterUpdater   updater(config.optimizer, config.learning_rate);
  TrainResult<Model> result{std::move(model), {}};
  result.trace.reserve(config.steps);
  std::vector<PatchSample> current;
  std::size_t              cursor = 0, epoch = 0;

  for (std::size_t step = 0; step < config.steps; ++step)
  {
    if (cursor == order.size())
    {
      shuffle(order, rng);
      cursor = 0;
      ++epoch;
    }
    const std::size_t take = std::min(batch, order.size() - cursor);
    current.clear();
    for (std::size_t i = 0; i < take; ++i)
      current.push_back(dataset[order[cursor + i]]);
    cursor += take;

    Model        grad = zero_grad(result.model);
    const double loss = loss_grad(result.model, std::span<const PatchSample>(current), &grad);
    if (!std::isfinite(loss))
    {
      std::ostringstream msg;
      msg << "training diverged: non-finite loss at step " << step << " (epoch " << epoch
          << ", lr " << config.learning_rate << ")";
      throw TrainingDiverged(msg.str());
    }
    result.trace.push_back({step, epoch, loss, config.learning_rate});
    updater.step(parameters(result.model), parameters(grad));
  }
  return result;
}

} // namespace detail

inline NNModel init_nn(const BlockSpec& spec, std::size_t K, Rng& rng)
{
  auto model = NNModel::zeros(spec, K);
  detail::init_uniform(model.W1.values(), spec.m(), rng);
  detail::init_uniform(model.W2.values(), spec.m(), rng);
  detail::init_uniform(model.W3.values(), spec.m(), rng);
  for (auto& w : model.W4)
    detail::init_uniform(w.values(), spec.q(), rng);
  return model;
}

inline LinearWithIntercept init_linear(const BlockSpec& spec, std::size_t K, Rng& rng)
{
  auto model = LinearWithIntercept::zeros(spec, K);
  for (auto& g : model.Gamma)
    detail::init_uniform(g.values(), spec.m(), rng);
  return model;
}

/// Fits the four-layer network with the hard-min multi-mode loss.
inline TrainResult<NNModel> train_nn(const std::vector<PatchSample>& dataset, const BlockSpec& spec,
                                     const TrainConfig& config)
{
  config.validate();
  Rng rng(config.seed);
  return detail::fit(init_nn(spec, config.K, rng), dataset, config, rng, nn_loss_and_gradient,
                     [](const NNModel& m) { return NNModel::zeros(m.spec, m.modes()); });
}

/// Fits the per-mode affine predictors directly with the same loss.
inline TrainResult<LinearWithIntercept> train_linear(const std::vector<PatchSample>& dataset, const BlockSpec& spec,
                                                     const TrainConfig& config)
{
  config.validate();
  Rng rng(config.seed);
  return detail::fit(init_linear(spec, config.K, rng), dataset, config, rng, linear_loss_and_gradient,
                     [](const LinearWithIntercept& m) { return LinearWithIntercept::zeros(m.spec, m.modes()); });
}

/// Mean loss per epoch, in epoch order.
inline std::vector<double> epoch_means(const std::vector<LossRecord>& trace)
{
  std::vector<double>      sums;
  std::vector<std::size_t> counts;
  for (const auto& rec : trace)
  {
    if (rec.epoch >= sums.size())
    {
      sums.resize(rec.epoch + 1, 0.0);
      counts.resize(rec.epoch + 1, 0);
    }
    sums[rec.epoch] += rec.loss;
    ++counts[rec.epoch];
  }
  for (std::size_t e = 0; e < sums.size(); ++e)
    if (counts[e])
      sums[e] /= static_cast<double>(counts[e]);
  return sums;
}

} // namespace nnip
