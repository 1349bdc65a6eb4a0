#include <gtest/gtest.h>

#include <set>

#include "nnip/collapse.hpp"
#include "nnip/trainer.hpp"
#include "oracles.hpp"

using namespace nnip;

namespace {

// W1 = W2 = I, W3 = [I_q | 0], W4 rows one-hot over the q hidden units.
NNModel selection_model(const BlockSpec& spec)
{
  auto model = NNModel::zeros(spec, 1);
  model.W1   = Matrix<double>::identity(spec.m());
  model.W2   = Matrix<double>::identity(spec.m());
  for (std::size_t i = 0; i < spec.q(); ++i)
    model.W3(i, i) = 1.0;
  for (std::size_t i = 0; i < spec.n(); ++i)
    model.W4[0](i, (3 * i) % spec.q()) = 1.0;
  return model;
}

} // namespace

TEST(MasterMatrix, CompositionOfSelections)
{
  const auto spec  = BlockSpec::make(4);
  const auto Gamma = master_matrix(selection_model(spec), 0);
  for (std::size_t i = 0; i < spec.n(); ++i)
    for (std::size_t j = 0; j < spec.m(); ++j)
      EXPECT_EQ(Gamma(i, j), j == (3 * i) % spec.q() ? 1.0 : 0.0);
}

TEST(MasterMatrix, AnyZeroFactorGivesZero)
{
  Rng        rng(1);
  const auto spec = BlockSpec::make(4);
  for (int which = 0; which < 4; ++which)
  {
    auto model = oracle::random_model(spec, 1, rng);
    switch (which)
    {
    case 0: model.W1 = Matrix<double>(spec.m(), spec.m()); break;
    case 1: model.W2 = Matrix<double>(spec.m(), spec.m()); break;
    case 2: model.W3 = Matrix<double>(spec.q(), spec.m()); break;
    default: model.W4[0] = Matrix<double>(spec.n(), spec.q()); break;
    }
    EXPECT_EQ(master_matrix(model, 0), Matrix<double>(spec.n(), spec.m()));
  }
}

TEST(MasterMatrix, MatchesNaiveChainOracle)
{
  Rng        rng(2);
  const auto spec = BlockSpec::make(4);
  for (int trial = 0; trial < 5; ++trial)
  {
    const auto model = oracle::random_model(spec, 2, rng);
    for (std::size_t k = 0; k < 2; ++k)
      EXPECT_LE(oracle::rel_error(master_matrix(model, k), oracle::naive_matrix_chain(model, k)), 1e-12);
  }
}

TEST(MasterMatrix, BracketOrderIndependent)
{
  Rng rng(3);
  for (int N : {4, 8, 16})
  {
    const auto spec        = BlockSpec::make(N);
    const auto model       = oracle::random_model(spec, 1, rng);
    const auto right_first = matmul(model.W4[0], matmul(model.W3, matmul(model.W2, model.W1)));
    EXPECT_LE(oracle::rel_error(master_matrix(model, 0), right_first), 1e-10);
  }
}

TEST(NormalizeRows, SignedSumExamples)
{
  const Matrix<double> G(3, 3, {1, 1, 2, 2, -1, 1, 1, -1, 0});
  const auto           out = normalize_rows(G);
  EXPECT_EQ(out.A(0, 0), 0.25);
  EXPECT_EQ(out.A(0, 1), 0.25);
  EXPECT_EQ(out.A(0, 2), 0.5);
  EXPECT_EQ(out.A(1, 0), 1.0);
  EXPECT_EQ(out.A(1, 1), -0.5);
  EXPECT_EQ(out.A(1, 2), 0.5);
  // (1, -1, 0) sums to zero: the quotient is undefined, so the row falls back.
  for (std::size_t j = 0; j < 3; ++j)
    EXPECT_DOUBLE_EQ(out.A(2, j), 1.0 / 3.0);
  EXPECT_EQ(out.degenerate_rows, std::vector<std::size_t>{2});
}

TEST(NormalizeRows, NearZeroSumIsDegenerate)
{
  const Matrix<double> G(2, 2, {1e-9, -5e-10, 1.0, 1.0});
  const auto           out = normalize_rows(G);
  EXPECT_EQ(out.degenerate_rows, std::vector<std::size_t>{0});
  EXPECT_EQ(out.A(1, 0), 0.5);
}

TEST(NormalizeRows, IdempotentAndRowsSumToOne)
{
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial)
  {
    const auto G    = oracle::random_matrix(16, 48, rng, 1.0);
    const auto once = normalize_rows(G);
    ASSERT_TRUE(once.degenerate_rows.empty());
    for (std::size_t i = 0; i < once.A.rows(); ++i)
    {
      double s = 0.0;
      for (double v : once.A.row(i))
        s += v;
      EXPECT_NEAR(s, 1.0, 1e-9);
    }
    EXPECT_LE(oracle::rel_error(normalize_rows(once.A).A, once.A), 1e-12);
  }
}

TEST(Intercept, Cases)
{
  Rng        rng(5);
  const auto spec = BlockSpec::make(8);

  auto no_bias = oracle::random_model(spec, 2, rng);
  no_bias.b1.assign(spec.m(), 0.0);
  no_bias.b2.assign(spec.m(), 0.0);
  no_bias.b3.assign(spec.q(), 0.0);
  no_bias.b4[1].assign(spec.n(), 0.0);
  EXPECT_EQ(intercept(no_bias, 1), std::vector<double>(spec.n(), 0.0));

  auto bias_only  = NNModel::zeros(spec, 2);
  bias_only.b1    = oracle::random_vector(spec.m(), rng);
  bias_only.b4[0] = oracle::random_vector(spec.n(), rng);
  EXPECT_EQ(intercept(bias_only, 0), bias_only.b4[0]);

  const auto model = oracle::random_model(spec, 2, rng);
  for (std::size_t k = 0; k < 2; ++k)
    EXPECT_LE(oracle::rel_error(intercept(model, k), oracle::naive_nn_forward(model, std::vector<double>(spec.m(), 0.0), k, false)),
              1e-12);
}

TEST(CollapseNoIntercept, ZeroModelFallsBackEverywhere)
{
  const auto spec = BlockSpec::make(4);
  const auto out  = collapse_no_intercept(NNModel::zeros(spec, 1));
  EXPECT_EQ(out.degenerate_count(), spec.n());
  for (double v : out.model.A[0].values())
    EXPECT_DOUBLE_EQ(v, 1.0 / 48.0);
}

TEST(CollapseNoIntercept, OneHotRowsUnchanged)
{
  const auto spec  = BlockSpec::make(4);
  const auto model = selection_model(spec);
  const auto out   = collapse_no_intercept(model);
  EXPECT_EQ(out.degenerate_count(), 0u);
  EXPECT_EQ(out.model.A[0], master_matrix(model, 0));
}

TEST(CollapseNoIntercept, TrainedModelRowsSumToOne)
{
  const auto spec = BlockSpec::make(4);
  LumaImage  img(64, 64);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      img.at(x, y) = static_cast<std::uint8_t>((x * 3 + y * 5) % 256);
  const auto  data = sample_dataset({img}, 200, spec, 5);
  TrainConfig config;
  config.K     = 3;
  config.steps = 60;
  config.batch_size = 32;
  const auto trained = train_nn(data, spec, config).model;
  const auto out     = collapse_no_intercept(trained);
  for (std::size_t k = 0; k < out.model.modes(); ++k)
    for (std::size_t i = 0; i < spec.n(); ++i)
    {
      double s = 0.0;
      for (double v : out.model.A[k].row(i))
        s += v;
      EXPECT_NEAR(s, 1.0, 1e-9);
    }
}

TEST(CollapseWithIntercept, ZeroAndBiasOnlyModels)
{
  const auto spec = BlockSpec::make(4);
  const auto zero = collapse_with_intercept(NNModel::zeros(spec, 2));
  for (std::size_t k = 0; k < 2; ++k)
  {
    EXPECT_EQ(zero.Gamma[k], Matrix<double>(spec.n(), spec.m()));
    EXPECT_EQ(zero.beta[k], std::vector<double>(spec.n(), 0.0));
  }

  Rng  rng(6);
  auto model  = NNModel::zeros(spec, 2);
  model.b4[0] = oracle::random_vector(spec.n(), rng);
  model.b4[1] = oracle::random_vector(spec.n(), rng);
  const auto out = collapse_with_intercept(model);
  EXPECT_EQ(out.Gamma[1], Matrix<double>(spec.n(), spec.m()));
  EXPECT_EQ(out.beta[0], model.b4[0]);
  EXPECT_EQ(out.beta[1], model.b4[1]);
}

TEST(CollapseWithIntercept, EqualsLinearizedNetwork)
{
  Rng rng(7);
  for (int N : {4, 8, 16})
  {
    const auto spec   = BlockSpec::make(N);
    const auto model  = oracle::random_model(spec, 2, rng);
    const auto affine = collapse_with_intercept(model);
    for (int trial = 0; trial < 10; ++trial)
    {
      const auto r = oracle::random_vector(spec.m(), rng, 0.0, 1.0);
      for (std::size_t k = 0; k < 2; ++k)
        EXPECT_LE(oracle::rel_error(affine_forward(affine, r, k), nn_forward_linearized(model, r, k)), 1e-9);
    }
  }
}

TEST(Layout, BijectionForAllSizes)
{
  for (int N : {4, 8, 16})
  {
    const auto                            spec = BlockSpec::make(N);
    std::set<std::pair<int, int>>         pixels;
    for (std::size_t i = 0; i < spec.m(); ++i)
    {
      const auto cell = layout_cell(spec, i);
      EXPECT_EQ(layout_index(spec, cell), i);
      const auto off = pixel_offset(cell);
      EXPECT_TRUE(off.dx < 0 || off.dy < 0) << "reference cell inside the block";
      EXPECT_GE(off.dx, -kReferenceLines);
      EXPECT_GE(off.dy, -kReferenceLines);
      EXPECT_LT(off.dx, N);
      EXPECT_LT(off.dy, N);
      pixels.insert({off.dx, off.dy});
    }
    // (N+4)² window minus the block
    EXPECT_EQ(pixels.size(), static_cast<std::size_t>((N + 4) * (N + 4) - N * N));
  }
}

TEST(Heatmap, UniformRowIsFlat)
{
  const auto                spec = BlockSpec::make(4);
  const std::vector<double> row(spec.m(), 1.0 / 48.0);
  const auto                grid = predictor_heatmap(row, spec, 5);
  EXPECT_EQ(grid.min, 1.0 / 48.0);
  EXPECT_EQ(grid.max, 1.0 / 48.0);
  EXPECT_EQ(grid.target_row, 1u);
  EXPECT_EQ(grid.target_col, 1u);
}

TEST(Heatmap, OneHotLandsOnMatchingCell)
{
  const auto spec = BlockSpec::make(8);
  for (std::size_t hot : {0ul, 17ul, 16ul + 4 * 8 + 5})
  {
    std::vector<double> row(spec.m(), 0.0);
    row[hot]        = 1.0;
    const auto grid = predictor_heatmap(row, spec, 0);
    const auto cell = layout_cell(spec, hot);
    int        nonzero = 0;
    for (Region r : {Region::corner, Region::top, Region::left})
      for (double v : grid.region(r).values())
        nonzero += v != 0.0;
    EXPECT_EQ(nonzero, 1);
    EXPECT_EQ(grid.region(cell.region)(cell.row, cell.col), 1.0);
  }
}

TEST(Heatmap, FlattenRoundTrip)
{
  Rng rng(8);
  for (int N : {4, 8, 16})
  {
    const auto spec = BlockSpec::make(N);
    const auto row  = oracle::random_vector(spec.m(), rng);
    EXPECT_EQ(predictor_heatmap(row, spec, spec.n() - 1).flatten(), row);
    EXPECT_THROW(predictor_heatmap(row, spec, spec.n()), std::out_of_range);
    EXPECT_THROW(predictor_heatmap(std::vector<double>(spec.m() + 1), spec, 0), DimensionError);
  }
}
