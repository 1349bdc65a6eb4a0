// nnip: train, collapse, evaluate and inspect learned intra predictors.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>

#include "nnip/nnip.hpp"
#if NNIP_WITH_PNG
#include "nnip/png_image.hpp"
#endif

namespace fs = std::filesystem;
using namespace nnip;

namespace {

class UsageError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

const CLI::Validator kBlockSize(
  [](std::string& s) -> std::string {
    try
    {
      if (BlockSpec::is_supported(std::stoi(s)))
        return {};
    }
    catch (const std::exception&)
    {
    }
    return "block size N=" + s + " is not supported; N must be one of {4, 8, 16}";
  },
  "{4, 8, 16}");

bool is_image_file(const fs::path& p)
{
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".pgm" || ext == ".png";
}

LumaImage load_image(const fs::path& p)
{
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".png")
  {
#if NNIP_WITH_PNG
    return read_png_gray(p);
#else
    throw ImageError(p.string() + ": built without PNG support");
#endif
  }
  return read_pgm(p);
}

/// Expands directories (sorted, image files only) and keeps plain files as given.
std::vector<fs::path> expand_images(const std::vector<std::string>& args)
{
  std::vector<fs::path> out;
  for (const auto& a : args)
  {
    const fs::path p(a);
    if (fs::is_directory(p))
    {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file() && is_image_file(e.path()))
          found.push_back(e.path());
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    }
    else if (fs::exists(p))
      out.push_back(p);
    else
      throw UsageError("image path not found: " + a);
  }
  if (out.empty())
    throw UsageError("no input images found");
  return out;
}

ModelFile load_checked(const std::string& path, ModelKind expected)
{
  auto file = load_model(path);
  if (file.kind() != expected)
    throw UsageError(path + " holds a " + to_string(file.kind()) + " model, expected " + to_string(expected));
  return file;
}

// ---------------------------------------------------------------------------

struct TrainArgs
{
  std::vector<std::string> images;
  int                      N       = 4;
  std::size_t              patches = 2000;
  std::string              kind    = "nn";
  std::string              optimizer = "adam";
  std::string              out;
  std::string              loss_csv;
  TrainConfig              config;
};

void cmd_train(const TrainArgs& a)
{
  const auto spec  = BlockSpec::make(a.N);
  const auto paths = expand_images(a.images);
  std::vector<LumaImage> images;
  for (const auto& p : paths)
    images.push_back(load_image(p));

  TrainConfig config = a.config;
  config.optimizer   = a.optimizer == "sgd" ? Optimizer::sgd : Optimizer::adam;
  config.validate();

  // Patch positions get their own stream so that changing the optimizer
  // settings never changes the data.
  const auto data = sample_dataset(images, a.patches, spec, config.seed);

  std::string digest_input = config.canonical() + ";kind=" + a.kind + ";N=" + std::to_string(a.N) +
                             ";patches=" + std::to_string(a.patches);
  for (const auto& p : paths)
    digest_input += ";image=" + p.filename().string();

  ModelFile               file;
  std::vector<LossRecord> trace;
  if (a.kind == "nn")
  {
    auto result = train_nn(data, spec, config);
    file.model  = std::move(result.model);
    trace       = std::move(result.trace);
  }
  else
  {
    auto result = train_linear(data, spec, config);
    file.model  = std::move(result.model);
    trace       = std::move(result.trace);
  }
  file.provenance = {config.seed, fnv1a_hex(digest_input), creation_timestamp()};

  save_model(a.out, file);
  if (!a.loss_csv.empty())
    write_file_atomic(a.loss_csv, loss_trace_csv(trace));

  const auto means = epoch_means(trace);
  std::printf("trained %s N=%d K=%zu on %zu patches from %zu images: %zu steps, final epoch loss %.6g\n",
              to_string(file.kind()), a.N, config.K, data.size(), images.size(), trace.size(),
              means.empty() ? 0.0 : means.back());
  std::printf("wrote %s (config digest %s)\n", a.out.c_str(), file.provenance.config_digest.c_str());
}

// ---------------------------------------------------------------------------

struct CollapseArgs
{
  std::string in, out_a, out_affine;
};

void cmd_collapse(const CollapseArgs& a)
{
  if (a.out_a.empty() && a.out_affine.empty())
    throw UsageError("nothing to write: give --out-a and/or --out-affine");
  const auto  file = load_checked(a.in, ModelKind::nn);
  const auto& nn   = std::get<NNModel>(file.model);

  // Compute both forms before writing either so a failure leaves no output.
  const auto no_intercept   = collapse_no_intercept(nn);
  const auto with_intercept = collapse_with_intercept(nn);

  for (std::size_t k = 0; k < nn.modes(); ++k)
  {
    const auto& rows = no_intercept.degenerate_rows[k];
    std::printf("mode %zu: %zu degenerate rows\n", k + 1, rows.size());
    if (!rows.empty())
      std::fprintf(stderr, "warning: mode %zu has %zu rows with |row sum| < %g; they fall back to uniform weights\n",
                   k + 1, rows.size(), kDegenerateRowSum);
  }
  if (!a.out_a.empty())
  {
    save_model(a.out_a, {no_intercept.model, file.provenance});
    std::printf("wrote %s\n", a.out_a.c_str());
  }
  if (!a.out_affine.empty())
  {
    save_model(a.out_affine, {with_intercept, file.provenance});
    std::printf("wrote %s\n", a.out_affine.c_str());
  }
}

// ---------------------------------------------------------------------------

struct EvalArgs
{
  std::vector<std::string> images;
  std::vector<int>         sizes{4};
  std::string              nn, linear, affine;
  std::string              out, csv;
  std::string              metric = "sse";
  std::string              modes  = "hevc35";
  bool                     blocks = false;
};

void cmd_eval(const EvalArgs& a)
{
  const auto paths = expand_images(a.images);

  std::vector<ModelFile> files;
  auto load_opt = [&](const std::string& path, ModelKind kind) -> const ModelFile* {
    if (path.empty())
      return nullptr;
    files.push_back(load_checked(path, kind));
    return &files.back();
  };
  files.reserve(3);
  const ModelFile* nn_file     = load_opt(a.nn, ModelKind::nn);
  const ModelFile* linear_file = load_opt(a.linear, ModelKind::linear_no_intercept);
  const ModelFile* affine_file = load_opt(a.affine, ModelKind::linear_with_intercept);

  const std::set<int> sizes(a.sizes.begin(), a.sizes.end());
  for (const ModelFile* f : {nn_file, linear_file, affine_file})
    if (f && !sizes.count(f->spec().N))
      throw UsageError("model block size N=" + std::to_string(f->spec().N) + " does not match any requested --N");

  EvalOptions options;
  options.metric      = a.metric == "satd" ? Metric::satd : Metric::sse;
  options.keep_blocks = a.blocks;
  const auto mode_set = a.modes == "planar-dc" ? ConventionalModeSet::planar_dc() : ConventionalModeSet::hevc35();

  std::vector<LumaImage> images;
  for (const auto& p : paths)
    images.push_back(load_image(p));

  std::vector<PredictionReport> reports;
  for (int N : sizes)
  {
    const auto    spec = BlockSpec::make(N);
    LearnedModels models;
    if (nn_file && nn_file->spec() == spec)
      models.nn = &std::get<NNModel>(nn_file->model);
    if (linear_file && linear_file->spec() == spec)
      models.linear = &std::get<LinearNoIntercept>(linear_file->model);
    if (affine_file && affine_file->spec() == spec)
      models.affine = &std::get<LinearWithIntercept>(affine_file->model);

    std::optional<PredictionReport> total;
    for (const auto& img : images)
    {
      if (img.width < N || img.height < N)
        continue;
      auto r = evaluate_image(img, spec, models, mode_set, options);
      if (total)
        total->merge(r);
      else
        total = std::move(r);
    }
    if (!total)
      throw UsageError("no image is large enough for N=" + std::to_string(N));
    reports.push_back(std::move(*total));
  }

  for (const auto& r : reports)
  {
    std::printf("N=%d blocks=%zu conventional %s=%.6g\n", r.spec.N, r.blocks, metric_name(r.metric),
                r.conventional_cost);
    for (const auto& pool : r.pools)
    {
      std::printf("  %-22s learned usage %6.2f%%  %s=%.6g  histogram", to_string(pool.kind), r.usage_percent(pool),
                  metric_name(r.metric), pool.total_cost);
      for (auto h : pool.mode_histogram)
        std::printf(" %zu", h);
      std::printf("\n");
    }
  }

  if (!a.out.empty())
  {
    nlohmann::json j;
    j["images"] = nlohmann::json::array();
    for (const auto& p : paths)
      j["images"].push_back(p.filename().string());
    j["reports"] = nlohmann::json::array();
    for (const auto& r : reports)
      j["reports"].push_back(report_json(r, a.blocks));
    write_file_atomic(a.out, j.dump(1) + "\n");
  }
  if (!a.csv.empty())
    write_file_atomic(a.csv, report_csv(reports));
}

// ---------------------------------------------------------------------------

struct VizArgs
{
  std::string              in;
  std::size_t              mode = 1;
  std::vector<std::size_t> targets;
  std::string              out_dir;
};

void cmd_viz(const VizArgs& a)
{
  const auto file = load_model(a.in);
  const auto spec = file.spec();
  if (file.kind() == ModelKind::nn)
    throw UsageError(a.in + " holds an nn model; run collapse first and visualize a linear form");
  if (a.mode < 1 || a.mode > file.modes())
    throw UsageError("--mode " + std::to_string(a.mode) + " outside 1.." + std::to_string(file.modes()));

  const Matrix<double>& M = file.kind() == ModelKind::linear_no_intercept
                              ? std::get<LinearNoIntercept>(file.model).A[a.mode - 1]
                              : std::get<LinearWithIntercept>(file.model).Gamma[a.mode - 1];

  std::vector<std::size_t> targets = a.targets;
  if (targets.empty())
    for (std::size_t t = 0; t < spec.n(); ++t)
      targets.push_back(t);
  for (auto t : targets)
    if (t >= spec.n())
      throw UsageError("--target " + std::to_string(t) + " outside 0.." + std::to_string(spec.n() - 1));
  if (!fs::is_directory(a.out_dir))
    throw UsageError("output directory does not exist: " + a.out_dir);

  double scale = 0.0;
  for (double v : M.values())
    scale = std::max(scale, std::abs(v));

  for (auto t : targets)
  {
    const auto  grid = predictor_heatmap(M.row(t), spec, t);
    const auto  stem = "heatmap_N" + std::to_string(spec.N) + "_k" + std::to_string(a.mode) + "_r" +
                      std::to_string(grid.target_row) + "_c" + std::to_string(grid.target_col);
    const auto  dir  = fs::path(a.out_dir);
    write_file_atomic(dir / (stem + ".pgm"), encode_pgm(render_heatmap(grid, scale)));
    write_file_atomic(dir / (stem + ".csv"), heatmap_csv(grid));
  }
  std::printf("wrote %zu heatmaps to %s (scale %.6g)\n", targets.size(), a.out_dir.c_str(), scale);
}

// ---------------------------------------------------------------------------

struct ComplexityArgs
{
  std::vector<int> sizes{4, 8, 16};
  bool             verify = false;
};

int cmd_complexity(const ComplexityArgs& a)
{
  std::printf("%-6s %-6s %-12s %-12s\n", "N", "n", "nn", "simplified");
  bool ok = true;
  for (int N : a.sizes)
  {
    const auto spec   = BlockSpec::make(N);
    const auto nn     = multiplication_count(spec, ModelKind::nn);
    const auto simple = multiplication_count(spec, ModelKind::linear_with_intercept);
    std::printf("%-6d %-6zu %-12llu %-12llu\n", N, spec.n(), static_cast<unsigned long long>(nn),
                static_cast<unsigned long long>(simple));
    if (a.verify)
      for (auto kind : {ModelKind::nn, ModelKind::linear_no_intercept, ModelKind::linear_with_intercept})
      {
        const auto counted = instrumented_multiplications(spec, kind);
        const auto formula = multiplication_count(spec, kind);
        if (counted != formula)
        {
          ok = false;
          std::fprintf(stderr, "mismatch: N=%d %s counted %llu, formula %llu\n", N, to_string(kind),
                       static_cast<unsigned long long>(counted), static_cast<unsigned long long>(formula));
        }
      }
  }
  std::printf("multiplications per predicted block for one mode; the simplified predictor needs 8n(sqrt(n)+2), "
              "i.e. O(n\xE2\x88\x9An)\n");
  if (a.verify)
    std::printf("instrumented forward passes %s the formulas\n", ok ? "match" : "DO NOT match");
  return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Learned intra predictors: train, collapse to linear form, evaluate, visualize"};
  app.require_subcommand(1);

  TrainArgs train;
  auto*     t = app.add_subcommand("train", "train an NN or affine predictor on image patches");
  t->add_option("--images", train.images, "image files or directories (PGM P5, 8-bit gray PNG)")->required();
  t->add_option("--N", train.N, "block size")->check(kBlockSize);
  t->add_option("--K", train.config.K, "number of learned modes")->check(CLI::PositiveNumber);
  t->add_option("--patches", train.patches, "training patches to sample")->check(CLI::PositiveNumber);
  t->add_option("--seed", train.config.seed, "random seed");
  t->add_option("--kind", train.kind, "model kind")->check(CLI::IsMember({"nn", "linear"}));
  t->add_option("--steps", train.config.steps, "optimizer steps")->check(CLI::PositiveNumber);
  t->add_option("--lr", train.config.learning_rate, "learning rate")->check(CLI::PositiveNumber);
  t->add_option("--batch", train.config.batch_size, "mini-batch size")->check(CLI::PositiveNumber);
  t->add_option("--optimizer", train.optimizer, "optimizer")->check(CLI::IsMember({"adam", "sgd"}));
  t->add_option("--out", train.out, "model file to write")->required();
  t->add_option("--loss-csv", train.loss_csv, "per-step loss trace CSV");

  CollapseArgs collapse;
  auto*        c = app.add_subcommand("collapse", "derive the two linear predictors from an NN model");
  c->add_option("--in", collapse.in, "NN model file")->required()->check(CLI::ExistingFile);
  c->add_option("--out-a", collapse.out_a, "row-normalized matrix model (no intercept)");
  c->add_option("--out-affine", collapse.out_affine, "matrix + intercept model");

  EvalArgs eval;
  auto*    e = app.add_subcommand("eval", "best-mode selection over whole images");
  e->add_option("--images", eval.images, "image files or directories")->required();
  e->add_option("--N", eval.sizes, "block sizes")->check(kBlockSize);
  e->add_option("--nn", eval.nn, "NN model file");
  e->add_option("--linear-a", eval.linear, "row-normalized linear model file");
  e->add_option("--linear-affine", eval.affine, "affine linear model file");
  e->add_option("--metric", eval.metric, "distortion metric")->check(CLI::IsMember({"sse", "satd"}));
  e->add_option("--modes", eval.modes, "conventional mode set")->check(CLI::IsMember({"hevc35", "planar-dc"}));
  e->add_option("--out", eval.out, "report JSON");
  e->add_option("--csv", eval.csv, "summary CSV");
  e->add_flag("--blocks", eval.blocks, "include per-block decisions in the JSON");

  VizArgs viz;
  auto*   v = app.add_subcommand("viz", "heatmaps of linear predictor rows");
  v->add_option("--in", viz.in, "linear model file")->required()->check(CLI::ExistingFile);
  v->add_option("--mode", viz.mode, "learned mode, 1-based");
  v->add_option("--target", viz.targets, "target sample indices (row-major); default all");
  v->add_option("--out", viz.out_dir, "output directory")->required();

  ComplexityArgs complexity;
  auto*          x = app.add_subcommand("complexity", "multiplications per predicted block");
  x->add_option("--N", complexity.sizes, "block sizes")->check(kBlockSize);
  x->add_flag("--verify", complexity.verify, "cross-check against instrumented forward passes");

  CLI11_PARSE(app, argc, argv);

  try
  {
    if (t->parsed())
      cmd_train(train);
    else if (c->parsed())
      cmd_collapse(collapse);
    else if (e->parsed())
      cmd_eval(eval);
    else if (v->parsed())
      cmd_viz(viz);
    else if (x->parsed())
      return cmd_complexity(complexity);
  }
  catch (const UsageError& err)
  {
    std::fprintf(stderr, "nnip: %s\n", err.what());
    return 2;
  }
  catch (const std::exception& err)
  {
    std::fprintf(stderr, "nnip: error: %s\n", err.what());
    return 1;
  }
  return 0;
}
