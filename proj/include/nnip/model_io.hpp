#pragma once

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "nnip/atomic_file.hpp"
#include "nnip/harness.hpp"
#include "nnip/model.hpp"

namespace nnip {

inline constexpr int              kModelFormatVersion = 1;
inline constexpr std::string_view kModelFormatName    = "nnip-model";

class ModelFormatError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct Provenance
{
  std::optional<std::uint64_t> seed;
  std::string                  config_digest;
  std::string                  created; ///< UTC, ISO 8601

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

using AnyModel = std::variant<NNModel, LinearNoIntercept, LinearWithIntercept>;

struct ModelFile
{
  AnyModel   model;
  Provenance provenance;

  ModelKind kind() const { return static_cast<ModelKind>(model.index()); }
  BlockSpec spec() const
  {
    return std::visit([](const auto& m) { return m.spec; }, model);
  }
  std::size_t modes() const
  {
    return std::visit([](const auto& m) { return m.modes(); }, model);
  }
};

/// 64-bit FNV-1a, rendered as 16 hex digits.
inline std::string fnv1a_hex(std::string_view text)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text)
  {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Creation time honouring SOURCE_DATE_EPOCH, so seeded runs can be made
/// byte-reproducible.
inline std::string creation_timestamp()
{
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch)
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  std::tm utc{};
  gmtime_r(&t, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

namespace detail {

using json = nlohmann::json;

inline json matrix_json(const Matrix<double>& M)
{
  return json{{"shape", json::array({M.rows(), M.cols()})}, {"data", std::vector<double>(M.values().begin(), M.values().end())}};
}

inline json vector_json(const std::vector<double>& v) { return json{{"shape", json::array({v.size()})}, {"data", v}}; }

inline const json& field(const json& j, const char* key)
{
  if (!j.is_object() || !j.contains(key))
    throw ModelFormatError(std::string("missing field '") + key + "'");
  return j.at(key);
}

inline std::vector<double> data_of(const json& j, std::size_t expected, const char* name)
{
  const auto& data = field(j, "data");
  if (!data.is_array() || data.size() != expected)
    throw ModelFormatError(std::string("array '") + name + "' has " + std::to_string(data.is_array() ? data.size() : 0) +
                           " values, expected " + std::to_string(expected));
  std::vector<double> out;
  out.reserve(expected);
  for (const auto& v : data)
  {
    if (!v.is_number())
      throw ModelFormatError(std::string("array '") + name + "' holds a non-numeric value");
    out.push_back(v.get<double>());
  }
  return out;
}

inline Matrix<double> parse_matrix(const json& j, std::size_t rows, std::size_t cols, const char* name)
{
  const auto& shape = field(j, "shape");
  if (shape != json::array({rows, cols}))
    throw ModelFormatError(std::string("array '") + name + "' has shape " + shape.dump() + ", expected [" +
                           std::to_string(rows) + "," + std::to_string(cols) + "]");
  return Matrix<double>(rows, cols, data_of(j, rows * cols, name));
}

inline std::vector<double> parse_vector(const json& j, std::size_t size, const char* name)
{
  const auto& shape = field(j, "shape");
  if (shape != json::array({size}))
    throw ModelFormatError(std::string("array '") + name + "' has shape " + shape.dump() + ", expected [" +
                           std::to_string(size) + "]");
  return data_of(j, size, name);
}

inline const json& mode_list(const json& arrays, const char* name, std::size_t K)
{
  const auto& list = field(arrays, name);
  if (!list.is_array() || list.size() != K)
    throw ModelFormatError(std::string("array list '") + name + "' must hold K=" + std::to_string(K) + " entries");
  return list;
}

} // namespace detail

inline std::string serialize_model(const ModelFile& file)
{
  using detail::json;
  const BlockSpec spec = file.spec();
  json            arrays;
  std::visit(
    [&](const auto& m) {
      m.validate();
      using T = std::decay_t<decltype(m)>;
      if constexpr (std::is_same_v<T, NNModel>)
      {
        arrays["W1"] = detail::matrix_json(m.W1);
        arrays["b1"] = detail::vector_json(m.b1);
        arrays["W2"] = detail::matrix_json(m.W2);
        arrays["b2"] = detail::vector_json(m.b2);
        arrays["W3"] = detail::matrix_json(m.W3);
        arrays["b3"] = detail::vector_json(m.b3);
        arrays["W4"] = json::array();
        arrays["b4"] = json::array();
        for (std::size_t k = 0; k < m.modes(); ++k)
        {
          arrays["W4"].push_back(detail::matrix_json(m.W4[k]));
          arrays["b4"].push_back(detail::vector_json(m.b4[k]));
        }
      }
      else if constexpr (std::is_same_v<T, LinearNoIntercept>)
      {
        arrays["A"] = json::array();
        for (const auto& a : m.A)
          arrays["A"].push_back(detail::matrix_json(a));
      }
      else
      {
        arrays["Gamma"] = json::array();
        arrays["beta"]  = json::array();
        for (std::size_t k = 0; k < m.modes(); ++k)
        {
          arrays["Gamma"].push_back(detail::matrix_json(m.Gamma[k]));
          arrays["beta"].push_back(detail::vector_json(m.beta[k]));
        }
      }
    },
    file.model);

  json prov = {{"config_digest", file.provenance.config_digest}, {"created", file.provenance.created}};
  prov["seed"] = file.provenance.seed ? json(*file.provenance.seed) : json(nullptr);

  json j = {{"format", kModelFormatName},
            {"version", kModelFormatVersion},
            {"kind", to_string(file.kind())},
            {"N", spec.N},
            {"n", spec.n()},
            {"m", spec.m()},
            {"q", spec.q()},
            {"K", file.modes()},
            {"provenance", prov},
            {"arrays", arrays}};
  return j.dump(1) + "\n";
}

inline ModelFile parse_model(std::string_view text)
{
  using detail::json;
  json j;
  try
  {
    j = json::parse(text);
  }
  catch (const json::exception& e)
  {
    throw ModelFormatError(std::string("model file is not valid JSON: ") + e.what());
  }

  try
  {
    if (detail::field(j, "format") != kModelFormatName)
      throw ModelFormatError("not an nnip model file");
    if (detail::field(j, "version") != kModelFormatVersion)
      throw ModelFormatError("unsupported model format version " + detail::field(j, "version").dump());
    const int N = detail::field(j, "N").get<int>();
    if (!BlockSpec::is_supported(N))
      throw ModelFormatError("unsupported block size N=" + std::to_string(N));
    const BlockSpec spec{N};
    if (detail::field(j, "n") != spec.n() || detail::field(j, "m") != spec.m() || detail::field(j, "q") != spec.q())
      throw ModelFormatError("declared n/m/q inconsistent with N");
    const auto K = detail::field(j, "K").get<std::size_t>();
    if (K < 1)
      throw ModelFormatError("K must be >= 1");
    const auto  kind   = parse_model_kind(detail::field(j, "kind").get<std::string>());
    const auto& arrays = detail::field(j, "arrays");
    const auto  n = spec.n(), m = spec.m(), q = spec.q();

    ModelFile file;
    switch (kind)
    {
    case ModelKind::nn:
    {
      NNModel model;
      model.spec = spec;
      model.W1   = detail::parse_matrix(detail::field(arrays, "W1"), m, m, "W1");
      model.b1   = detail::parse_vector(detail::field(arrays, "b1"), m, "b1");
      model.W2   = detail::parse_matrix(detail::field(arrays, "W2"), m, m, "W2");
      model.b2   = detail::parse_vector(detail::field(arrays, "b2"), m, "b2");
      model.W3   = detail::parse_matrix(detail::field(arrays, "W3"), q, m, "W3");
      model.b3   = detail::parse_vector(detail::field(arrays, "b3"), q, "b3");
      const auto& W4 = detail::mode_list(arrays, "W4", K);
      const auto& b4 = detail::mode_list(arrays, "b4", K);
      for (std::size_t k = 0; k < K; ++k)
      {
        model.W4.push_back(detail::parse_matrix(W4[k], n, q, "W4"));
        model.b4.push_back(detail::parse_vector(b4[k], n, "b4"));
      }
      file.model = std::move(model);
      break;
    }
    case ModelKind::linear_no_intercept:
    {
      LinearNoIntercept model{spec, {}};
      const auto&       A = detail::mode_list(arrays, "A", K);
      for (std::size_t k = 0; k < K; ++k)
        model.A.push_back(detail::parse_matrix(A[k], n, m, "A"));
      file.model = std::move(model);
      break;
    }
    case ModelKind::linear_with_intercept:
    {
      LinearWithIntercept model{spec, {}, {}};
      const auto&         G = detail::mode_list(arrays, "Gamma", K);
      const auto&         b = detail::mode_list(arrays, "beta", K);
      for (std::size_t k = 0; k < K; ++k)
      {
        model.Gamma.push_back(detail::parse_matrix(G[k], n, m, "Gamma"));
        model.beta.push_back(detail::parse_vector(b[k], n, "beta"));
      }
      file.model = std::move(model);
      break;
    }
    }

    if (j.contains("provenance") && j["provenance"].is_object())
    {
      const auto& p = j["provenance"];
      if (p.contains("seed") && p["seed"].is_number_unsigned())
        file.provenance.seed = p["seed"].get<std::uint64_t>();
      file.provenance.config_digest = p.value("config_digest", "");
      file.provenance.created       = p.value("created", "");
    }
    std::visit([](const auto& model) { model.validate(); }, file.model);
    return file;
  }
  catch (const json::exception& e)
  {
    throw ModelFormatError(std::string("malformed model file: ") + e.what());
  }
  catch (const std::invalid_argument& e)
  {
    throw ModelFormatError(std::string("malformed model file: ") + e.what());
  }
  catch (const std::domain_error& e)
  {
    throw ModelFormatError(std::string("malformed model file: ") + e.what());
  }
}

inline void save_model(const std::filesystem::path& path, const ModelFile& file)
{
  write_file_atomic(path, serialize_model(file));
}

inline ModelFile load_model(const std::filesystem::path& path)
{
  try
  {
    return parse_model(read_file(path));
  }
  catch (const ModelFormatError& e)
  {
    throw ModelFormatError(path.string() + ": " + e.what());
  }
}

} // namespace nnip
