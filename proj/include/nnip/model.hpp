#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "nnip/block_spec.hpp"
#include "nnip/matrix.hpp"
#include "nnip/op_count.hpp"

namespace nnip {

template <typename Real>
using Vector = std::vector<Real>;

/// Row-major N×N block of predicted (or target) samples in the [0, 1] domain.
using PredBlock = std::vector<double>;

template <typename Real>
using InputSpan = std::type_identity_t<std::span<const Real>>;

inline double to_double(double v) { return v; }
inline double to_double(CountedReal v) { return v.value(); }

/// Reference samples of one block in the canonical layout, each in [0, 1].
class RefVector
{
public:
  RefVector() = default;
  explicit RefVector(std::vector<double> values) : values_(std::move(values))
  {
    for (double v : values_)
      if (!(v >= 0.0 && v <= 1.0))
        throw std::domain_error("reference sample outside [0, 1]: " + std::to_string(v));
  }

  std::size_t size() const { return values_.size(); }
  double      operator[](std::size_t i) const { return values_[i]; }

  const std::vector<double>& values() const { return values_; }
  operator std::span<const double>() const { return values_; } // NOLINT(google-explicit-constructor)

  friend bool operator==(const RefVector&, const RefVector&) = default;

private:
  std::vector<double> values_;
};

class ModeIndexError : public std::out_of_range
{
public:
  using std::out_of_range::out_of_range;
};

inline void require_mode(std::size_t k, std::size_t K)
{
  if (k >= K)
    throw ModeIndexError("mode index " + std::to_string(k) + " out of range for K=" + std::to_string(K));
}

namespace detail {

template <typename Real>
bool all_finite(std::span<const Real> v)
{
  return std::all_of(v.begin(), v.end(), [](const Real& x) { return std::isfinite(to_double(x)); });
}

template <typename U, typename Real>
std::vector<U> cast_vector(const std::vector<Real>& v)
{
  std::vector<U> out;
  out.reserve(v.size());
  for (const Real& x : v)
    out.push_back(U(to_double(x)));
  return out;
}

template <typename U, typename Real>
Matrix<U> cast_matrix(const Matrix<Real>& M)
{
  return Matrix<U>(M.rows(), M.cols(), cast_vector<U>(std::vector<Real>(M.values().begin(), M.values().end())));
}

} // namespace detail

/// eLU with unit scale: x for x > 0, e^x − 1 otherwise.
template <typename Real>
Real elu(Real x)
{
  using std::exp;
  return x > Real(0) ? x : exp(x) - Real(1);
}

/// Four-layer predictor: three shared eLU layers (m → m → m → q) followed by
/// one linear head (q → n) per mode.
template <typename Real>
struct BasicNNModel
{
  BlockSpec              spec;
  Matrix<Real>           W1, W2, W3;
  Vector<Real>           b1, b2, b3;
  std::vector<Matrix<Real>> W4;
  std::vector<Vector<Real>> b4;

  static BasicNNModel zeros(BlockSpec spec, std::size_t K)
  {
    if (K == 0)
      throw std::invalid_argument("mode count K must be >= 1");
    const auto   m = spec.m(), q = spec.q(), n = spec.n();
    BasicNNModel model;
    model.spec = spec;
    model.W1   = Matrix<Real>(m, m);
    model.W2   = Matrix<Real>(m, m);
    model.W3   = Matrix<Real>(q, m);
    model.b1.assign(m, Real(0));
    model.b2.assign(m, Real(0));
    model.b3.assign(q, Real(0));
    model.W4.assign(K, Matrix<Real>(n, q));
    model.b4.assign(K, Vector<Real>(n, Real(0)));
    return model;
  }

  std::size_t modes() const { return W4.size(); }

  /// Throws DimensionError or std::domain_error when the invariants break.
  void validate() const
  {
    const auto m = spec.m(), q = spec.q(), n = spec.n();
    require_dims(modes() >= 1, "K >= 1");
    require_dims(W1.rows() == m && W1.cols() == m, "W1 must be m x m");
    require_dims(W2.rows() == m && W2.cols() == m, "W2 must be m x m");
    require_dims(W3.rows() == q && W3.cols() == m, "W3 must be q x m");
    require_dims(b1.size() == m && b2.size() == m && b3.size() == q, "shared biases");
    require_dims(b4.size() == modes(), "one b4 per mode");
    for (std::size_t k = 0; k < modes(); ++k)
      require_dims(W4[k].rows() == n && W4[k].cols() == q && b4[k].size() == n, "W4[k] must be n x q, b4[k] length n");

    bool finite = detail::all_finite(W1.values()) && detail::all_finite(W2.values()) &&
                  detail::all_finite(W3.values()) && detail::all_finite<Real>(b1) &&
                  detail::all_finite<Real>(b2) && detail::all_finite<Real>(b3);
    for (std::size_t k = 0; k < modes(); ++k)
      finite = finite && detail::all_finite(W4[k].values()) && detail::all_finite<Real>(b4[k]);
    if (!finite)
      throw std::domain_error("model contains non-finite coefficients");
  }

  template <typename U>
  BasicNNModel<U> cast() const
  {
    BasicNNModel<U> out;
    out.spec = spec;
    out.W1   = detail::cast_matrix<U>(W1);
    out.W2   = detail::cast_matrix<U>(W2);
    out.W3   = detail::cast_matrix<U>(W3);
    out.b1   = detail::cast_vector<U>(b1);
    out.b2   = detail::cast_vector<U>(b2);
    out.b3   = detail::cast_vector<U>(b3);
    for (std::size_t k = 0; k < modes(); ++k)
    {
      out.W4.push_back(detail::cast_matrix<U>(W4[k]));
      out.b4.push_back(detail::cast_vector<U>(b4[k]));
    }
    return out;
  }

  friend bool operator==(const BasicNNModel&, const BasicNNModel&) = default;
};

/// Per-mode matrices A(k) (n×m) whose rows are normalised to sum to one.
template <typename Real>
struct BasicLinearNoIntercept
{
  BlockSpec                 spec;
  std::vector<Matrix<Real>> A;

  std::size_t modes() const { return A.size(); }

  void validate() const
  {
    require_dims(modes() >= 1, "K >= 1");
    for (const auto& a : A)
    {
      require_dims(a.rows() == spec.n() && a.cols() == spec.m(), "A[k] must be n x m");
      if (!detail::all_finite(a.values()))
        throw std::domain_error("model contains non-finite coefficients");
    }
  }

  template <typename U>
  BasicLinearNoIntercept<U> cast() const
  {
    BasicLinearNoIntercept<U> out{spec, {}};
    for (const auto& a : A)
      out.A.push_back(detail::cast_matrix<U>(a));
    return out;
  }

  friend bool operator==(const BasicLinearNoIntercept&, const BasicLinearNoIntercept&) = default;
};

/// Per-mode affine predictors p = Γ(k)·r + β(k).
template <typename Real>
struct BasicLinearWithIntercept
{
  BlockSpec                 spec;
  std::vector<Matrix<Real>> Gamma;
  std::vector<Vector<Real>> beta;

  static BasicLinearWithIntercept zeros(BlockSpec spec, std::size_t K)
  {
    if (K == 0)
      throw std::invalid_argument("mode count K must be >= 1");
    return {spec, std::vector<Matrix<Real>>(K, Matrix<Real>(spec.n(), spec.m())),
            std::vector<Vector<Real>>(K, Vector<Real>(spec.n(), Real(0)))};
  }

  std::size_t modes() const { return Gamma.size(); }

  void validate() const
  {
    require_dims(modes() >= 1, "K >= 1");
    require_dims(beta.size() == modes(), "one beta per mode");
    for (std::size_t k = 0; k < modes(); ++k)
    {
      require_dims(Gamma[k].rows() == spec.n() && Gamma[k].cols() == spec.m(), "Gamma[k] must be n x m");
      require_dims(beta[k].size() == spec.n(), "beta[k] length n");
      if (!detail::all_finite(Gamma[k].values()) || !detail::all_finite<Real>(beta[k]))
        throw std::domain_error("model contains non-finite coefficients");
    }
  }

  template <typename U>
  BasicLinearWithIntercept<U> cast() const
  {
    BasicLinearWithIntercept<U> out{spec, {}, {}};
    for (std::size_t k = 0; k < modes(); ++k)
    {
      out.Gamma.push_back(detail::cast_matrix<U>(Gamma[k]));
      out.beta.push_back(detail::cast_vector<U>(beta[k]));
    }
    return out;
  }

  friend bool operator==(const BasicLinearWithIntercept&, const BasicLinearWithIntercept&) = default;
};

using NNModel             = BasicNNModel<double>;
using LinearNoIntercept   = BasicLinearNoIntercept<double>;
using LinearWithIntercept = BasicLinearWithIntercept<double>;

namespace detail {

template <typename Real, typename Activation>
Vector<Real> nn_forward_with(const BasicNNModel<Real>& model, std::span<const Real> r, std::size_t k, Activation act)
{
  require_mode(k, model.modes());
  require_dims(r.size() == model.spec.m(), "reference vector length != m");
  auto layer = [&](const Matrix<Real>& W, std::span<const Real> x, const Vector<Real>& b) {
    auto t = affine<Real>(W, x, b);
    for (auto& v : t)
      v = act(v);
    return t;
  };
  const auto t1 = layer(model.W1, r, model.b1);
  const auto t2 = layer(model.W2, t1, model.b2);
  const auto t3 = layer(model.W3, t2, model.b3);
  return affine<Real>(model.W4[k], t3, model.b4[k]);
}

} // namespace detail

/// Full network prediction for mode k (0-based). The head output is not
/// activated and not clipped.
template <typename Real>
Vector<Real> nn_forward(const BasicNNModel<Real>& model, InputSpan<Real> r, std::size_t k)
{
  return detail::nn_forward_with(model, r, k, [](Real v) { return elu(v); });
}

/// The same layer composition with every eLU replaced by the identity.
template <typename Real>
Vector<Real> nn_forward_linearized(const BasicNNModel<Real>& model, InputSpan<Real> r, std::size_t k)
{
  return detail::nn_forward_with(model, r, k, [](Real v) { return v; });
}

template <typename Real>
Vector<Real> linear_forward(const BasicLinearNoIntercept<Real>& model, InputSpan<Real> r, std::size_t k)
{
  require_mode(k, model.modes());
  require_dims(r.size() == model.spec.m(), "reference vector length != m");
  return matvec<Real>(model.A[k], r);
}

template <typename Real>
Vector<Real> affine_forward(const BasicLinearWithIntercept<Real>& model, InputSpan<Real> r, std::size_t k)
{
  require_mode(k, model.modes());
  require_dims(r.size() == model.spec.m(), "reference vector length != m");
  return affine<Real>(model.Gamma[k], r, model.beta[k]);
}

/// Clamp every sample into [0, 1]. Applied to final predictions only.
inline PredBlock clip_block(PredBlock p)
{
  for (auto& v : p)
    v = std::clamp(v, 0.0, 1.0);
  return p;
}

} // namespace nnip
