#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nnip {

class DimensionError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

inline void require_dims(bool ok, const char* what)
{
  if (!ok)
    throw DimensionError(std::string("dimension mismatch: ") + what);
}

/// Dense row-major matrix.
template <typename Real>
class Matrix
{
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, Real fill = Real(0)) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<Real> data) : rows_(rows), cols_(cols), data_(std::move(data))
  {
    require_dims(data_.size() == rows_ * cols_, "matrix data length != rows*cols");
  }

  static Matrix identity(std::size_t size)
  {
    Matrix I(size, size);
    for (std::size_t i = 0; i < size; ++i)
      I(i, i) = Real(1);
    return I;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  Real&       operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Real& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<Real>       row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const Real> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<Real>       values() { return data_; }
  std::span<const Real> values() const { return data_; }

  template <typename U>
  Matrix<U> cast() const
  {
    std::vector<U> out(data_.begin(), data_.end());
    return Matrix<U>(rows_, cols_, std::move(out));
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

private:
  std::size_t       rows_ = 0;
  std::size_t       cols_ = 0;
  std::vector<Real> data_;
};

/// y = M·x
template <typename Real>
std::vector<Real> matvec(const Matrix<Real>& M, std::span<const Real> x)
{
  require_dims(M.cols() == x.size(), "matvec");
  std::vector<Real> y(M.rows(), Real(0));
  for (std::size_t i = 0; i < M.rows(); ++i)
  {
    const auto row = M.row(i);
    Real       acc(0);
    for (std::size_t j = 0; j < row.size(); ++j)
      acc += row[j] * x[j];
    y[i] = acc;
  }
  return y;
}

/// y = M·x + b
template <typename Real>
std::vector<Real> affine(const Matrix<Real>& M, std::span<const Real> x, std::span<const Real> b)
{
  require_dims(M.rows() == b.size(), "affine bias");
  auto y = matvec(M, x);
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] += b[i];
  return y;
}

/// C = A·B (i-k-j loop order)
template <typename Real>
Matrix<Real> matmul(const Matrix<Real>& A, const Matrix<Real>& B)
{
  require_dims(A.cols() == B.rows(), "matmul");
  Matrix<Real> C(A.rows(), B.cols());
  for (std::size_t i = 0; i < A.rows(); ++i)
  {
    auto out = C.row(i);
    for (std::size_t k = 0; k < A.cols(); ++k)
    {
      const Real a    = A(i, k);
      const auto brow = B.row(k);
      for (std::size_t j = 0; j < brow.size(); ++j)
        out[j] += a * brow[j];
    }
  }
  return C;
}

} // namespace nnip
