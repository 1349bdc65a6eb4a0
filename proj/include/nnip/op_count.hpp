#pragma once

#include <cmath>
#include <cstdint>

namespace nnip {

/// Scalar that tallies every multiplication it takes part in. Additions,
/// comparisons and exp() are free, so running a forward pass over
/// CountedReal yields the multiply count of its matrix products only.
class CountedReal
{
public:
  CountedReal() = default;
  CountedReal(double v) : value_(v) {} // NOLINT(google-explicit-constructor)

  double value() const { return value_; }

  static std::uint64_t multiplications() { return counter(); }
  static void          reset() { counter() = 0; }

  friend CountedReal operator*(CountedReal a, CountedReal b)
  {
    ++counter();
    return CountedReal(a.value_ * b.value_);
  }
  friend CountedReal operator+(CountedReal a, CountedReal b) { return CountedReal(a.value_ + b.value_); }
  friend CountedReal operator-(CountedReal a, CountedReal b) { return CountedReal(a.value_ - b.value_); }
  CountedReal&       operator+=(CountedReal o)
  {
    value_ += o.value_;
    return *this;
  }
  friend bool        operator>(CountedReal a, CountedReal b) { return a.value_ > b.value_; }
  friend bool        operator<(CountedReal a, CountedReal b) { return a.value_ < b.value_; }
  friend CountedReal exp(CountedReal a) { return CountedReal(std::exp(a.value_)); }

private:
  static std::uint64_t& counter()
  {
    thread_local std::uint64_t count = 0;
    return count;
  }

  double value_ = 0.0;
};

/// RAII window over the multiplication counter.
class MultiplyScope
{
public:
  MultiplyScope() : start_(CountedReal::multiplications()) {}
  std::uint64_t count() const { return CountedReal::multiplications() - start_; }

private:
  std::uint64_t start_;
};

} // namespace nnip
