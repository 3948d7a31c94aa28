#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/StdVector>

namespace rbc::nn {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<Mat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const Mat<T>>;

// Dense row-major array with an explicit shape. Storage is SIMD-aligned so
// that vectorised reductions take the same path on every allocation.
template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T, Eigen::aligned_allocator<T>> values;

  Tensor() = default;
  explicit Tensor(std::vector<int> s, T fill = T(0)) : shape(std::move(s)), values(count(shape), fill) {}

  static std::size_t count(const std::vector<int>& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1}, [](std::size_t a, int d) { return a * static_cast<std::size_t>(d); });
  }
  std::size_t size() const { return values.size(); }
  T* data() { return values.data(); }
  const T* data() const { return values.data(); }
  T& operator[](std::size_t i) { return values[i]; }
  const T& operator[](std::size_t i) const { return values[i]; }

  // View as rows x (size / rows).
  MatMap<T> matrix(int rows) { return MatMap<T>(values.data(), rows, static_cast<Eigen::Index>(size()) / rows); }
  ConstMatMap<T> matrix(int rows) const {
    return ConstMatMap<T>(values.data(), rows, static_cast<Eigen::Index>(size()) / rows);
  }

  void zero() { std::fill(values.begin(), values.end(), T(0)); }
  bool all_finite() const {
    return std::all_of(values.begin(), values.end(), [](T v) { return std::isfinite(v); });
  }
};

}  // namespace rbc::nn
