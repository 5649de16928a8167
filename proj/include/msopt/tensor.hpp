#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "msopt/types.hpp"

namespace msopt {

/// Dense N-mode tensor stored row-major (last index varies fastest).
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(std::vector<Index> dims, double fill = 0.0);
  DenseTensor(std::vector<Index> dims, std::vector<double> values);

  const std::vector<Index>& dims() const noexcept { return dims_; }
  Index order() const noexcept { return static_cast<Index>(dims_.size()); }
  Index dim(Index mode) const { return dims_.at(static_cast<size_t>(mode)); }
  Index size() const noexcept { return static_cast<Index>(values_.size()); }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  std::vector<double>& storage() noexcept { return values_; }

  double& operator[](Index flat) { return values_[static_cast<size_t>(flat)]; }
  double operator[](Index flat) const {
    return values_[static_cast<size_t>(flat)];
  }

  double& at(std::span<const Index> index);
  double at(std::span<const Index> index) const;
  Index flat_index(std::span<const Index> index) const;

  /// Product of the dimensions after `mode` (the stride of `mode`).
  Index stride(Index mode) const;

  /// Mode-1 unfolding as a dims[0] x (prod of the rest) row-major view.
  Eigen::Map<RowMatrix> unfold_first();
  Eigen::Map<const RowMatrix> unfold_first() const;

  double sum() const;
  double max() const;
  double frobenius_norm() const;

  std::string shape_string() const;

 private:
  std::vector<Index> dims_;
  std::vector<double> values_;
};

/// Applies a 1-D vector operator along `mode`; `out_length` is the new length
/// of that mode. The operator receives and fills strided fibres.
DenseTensor apply_along_mode(
    const DenseTensor& tensor, Index mode, Index out_length,
    const std::function<void(std::span<const double>, std::span<double>)>& op);

}  // namespace msopt
