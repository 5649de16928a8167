#include "msopt/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "msopt/error.hpp"

namespace msopt {

namespace {

Index product(const std::vector<Index>& dims) {
  Index n = 1;
  for (Index d : dims) {
    if (d < 1) throw InvalidInput("tensor dimensions must be positive");
    n *= d;
  }
  return n;
}

}  // namespace

DenseTensor::DenseTensor(std::vector<Index> dims, double fill)
    : dims_(std::move(dims)) {
  if (dims_.empty()) throw InvalidInput("tensor needs at least one mode");
  values_.assign(static_cast<size_t>(product(dims_)), fill);
}

DenseTensor::DenseTensor(std::vector<Index> dims, std::vector<double> values)
    : dims_(std::move(dims)), values_(std::move(values)) {
  if (dims_.empty()) throw InvalidInput("tensor needs at least one mode");
  if (static_cast<Index>(values_.size()) != product(dims_)) {
    throw InvalidInput("tensor value count does not match dims " +
                       shape_string());
  }
}

Index DenseTensor::stride(Index mode) const {
  if (mode < 0 || mode >= order()) throw InvalidInput("mode out of range");
  Index s = 1;
  for (Index m = order() - 1; m > mode; --m) s *= dims_[size_t(m)];
  return s;
}

Index DenseTensor::flat_index(std::span<const Index> index) const {
  if (static_cast<Index>(index.size()) != order()) {
    throw InvalidInput("index arity does not match tensor order");
  }
  Index flat = 0;
  for (size_t m = 0; m < index.size(); ++m) {
    if (index[m] < 0 || index[m] >= dims_[m]) {
      throw InvalidInput("tensor index out of range");
    }
    flat = flat * dims_[m] + index[m];
  }
  return flat;
}

double& DenseTensor::at(std::span<const Index> index) {
  return values_[size_t(flat_index(index))];
}

double DenseTensor::at(std::span<const Index> index) const {
  return values_[size_t(flat_index(index))];
}

Eigen::Map<RowMatrix> DenseTensor::unfold_first() {
  Index rows = dims_.front();
  return {values_.data(), rows, size() / rows};
}

Eigen::Map<const RowMatrix> DenseTensor::unfold_first() const {
  Index rows = dims_.front();
  return {values_.data(), rows, size() / rows};
}

double DenseTensor::sum() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0);
}

double DenseTensor::max() const {
  if (values_.empty()) return 0.0;
  return *std::max_element(values_.begin(), values_.end());
}

double DenseTensor::frobenius_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

std::string DenseTensor::shape_string() const {
  std::ostringstream os;
  for (size_t i = 0; i < dims_.size(); ++i) {
    if (i) os << 'x';
    os << dims_[i];
  }
  return os.str();
}

DenseTensor apply_along_mode(
    const DenseTensor& tensor, Index mode, Index out_length,
    const std::function<void(std::span<const double>, std::span<double>)>& op) {
  if (mode < 0 || mode >= tensor.order()) {
    throw InvalidInput("mode out of range");
  }
  std::vector<Index> out_dims = tensor.dims();
  Index in_length = out_dims[size_t(mode)];
  out_dims[size_t(mode)] = out_length;
  DenseTensor out(out_dims);

  Index inner = tensor.stride(mode);
  Index outer = tensor.size() / (in_length * inner);
  std::vector<double> fibre_in(static_cast<size_t>(in_length));
  std::vector<double> fibre_out(static_cast<size_t>(out_length));
  const auto src = tensor.values();
  auto dst = out.values();
  for (Index o = 0; o < outer; ++o) {
    for (Index j = 0; j < inner; ++j) {
      Index base_in = o * in_length * inner + j;
      Index base_out = o * out_length * inner + j;
      for (Index k = 0; k < in_length; ++k) {
        fibre_in[size_t(k)] = src[size_t(base_in + k * inner)];
      }
      op(fibre_in, fibre_out);
      for (Index k = 0; k < out_length; ++k) {
        dst[size_t(base_out + k * inner)] = fibre_out[size_t(k)];
      }
    }
  }
  return out;
}

}  // namespace msopt
