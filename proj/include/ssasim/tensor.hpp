#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ssasim {

/// One named dimension. Canonical names used by the model are "L" (sequence),
/// "h" (hidden) and "m" (state); anything else is an ad-hoc axis.
struct Dim {
  std::string name;
  std::size_t extent{0};
};

namespace detail {
inline std::size_t dims_product(const std::vector<Dim>& dims) {
  std::size_t n = 1;
  for (const auto& d : dims) n *= d.extent;
  return n;
}
}  // namespace detail

/// Dense row-major tensor of binary64 reals with named dims. Immutable after
/// construction; all values must be finite.
class RealTensor {
 public:
  RealTensor() = default;
  RealTensor(std::vector<Dim> dims, std::vector<double> data)
      : dims_(std::move(dims)), data_(std::move(data)) {
    if (detail::dims_product(dims_) != data_.size()) {
      throw std::invalid_argument("RealTensor: dims/data size mismatch");
    }
    for (double v : data_) {
      if (!std::isfinite(v)) throw std::invalid_argument("RealTensor: non-finite value");
    }
  }

  static RealTensor zeros(std::vector<Dim> dims) {
    std::size_t n = detail::dims_product(dims);
    return RealTensor(std::move(dims), std::vector<double>(n, 0.0));
  }
  static RealTensor full(std::vector<Dim> dims, double v) {
    std::size_t n = detail::dims_product(dims);
    return RealTensor(std::move(dims), std::vector<double>(n, v));
  }

  const std::vector<Dim>& dims() const { return dims_; }
  std::size_t rank() const { return dims_.size(); }
  std::size_t size() const { return data_.size(); }
  const std::vector<double>& data() const { return data_; }

  bool has_dim(const std::string& name) const {
    for (const auto& d : dims_)
      if (d.name == name) return true;
    return false;
  }

  std::size_t dim_index(const std::string& name) const {
    for (std::size_t i = 0; i < dims_.size(); ++i)
      if (dims_[i].name == name) return i;
    throw std::invalid_argument("RealTensor: unknown dim '" + name + "'");
  }

  std::size_t extent(const std::string& name) const { return dims_[dim_index(name)].extent; }

  /// Row-major strides.
  std::vector<std::size_t> strides() const {
    std::vector<std::size_t> s(dims_.size(), 1);
    for (std::size_t i = dims_.size(); i-- > 1;) s[i - 1] = s[i] * dims_[i].extent;
    return s;
  }

  double operator[](std::size_t flat) const { return data_[flat]; }

  double at(std::initializer_list<std::size_t> idx) const {
    if (idx.size() != dims_.size()) throw std::invalid_argument("RealTensor::at: rank mismatch");
    std::size_t flat = 0, i = 0;
    for (std::size_t v : idx) {
      if (v >= dims_[i].extent) throw std::out_of_range("RealTensor::at: index out of range");
      flat = flat * dims_[i].extent + v;
      ++i;
    }
    return data_[flat];
  }

 private:
  std::vector<Dim> dims_;
  std::vector<double> data_;
};

/// Returns the sub-tensor of `t` with `dim_name` removed at `index`.
inline RealTensor tensor_slice(const RealTensor& t, const std::string& dim_name,
                               std::size_t index) {
  const std::size_t axis = t.dim_index(dim_name);
  const auto& dims = t.dims();
  if (index >= dims[axis].extent) {
    throw std::out_of_range("tensor_slice: index out of range");
  }
  std::vector<Dim> out_dims;
  out_dims.reserve(dims.size() - 1);
  for (std::size_t i = 0; i < dims.size(); ++i)
    if (i != axis) out_dims.push_back(dims[i]);

  const auto st = t.strides();
  const std::size_t out_n = detail::dims_product(out_dims);
  std::vector<double> out(out_n);

  // outer = product of extents before axis, inner = product after.
  std::size_t inner = 1;
  for (std::size_t i = axis + 1; i < dims.size(); ++i) inner *= dims[i].extent;
  std::size_t outer = out_n / (inner == 0 ? 1 : inner);
  if (inner == 0) inner = 1;

  std::size_t w = 0;
  for (std::size_t o = 0; o < outer; ++o) {
    const std::size_t base = o * dims[axis].extent * inner + index * inner;
    for (std::size_t i = 0; i < inner; ++i) out[w++] = t[base + i];
  }
  return RealTensor(std::move(out_dims), std::move(out));
}

/// Quantization scale: one scalar for the whole tensor, or one scalar per
/// channel along the "h" dim.
struct QuantScale {
  std::variant<double, std::vector<double>> v;

  static QuantScale scalar(double s) { return QuantScale{s}; }
  static QuantScale per_channel(std::vector<double> s) { return QuantScale{std::move(s)}; }

  bool is_per_channel() const { return std::holds_alternative<std::vector<double>>(v); }
  double scalar_value() const { return std::get<double>(v); }
  const std::vector<double>& channel_values() const { return std::get<std::vector<double>>(v); }

  void validate(const std::vector<Dim>& dims) const {
    if (is_per_channel()) {
      const auto& s = channel_values();
      std::size_t h_extent = 0;
      bool found = false;
      for (const auto& d : dims)
        if (d.name == "h") {
          h_extent = d.extent;
          found = true;
        }
      if (!found) throw std::invalid_argument("QuantScale: per-channel scale needs an h dim");
      if (s.size() != h_extent)
        throw std::invalid_argument("QuantScale: per-channel length != h extent");
      for (double x : s)
        if (!(x > 0)) throw std::invalid_argument("QuantScale: non-positive scale");
    } else {
      if (!(scalar_value() > 0)) throw std::invalid_argument("QuantScale: non-positive scale");
    }
  }
};

/// Integer tensor with bit width and scale metadata. Stored values always lie
/// in the symmetric range [-(2^(b-1)-1), 2^(b-1)-1].
class QuantTensor {
 public:
  QuantTensor(std::vector<Dim> dims, std::vector<std::int32_t> data, int bit_width,
              QuantScale scale)
      : dims_(std::move(dims)),
        data_(std::move(data)),
        bit_width_(bit_width),
        scale_(std::move(scale)) {
    if (bit_width_ < 2 || bit_width_ > 16)
      throw std::invalid_argument("QuantTensor: bit width outside [2,16]");
    if (detail::dims_product(dims_) != data_.size())
      throw std::invalid_argument("QuantTensor: dims/data size mismatch");
    const std::int32_t mag = max_magnitude();
    for (std::int32_t v : data_)
      if (v > mag || v < -mag) throw std::invalid_argument("QuantTensor: value out of range");
    scale_.validate(dims_);
  }

  std::int32_t max_magnitude() const { return (std::int32_t{1} << (bit_width_ - 1)) - 1; }

  const std::vector<Dim>& dims() const { return dims_; }
  std::size_t size() const { return data_.size(); }
  const std::vector<std::int32_t>& data() const { return data_; }
  int bit_width() const { return bit_width_; }
  const QuantScale& scale() const { return scale_; }

  std::size_t dim_index(const std::string& name) const {
    for (std::size_t i = 0; i < dims_.size(); ++i)
      if (dims_[i].name == name) return i;
    throw std::invalid_argument("QuantTensor: unknown dim '" + name + "'");
  }

 private:
  std::vector<Dim> dims_;
  std::vector<std::int32_t> data_;
  int bit_width_{8};
  QuantScale scale_{QuantScale::scalar(1.0)};
};

}  // namespace ssasim
