#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssasim/fixed_point.hpp"
#include "ssasim/ssm.hpp"
#include "ssasim/tensor.hpp"

namespace ssasim {

/// Scale for tensors whose calibration max came out zero. Keeps the scale
/// strictly positive; the quantized tensor is all zeros either way.
inline constexpr double kCalibrationScaleFloor = 1e-8;

/// s = x_max / (2^(b-1) - 1). x_max must be strictly positive.
inline double compute_scale(double x_max, int bit_width) {
  if (bit_width < 2 || bit_width > 16) throw std::invalid_argument("compute_scale: bad bit width");
  if (!(x_max > 0)) throw std::invalid_argument("compute_scale: non-positive x_max");
  return x_max / static_cast<double>((std::int64_t{1} << (bit_width - 1)) - 1);
}

/// compute_scale with the degenerate all-zero case floored.
inline double scale_from_max(double x_max, int bit_width) {
  if (x_max <= 0) return kCalibrationScaleFloor;
  return compute_scale(x_max, bit_width);
}

/// Round each element per fx_round_to_int(x/s), then saturate to the
/// symmetric integer range.
inline QuantTensor quantize(const RealTensor& t, const QuantScale& scale, int bit_width = 8) {
  scale.validate(t.dims());
  const std::int64_t mag = (std::int64_t{1} << (bit_width - 1)) - 1;
  std::vector<std::int32_t> out(t.size());

  if (scale.is_per_channel()) {
    const auto& s = scale.channel_values();
    const std::size_t axis = t.dim_index("h");
    const auto& dims = t.dims();
    std::size_t inner = 1;
    for (std::size_t i = axis + 1; i < dims.size(); ++i) inner *= dims[i].extent;
    const std::size_t H = dims[axis].extent;
    for (std::size_t flat = 0; flat < t.size(); ++flat) {
      const std::size_t c = (flat / inner) % H;
      out[flat] =
          static_cast<std::int32_t>(saturate(fx_round_to_int(t[flat] / s[c]), mag));
    }
  } else {
    const double s = scale.scalar_value();
    for (std::size_t flat = 0; flat < t.size(); ++flat) {
      out[flat] = static_cast<std::int32_t>(saturate(fx_round_to_int(t[flat] / s), mag));
    }
  }
  return QuantTensor(t.dims(), std::move(out), bit_width, scale);
}

inline RealTensor dequantize(const QuantTensor& q) {
  std::vector<double> out(q.size());
  if (q.scale().is_per_channel()) {
    const auto& s = q.scale().channel_values();
    const std::size_t axis = q.dim_index("h");
    const auto& dims = q.dims();
    std::size_t inner = 1;
    for (std::size_t i = axis + 1; i < dims.size(); ++i) inner *= dims[i].extent;
    const std::size_t H = dims[axis].extent;
    for (std::size_t flat = 0; flat < q.size(); ++flat) {
      const std::size_t c = (flat / inner) % H;
      out[flat] = static_cast<double>(q.data()[flat]) * s[c];
    }
  } else {
    const double s = q.scale().scalar_value();
    for (std::size_t flat = 0; flat < q.size(); ++flat) {
      out[flat] = static_cast<double>(q.data()[flat]) * s;
    }
  }
  return RealTensor(q.dims(), std::move(out));
}

/// Nearest power of two in the log domain: k = round(-log2(s)), s' = 2^-k.
inline std::pair<double, int> approx_pow2(double s) {
  if (!(s > 0)) throw std::invalid_argument("approx_pow2: non-positive scale");
  const int k = static_cast<int>(fx_round_to_int(-std::log2(s)));
  return {std::ldexp(1.0, -k), k};
}

/// v * 2^-k kept with 2 extra fractional bits relative to the input
/// (raw shift by k-2 with fx rounding on the dropped bits).
inline FixedPoint rescale_shift(const FixedPoint& v, int k) {
  if (k < 0) throw std::invalid_argument("rescale_shift: negative shift");
  const int eff = k - 2;
  std::int64_t raw = eff >= 0 ? shift_round(v.raw, eff) : (v.raw << (-eff));
  return FixedPoint(raw, v.frac_bits + 2);
}

inline FixedPoint rescale_shift(std::int64_t v, int k) { return rescale_shift(FixedPoint(v, 0), k); }

/// Running max-abs statistics over calibration samples. Merging is an
/// elementwise max, so samples can be processed in any order.
struct CalibrationStats {
  std::map<std::string, double> tensor_max;                    // per-tensor streams
  std::map<std::string, std::vector<double>> channel_max;      // per-channel (h) streams
  std::size_t samples{0};

  void update_tensor(const std::string& name, const RealTensor& t) {
    double& mx = tensor_max[name];
    for (double v : t.data()) mx = std::max(mx, std::abs(v));
  }

  void update_channel(const std::string& name, const RealTensor& t) {
    const std::size_t axis = t.dim_index("h");
    const auto& dims = t.dims();
    const std::size_t H = dims[axis].extent;
    auto& mx = channel_max[name];
    if (mx.empty()) mx.assign(H, 0.0);
    if (mx.size() != H) throw std::invalid_argument("CalibrationStats: h extent changed");
    std::size_t inner = 1;
    for (std::size_t i = axis + 1; i < dims.size(); ++i) inner *= dims[i].extent;
    for (std::size_t flat = 0; flat < t.size(); ++flat) {
      const std::size_t c = (flat / inner) % H;
      mx[c] = std::max(mx[c], std::abs(t[flat]));
    }
  }

  void merge(const CalibrationStats& o) {
    for (const auto& [k, v] : o.tensor_max) {
      double& mx = tensor_max[k];
      mx = std::max(mx, v);
    }
    for (const auto& [k, v] : o.channel_max) {
      auto& mx = channel_max[k];
      if (mx.empty()) mx = v;
      else {
        if (mx.size() != v.size())
          throw std::invalid_argument("CalibrationStats: merge size mismatch");
        for (std::size_t i = 0; i < v.size(); ++i) mx[i] = std::max(mx[i], v[i]);
      }
    }
    samples += o.samples;
  }
};

/// The scale bundle for the hybrid scheme: tensor-granularity weights,
/// channel-granularity activations, plus the two scan-operand scales. Only
/// the exp(dt*A) stream scale is approximated to a power of two; the dt*B*u
/// scale stays exact and is applied when the final states are dequantized.
struct ScaleSet {
  int bit_width{8};
  std::map<std::string, double> s_weights;
  std::map<std::string, std::vector<double>> s_act;
  double s_dA{1.0};
  int s_dA_pow2_shift{0};
  double s_dBu{1.0};

  double s_dA_pow2() const { return std::ldexp(1.0, -s_dA_pow2_shift); }

  void validate() const {
    for (const auto& [k, v] : s_weights)
      if (!(v > 0)) throw std::invalid_argument("ScaleSet: non-positive weight scale");
    for (const auto& [k, v] : s_act)
      for (double x : v)
        if (!(x > 0)) throw std::invalid_argument("ScaleSet: non-positive activation scale");
    if (!(s_dA > 0) || !(s_dBu > 0)) throw std::invalid_argument("ScaleSet: non-positive scale");
    if (s_dA_pow2_shift < 0) throw std::invalid_argument("ScaleSet: negative pow2 shift");
    const double ratio = std::log2(s_dA_pow2() / s_dA);
    if (std::abs(ratio) > 0.5 + 1e-12)
      throw std::invalid_argument("ScaleSet: pow2 approximation off by more than sqrt(2)");
  }
};

/// Collects max-abs statistics from one SsmInputs sample. Activations (u, Z,
/// delta) are tracked per channel; A and the post-exponential exp(dt*A) and
/// dt*B*u streams per tensor.
inline CalibrationStats calibration_pass(const SsmInputs& in) {
  CalibrationStats st;
  st.samples = 1;
  st.update_channel("u", in.u);
  st.update_channel("z", in.Z);
  st.update_channel("delta", in.delta);
  st.update_tensor("A", in.A);
  auto [abar, bu] = discretize(in.delta, in.A, in.B, in.u);
  st.update_tensor("dA", abar);
  st.update_tensor("dBu", bu);
  return st;
}

inline ScaleSet scales_from_stats(const CalibrationStats& st, int bit_width) {
  ScaleSet s;
  s.bit_width = bit_width;
  for (const auto& [name, mx] : st.tensor_max) {
    if (name == "dA" || name == "dBu") continue;
    s.s_weights[name] = scale_from_max(mx, bit_width);
  }
  for (const auto& [name, mx] : st.channel_max) {
    auto& v = s.s_act[name];
    v.resize(mx.size());
    for (std::size_t i = 0; i < mx.size(); ++i) v[i] = scale_from_max(mx[i], bit_width);
  }
  s.s_dA = scale_from_max(st.tensor_max.count("dA") ? st.tensor_max.at("dA") : 0.0, bit_width);
  auto [sp, k] = approx_pow2(s.s_dA);
  if (k < 0) throw std::invalid_argument("scales_from_stats: dA scale above 1");
  s.s_dA_pow2_shift = k;
  s.s_dBu = scale_from_max(st.tensor_max.count("dBu") ? st.tensor_max.at("dBu") : 0.0, bit_width);
  s.validate();
  return s;
}

inline ScaleSet calibrate(std::span<const SsmInputs> samples, int bit_width = 8) {
  if (samples.empty()) throw std::invalid_argument("calibrate: empty sample set");
  CalibrationStats st;
  for (const auto& in : samples) st.merge(calibration_pass(in));
  return scales_from_stats(st, bit_width);
}

}  // namespace ssasim
