#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ssasim/scan.hpp"
#include "ssasim/tensor.hpp"

namespace ssasim {

/// Gate applied to Z before the output multiply. The figure-level description
/// shows a bare multiply; standard Mamba applies SiLU first. Both are
/// supported, SiLU is the default.
enum class GateKind { Silu, Identity };

inline double silu(double x) {
  // x * sigmoid(x), stable for large |x|.
  if (x >= 0) return x / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return x * e / (1.0 + e);
}

inline double softplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

inline double apply_gate(GateKind g, double z) {
  return g == GateKind::Silu ? silu(z) : z;
}

/// Inputs of one selective SSM block invocation.
///   u, delta, Z : (L, h)   A : (h, m)   B, C : (L, m)
struct SsmInputs {
  RealTensor u;
  RealTensor delta;
  RealTensor A;
  RealTensor B;
  RealTensor C;
  RealTensor Z;

  std::size_t L() const { return u.extent("L"); }
  std::size_t h() const { return u.extent("h"); }
  std::size_t m() const { return A.extent("m"); }

  void validate() const {
    const std::size_t l = L(), hh = h(), mm = m();
    auto want = [](const RealTensor& t, const char* n0, std::size_t e0, const char* n1,
                   std::size_t e1) {
      if (t.rank() != 2 || t.dims()[0].name != n0 || t.dims()[1].name != n1 ||
          t.dims()[0].extent != e0 || t.dims()[1].extent != e1) {
        throw std::invalid_argument("SsmInputs: shape mismatch");
      }
    };
    want(u, "L", l, "h", hh);
    want(delta, "L", l, "h", hh);
    want(A, "h", hh, "m", mm);
    want(B, "L", l, "m", mm);
    want(C, "L", l, "m", mm);
    want(Z, "L", l, "h", hh);
  }
};

/// Step 1 of the block: Abar[l,h,m] = exp(delta[l,h] * A[h,m]) and
/// Bu[l,h,m] = delta[l,h] * B[l,m] * u[l,h].
inline std::pair<RealTensor, RealTensor> discretize(const RealTensor& delta, const RealTensor& A,
                                                    const RealTensor& B, const RealTensor& u) {
  const std::size_t L = delta.extent("L");
  const std::size_t H = delta.extent("h");
  const std::size_t M = A.extent("m");
  if (A.extent("h") != H || B.extent("L") != L || B.extent("m") != M || u.extent("L") != L ||
      u.extent("h") != H) {
    throw std::invalid_argument("discretize: shape mismatch");
  }
  std::vector<double> abar(L * H * M), bu(L * H * M);
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t h = 0; h < H; ++h) {
      const double d = delta[l * H + h];
      const double du = d * u[l * H + h];
      const std::size_t base = (l * H + h) * M;
      for (std::size_t m = 0; m < M; ++m) {
        abar[base + m] = std::exp(d * A[h * M + m]);
        bu[base + m] = du * B[l * M + m];
      }
    }
  }
  std::vector<Dim> dims{{"L", L}, {"h", H}, {"m", M}};
  return {RealTensor(dims, std::move(abar)), RealTensor(dims, std::move(bu))};
}

/// Full floating-point selective SSM block: discretize, scan each (h,m) lane
/// along L, reduce over m against C (ascending m order), gate with Z.
inline RealTensor selective_ssm_block(const SsmInputs& in, GateKind gate = GateKind::Silu) {
  in.validate();
  const std::size_t L = in.L(), H = in.h(), M = in.m();
  auto [abar, bu] = discretize(in.delta, in.A, in.B, in.u);

  std::vector<double> y(L * H, 0.0);
  std::vector<double> abar_row(L), bu_row(L);
  for (std::size_t h = 0; h < H; ++h) {
    for (std::size_t m = 0; m < M; ++m) {
      for (std::size_t l = 0; l < L; ++l) {
        abar_row[l] = abar[(l * H + h) * M + m];
        bu_row[l] = bu[(l * H + h) * M + m];
      }
      const std::vector<double> states = sequential_scan(abar_row, bu_row);
      for (std::size_t l = 0; l < L; ++l) {
        y[l * H + h] += in.C[l * M + m] * states[l];
      }
    }
  }
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t h = 0; h < H; ++h) {
      y[l * H + h] *= apply_gate(gate, in.Z[l * H + h]);
    }
  }
  return RealTensor({{"L", L}, {"h", H}}, std::move(y));
}

/// Reverses the order of the L dim; all other dims are untouched.
inline RealTensor flip_sequence(const RealTensor& t) {
  const std::size_t axis = t.dim_index("L");
  const auto& dims = t.dims();
  const std::size_t L = dims[axis].extent;
  std::size_t inner = 1;
  for (std::size_t i = axis + 1; i < dims.size(); ++i) inner *= dims[i].extent;
  std::size_t outer = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= dims[i].extent;

  std::vector<double> out(t.size());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t l = 0; l < L; ++l) {
      const std::size_t src = (o * L + l) * inner;
      const std::size_t dst = (o * L + (L - 1 - l)) * inner;
      for (std::size_t i = 0; i < inner; ++i) out[dst + i] = t[src + i];
    }
  }
  return RealTensor(dims, std::move(out));
}

}  // namespace ssasim
