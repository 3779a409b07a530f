#pragma once

#include <algorithm>
#include <vector>

#include "ssasim/rng.hpp"
#include "ssasim/ssm.hpp"
#include "ssasim/tensor.hpp"

namespace ssasim {

/// Seeded synthetic inputs for the selective SSM block.
/// A entries are -uniform(0.5, 1.5) and delta entries are softplus(normal)
/// rescaled so the tensor max is 0.2; this keeps exp(delta*A) in (0, 1].
/// u, B, C, Z are standard normal.
inline SsmInputs make_ssm_inputs(std::size_t L, std::size_t H, std::size_t M, Rng& rng) {
  auto normal_tensor = [&rng](std::vector<Dim> dims) {
    std::size_t n = detail::dims_product(dims);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    return RealTensor(std::move(dims), std::move(v));
  };

  std::vector<double> a(H * M);
  for (auto& x : a) x = -rng.uniform(0.5, 1.5);

  std::vector<double> d(L * H);
  double dmax = 0.0;
  for (auto& x : d) {
    x = softplus(rng.normal());
    dmax = std::max(dmax, x);
  }
  if (dmax > 0) {
    for (auto& x : d) x *= 0.2 / dmax;
  }

  SsmInputs in{
      normal_tensor({{"L", L}, {"h", H}}),                    // u
      RealTensor({{"L", L}, {"h", H}}, std::move(d)),         // delta
      RealTensor({{"h", H}, {"m", M}}, std::move(a)),         // A
      normal_tensor({{"L", L}, {"m", M}}),                    // B
      normal_tensor({{"L", L}, {"m", M}}),                    // C
      normal_tensor({{"L", L}, {"h", H}}),                    // Z
  };
  in.validate();
  return in;
}

}  // namespace ssasim
