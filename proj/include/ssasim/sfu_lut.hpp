#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssasim/ssm.hpp"

namespace ssasim {

enum class SfuFunction { Silu, Exp, Softplus, Identity };

inline const char* sfu_function_name(SfuFunction f) {
  switch (f) {
    case SfuFunction::Silu: return "silu";
    case SfuFunction::Exp: return "exp";
    case SfuFunction::Softplus: return "softplus";
    case SfuFunction::Identity: return "identity";
  }
  return "?";
}

inline SfuFunction sfu_function_from_name(const std::string& s) {
  if (s == "silu") return SfuFunction::Silu;
  if (s == "exp") return SfuFunction::Exp;
  if (s == "softplus") return SfuFunction::Softplus;
  if (s == "identity") return SfuFunction::Identity;
  throw std::invalid_argument("unknown sfu function '" + s + "'");
}

/// Exact binary64 evaluation, overflow-safe formulations. Identity is a test
/// hook (exactly representable by any linear segment).
inline double reference_fn(SfuFunction f, double x) {
  switch (f) {
    case SfuFunction::Silu: return silu(x);
    case SfuFunction::Exp: return std::exp(x);
    case SfuFunction::Softplus: return softplus(x);
    case SfuFunction::Identity: return x;
  }
  return 0.0;
}

/// Piecewise-linear table: bp[i] is the left edge of segment i (bp[0] == lo),
/// segment i evaluates as a[i]*x + b[i].
struct SfuLut {
  SfuFunction function{SfuFunction::Identity};
  double lo{0.0};
  double hi{1.0};
  std::vector<double> bp;
  std::vector<double> a;
  std::vector<double> b;

  std::size_t entries() const { return bp.size(); }
};

/// Largest index i with bp[i] <= x; inputs below bp[0] clamp to segment 0.
/// This is the ADU: a binary search over the breakpoint list.
inline std::size_t lookup_segment(double x, std::span<const double> bp) {
  if (bp.empty()) throw std::invalid_argument("lookup_segment: empty breakpoint list");
  auto it = std::upper_bound(bp.begin(), bp.end(), x);
  if (it == bp.begin()) return 0;
  return static_cast<std::size_t>(std::distance(bp.begin(), it)) - 1;
}

inline double sfu_eval_one(const SfuLut& lut, double x) {
  const std::size_t i = lookup_segment(x, lut.bp);
  return lut.a[i] * x + lut.b[i];
}

/// CU semantics: each element is looked up and interpolated independently.
inline std::vector<double> sfu_eval(const SfuLut& lut, std::span<const double> xs) {
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = sfu_eval_one(lut, xs[i]);
  return out;
}

struct SfuFitOptions {
  std::size_t grid_points = 100000;
  int iterations = 2000;
  double learning_rate = 1e-3;
  double min_segment_width = 1e-4;
  int check_every = 25;  // best-so-far bookkeeping interval
};

namespace detail {

struct SegmentLine {
  double a, b;
};

/// Closed-form least-squares line over the grid points of one segment.
/// Segments holding too few grid points fall back to direct dense samples so
/// a fit always exists.
inline SegmentLine fit_segment(SfuFunction fn, double seg_lo, double seg_hi,
                               const std::vector<double>& px, const std::vector<double>& py,
                               std::size_t i0, std::size_t i1) {
  double sx = 0, sxx = 0, sy = 0, sxy = 0;
  std::size_t n = 0;
  if (i1 > i0 && i1 - i0 >= 4) {
    for (std::size_t i = i0; i < i1; ++i) {
      sx += px[i];
      sxx += px[i] * px[i];
      sy += py[i];
      sxy += px[i] * py[i];
    }
    n = i1 - i0;
  } else {
    const int k = 16;
    for (int j = 0; j < k; ++j) {
      const double x = seg_lo + (seg_hi - seg_lo) * (j + 0.5) / k;
      const double y = reference_fn(fn, x);
      sx += x;
      sxx += x * x;
      sy += y;
      sxy += x * y;
    }
    n = k;
  }
  const double dn = static_cast<double>(n);
  const double det = dn * sxx - sx * sx;
  if (std::abs(det) < 1e-300) {
    const double xm = sx / dn;
    return {0.0, reference_fn(fn, xm)};
  }
  const double a = (dn * sxy - sx * sy) / det;
  const double b = (sy - a * sx) / dn;
  return {a, b};
}

}  // namespace detail

/// Max-abs approximation error of the table over its fit range, measured on a
/// fresh uniform grid.
inline double lut_max_abs_error(const SfuLut& lut, std::size_t points = 100000) {
  double worst = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double x = lut.lo + (lut.hi - lut.lo) * static_cast<double>(i) /
                                  static_cast<double>(points - 1);
    worst = std::max(worst, std::abs(sfu_eval_one(lut, x) - reference_fn(lut.function, x)));
  }
  return worst;
}

inline double lut_rms_error(const SfuLut& lut, std::size_t points = 100000) {
  double acc = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double x = lut.lo + (lut.hi - lut.lo) * static_cast<double>(i) /
                                  static_cast<double>(points - 1);
    const double e = sfu_eval_one(lut, x) - reference_fn(lut.function, x);
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(points));
}

/// Breakpoints start uniform over [lo, hi] and are refined by gradient steps
/// on the grid MSE, with segment lines recomputed in closed form after every
/// update. The returned table is the best max-abs-error iterate seen, so it
/// is never worse than the uniform-breakpoint table.
inline SfuLut fit_lut(SfuFunction fn, double lo, double hi, std::size_t entries,
                      const SfuFitOptions& opt = {}) {
  if (!(lo < hi)) throw std::invalid_argument("fit_lut: invalid range");
  if (entries < 2) throw std::invalid_argument("fit_lut: need at least 2 entries");

  const std::size_t N = std::max<std::size_t>(opt.grid_points, entries * 4);
  std::vector<double> px(N), py(N);
  for (std::size_t i = 0; i < N; ++i) {
    px[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(N - 1);
    py[i] = reference_fn(fn, px[i]);
  }

  SfuLut cur;
  cur.function = fn;
  cur.lo = lo;
  cur.hi = hi;
  cur.bp.resize(entries);
  cur.a.resize(entries);
  cur.b.resize(entries);
  for (std::size_t j = 0; j < entries; ++j) {
    cur.bp[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(entries);
  }

  const double step = (hi - lo) / static_cast<double>(N - 1);
  auto grid_index = [&](double x) {
    const double t = (x - lo) / step;
    std::size_t i = t <= 0 ? 0 : static_cast<std::size_t>(std::ceil(t));
    return std::min(i, N);
  };

  auto refit = [&]() {
    for (std::size_t j = 0; j < entries; ++j) {
      const double seg_lo = cur.bp[j];
      const double seg_hi = j + 1 < entries ? cur.bp[j + 1] : hi;
      const std::size_t i0 = grid_index(seg_lo);
      const std::size_t i1 = grid_index(seg_hi);
      const auto line = detail::fit_segment(fn, seg_lo, seg_hi, px, py, i0, i1);
      cur.a[j] = line.a;
      cur.b[j] = line.b;
    }
  };

  refit();
  SfuLut best = cur;
  double best_err = lut_max_abs_error(best, N);

  const double wbar = (hi - lo) / static_cast<double>(entries);
  const double max_move = 0.1 * wbar;

  for (int it = 0; it < opt.iterations; ++it) {
    // Mean squared error of the current fit, used to normalize the step.
    double mse = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const std::size_t s = lookup_segment(px[i], cur.bp);
      const double e = py[i] - (cur.a[s] * px[i] + cur.b[s]);
      mse += e * e;
    }
    mse /= static_cast<double>(N);

    // Boundary derivative: moving bp[j] right hands points near bp[j] to the
    // left line, so dMSE/dbp[j] ~ eL^2 - eR^2 at the breakpoint.
    std::vector<double> nbp = cur.bp;
    for (std::size_t j = 1; j < entries; ++j) {
      const double x = cur.bp[j];
      const double y = reference_fn(fn, x);
      const double el = y - (cur.a[j - 1] * x + cur.b[j - 1]);
      const double er = y - (cur.a[j] * x + cur.b[j]);
      const double g = (el * el - er * er) / (mse + 1e-30);
      double move = -opt.learning_rate * g * wbar;
      move = std::clamp(move, -max_move, max_move);
      nbp[j] = x + move;
    }
    // Projection: keep breakpoints ordered inside [lo, hi] with a minimum
    // segment width.
    nbp[0] = lo;
    for (std::size_t j = 1; j < entries; ++j) {
      const double upper = hi - static_cast<double>(entries - j) * opt.min_segment_width;
      nbp[j] = std::clamp(nbp[j], nbp[j - 1] + opt.min_segment_width, upper);
    }
    cur.bp = nbp;
    refit();

    if ((it + 1) % opt.check_every == 0 || it + 1 == opt.iterations) {
      const double err = lut_max_abs_error(cur, N);
      if (err < best_err) {
        best_err = err;
        best = cur;
      }
    }
  }
  return best;
}

}  // namespace ssasim
