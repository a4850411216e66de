#include <bit>

#include "marknav/kernels.hpp"

namespace marknav::kern::detail {
namespace {

MinResult min_sqdist_scalar(double qx, double qy, const double* xs, const double* ys,
                            std::size_t n) {
  MinResult best{(xs[0] - qx) * (xs[0] - qx) + (ys[0] - qy) * (ys[0] - qy), 0};
  for (std::size_t i = 1; i < n; ++i) {
    const double dx = xs[i] - qx;
    const double dy = ys[i] - qy;
    const double d = dx * dx + dy * dy;
    if (d < best.sqdist) {
      best.sqdist = d;
      best.index = i;
    }
  }
  return best;
}

std::size_t popcount_scalar(const std::uint64_t* w, std::size_t n) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < n; ++i) c += static_cast<std::size_t>(std::popcount(w[i]));
  return c;
}

std::size_t popcount_and_scalar(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < n; ++i) c += static_cast<std::size_t>(std::popcount(a[i] & b[i]));
  return c;
}

void or_inplace_scalar(std::uint64_t* dst, const std::uint64_t* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] |= src[i];
}

bool intersects_scalar(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (a[i] & b[i]) return true;
  return false;
}

bool contains_scalar(const std::uint64_t* sup, const std::uint64_t* sub, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (sub[i] & ~sup[i]) return false;
  return true;
}

void threshold_bits_scalar(const std::int8_t* cells, std::size_t n, std::int8_t threshold,
                           std::uint64_t* out_bits) {
  const std::size_t words = (n + 63) / 64;
  for (std::size_t w = 0; w < words; ++w) out_bits[w] = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (cells[i] >= threshold) out_bits[i / 64] |= std::uint64_t{1} << (i % 64);
}

}  // namespace

const Ops scalar_ops = {
    min_sqdist_scalar, popcount_scalar,  popcount_and_scalar, or_inplace_scalar,
    intersects_scalar, contains_scalar,  threshold_bits_scalar,
};

}  // namespace marknav::kern::detail
