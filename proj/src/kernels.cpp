#include "marknav/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace marknav::kern {

namespace detail {
const Ops* avx2_table();  // defined in kernels_avx2.cpp
}  // namespace detail

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

struct Selection {
  const detail::Ops* ops;
  Backend backend;
};

Selection select() {
  const char* env = std::getenv("MARKNAV_KERNELS");
  const bool force_scalar = env && std::strcmp(env, "scalar") == 0;
  if (!force_scalar && cpu_has_avx2()) {
    if (const detail::Ops* t = detail::avx2_table()) return {t, Backend::avx2};
  }
  return {&detail::scalar_ops, Backend::scalar};
}

const Selection& selection() {
  static const Selection s = select();
  return s;
}

}  // namespace

namespace detail {
const Ops* avx2_ops_or_null() { return cpu_has_avx2() ? avx2_table() : nullptr; }
}  // namespace detail

Backend active_backend() { return selection().backend; }

const char* backend_name() {
  return selection().backend == Backend::avx2 ? "avx2" : "scalar";
}

MinResult min_sqdist(double qx, double qy, const double* xs, const double* ys, std::size_t n) {
  return selection().ops->min_sqdist(qx, qy, xs, ys, n);
}

std::size_t popcount(const std::uint64_t* w, std::size_t n) {
  return selection().ops->popcount(w, n);
}

std::size_t popcount_and(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
  return selection().ops->popcount_and(a, b, n);
}

void or_inplace(std::uint64_t* dst, const std::uint64_t* src, std::size_t n) {
  selection().ops->or_inplace(dst, src, n);
}

bool intersects(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
  return selection().ops->intersects(a, b, n);
}

bool contains(const std::uint64_t* sup, const std::uint64_t* sub, std::size_t n) {
  return selection().ops->contains(sup, sub, n);
}

void threshold_bits(const std::int8_t* cells, std::size_t n, std::int8_t threshold,
                    std::uint64_t* out_bits) {
  selection().ops->threshold_bits(cells, n, threshold, out_bits);
}

}  // namespace marknav::kern
