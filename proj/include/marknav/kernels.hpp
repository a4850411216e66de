#pragma once

#include <cstddef>
#include <cstdint>

// Runtime-dispatched arithmetic kernels.
//
// The hot inner loops of the toolkit (coverage bitset algebra, nearest-point
// scans, occupancy binarization) are data-parallel; everything else in the
// codebase is branchy geometry and graph code and stays scalar. Each kernel
// here has a scalar reference implementation and an AVX2 variant selected once
// at startup. Variants must be bit-for-bit equivalent: the bit ops are integer
// exact, and the distance scans use the same IEEE mul/add per element (no FMA
// contraction), so results do not depend on the selected backend.
//
// Set MARKNAV_KERNELS=scalar in the environment to force the reference path.

namespace marknav::kern {

enum class Backend { scalar, avx2 };

Backend active_backend();
const char* backend_name();

struct MinResult {
  double sqdist;
  std::size_t index;  // lowest index attaining sqdist
};

// Minimum squared distance from (qx, qy) to the point arrays xs/ys.
// n must be > 0. Ties resolve to the lowest index.
MinResult min_sqdist(double qx, double qy, const double* xs, const double* ys, std::size_t n);

// Population count over a word span.
std::size_t popcount(const std::uint64_t* w, std::size_t n);

// Population count of a & b.
std::size_t popcount_and(const std::uint64_t* a, const std::uint64_t* b, std::size_t n);

// dst |= src.
void or_inplace(std::uint64_t* dst, const std::uint64_t* src, std::size_t n);

// True if a & b has any set bit.
bool intersects(const std::uint64_t* a, const std::uint64_t* b, std::size_t n);

// True if every set bit of sub is set in sup.
bool contains(const std::uint64_t* sup, const std::uint64_t* sub, std::size_t n);

// out_bits[i] = (cells[i] >= threshold), packed LSB-first into 64-bit words.
// out_bits must hold (n + 63) / 64 words; tail bits of the last word are 0.
void threshold_bits(const std::int8_t* cells, std::size_t n, std::int8_t threshold,
                    std::uint64_t* out_bits);

namespace detail {

struct Ops {
  MinResult (*min_sqdist)(double, double, const double*, const double*, std::size_t);
  std::size_t (*popcount)(const std::uint64_t*, std::size_t);
  std::size_t (*popcount_and)(const std::uint64_t*, const std::uint64_t*, std::size_t);
  void (*or_inplace)(std::uint64_t*, const std::uint64_t*, std::size_t);
  bool (*intersects)(const std::uint64_t*, const std::uint64_t*, std::size_t);
  bool (*contains)(const std::uint64_t*, const std::uint64_t*, std::size_t);
  void (*threshold_bits)(const std::int8_t*, std::size_t, std::int8_t, std::uint64_t*);
};

extern const Ops scalar_ops;
const Ops* avx2_ops_or_null();  // nullptr when unsupported at build or run time

}  // namespace detail

}  // namespace marknav::kern
