// AVX2 kernel variants. This translation unit is the only one built with
// -mavx2; callers reach it through the dispatch table so no AVX2 instruction
// executes unless the CPU reports support.

#include "marknav/kernels.hpp"

#if defined(__x86_64__) && defined(__AVX2__)

#include <immintrin.h>

#include <bit>
#include <cmath>

namespace marknav::kern::detail {
namespace {

inline __m256i popcount_bytes(__m256i v) {
  const __m256i lut =
      _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4, 0, 1, 1, 2, 1, 2, 2, 3, 1,
                       2, 2, 3, 2, 3, 3, 4);
  const __m256i low = _mm256_set1_epi8(0x0f);
  const __m256i lo = _mm256_and_si256(v, low);
  const __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low);
  const __m256i cnt =
      _mm256_add_epi8(_mm256_shuffle_epi8(lut, lo), _mm256_shuffle_epi8(lut, hi));
  return _mm256_sad_epu8(cnt, _mm256_setzero_si256());
}

inline std::size_t hsum_u64(__m256i v) {
  alignas(32) std::uint64_t tmp[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(tmp), v);
  return tmp[0] + tmp[1] + tmp[2] + tmp[3];
}

std::size_t popcount_avx2(const std::uint64_t* w, std::size_t n) {
  __m256i acc = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(w + i));
    acc = _mm256_add_epi64(acc, popcount_bytes(v));
  }
  std::size_t c = hsum_u64(acc);
  for (; i < n; ++i) c += static_cast<std::size_t>(std::popcount(w[i]));
  return c;
}

std::size_t popcount_and_avx2(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
  __m256i acc = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    acc = _mm256_add_epi64(acc, popcount_bytes(_mm256_and_si256(va, vb)));
  }
  std::size_t c = hsum_u64(acc);
  for (; i < n; ++i) c += static_cast<std::size_t>(std::popcount(a[i] & b[i]));
  return c;
}

void or_inplace_avx2(std::uint64_t* dst, const std::uint64_t* src, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256i vd = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(dst + i));
    const __m256i vs = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i), _mm256_or_si256(vd, vs));
  }
  for (; i < n; ++i) dst[i] |= src[i];
}

bool intersects_avx2(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    if (!_mm256_testz_si256(va, vb)) return true;
  }
  for (; i < n; ++i)
    if (a[i] & b[i]) return true;
  return false;
}

bool contains_avx2(const std::uint64_t* sup, const std::uint64_t* sub, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256i vsup = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(sup + i));
    const __m256i vsub = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(sub + i));
    if (!_mm256_testc_si256(vsup, vsub)) return false;
  }
  for (; i < n; ++i)
    if (sub[i] & ~sup[i]) return false;
  return true;
}

MinResult min_sqdist_avx2(double qx, double qy, const double* xs, const double* ys,
                          std::size_t n) {
  if (n < 8) return scalar_ops.min_sqdist(qx, qy, xs, ys, n);

  const __m256d vqx = _mm256_set1_pd(qx);
  const __m256d vqy = _mm256_set1_pd(qy);
  __m256d vbest = _mm256_set1_pd(INFINITY);
  __m256d vbidx = _mm256_setzero_pd();
  __m256d vcur = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
  const __m256d vstep = _mm256_set1_pd(4.0);

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), vqx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), vqy);
    // mul/add kept separate to match the scalar reference exactly.
    const __m256d d = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
    const __m256d lt = _mm256_cmp_pd(d, vbest, _CMP_LT_OQ);
    vbest = _mm256_blendv_pd(vbest, d, lt);
    vbidx = _mm256_blendv_pd(vbidx, vcur, lt);
    vcur = _mm256_add_pd(vcur, vstep);
  }

  alignas(32) double bv[4];
  alignas(32) double bi[4];
  _mm256_store_pd(bv, vbest);
  _mm256_store_pd(bi, vbidx);
  MinResult best{bv[0], static_cast<std::size_t>(bi[0])};
  for (int k = 1; k < 4; ++k) {
    const auto idx = static_cast<std::size_t>(bi[k]);
    if (bv[k] < best.sqdist || (bv[k] == best.sqdist && idx < best.index))
      best = {bv[k], idx};
  }
  // Tail indices exceed every vector-lane index, so strict < preserves the
  // lowest-index tie rule.
  for (; i < n; ++i) {
    const double dx = xs[i] - qx;
    const double dy = ys[i] - qy;
    const double d = dx * dx + dy * dy;
    if (d < best.sqdist) best = {d, i};
  }
  return best;
}

void threshold_bits_avx2(const std::int8_t* cells, std::size_t n, std::int8_t threshold,
                         std::uint64_t* out_bits) {
  if (threshold == INT8_MIN) {
    // cells[i] >= INT8_MIN is always true.
    const std::size_t words = (n + 63) / 64;
    for (std::size_t w = 0; w < words; ++w) out_bits[w] = ~std::uint64_t{0};
    if (n % 64) out_bits[words - 1] = (std::uint64_t{1} << (n % 64)) - 1;
    return;
  }
  const std::size_t words = (n + 63) / 64;
  for (std::size_t w = 0; w < words; ++w) out_bits[w] = 0;
  const __m256i vthr = _mm256_set1_epi8(static_cast<char>(threshold - 1));
  std::size_t i = 0;
  for (; i + 64 <= n; i += 64) {
    const __m256i c0 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(cells + i));
    const __m256i c1 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(cells + i + 32));
    const auto m0 = static_cast<std::uint32_t>(_mm256_movemask_epi8(_mm256_cmpgt_epi8(c0, vthr)));
    const auto m1 = static_cast<std::uint32_t>(_mm256_movemask_epi8(_mm256_cmpgt_epi8(c1, vthr)));
    out_bits[i / 64] = static_cast<std::uint64_t>(m0) | (static_cast<std::uint64_t>(m1) << 32);
  }
  for (; i < n; ++i)
    if (cells[i] >= threshold) out_bits[i / 64] |= std::uint64_t{1} << (i % 64);
}

const Ops avx2_ops = {
    min_sqdist_avx2, popcount_avx2, popcount_and_avx2, or_inplace_avx2,
    intersects_avx2, contains_avx2, threshold_bits_avx2,
};

}  // namespace

const Ops* avx2_table() { return &avx2_ops; }

}  // namespace marknav::kern::detail

#else

namespace marknav::kern::detail {
const Ops* avx2_table() { return nullptr; }
}  // namespace marknav::kern::detail

#endif
