// Compiled with -mavx2 only; dispatch guarantees the CPU supports it before
// any of these run. Multiply and add stay separate (no FMA) so the elementwise
// kernels match the scalar reference bit-for-bit.

#ifndef __AVX2__
#error "this translation unit requires -mavx2"
#endif

#include <immintrin.h>

#include <cmath>

#include "stabest/kernels.hpp"

namespace stabest::kernels {

namespace {

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd();
  __m256d acc3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
    acc2 = _mm256_add_pd(acc2, _mm256_mul_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8)));
    acc3 = _mm256_add_pd(acc3, _mm256_mul_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12)));
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  const __m256d sum = _mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, sum);
  double acc = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void adam_avx2(double* w, const double* g, double* m, double* v, std::size_t n,
               const AdamParams& p) {
  const double omb1s = 1.0 - p.beta1;
  const double omb2s = 1.0 - p.beta2;
  const __m256d b1 = _mm256_set1_pd(p.beta1);
  const __m256d b2 = _mm256_set1_pd(p.beta2);
  const __m256d omb1 = _mm256_set1_pd(omb1s);
  const __m256d omb2 = _mm256_set1_pd(omb2s);
  const __m256d bias1 = _mm256_set1_pd(p.bias1);
  const __m256d bias2 = _mm256_set1_pd(p.bias2);
  const __m256d lr = _mm256_set1_pd(p.lr);
  const __m256d eps = _mm256_set1_pd(p.eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d gi = _mm256_loadu_pd(g + i);
    const __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)),
                                     _mm256_mul_pd(omb1, gi));
    const __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                     _mm256_mul_pd(omb2, _mm256_mul_pd(gi, gi)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d m_hat = _mm256_div_pd(mi, bias1);
    const __m256d v_hat = _mm256_div_pd(vi, bias2);
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(v_hat), eps);
    const __m256d step = _mm256_div_pd(_mm256_mul_pd(lr, m_hat), denom);
    _mm256_storeu_pd(w + i, _mm256_sub_pd(_mm256_loadu_pd(w + i), step));
  }
  for (; i < n; ++i) {
    m[i] = p.beta1 * m[i] + omb1s * g[i];
    v[i] = p.beta2 * v[i] + omb2s * (g[i] * g[i]);
    const double m_hat = m[i] / p.bias1;
    const double v_hat = v[i] / p.bias2;
    w[i] -= p.lr * m_hat / (std::sqrt(v_hat) + p.eps);
  }
}

}  // namespace

namespace detail {

const Ops& avx2_ops_unchecked() {
  static constexpr Ops ops{"avx2", dot_avx2, axpy_avx2, adam_avx2};
  return ops;
}

}  // namespace detail

}  // namespace stabest::kernels
