#pragma once

#include <cstddef>

// Hot numeric primitives behind the trainer: dense dot products, scaled
// accumulation, and the Adam element update. A scalar reference implementation
// always exists; an AVX2 variant is compiled on x86-64 and selected at runtime
// when the CPU supports it. Both kernel translation units are built with
// floating-point contraction off, so the elementwise kernels (axpy, adam)
// agree bit-for-bit across variants; dot differs only by summation order.

namespace stabest::kernels {

struct AdamParams {
  double lr;
  double beta1, beta2;
  double eps;
  double bias1, bias2;  // 1 - beta1^t, 1 - beta2^t at the current step
};

struct Ops {
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);  // y += alpha * x
  // m = b1*m + (1-b1)*g; v = b2*v + (1-b2)*g^2; w -= lr * (m/bias1) / (sqrt(v/bias2) + eps)
  void (*adam)(double* w, const double* g, double* m, double* v, std::size_t n,
               const AdamParams& p);
};

const Ops& scalar_ops();

// Null when the AVX2 variant is not compiled in or the CPU lacks AVX2.
const Ops* avx2_ops();

// AVX2 when available, else scalar. The STABEST_KERNELS environment variable
// ("scalar", "avx2", "auto") overrides; asking for an unavailable variant is a
// configuration error. Selection happens once, on first use.
const Ops& active();

}  // namespace stabest::kernels
