#include <cmath>

#include "stabest/kernels.hpp"

namespace stabest::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void adam_scalar(double* w, const double* g, double* m, double* v, std::size_t n,
                 const AdamParams& p) {
  const double omb1 = 1.0 - p.beta1;
  const double omb2 = 1.0 - p.beta2;
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = p.beta1 * m[i] + omb1 * g[i];
    v[i] = p.beta2 * v[i] + omb2 * (g[i] * g[i]);
    const double m_hat = m[i] / p.bias1;
    const double v_hat = v[i] / p.bias2;
    w[i] -= p.lr * m_hat / (std::sqrt(v_hat) + p.eps);
  }
}

}  // namespace

const Ops& scalar_ops() {
  static constexpr Ops ops{"scalar", dot_scalar, axpy_scalar, adam_scalar};
  return ops;
}

}  // namespace stabest::kernels
