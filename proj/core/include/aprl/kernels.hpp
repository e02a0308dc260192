#pragma once

#include <cstddef>

namespace aprl {

// Fixed-order 8-accumulator dot product. Both the trainer forward pass and
// the embedded inference runtime use this kernel, so exported models
// reproduce trainer outputs bit for bit while the independent partial sums
// keep the loop fast without -ffast-math.
template <typename T>
inline T dot(const T* __restrict a, const T* __restrict b, int n) {
  T s0{}, s1{}, s2{}, s3{}, s4{}, s5{}, s6{}, s7{};
  int i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 += a[i + 0] * b[i + 0];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
    s4 += a[i + 4] * b[i + 4];
    s5 += a[i + 5] * b[i + 5];
    s6 += a[i + 6] * b[i + 6];
    s7 += a[i + 7] * b[i + 7];
  }
  T tail{};
  for (; i < n; ++i) tail += a[i] * b[i];
  return ((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7)) + tail;
}

// y += s * x
template <typename T>
inline void axpy(T* __restrict y, const T* __restrict x, T s, int n) {
  for (int i = 0; i < n; ++i) y[i] += s * x[i];
}

}  // namespace aprl
