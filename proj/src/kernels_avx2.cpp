// Compiled with -mavx2 -mfma; only reached after the runtime CPU check.

#include <immintrin.h>

#include <cassert>
#include <cmath>

#include "patchss/kernels.hpp"

namespace patchss::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Integer exponents up to 8 are expanded into multiplications; anything else
// returns 0 and the caller takes the scalar path.
int small_integer_exponent(double p) {
  const double rp = std::round(p);
  if (rp == p && rp >= 1.0 && rp <= 8.0) return static_cast<int>(rp);
  return 0;
}

}  // namespace

double weighted_sum(std::span<const double> w, std::span<const double> x) {
  assert(w.size() == x.size());
  const std::size_t n = w.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(&w[i]), _mm256_loadu_pd(&x[i]), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(&w[i + 4]), _mm256_loadu_pd(&x[i + 4]), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(&w[i]), _mm256_loadu_pd(&x[i]), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += w[i] * x[i];
  return acc;
}

void second_difference(std::span<const double> u, double coef,
                       std::span<const double> reaction, std::span<double> out) {
  assert(u.size() >= 2 && out.size() == u.size() - 2 && reaction.size() == out.size());
  const std::size_t n = out.size();
  const __m256d c = _mm256_set1_pd(coef);
  const __m256d two = _mm256_set1_pd(2.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d left = _mm256_loadu_pd(&u[i]);
    const __m256d mid = _mm256_loadu_pd(&u[i + 1]);
    const __m256d right = _mm256_loadu_pd(&u[i + 2]);
    const __m256d lap = _mm256_add_pd(_mm256_fnmadd_pd(two, mid, left), right);
    _mm256_storeu_pd(&out[i], _mm256_fmadd_pd(c, lap, _mm256_loadu_pd(&reaction[i])));
  }
  for (; i < n; ++i) out[i] = coef * (u[i] - 2.0 * u[i + 1] + u[i + 2]) + reaction[i];
}

void richards_rate(std::span<const double> u, double r, double K, double p,
                   std::span<double> out) {
  assert(u.size() == out.size());
  const int k = small_integer_exponent(p);
  if (k == 0) {
    scalar::richards_rate(u, r, K, p, out);
    return;
  }
  const std::size_t n = u.size();
  const __m256d vr = _mm256_set1_pd(r);
  const __m256d inv_k = _mm256_set1_pd(1.0 / K);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(&u[i]);
    const __m256d s = _mm256_mul_pd(x, inv_k);
    __m256d pw = s;
    for (int j = 1; j < k; ++j) pw = _mm256_mul_pd(pw, s);
    _mm256_storeu_pd(&out[i], _mm256_mul_pd(_mm256_mul_pd(vr, x), _mm256_sub_pd(one, pw)));
  }
  for (; i < n; ++i) {
    const double s = u[i] / K;
    double pw = s;
    for (int j = 1; j < k; ++j) pw *= s;
    out[i] = r * u[i] * (1.0 - pw);
  }
}

void audit_polynomials(std::span<const double> z, double p, std::span<double> q,
                       std::span<double> P) {
  assert(z.size() == q.size() && z.size() == P.size());
  const std::size_t n = z.size();
  const __m256d qc = _mm256_set1_pd(p / (p + 2.0));
  const __m256d vp = _mm256_set1_pd(p);
  const __m256d p1 = _mm256_set1_pd(p + 1.0);
  const __m256d pm1 = _mm256_set1_pd(p - 1.0);
  const __m256d c3p2 = _mm256_set1_pd(3.0 * p + 2.0);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(&z[i]);
    _mm256_storeu_pd(&q[i], _mm256_mul_pd(_mm256_mul_pd(qc, x), _mm256_sub_pd(x, p1)));
    const __m256d first = _mm256_mul_pd(_mm256_mul_pd(vp, x), _mm256_fnmadd_pd(two, x, c3p2));
    const __m256d second =
        _mm256_mul_pd(_mm256_mul_pd(pm1, _mm256_sub_pd(p1, x)), _mm256_sub_pd(one, x));
    _mm256_storeu_pd(&P[i], _mm256_add_pd(first, second));
  }
  if (i < n) scalar::audit_polynomials(z.subspan(i), p, q.subspan(i), P.subspan(i));
}

}  // namespace patchss::kernels::avx2
