#include "patchss/kernels.hpp"

#include <atomic>
#include <cassert>
#include <cmath>
#include <cstdlib>
#include <string>

namespace patchss::kernels {

namespace scalar {

double weighted_sum(std::span<const double> w, std::span<const double> x) {
  assert(w.size() == x.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * x[i];
  return acc;
}

void second_difference(std::span<const double> u, double coef,
                       std::span<const double> reaction, std::span<double> out) {
  assert(u.size() >= 2 && out.size() == u.size() - 2 && reaction.size() == out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = coef * (u[i] - 2.0 * u[i + 1] + u[i + 2]) + reaction[i];
  }
}

void richards_rate(std::span<const double> u, double r, double K, double p,
                   std::span<double> out) {
  assert(u.size() == out.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    out[i] = r * u[i] * (1.0 - std::pow(u[i] / K, p));
  }
}

void audit_polynomials(std::span<const double> z, double p, std::span<double> q,
                       std::span<double> P) {
  assert(z.size() == q.size() && z.size() == P.size());
  const double qc = p / (p + 2.0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double zi = z[i];
    q[i] = qc * zi * (zi - (p + 1.0));
    P[i] = p * zi * ((3.0 * p + 2.0) - 2.0 * zi) + (p - 1.0) * ((p + 1.0) - zi) * (1.0 - zi);
  }
}

}  // namespace scalar

namespace {

bool cpu_has_avx2() {
#if defined(PATCHSS_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa initial_isa() {
  if (const char* env = std::getenv("PATCHSS_FORCE_SCALAR"); env && std::string(env) == "1") {
    return Isa::Scalar;
  }
  return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

bool avx2_available() {
  static const bool available = cpu_has_avx2();
  return available;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

bool set_isa(Isa isa) {
  if (isa == Isa::Avx2 && !avx2_available()) {
    current().store(Isa::Scalar);
    return false;
  }
  current().store(isa);
  return true;
}

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

#if defined(PATCHSS_HAVE_AVX2)
#define PATCHSS_DISPATCH(fn, ...)                                  \
  (active_isa() == Isa::Avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define PATCHSS_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

double weighted_sum(std::span<const double> w, std::span<const double> x) {
  return PATCHSS_DISPATCH(weighted_sum, w, x);
}

void second_difference(std::span<const double> u, double coef,
                       std::span<const double> reaction, std::span<double> out) {
  PATCHSS_DISPATCH(second_difference, u, coef, reaction, out);
}

void richards_rate(std::span<const double> u, double r, double K, double p,
                   std::span<double> out) {
  PATCHSS_DISPATCH(richards_rate, u, r, K, p, out);
}

void audit_polynomials(std::span<const double> z, double p, std::span<double> q,
                       std::span<double> P) {
  PATCHSS_DISPATCH(audit_polynomials, z, p, q, P);
}

#undef PATCHSS_DISPATCH

}  // namespace patchss::kernels
