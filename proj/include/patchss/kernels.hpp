#pragma once

// Batched arithmetic kernels. Each kernel has a scalar reference
// implementation and, on x86-64 builds, an AVX2/FMA variant chosen at
// runtime. Results of the two agree to rounding (the AVX2 paths fuse
// multiply-adds), which the kernel equivalence tests pin down.

#include <span>
#include <string_view>

namespace patchss::kernels {

enum class Isa { Scalar, Avx2 };

/// True when the AVX2 variants were compiled in and the CPU reports avx2+fma.
bool avx2_available();

/// ISA currently used by the dispatching entry points. Defaults to the best
/// available one; PATCHSS_FORCE_SCALAR=1 in the environment pins Scalar.
Isa active_isa();

/// Overrides the dispatch choice (tests, benchmarks). Requesting Avx2 on a
/// machine without it leaves Scalar active and returns false.
bool set_isa(Isa isa);

std::string_view isa_name(Isa isa);

/// sum_i w[i] * x[i]; spans must have equal length.
double weighted_sum(std::span<const double> w, std::span<const double> x);

/// out[i] = coef * (u[i] - 2 u[i+1] + u[i+2]) + reaction[i], for i < u.size() - 2.
/// `reaction` and `out` have length u.size() - 2.
void second_difference(std::span<const double> u, double coef,
                       std::span<const double> reaction, std::span<double> out);

/// out[i] = r u[i] (1 - (u[i]/K)^p) for u[i] >= 0.
void richards_rate(std::span<const double> u, double r, double K, double p,
                   std::span<double> out);

/// Richards audit polynomials on a z-grid:
///   q[i] = p/(p+2) z (z - (p+1))
///   P[i] = p z ((3p+2) - 2z) + (p-1)((p+1) - z)(1 - z)
void audit_polynomials(std::span<const double> z, double p, std::span<double> q,
                       std::span<double> P);

namespace scalar {
double weighted_sum(std::span<const double> w, std::span<const double> x);
void second_difference(std::span<const double> u, double coef,
                       std::span<const double> reaction, std::span<double> out);
void richards_rate(std::span<const double> u, double r, double K, double p,
                   std::span<double> out);
void audit_polynomials(std::span<const double> z, double p, std::span<double> q,
                       std::span<double> P);
}  // namespace scalar

#if defined(PATCHSS_HAVE_AVX2)
namespace avx2 {
double weighted_sum(std::span<const double> w, std::span<const double> x);
void second_difference(std::span<const double> u, double coef,
                       std::span<const double> reaction, std::span<double> out);
void richards_rate(std::span<const double> u, double r, double K, double p,
                   std::span<double> out);
void audit_polynomials(std::span<const double> z, double p, std::span<double> q,
                       std::span<double> P);
}  // namespace avx2
#endif

}  // namespace patchss::kernels
