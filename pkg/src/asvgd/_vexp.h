/* Vectorized exp(scale * x) over a contiguous array.
 *
 * Declaring exp as an OpenMP SIMD function lets GCC call the glibc vector
 * variants (libmvec). target_clones builds an AVX2 copy next to the
 * baseline one and picks at load time.
 */
#ifndef ASVGD_VEXP_H
#define ASVGD_VEXP_H

#include <math.h>
#include <stddef.h>

#if defined(__GNUC__) && !defined(__clang__) && defined(__x86_64__) && defined(__linux__)
#pragma omp declare simd notinbranch
extern double exp(double);
#define ASVGD_CLONES __attribute__((target_clones("avx2", "default")))
#else
#define ASVGD_CLONES
#endif

ASVGD_CLONES
static void asvgd_exp_scaled(const double *src, double *dst, ptrdiff_t n, double scale)
{
    ptrdiff_t i;
#pragma omp simd
    for (i = 0; i < n; i++)
        dst[i] = exp(src[i] * scale);
}

#endif
