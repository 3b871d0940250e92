/* 1-D convolution with register blocking.
 *
 * out[o, t] = b[o] + sum_j sum_c w[o, c, j] * x[c, t*s + j*d]
 * accumulated tap-major then channel, one rounding per multiply and per add
 * (build with -ffp-contract=off), matching the numpy kernels bit for bit.
 */
#ifndef CHUNKCODEC_CONV_KERNELS_H
#define CHUNKCODEC_CONV_KERNELS_H

#include <stddef.h>
#include <string.h>

#if defined(__AVX512F__)
#define CC_VLEN 16
typedef float ccvec __attribute__((vector_size(64)));
#define CC_SPLAT(v) ((ccvec){v, v, v, v, v, v, v, v, v, v, v, v, v, v, v, v})
#elif defined(__AVX__)
#define CC_VLEN 8
typedef float ccvec __attribute__((vector_size(32)));
#define CC_SPLAT(v) ((ccvec){v, v, v, v, v, v, v, v})
#else
#define CC_VLEN 4
typedef float ccvec __attribute__((vector_size(16)));
#define CC_SPLAT(v) ((ccvec){v, v, v, v})
/* Transposed convolution, output-stationary.
 *
 * out[o, t] = b[o] + sum_j sum_c w[o, c, j] * x[c, (t - j*d) / s]
 * over the taps where (t - j*d) is a non-negative multiple of s inside x.
 * Terms are added tap-major then channel, the order the scatter form in
 * the numpy kernel uses. Each output phase t % s is a plain correlation
 * over x, so input loads are contiguous.
 */
static float cc_convt_scalar(const float* x, ptrdiff_t C, ptrdiff_t L, const float* w,
                             float bias, ptrdiff_t K, ptrdiff_t o, ptrdiff_t t, ptrdiff_t s,
                             ptrdiff_t d)
{
    float a = bias;
    for (ptrdiff_t j = 0; j < K; j++) {
        ptrdiff_t p = t - j * d;
        if (p < 0 || p % s) continue;
        ptrdiff_t i = p / s;
        if (i >= L) continue;
        for (ptrdiff_t c = 0; c < C; c++)
            a = a + w[(o * C + c) * K + j] * x[c * L + i];
    }
    return a;
}

static void cc_conv_transpose1d(const float* x, ptrdiff_t C, ptrdiff_t L,
                                const float* w, const float* b, ptrdiff_t O, ptrdiff_t K,
                                ptrdiff_t s, ptrdiff_t d, float* out, ptrdiff_t n,
                                ptrdiff_t* taps, ptrdiff_t* shift)
{
    for (ptrdiff_t r = 0; r < s && r < n; r++) {
        /* taps feeding this phase, ascending, with their input offsets */
        ptrdiff_t nt = 0, mmax = 0;
        for (ptrdiff_t j = 0; j < K; j++) {
            ptrdiff_t q = j * d - r;
            if (q >= 0 && q % s == 0) {
                taps[nt] = j;
                shift[nt] = q / s;
                if (shift[nt] > mmax) mmax = shift[nt];
                nt++;
            }
        }
        ptrdiff_t nq = (n - r + s - 1) / s;  /* outputs in this phase */
        /* q in [mmax, L) has every tap in range */
        ptrdiff_t lo = mmax < nq ? mmax : nq, hi = L < nq ? L : nq;
        if (hi < lo) hi = lo;
        ptrdiff_t o0 = 0;
        for (; o0 + CC_OBLK <= O; o0 += CC_OBLK) {
            ptrdiff_t q0 = lo;
            for (; q0 + CC_VLEN <= hi; q0 += CC_VLEN) {
                ccvec acc[CC_OBLK];
                for (int o = 0; o < CC_OBLK; o++) {
                    float bv = b[o0 + o];
                    acc[o] = CC_SPLAT(bv);
                }
                for (ptrdiff_t u = 0; u < nt; u++) {
                    ptrdiff_t j = taps[u];
                    for (ptrdiff_t c = 0; c < C; c++) {
                        ccvec xv;
                        memcpy(&xv, x + c * L + q0 - shift[u], sizeof xv);
                        const float* wr = w + (o0 * C + c) * K + j;
                        for (int o = 0; o < CC_OBLK; o++) {
                            float wv = wr[o * C * K];
                            acc[o] = acc[o] + CC_SPLAT(wv) * xv;
                        }
                    }
                }
                for (int o = 0; o < CC_OBLK; o++) {
                    float* op = out + (o0 + o) * n + q0 * s + r;
                    for (int i = 0; i < CC_VLEN; i++) op[i * s] = acc[o][i];
                }
            }
            for (int o = 0; o < CC_OBLK; o++) {
                for (ptrdiff_t q = 0; q < lo; q++)
                    out[(o0 + o) * n + q * s + r] = cc_convt_scalar(x, C, L, w, b[o0 + o], K, o0 + o, q * s + r, s, d);
                for (ptrdiff_t q = q0; q < nq; q++)
                    out[(o0 + o) * n + q * s + r] = cc_convt_scalar(x, C, L, w, b[o0 + o], K, o0 + o, q * s + r, s, d);
            }
        }
        for (; o0 < O; o0++)
            for (ptrdiff_t q = 0; q < nq; q++)
                out[o0 * n + q * s + r] = cc_convt_scalar(x, C, L, w, b[o0], K, o0, q * s + r, s, d);
    }
}

#endif

#define CC_OBLK 8

static float cc_dot_scalar(const float* x, ptrdiff_t C, ptrdiff_t L, const float* w,
                           float bias, ptrdiff_t K, ptrdiff_t o, ptrdiff_t t, ptrdiff_t s,
                           ptrdiff_t d)
{
    float a = bias;
    for (ptrdiff_t j = 0; j < K; j++)
        for (ptrdiff_t c = 0; c < C; c++)
            a = a + w[(o * C + c) * K + j] * x[c * L + t * s + j * d];
    return a;
}

static void cc_conv1d(const float* x, ptrdiff_t C, ptrdiff_t L,
                      const float* w, const float* b, ptrdiff_t O, ptrdiff_t K,
                      ptrdiff_t s, ptrdiff_t d, float* out, ptrdiff_t n)
{
    ptrdiff_t o0 = 0;
    for (; o0 + CC_OBLK <= O; o0 += CC_OBLK) {
        ptrdiff_t t0 = 0;
        for (; t0 + CC_VLEN <= n; t0 += CC_VLEN) {
            ccvec acc[CC_OBLK];
            for (int o = 0; o < CC_OBLK; o++) {
                float bv = b[o0 + o];
                acc[o] = CC_SPLAT(bv);
            }
            for (ptrdiff_t j = 0; j < K; j++) {
                for (ptrdiff_t c = 0; c < C; c++) {
                    ccvec xv;
                    const float* xr = x + c * L + t0 * s + j * d;
                    if (s == 1) {
                        memcpy(&xv, xr, sizeof xv);
                    } else {
                        for (int i = 0; i < CC_VLEN; i++) xv[i] = xr[i * s];
                    }
                    const float* wr = w + (o0 * C + c) * K + j;
                    for (int o = 0; o < CC_OBLK; o++) {
                        float wv = wr[o * C * K];
                        acc[o] = acc[o] + CC_SPLAT(wv) * xv;
                    }
                }
            }
            for (int o = 0; o < CC_OBLK; o++)
                memcpy(out + (o0 + o) * n + t0, &acc[o], sizeof acc[o]);
        }
        for (; t0 < n; t0++)
            for (int o = 0; o < CC_OBLK; o++)
                out[(o0 + o) * n + t0] = cc_dot_scalar(x, C, L, w, b[o0 + o], K, o0 + o, t0, s, d);
    }
    for (; o0 < O; o0++)
        for (ptrdiff_t t = 0; t < n; t++)
            out[o0 * n + t] = cc_dot_scalar(x, C, L, w, b[o0], K, o0, t, s, d);
}

/* Transposed convolution, output-stationary.
 *
 * out[o, t] = b[o] + sum_j sum_c w[o, c, j] * x[c, (t - j*d) / s]
 * over the taps where (t - j*d) is a non-negative multiple of s inside x.
 * Terms are added tap-major then channel, the order the scatter form in
 * the numpy kernel uses. Each output phase t % s is a plain correlation
 * over x, so input loads are contiguous.
 */
static float cc_convt_scalar(const float* x, ptrdiff_t C, ptrdiff_t L, const float* w,
                             float bias, ptrdiff_t K, ptrdiff_t o, ptrdiff_t t, ptrdiff_t s,
                             ptrdiff_t d)
{
    float a = bias;
    for (ptrdiff_t j = 0; j < K; j++) {
        ptrdiff_t p = t - j * d;
        if (p < 0 || p % s) continue;
        ptrdiff_t i = p / s;
        if (i >= L) continue;
        for (ptrdiff_t c = 0; c < C; c++)
            a = a + w[(o * C + c) * K + j] * x[c * L + i];
    }
    return a;
}

static void cc_conv_transpose1d(const float* x, ptrdiff_t C, ptrdiff_t L,
                                const float* w, const float* b, ptrdiff_t O, ptrdiff_t K,
                                ptrdiff_t s, ptrdiff_t d, float* out, ptrdiff_t n,
                                ptrdiff_t* taps, ptrdiff_t* shift)
{
    for (ptrdiff_t r = 0; r < s && r < n; r++) {
        /* taps feeding this phase, ascending, with their input offsets */
        ptrdiff_t nt = 0, mmax = 0;
        for (ptrdiff_t j = 0; j < K; j++) {
            ptrdiff_t q = j * d - r;
            if (q >= 0 && q % s == 0) {
                taps[nt] = j;
                shift[nt] = q / s;
                if (shift[nt] > mmax) mmax = shift[nt];
                nt++;
            }
        }
        ptrdiff_t nq = (n - r + s - 1) / s;  /* outputs in this phase */
        /* q in [mmax, L) has every tap in range */
        ptrdiff_t lo = mmax < nq ? mmax : nq, hi = L < nq ? L : nq;
        if (hi < lo) hi = lo;
        ptrdiff_t o0 = 0;
        for (; o0 + CC_OBLK <= O; o0 += CC_OBLK) {
            ptrdiff_t q0 = lo;
            for (; q0 + CC_VLEN <= hi; q0 += CC_VLEN) {
                ccvec acc[CC_OBLK];
                for (int o = 0; o < CC_OBLK; o++) {
                    float bv = b[o0 + o];
                    acc[o] = CC_SPLAT(bv);
                }
                for (ptrdiff_t u = 0; u < nt; u++) {
                    ptrdiff_t j = taps[u];
                    for (ptrdiff_t c = 0; c < C; c++) {
                        ccvec xv;
                        memcpy(&xv, x + c * L + q0 - shift[u], sizeof xv);
                        const float* wr = w + (o0 * C + c) * K + j;
                        for (int o = 0; o < CC_OBLK; o++) {
                            float wv = wr[o * C * K];
                            acc[o] = acc[o] + CC_SPLAT(wv) * xv;
                        }
                    }
                }
                for (int o = 0; o < CC_OBLK; o++) {
                    float* op = out + (o0 + o) * n + q0 * s + r;
                    for (int i = 0; i < CC_VLEN; i++) op[i * s] = acc[o][i];
                }
            }
            for (int o = 0; o < CC_OBLK; o++) {
                for (ptrdiff_t q = 0; q < lo; q++)
                    out[(o0 + o) * n + q * s + r] = cc_convt_scalar(x, C, L, w, b[o0 + o], K, o0 + o, q * s + r, s, d);
                for (ptrdiff_t q = q0; q < nq; q++)
                    out[(o0 + o) * n + q * s + r] = cc_convt_scalar(x, C, L, w, b[o0 + o], K, o0 + o, q * s + r, s, d);
            }
        }
        for (; o0 < O; o0++)
            for (ptrdiff_t q = 0; q < nq; q++)
                out[o0 * n + q * s + r] = cc_convt_scalar(x, C, L, w, b[o0], K, o0, q * s + r, s, d);
    }
}

#endif
