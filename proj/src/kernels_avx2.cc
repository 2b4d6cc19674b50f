// Copyright 2026 The cvcluster Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "cvc/kernels.h"

namespace cvc::kernels {

namespace {

constexpr double kRescale = 0x1p-500;
constexpr double kRescaleLog = 500.0 * std::numbers::ln2;
constexpr double kBig = 0x1p500;

inline __m256d cmul(__m256d a, __m256d b) {
    __m256d are = _mm256_movedup_pd(a);
    __m256d aim = _mm256_permute_pd(a, 0xF);
    __m256d bsw = _mm256_permute_pd(b, 0x5);
    return _mm256_fmaddsub_pd(are, b, _mm256_mul_pd(aim, bsw));
}

}  // namespace

void hermite_table_avx2(const double *x, int n, int K, double *out) {
    const double c0 = 1.0 / std::sqrt(std::sqrt(std::numbers::pi));
    int j = 0;
    const __m256d big = _mm256_set1_pd(kBig);
    const __m256d absmask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7FFFFFFFFFFFFFFFLL));
    for (; j + 4 <= n; j += 4) {
        __m256d xv = _mm256_loadu_pd(x + j);
        alignas(32) double xs[4], f[4], slog[4] = {0, 0, 0, 0};
        _mm256_store_pd(xs, xv);
        for (int l = 0; l < 4; ++l) f[l] = std::exp(-0.5 * xs[l] * xs[l]);
        __m256d fv = _mm256_load_pd(f);
        __m256d prev = _mm256_setzero_pd();
        __m256d cur = _mm256_set1_pd(c0);
        for (int k = 0; k < K; ++k) {
            if (k > 0) {
                __m256d a = _mm256_set1_pd(std::sqrt(2.0 / k));
                __m256d b = _mm256_set1_pd(std::sqrt((k - 1.0) / k));
                __m256d next = _mm256_fmsub_pd(_mm256_mul_pd(a, xv), cur, _mm256_mul_pd(b, prev));
                prev = cur;
                cur = next;
                __m256d over = _mm256_cmp_pd(_mm256_and_pd(cur, absmask), big, _CMP_GT_OQ);
                int mask = _mm256_movemask_pd(over);
                if (mask) {
                    alignas(32) double c[4], p[4];
                    _mm256_store_pd(c, cur);
                    _mm256_store_pd(p, prev);
                    for (int l = 0; l < 4; ++l) {
                        if (mask & (1 << l)) {
                            c[l] *= kRescale;
                            p[l] *= kRescale;
                            slog[l] += kRescaleLog;
                            f[l] = std::exp(-0.5 * xs[l] * xs[l] + slog[l]);
                        }
                    }
                    cur = _mm256_load_pd(c);
                    prev = _mm256_load_pd(p);
                    fv = _mm256_load_pd(f);
                }
            }
            _mm256_storeu_pd(out + static_cast<long>(k) * n + j, _mm256_mul_pd(cur, fv));
        }
    }
    // Tail points go through the scalar kernel one at a time.
    std::vector<double> col(K);
    for (; j < n; ++j) {
        hermite_table_scalar(x + j, 1, K, col.data());
        for (int k = 0; k < K; ++k) out[static_cast<long>(k) * n + j] = col[k];
    }
}

void wigner_grid_avx2(const cplx *psi, int d, const double *xs, int nx, const double *ps, int np, double *out) {
    const double inv_pi = 1.0 / std::numbers::pi;
    const double isq2 = 1.0 / std::numbers::sqrt2;
    for (int ip = 0; ip < np; ++ip) {
        double ai_s = ps[ip] * isq2;
        int ix = 0;
        for (; ix + 4 <= nx; ix += 4) {
            __m256d ar = _mm256_mul_pd(_mm256_loadu_pd(xs + ix), _mm256_set1_pd(isq2));
            __m256d ai = _mm256_set1_pd(ai_s);
            __m256d t = _mm256_mul_pd(_mm256_set1_pd(4.0), _mm256_fmadd_pd(ar, ar, _mm256_mul_pd(ai, ai)));
            alignas(32) double tt[4], env[4];
            _mm256_store_pd(tt, t);
            for (int l = 0; l < 4; ++l) env[l] = std::exp(-0.5 * tt[l]) * inv_pi;
            __m256d br = _mm256_mul_pd(_mm256_set1_pd(2.0), ar);
            __m256d bi = _mm256_set1_pd(-2.0 * ai_s);
            __m256d pr = _mm256_set1_pd(1.0), pim = _mm256_setzero_pd();
            __m256d total = _mm256_setzero_pd();
            for (int k = 0; k < d; ++k) {
                if (k > 0) {
                    __m256d s = _mm256_set1_pd(1.0 / std::sqrt(static_cast<double>(k)));
                    __m256d nr = _mm256_mul_pd(_mm256_fmsub_pd(pr, br, _mm256_mul_pd(pim, bi)), s);
                    __m256d ni = _mm256_mul_pd(_mm256_fmadd_pd(pr, bi, _mm256_mul_pd(pim, br)), s);
                    pr = nr;
                    pim = ni;
                }
                __m256d lm1 = _mm256_setzero_pd(), l = _mm256_set1_pd(1.0);
                __m256d sr = _mm256_setzero_pd(), si = _mm256_setzero_pd();
                for (int n = 0; n + k < d; ++n) {
                    if (n == 1) {
                        lm1 = l;
                        l = _mm256_mul_pd(_mm256_sub_pd(_mm256_set1_pd(1.0 + k), t),
                                          _mm256_set1_pd(1.0 / std::sqrt(k + 1.0)));
                    } else if (n > 1) {
                        int m = n - 1;
                        __m256d c1 = _mm256_sub_pd(_mm256_set1_pd(2.0 * m + 1 + k), t);
                        __m256d c2 = _mm256_set1_pd(std::sqrt(double(m) * (m + k)));
                        __m256d inv = _mm256_set1_pd(1.0 / std::sqrt((m + 1.0) * (m + k + 1.0)));
                        __m256d nl = _mm256_mul_pd(_mm256_fmsub_pd(c1, l, _mm256_mul_pd(c2, lm1)), inv);
                        lm1 = l;
                        l = nl;
                    }
                    cplx rho = psi[n + k] * std::conj(psi[n]);
                    double sgn = (n & 1) ? -1.0 : 1.0;
                    sr = _mm256_fmadd_pd(_mm256_set1_pd(sgn * rho.real()), l, sr);
                    si = _mm256_fmadd_pd(_mm256_set1_pd(sgn * rho.imag()), l, si);
                }
                __m256d re = _mm256_fmsub_pd(sr, pr, _mm256_mul_pd(si, pim));
                total = _mm256_fmadd_pd(_mm256_set1_pd(k == 0 ? 1.0 : 2.0), re, total);
            }
            _mm256_storeu_pd(out + static_cast<long>(ip) * nx + ix, _mm256_mul_pd(total, _mm256_load_pd(env)));
        }
        if (ix < nx) {
            wigner_grid_scalar(psi, d, xs + ix, nx - ix, ps + ip, 1, out + static_cast<long>(ip) * nx + ix);
        }
    }
}

void apply_axis_avx2(const cplx *U, int d_out, int d_in, const cplx *in, cplx *out, std::int64_t left,
                     std::int64_t right) {
    const double *Ud = reinterpret_cast<const double *>(U);
    for (std::int64_t l = 0; l < left; ++l) {
        const cplx *src = in + l * d_in * right;
        cplx *dst = out + l * d_out * right;
        if (right == 1) {
            const double *s = reinterpret_cast<const double *>(src);
            for (int i = 0; i < d_out; ++i) {
                const double *u = Ud + 2L * i * d_in;
                __m256d acc = _mm256_setzero_pd();
                int j = 0;
                for (; j + 2 <= d_in; j += 2) {
                    acc = _mm256_add_pd(acc, cmul(_mm256_loadu_pd(u + 2 * j), _mm256_loadu_pd(s + 2 * j)));
                }
                alignas(32) double a[4];
                _mm256_store_pd(a, acc);
                cplx sum(a[0] + a[2], a[1] + a[3]);
                for (; j < d_in; ++j) sum += U[static_cast<long>(i) * d_in + j] * src[j];
                dst[i] = sum;
            }
            continue;
        }
        for (int i = 0; i < d_out; ++i) {
            double *row = reinterpret_cast<double *>(dst + i * right);
            for (std::int64_t r = 0; r < 2 * right; ++r) row[r] = 0.0;
            for (int j = 0; j < d_in; ++j) {
                cplx u = U[static_cast<long>(i) * d_in + j];
                if (u == cplx(0.0)) continue;
                const double *s = reinterpret_cast<const double *>(src + j * right);
                __m256d ur = _mm256_set1_pd(u.real());
                __m256d ui = _mm256_set1_pd(u.imag());
                std::int64_t r = 0;
                for (; r + 2 <= right; r += 2) {
                    __m256d sv = _mm256_loadu_pd(s + 2 * r);
                    __m256d prod = _mm256_fmaddsub_pd(ur, sv, _mm256_mul_pd(ui, _mm256_permute_pd(sv, 0x5)));
                    _mm256_storeu_pd(row + 2 * r, _mm256_add_pd(_mm256_loadu_pd(row + 2 * r), prod));
                }
                for (; r < right; ++r) {
                    cplx v = u * cplx(s[2 * r], s[2 * r + 1]);
                    row[2 * r] += v.real();
                    row[2 * r + 1] += v.imag();
                }
            }
        }
    }
}

}  // namespace cvc::kernels
