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

#include <cmath>
#include <numbers>

#include "cvc/kernels.h"

namespace cvc::kernels {

namespace {
constexpr double kRescale = 0x1p-500;
constexpr double kRescaleLog = 500.0 * std::numbers::ln2;
constexpr double kBig = 0x1p500;
}  // namespace

void hermite_table_scalar(const double *x, int n, int K, double *out) {
    const double c0 = 1.0 / std::sqrt(std::sqrt(std::numbers::pi));
    for (int j = 0; j < n; ++j) {
        double xj = x[j];
        // Values are carried without the Gaussian envelope; the envelope and the
        // accumulated rescaling enter through f.
        double scale_log = 0.0;
        double f = std::exp(-0.5 * xj * xj);
        double prev = 0.0, cur = c0;
        for (int k = 0; k < K; ++k) {
            if (k > 0) {
                double next = std::sqrt(2.0 / k) * xj * cur - std::sqrt((k - 1.0) / k) * prev;
                prev = cur;
                cur = next;
                if (std::abs(cur) > kBig) {
                    cur *= kRescale;
                    prev *= kRescale;
                    scale_log += kRescaleLog;
                    f = std::exp(-0.5 * xj * xj + scale_log);
                }
            }
            out[static_cast<long>(k) * n + j] = cur * f;
        }
    }
}

void wigner_grid_scalar(const cplx *psi, int d, const double *xs, int nx, const double *ps, int np, double *out) {
    const double inv_pi = 1.0 / std::numbers::pi;
    for (int ip = 0; ip < np; ++ip) {
        for (int ix = 0; ix < nx; ++ix) {
            double ar = xs[ix] / std::numbers::sqrt2, ai = ps[ip] / std::numbers::sqrt2;
            double t = 4.0 * (ar * ar + ai * ai);
            double env = std::exp(-0.5 * t) * inv_pi;
            // (2 conj(alpha))^k / sqrt(k!) accumulated along the diagonals.
            double br = 2.0 * ar, bi = -2.0 * ai;
            double pr = 1.0, pi = 0.0;
            double total = 0.0;
            for (int k = 0; k < d; ++k) {
                if (k > 0) {
                    double nr = (pr * br - pi * bi) / std::sqrt(static_cast<double>(k));
                    double ni = (pr * bi + pi * br) / std::sqrt(static_cast<double>(k));
                    pr = nr;
                    pi = ni;
                }
                // l_n = sqrt(n!/(n+k)!) L_n^(k)(t) * sqrt(k!)
                double lm1 = 0.0, l = 1.0;
                double sr = 0.0, si = 0.0;
                for (int n = 0; n + k < d; ++n) {
                    if (n == 1) {
                        lm1 = l;
                        l = (1.0 + k - t) / std::sqrt(k + 1.0);
                    } else if (n > 1) {
                        int m = n - 1;
                        double nl = ((2.0 * m + 1 + k - t) * l - std::sqrt(double(m) * (m + k)) * lm1) /
                                    std::sqrt((m + 1.0) * (m + k + 1.0));
                        lm1 = l;
                        l = nl;
                    }
                    cplx rho = psi[n + k] * std::conj(psi[n]);
                    double sgn = (n & 1) ? -1.0 : 1.0;
                    sr += sgn * l * rho.real();
                    si += sgn * l * rho.imag();
                }
                double re = sr * pr - si * pi;
                total += (k == 0 ? 1.0 : 2.0) * re;
            }
            out[static_cast<long>(ip) * nx + ix] = total * env;
        }
    }
}

void apply_axis_scalar(const cplx *U, int d_out, int d_in, const cplx *in, cplx *out, std::int64_t left,
                       std::int64_t right) {
    for (std::int64_t l = 0; l < left; ++l) {
        const cplx *src = in + l * d_in * right;
        cplx *dst = out + l * d_out * right;
        for (int i = 0; i < d_out; ++i) {
            cplx *row = dst + i * right;
            for (std::int64_t r = 0; r < right; ++r) row[r] = 0.0;
            for (int j = 0; j < d_in; ++j) {
                cplx u = U[static_cast<long>(i) * d_in + j];
                if (u == cplx(0.0)) continue;
                const cplx *s = src + j * right;
                for (std::int64_t r = 0; r < right; ++r) row[r] += u * s[r];
            }
        }
    }
}

}  // namespace cvc::kernels
