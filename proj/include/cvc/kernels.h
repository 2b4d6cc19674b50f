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

#ifndef CVC_KERNELS_H
#define CVC_KERNELS_H

#include <complex>
#include <cstdint>

namespace cvc::kernels {

using cplx = std::complex<double>;

// Hermite functions psi_k(x_j) for k < K, written to out[k * n + j].
void hermite_table_scalar(const double *x, int n, int K, double *out);
void hermite_table_avx2(const double *x, int n, int K, double *out);

// Wigner function of the pure state psi (length d) on the grid xs x ps,
// written row-major with p as the outer index: out[ip * nx + ix].
void wigner_grid_scalar(const cplx *psi, int d, const double *xs, int nx, const double *ps, int np, double *out);
void wigner_grid_avx2(const cplx *psi, int d, const double *xs, int nx, const double *ps, int np, double *out);

// out[l, i, r] = sum_j U[i, j] in[l, j, r] for a tensor of shape (left, d_in, right);
// U is row-major d_out x d_in.
void apply_axis_scalar(const cplx *U, int d_out, int d_in, const cplx *in, cplx *out, std::int64_t left,
                       std::int64_t right);
void apply_axis_avx2(const cplx *U, int d_out, int d_in, const cplx *in, cplx *out, std::int64_t left,
                     std::int64_t right);

bool avx2_available();
// True when the dispatched entry points below run the AVX2 variants.
bool simd_active();

void hermite_table(const double *x, int n, int K, double *out);
void wigner_grid(const cplx *psi, int d, const double *xs, int nx, const double *ps, int np, double *out);
void apply_axis(const cplx *U, int d_out, int d_in, const cplx *in, cplx *out, std::int64_t left,
                std::int64_t right);

}  // namespace cvc::kernels

#endif
