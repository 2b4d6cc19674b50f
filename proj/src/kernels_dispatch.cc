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

#include <cstdlib>
#include <cstring>

#include "cvc/kernels.h"

namespace cvc::kernels {

bool avx2_available() {
#if defined(__x86_64__) || defined(__i386__)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

bool simd_active() {
    static const bool active = [] {
        const char *env = std::getenv("CVC_FORCE_SCALAR");
        if (env != nullptr && std::strcmp(env, "0") != 0) return false;
        return avx2_available();
    }();
    return active;
}

void hermite_table(const double *x, int n, int K, double *out) {
    if (simd_active()) {
        hermite_table_avx2(x, n, K, out);
    } else {
        hermite_table_scalar(x, n, K, out);
    }
}

void wigner_grid(const cplx *psi, int d, const double *xs, int nx, const double *ps, int np, double *out) {
    if (simd_active()) {
        wigner_grid_avx2(psi, d, xs, nx, ps, np, out);
    } else {
        wigner_grid_scalar(psi, d, xs, nx, ps, np, out);
    }
}

void apply_axis(const cplx *U, int d_out, int d_in, const cplx *in, cplx *out, std::int64_t left,
                std::int64_t right) {
    if (simd_active()) {
        apply_axis_avx2(U, d_out, d_in, in, out, left, right);
    } else {
        apply_axis_scalar(U, d_out, d_in, in, out, left, right);
    }
}

}  // namespace cvc::kernels
