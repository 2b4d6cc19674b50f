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

#include "cvc/kernels.h"

#include <cmath>
#include <random>
#include <vector>

#include "gtest/gtest.h"

using namespace cvc::kernels;

namespace {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

}  // namespace

TEST(Kernels, hermite_low_orders) {
    std::vector<double> x = {-1.3, 0.0, 0.7};
    std::vector<double> out(3 * 3);
    hermite_table_scalar(x.data(), 3, 3, out.data());
    double c = std::pow(M_PI, -0.25);
    for (int j = 0; j < 3; ++j) {
        double e = std::exp(-x[j] * x[j] / 2);
        EXPECT_NEAR(out[j], c * e, 1e-15);
        EXPECT_NEAR(out[3 + j], c * std::sqrt(2.0) * x[j] * e, 1e-15);
        EXPECT_NEAR(out[6 + j], c * (2 * x[j] * x[j] - 1) / std::sqrt(2.0) * e, 1e-14);
    }
}

TEST(Kernels, hermite_high_order_no_overflow) {
    std::vector<double> x = linspace(-40, 40, 81);
    std::vector<double> out(201 * 81);
    hermite_table_scalar(x.data(), 81, 201, out.data());
    for (double v : out) EXPECT_TRUE(std::isfinite(v));
}

TEST(Kernels, hermite_simd_equivalence) {
    if (!avx2_available()) GTEST_SKIP();
    for (int n : {1, 3, 4, 7, 101}) {
        std::vector<double> x = linspace(-12, 12, n > 1 ? n : 2);
        x.resize(n);
        std::vector<double> a(120 * n), b(120 * n);
        hermite_table_scalar(x.data(), n, 120, a.data());
        hermite_table_avx2(x.data(), n, 120, b.data());
        for (size_t i = 0; i < a.size(); ++i) ASSERT_NEAR(a[i], b[i], 1e-13) << i;
    }
}

TEST(Kernels, wigner_simd_equivalence) {
    if (!avx2_available()) GTEST_SKIP();
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    std::vector<cplx> psi(25);
    for (auto &c : psi) c = cplx(g(rng), g(rng));
    std::vector<double> xs = linspace(-4, 4, 23), ps = linspace(-3, 3, 9);
    std::vector<double> a(23 * 9), b(23 * 9);
    wigner_grid_scalar(psi.data(), 25, xs.data(), 23, ps.data(), 9, a.data());
    wigner_grid_avx2(psi.data(), 25, xs.data(), 23, ps.data(), 9, b.data());
    for (size_t i = 0; i < a.size(); ++i) ASSERT_NEAR(a[i], b[i], 1e-11) << i;
}

TEST(Kernels, apply_axis_simd_equivalence) {
    if (!avx2_available()) GTEST_SKIP();
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    for (auto [left, d, right] : {std::tuple{1L, 7, 1L}, {3L, 12, 5L}, {2L, 5, 12L}, {12L, 12, 1L}}) {
        std::vector<cplx> U(d * d), in(left * d * right), a(in.size()), b(in.size());
        for (auto &c : U) c = cplx(g(rng), g(rng));
        for (auto &c : in) c = cplx(g(rng), g(rng));
        apply_axis_scalar(U.data(), d, d, in.data(), a.data(), left, right);
        apply_axis_avx2(U.data(), d, d, in.data(), b.data(), left, right);
        for (size_t i = 0; i < a.size(); ++i) ASSERT_LT(std::abs(a[i] - b[i]), 1e-12) << i;
    }
}

TEST(Kernels, dispatch_reports_state) {
    if (!avx2_available()) EXPECT_FALSE(simd_active());
}
