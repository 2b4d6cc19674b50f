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

#include "cvc/gaussian.h"

#include <cmath>

#include "gtest/gtest.h"

#include "test_util.h"

using namespace cvc;

namespace {

bool is_symplectic(const Mat &S, double tol) {
    Mat O = symplectic_form(static_cast<int>(S.rows()) / 2);
    return (S * O * S.transpose() - O).cwiseAbs().maxCoeff() < tol;
}

}  // namespace

TEST(GaussianState, vacuum_is_rotation_invariant) {
    auto v = GaussianState::vacuum({"a"});
    auto r = v.apply(SymplecticGate::rotate("a", kPi / 2));
    EXPECT_LT(test_util::max_abs_diff(r.cov(), v.cov()), 1e-15);
    EXPECT_LT(test_util::max_abs_diff(v.cov(), Mat(0.5 * Mat::Identity(2, 2))), 1e-15);
}

TEST(GaussianState, squeeze_convention) {
    auto s = GaussianState::vacuum({"a"}).apply(SymplecticGate::squeeze("a", 0.5));
    EXPECT_NEAR(s.cov()(0, 0), std::exp(-1.0) / 2, 1e-14);
    EXPECT_NEAR(s.cov()(1, 1), std::exp(1.0) / 2, 1e-14);
}

TEST(GaussianState, tmss_from_two_squeezers) {
    // B(-pi/4) in this library's sign convention correlates x1 with x2.
    double r = 0.8;
    auto s = GaussianState::vacuum({"a", "b"})
                 .apply(SymplecticGate::squeeze("a", r))
                 .apply(SymplecticGate::squeeze("b", -r))
                 .apply(SymplecticGate::beamsplit("a", "b", -kPi / 4));
    const Mat &V = s.cov();
    double var_xm = V(0, 0) + V(2, 2) - 2 * V(0, 2);
    double var_pp = V(1, 1) + V(3, 3) + 2 * V(1, 3);
    EXPECT_NEAR(var_xm, std::exp(-2 * r), 1e-12);
    EXPECT_NEAR(var_pp, std::exp(-2 * r), 1e-12);
    EXPECT_NEAR(s.purity_det(), 1.0, 1e-9);
}

TEST(GaussianState, unknown_label_is_named) {
    auto v = GaussianState::vacuum({"a"});
    try {
        v.apply(SymplecticGate::rotate("zz", 1.0));
        FAIL();
    } catch (const Error &e) {
        EXPECT_NE(std::string(e.what()).find("zz"), std::string::npos);
    }
}

TEST(GaussianState, gates_are_symplectic) {
    std::vector<Mat> ms = {rotation_matrix(0.3), squeeze_matrix(0.7, 0.4), shear_matrix(1.3),
                           beamsplitter_matrix(0.9), cz_matrix(0.6)};
    CMat U(2, 2);
    U << cplx(0.6, 0.0), cplx(0.0, 0.8), cplx(0.0, 0.8), cplx(0.6, 0.0);
    ms.push_back(passive_matrix(U));
    Mat total = Mat::Identity(4, 4);
    for (const auto &m : ms) {
        EXPECT_TRUE(is_symplectic(m, 1e-10));
        if (m.rows() == 4) total = m * total;
    }
    EXPECT_TRUE(is_symplectic(total, 1e-9));
}

TEST(GaussianState, purity_preserved) {
    auto s = GaussianState::vacuum({"a", "b", "c"})
                 .apply(SymplecticGate::squeeze("a", 1.1, 0.3))
                 .apply(SymplecticGate::beamsplit("a", "c", 0.4))
                 .apply(SymplecticGate::cz("b", "c", 0.8))
                 .apply(SymplecticGate::shear("b", -0.5))
                 .apply(SymplecticGate::displace("c", cplx(0.3, -1.0)));
    s.check();
    EXPECT_NEAR(s.purity_det(), 1.0, 1e-9);
}

TEST(GaussianState, displacement_moves_mean) {
    auto s = GaussianState::vacuum({"a"}).apply(SymplecticGate::displace("a", cplx(0.5, -0.25)));
    EXPECT_NEAR(s.mean()(0), kSqrt2 * 0.5, 1e-15);
    EXPECT_NEAR(s.mean()(1), -kSqrt2 * 0.25, 1e-15);
}

TEST(Homodyne, product_state_untouched) {
    auto s = GaussianState::vacuum({"a", "b"}).apply(SymplecticGate::squeeze("b", 0.4));
    auto c = homodyne_condition(s, "a", kPi / 2, 0.0);
    EXPECT_NEAR(c.density, 1.0 / std::sqrt(kPi), 1e-14);
    EXPECT_EQ(c.state.n(), 1);
    EXPECT_LT(test_util::max_abs_diff(c.state.cov(), s.reduced({"b"}).cov()), 1e-15);
}

TEST(Homodyne, tmss_conditional_mean) {
    double r = 10;
    auto s = GaussianState::vacuum({"a", "b"})
                 .apply(SymplecticGate::squeeze("a", r))
                 .apply(SymplecticGate::squeeze("b", -r))
                 .apply(SymplecticGate::beamsplit("a", "b", -kPi / 4));
    auto c = homodyne_condition(s, "a", kPi / 2, 1.0);
    EXPECT_LT(std::abs(c.state.mean()(0) - 1.0), 1e-6);
}

TEST(Homodyne, density_integrates_to_one) {
    auto s = GaussianState::vacuum({"a", "b"})
                 .apply(SymplecticGate::squeeze("a", 0.6, 0.2))
                 .apply(SymplecticGate::displace("a", cplx(0.4, 0.1)))
                 .apply(SymplecticGate::beamsplit("a", "b", 0.5));
    double h = 0.01, acc = 0.0;
    for (int i = 0; i <= 2000; ++i) {
        double m = -10 + i * h;
        double w = (i == 0 || i == 2000) ? 0.5 : 1.0;
        acc += w * homodyne_condition(s, "a", 0.7, m).density;
    }
    EXPECT_NEAR(acc * h, 1.0, 1e-4);
}

TEST(Homodyne, outcome_independent_for_product_inputs) {
    auto s = GaussianState::vacuum({"a", "b"}).apply(SymplecticGate::squeeze("b", 0.3));
    auto c1 = homodyne_condition(s, "a", 0.0, 0.3);
    auto c2 = homodyne_condition(c1.state, "b", kPi / 2, -0.2);
    auto d1 = homodyne_condition(s, "a", 0.0, -1.7);
    auto d2 = homodyne_condition(d1.state, "b", kPi / 2, 0.9);
    EXPECT_EQ(c2.state.n(), 0);
    EXPECT_EQ(d2.state.n(), 0);
}

TEST(Homodyne, sampling_is_deterministic) {
    auto v = GaussianState::vacuum({"a"});
    EXPECT_EQ(homodyne_sample(v, "a", 0.0, 42).outcome, homodyne_sample(v, "a", 0.0, 42).outcome);
}

TEST(Homodyne, sample_variances) {
    std::mt19937_64 rng(5);
    for (double r : {0.0, 1.0}) {
        auto s = GaussianState::squeezed("a", r);
        const int n = 100000;
        double s1 = 0, s2 = 0;
        for (int i = 0; i < n; ++i) {
            double m = homodyne_sample(s, "a", kPi / 2, rng).outcome;
            s1 += m;
            s2 += m * m;
        }
        double var = s2 / n - (s1 / n) * (s1 / n);
        double expect = std::exp(-2 * r) / 2;
        EXPECT_LT(std::abs(var - expect), 3 * expect * std::sqrt(2.0 / n));
    }
}

TEST(Oracle, identity_wire) {
    OracleCircuit c{{"in"}, {}, {}, {"in"}};
    EXPECT_LT(test_util::max_abs_diff(extract_implemented_symplectic(c), Mat(Mat::Identity(2, 2))), 1e-15);
}

TEST(Oracle, bare_gate_is_exact) {
    OracleCircuit c{{"a", "b"}, {}, {}, {"a", "b"}};
    c.ops.push_back(SymplecticGate::squeeze("a", 0.7, 0.2));
    c.ops.push_back(SymplecticGate::beamsplit("a", "b", 0.3));
    Mat expect = beamsplitter_matrix(0.3) * embed(squeeze_matrix(0.7, 0.2), {0}, 2);
    EXPECT_LT(test_util::max_abs_diff(extract_implemented_symplectic(c), expect), 1e-12);
}

TEST(Oracle, gate_on_measured_mode_rejected) {
    OracleCircuit c{{"a"}, {"b"}, {}, {"a"}};
    c.ops.push_back(OracleMeasure{"b", 0.0});
    c.ops.push_back(SymplecticGate::rotate("b", 0.1));
    EXPECT_THROW(extract_implemented_map(c), Error);
}
