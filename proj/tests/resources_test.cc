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


#include "cvc/resources.h"

#include <cmath>

#include "gtest/gtest.h"

#include "test_util.h"

using namespace cvc;

namespace {

FockState squeezed_displaced_input(int d) {
    FockState s = apply_op(squeezed_state(0.5, 0.0, d), displacement_op(cplx(0.02, 0.84), d), 0);
    s.normalize();
    return s;
}

}  // namespace

TEST(Resources, on_state_amplitudes) {
    ResourceSpec spec{OnSpec{3, on_default_a(0.1)}, 10};
    FockState s = build_resource(spec);
    double n = std::sqrt(1.0 + 0.0075);
    EXPECT_NEAR(std::abs(s.amps()(0) - 1.0 / n), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(s.amps()(3) - cplx(0.0, -0.0866025403784) / n), 0.0, 1e-12);
    EXPECT_EQ(s.amps()(1), cplx(0.0));
    EXPECT_EQ(s.amps()(2), cplx(0.0));
}

TEST(Resources, mff_trivial_is_vacuum) {
    FockState s = build_resource({MffSpec{0.0, 0.0}, 12});
    EXPECT_NEAR(std::abs(s.amps()(0)), 1.0, 1e-12);
    EXPECT_NEAR(s.norm2(), 1.0, 1e-12);
}

TEST(Resources, gkp_exists_and_is_stable) {
    FockState a = build_resource({GkpSpec{1.0, 2.0, 3}, 30});
    FockState b = build_resource({GkpSpec{1.0, 2.0, 3}, 60});
    EXPECT_GT(a.weight(), 1e-12);
    EXPECT_NEAR(a.weight(), b.weight(), 1e-6);
    EXPECT_NEAR(a.norm2(), 1.0, 1e-10);
    EXPECT_LT((a.amps() - b.amps().head(30)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Resources, gkp_improbable_outcome_is_an_error) {
    EXPECT_THROW(build_resource({GkpSpec{0.01, 0.0, 9}, 30}), Error);
}

TEST(Resources, all_kinds_normalized_and_stable) {
    std::vector<ResourceSpec> specs = {
        {OnSpec{3, on_default_a(0.2)}, 20},
        {MffSpec{0.1, 0.3}, 20},
        {GaussOptSpec{{1.0, cplx(0.0, 0.2), 0.1, cplx(0.0, -0.1)}, 0.2, cplx(0.1, 0.0)}, 20},
        {CubicApproxSpec{0.05, 0.5}, 20},
    };
    for (auto spec : specs) {
        FockState a = build_resource(spec);
        spec.cutoff = 40;
        FockState b = build_resource(spec);
        EXPECT_NEAR(a.norm2(), 1.0, 1e-10);
        EXPECT_NEAR(b.norm2(), 1.0, 1e-10);
        EXPECT_LT((a.amps() - b.amps().head(20)).cwiseAbs().maxCoeff(), 1e-6);
    }
}

TEST(Resources, cubic_approx_matches_gate_on_squeezed_vacuum) {
    int d = 40;
    FockState s = build_resource({CubicApproxSpec{0.05, 0.4}, d});
    FockState ref = apply_op(squeezed_state(-0.4, 0.0, d), cubic_op(0.05, d), 0);
    ref.normalize();
    EXPECT_GT(fidelity(s, ref), 1 - 1e-8);
}

TEST(OnOperator, gaussian_limit) {
    auto op = on_effective_operator(0.0, 0.7);
    for (double x = -5; x <= 5; x += 0.5) {
        cplx ratio = op.lhs(x) / op.rhs(x);
        EXPECT_NEAR(std::abs(ratio - op.lhs(0.0) / op.rhs(0.0)), 0.0, 1e-12);
    }
}

TEST(OnOperator, parameters_at_zero_kappa) {
    auto op = on_effective_operator(0.1, 0.0);
    EXPECT_NEAR(op.z_shift, -3 * 0.1 / 2, 1e-15);
    EXPECT_EQ(op.shear, 0.0);
}

TEST(Nlq, vacuum_values) {
    FockState v = FockState::vacuum({10});
    EXPECT_NEAR(nlq_stats(v, 0.0).mean, 0.5, 1e-12);
    EXPECT_NEAR(nlq_stats(v, 0.0).variance, 0.5, 1e-12);
    EXPECT_NEAR(nlq_stats(v, 1.0).mean, (1 - 3.0) / 2, 1e-12);
}

TEST(Nlq, optimised_candidate_beats_vacuum) {
    double g = 0.1;
    FockState vac = FockState::vacuum({20});
    double best = nlq_stats(vac, g).variance;
    FockState cand = build_resource({GaussOptSpec{{1.0, 0.0, 0.0, 0.0}, -0.35, 0.0}, 20});
    EXPECT_LT(nlq_stats(cand, g).variance, best);
}

TEST(Pnr, vacuum_zero_outcomes) {
    FockState v = FockState::vacuum({10});
    auto out = pnr_output(v, {0, 0, 0.68});
    EXPECT_NEAR(std::abs(out.state.amps()(0)), 1.0, 1e-12);
    EXPECT_NEAR(out.probability, 1.0 / std::pow(std::cosh(0.68), 2), 1e-12);
}

TEST(Pnr, closed_form_matches_oracle_coherent) {
    FockState in = coherent_state(cplx(0.02, 0.84), 30);
    auto a = pnr_output(in, {4, 1, 0.68});
    auto b = pnr_oracle(in, {4, 1, 0.68});
    EXPECT_LT((a.state.amps() - b.state.amps()).norm(), 1e-8);
    EXPECT_NEAR(a.probability, b.probability, 1e-10);
}

TEST(Pnr, closed_form_matches_oracle_random) {
    auto rng = test_util::independent_rng();
    int d = 16;
    for (int trial = 0; trial < 2; ++trial) {
        FockState in = FockState::single(test_util::random_state(d, 8, rng));
        for (int k1 = 0; k1 <= 4; ++k1) {
            for (int k2 = 0; k1 + k2 <= 4; ++k2) {
                auto a = pnr_output(in, {k1, k2, 0.5});
                auto b = pnr_oracle(in, {k1, k2, 0.5});
                EXPECT_LT((a.state.amps() - b.state.amps()).norm(), 1e-8);
                EXPECT_NEAR(a.probability, b.probability, 1e-10);
            }
        }
    }
}

TEST(Pnr, outcome_bound_rejected) {
    EXPECT_THROW(pnr_output(FockState::vacuum({5}), {3, 2, 0.5}), Error);
}

TEST(Pnr, table_complete_and_vacuum_structure) {
    FockState v = FockState::vacuum({20});
    double r = 0.4;
    auto t = pnr_probability_table(v, r, 8);
    double rem = t.remainder;
    EXPECT_GE(t.P.sum() + rem, 1 - 1e-6);
    EXPECT_LE(t.P.sum() + rem, 1 + 1e-12);
    // Arm photons n split binomially over both detectors with amplitude 2^{-n/2}.
    double c = std::pow(std::cosh(r), -2), th = std::tanh(r);
    for (int n1 = 0; n1 <= 4; ++n1) {
        for (int n2 = 0; n2 <= 4; ++n2) {
            int n = n1 + n2;
            double expect = c * std::pow(th, 2 * n) * std::exp(std::lgamma(n + 1.0) - std::lgamma(n1 + 1.0) -
                                                                std::lgamma(n2 + 1.0)) /
                            std::pow(2.0, n);
            EXPECT_NEAR(t.P(n1, n2), expect, 1e-12);
        }
    }
}

TEST(Pnr, squeezed_input_favours_balanced_outcomes) {
    auto t = pnr_probability_table(squeezed_displaced_input(30), 0.68, 6);
    EXPECT_GT(t.P(2, 2), t.P(3, 1));
}

TEST(Pnr, heralded_output_is_nonclassical) {
    auto out = pnr_output(squeezed_displaced_input(30), {3, 2, 0.68});
    auto w = wigner(out.state);
    EXPECT_LT(w.min(), -0.01);
}
