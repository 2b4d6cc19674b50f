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


#include "cvc/algorithms.h"

#include <cmath>

#include "gtest/gtest.h"

#include "test_util.h"

using namespace cvc;
using test_util::max_abs_diff;

namespace {

std::vector<MacroOp> interferometer_ops(const Schedule &s) {
    std::vector<MacroOp> ops;
    for (const auto &st : s.steps) {
        if (st.note != "interferometer") continue;
        ops.insert(ops.end(), st.ops.begin(), st.ops.end());
    }
    return ops;
}

std::vector<MacroOp> gaussian_ops(const Schedule &s, const std::string &note) {
    std::vector<MacroOp> ops;
    for (const auto &st : s.steps) {
        if (st.note == note) ops.insert(ops.end(), st.ops.begin(), st.ops.end());
    }
    return ops;
}

CMat embed_u2(const U2Block &b, int n) {
    CMat E = CMat::Identity(n, n);
    E.block(b.mode, b.mode, 2, 2) = u2_matrix(b);
    return E;
}

}  // namespace

// ---------------------------------------------------------------------------
// GBS.

TEST(Gbs, HafnianOfAllOnes) {
    EXPECT_NEAR(std::abs(hafnian(CMat::Ones(4, 4)) - 3.0), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(hafnian(CMat::Ones(6, 6)) - 15.0), 0.0, 1e-12);
    EXPECT_EQ(hafnian(CMat::Ones(3, 3)), cplx(0.0));
}

TEST(Gbs, SingleModeMatchesSqueezedVacuum) {
    GbsInstance g;
    g.n_modes = 1;
    g.squeeze = {0.7};
    g.unitary = CMat::Identity(1, 1);
    double t = std::tanh(0.7), c = std::cosh(0.7);
    EXPECT_NEAR(gbs_probability(g, {0}), 1.0 / c, 1e-14);
    EXPECT_NEAR(gbs_probability(g, {2}), t * t / (2 * c), 1e-14);
    EXPECT_NEAR(gbs_probability(g, {4}), 3.0 * t * t * t * t / (8 * c), 1e-14);
    EXPECT_EQ(gbs_probability(g, {3}), 0.0);
}

TEST(Gbs, InterferometerDecompositionReconstructs) {
    for (int n : {2, 3, 4, 5}) {
        CMat U = random_unitary(n, 11 + n);
        Interferometer I = decompose_interferometer(U);
        CMat R = CMat::Zero(n, n);
        for (int i = 0; i < n; ++i) R(i, i) = std::polar(1.0, I.phases[i]);
        for (const auto &b : I.blocks) R = embed_u2(b, n) * R;
        EXPECT_LT(max_abs_diff(R, U), 1e-12) << n;
    }
    CMat swap(2, 2);
    swap << 0, 1, 1, 0;
    U2Block b = decompose_u2(swap, 0);
    EXPECT_LT(max_abs_diff(u2_matrix(b), swap), 1e-12);
}

TEST(Gbs, HafnianMatchesFockSimulation) {
    GbsInstance g = gbs_desk2();
    for (std::uint64_t seed : {3u, 5u, 9u}) {
        g.unitary = random_unitary(2, seed);
        int d = 24;
        Vec p = gbs_fock_distribution(g, d);
        for (int a = 0; a <= 4; ++a) {
            for (int b = 0; a + b <= 4; ++b) EXPECT_NEAR(gbs_probability(g, {a, b}), p(a * d + b), 1e-8) << a << b;
        }
    }
}

TEST(Gbs, CompiledInterferometerRealizesUnitary) {
    GbsInstance g = gbs_bundled4();
    Schedule s = gbs_compile(g);
    Mat S = macro_ops_symplectic(interferometer_ops(s), s.modes);
    EXPECT_LT(max_abs_diff(S, passive_matrix(g.unitary)), 1e-9);
}

TEST(Gbs, BundledScheduleMirrorsLayout) {
    Schedule s = gbs_compile(gbs_bundled4());
    validate_schedule(s);
    ASSERT_EQ(s.steps.size(), 29u);
    EXPECT_EQ(s.steps[1].action, "inject");
    EXPECT_EQ(s.steps[3].action, "inject");
    EXPECT_EQ(s.steps[4].action, "none");
    for (int i = 25; i < 29; ++i) {
        EXPECT_EQ(s.steps[i].t, i + 1);
        ASSERT_EQ(s.steps[i].readout.size(), 1u);
        EXPECT_EQ(s.steps[i].readout[0].measure, "pnr");
        EXPECT_EQ(s.steps[i].switch_bottom, "s3");
    }
}

TEST(Gbs, IdentityInterferometerCompilesToIdentity) {
    GbsInstance g = gbs_bundled4();
    g.unitary = CMat::Identity(4, 4);
    Schedule s = gbs_compile(g);
    Mat S = macro_ops_symplectic(interferometer_ops(s), s.modes);
    EXPECT_LT(max_abs_diff(S, Mat::Identity(8, 8)), 1e-12);
    std::vector<MacroOp> first = s.steps[5].ops;
    EXPECT_LT(max_abs_diff(macro_ops_symplectic(first, s.modes, 10.0), Mat::Identity(8, 8)), 1e-6);
}

TEST(Gbs, VacuumInputsGiveNoPhotons) {
    GbsInstance g = gbs_bundled4();
    g.squeeze = {0, 0, 0, 0};
    EXPECT_NEAR(gbs_probability(g, {0, 0, 0, 0}), 1.0, 1e-14);
    GbsRun r = gbs_run(g, gbs_compile(g), 200, 4);
    ASSERT_EQ(r.counts.size(), 1u);
    EXPECT_EQ(r.counts.begin()->first, (std::vector<int>{0, 0, 0, 0}));
}

TEST(Gbs, ScheduleSamplesMatchHafnian) {
    GbsInstance g = gbs_desk2();
    Schedule s = gbs_compile(g);
    GbsRun a = gbs_run(g, s, 10000, 1);
    EXPECT_LT(a.tv_distance, 0.05);
    GbsRun b = gbs_run(g, s, 10000, 1);
    EXPECT_EQ(a.counts, b.counts);
}

TEST(Gbs, FiniteSqueezingDrifts) {
    GbsInstance g = gbs_desk2();
    Schedule s = gbs_compile(g);
    s.model = SqueezingModel::Finite;
    s.squeeze_r = 1.0;
    GbsRun noisy = gbs_run(g, s, 2000, 2);
    GbsRun ideal = gbs_run(g, gbs_compile(g), 2000, 2);
    EXPECT_GT(noisy.tv_distance, ideal.tv_distance);
}

// ---------------------------------------------------------------------------
// IQP.

TEST(Iqp, RearrangeOrdersBlocks) {
    IqpCircuit c = iqp_rearrange(iqp_bundled());
    ASSERT_EQ(c.gates.size(), iqp_bundled().gates.size());
    int phase = 0;
    for (const auto &g : c.gates) {
        int r = g.kind == IqpGate::Kind::CZ ? 0 : g.kind == IqpGate::Kind::Z ? 2 : 1;
        EXPECT_GE(r, phase);
        phase = r;
    }
    IqpCircuit again = iqp_rearrange(c);
    for (std::size_t i = 0; i < c.gates.size(); ++i) {
        EXPECT_EQ(again.gates[i].modes, c.gates[i].modes);
        EXPECT_EQ(again.gates[i].param, c.gates[i].param);
    }
}

TEST(Iqp, NonCommutingGateRejected) {
    IqpCircuit c = iqp_bundled();
    c.gates.push_back({IqpGate::Kind::XShift, {0}, 0.1, 0});
    EXPECT_THROW(iqp_rearrange(c), Error);
}

TEST(Iqp, GatesCommuteInFockSpace) {
    IqpCircuit c = iqp_random(3, 8, 17);
    for (std::size_t i = 0; i < c.gates.size(); ++i) {
        for (std::size_t j = i + 1; j < c.gates.size(); ++j) {
            IqpCircuit ab{3, 0.5, {c.gates[i], c.gates[j]}}, ba{3, 0.5, {c.gates[j], c.gates[i]}};
            EXPECT_LT(max_abs_diff(iqp_unitary(ab, 10), iqp_unitary(ba, 10)), 1e-9) << i << " " << j;
        }
    }
}

TEST(Iqp, RearrangedUnitaryIsUnchanged) {
    IqpCircuit c = iqp_random(3, 12, 23);
    EXPECT_LT(max_abs_diff(iqp_unitary(c, 12), iqp_unitary(iqp_rearrange(c), 12)), 1e-9);
}

TEST(Iqp, ControlledZDecomposition) {
    for (double g : {1.0, -0.4}) {
        std::vector<MacroOp> ops;
        for (const auto &layer : layer_gates(cz_gates(0, 1, g), {"a", "b"})) ops.insert(ops.end(), layer.begin(), layer.end());
        EXPECT_LT(max_abs_diff(macro_ops_symplectic(ops, {"a", "b"}), cz_matrix(g)), 1e-10);
    }
}

TEST(Iqp, SingleControlledZAtFiniteSqueezing) {
    IqpCircuit c{2, 0.3, {{IqpGate::Kind::CZ, {0, 1}, 1.0, 0}}};
    Schedule s = iqp_compile(c);
    EXPECT_EQ(s.backend, Backend::Gaussian);
    std::vector<MacroOp> ops = gaussian_ops(s, "C_Z block");
    EXPECT_LT(max_abs_diff(macro_ops_symplectic(ops, s.modes, 10.0), cz_matrix(1.0)), 1e-4);
    for (auto &st : s.steps) st.feedforward = Feedforward::Deferred;
    EXPECT_NO_THROW(validate_schedule(s));
}

TEST(Iqp, BundledScheduleMirrorsLayout) {
    Schedule s = iqp_compile(iqp_bundled());
    validate_schedule(s);
    ASSERT_EQ(s.steps.size(), 39u);
    EXPECT_EQ(s.steps[26].action, "cubic");
    EXPECT_EQ(s.steps[28].action, "cubic");
    for (int i = 35; i < 39; ++i) EXPECT_EQ(s.steps[i].readout.size(), 1u);
    Schedule f2 = s;
    f2.steps[26].feedforward = Feedforward::Deferred;
    EXPECT_THROW(validate_schedule(f2), Error);
}

TEST(Iqp, BundledScheduleRuns) {
    Schedule s = iqp_compile(iqp_bundled());
    RunOptions opt;
    opt.seed = 5;
    register_operators(s, opt);
    ScheduleTrace tr = run_schedule(s, opt);
    ASSERT_EQ(tr.records.size(), 39u);
    EXPECT_LT(tr.handoff_leakage, 1e-4);
    for (int i = 35; i < 39; ++i) EXPECT_EQ(tr.records[i].readout.size(), 1u);
}

TEST(Iqp, HigherOrderGateBecomesOperatorStep) {
    IqpCircuit c{2, 0.3, {{IqpGate::Kind::XPhase, {1}, 0.02, 4}, {IqpGate::Kind::CZ, {0, 1}, 0.5, 0}}};
    Schedule s = iqp_compile(c);
    s.cutoff = 16;
    RunOptions opt;
    register_operators(s, opt);
    ASSERT_EQ(opt.operators.size(), 1u);
    EXPECT_NO_THROW(run_schedule(s, opt));
}

// ---------------------------------------------------------------------------
// Grover.

TEST(Grover, SymmetricRegionHasEvenExpansion) {
    GroverInstance g;
    g.N = 3;
    g.target = 1;
    Mat c = grover_expand(g);
    for (int k = 1; k <= g.m; k += 2) EXPECT_NEAR(c(k, 0), 0.0, 1e-12);
}

TEST(Grover, ExpansionRefines) {
    GroverInstance g;
    double prev = 1e9;
    for (int m : {5, 10, 20}) {
        g.m = m;
        double e = grover_l2_error(g, grover_expand(g));
        EXPECT_LT(e, prev) << m;
        prev = e;
    }
    g.n = 2;
    prev = 1e9;
    for (int m : {3, 5, 10}) {
        g.m = g.p = m;
        double e = grover_l2_error(g, grover_expand(g), 4.0, 161);
        EXPECT_LT(e, prev) << m;
        prev = e;
    }
}

TEST(Grover, OracleSquaresToIdentityOnGrid) {
    GroverInstance g;
    for (double x = -5; x <= 5; x += 0.01) EXPECT_LT(std::abs(std::pow(grover_oracle_phase(g, x), 2) - 1.0), 1e-10);
}

TEST(Grover, ExactOracleFlipsTargetPackets) {
    GroverInstance g;
    g.N = 2;
    g.target = 0;
    g.half_width = 4;
    g.cutoff = 80;
    CMat I = grover_inversion(g, true);
    for (double centre : {-2.0, 2.0}) {
        GaussianState packet = GaussianState::squeezed("m", 1.2).displace("m", centre, 0.0);
        CVec v = gaussian_to_fock(packet, g.cutoff).state.amps();
        cplx e = v.dot(I * v) / v.squaredNorm();
        EXPECT_NEAR(std::abs(e - (centre < 0 ? -1.0 : 1.0)), 0.0, 1e-6) << centre;
    }
}

TEST(Grover, CompoundOperatorIsUnitary) {
    GroverInstance g;
    for (bool exact : {true, false}) {
        CMat C = grover_compound(g, exact);
        CMat low = (C.adjoint() * C).topLeftCorner(20, 20);
        EXPECT_LT(max_abs_diff(low, CMat::Identity(20, 20)), 1e-8) << exact;
    }
}

TEST(Grover, ZeroIterationsSpreadOverRegions) {
    GroverInstance g;
    for (int t = 0; t < g.N; ++t) {
        g.target = t;
        double p = grover_run(g, 0, true).probability[0];
        EXPECT_GT(p, 0.5 / g.N);
        EXPECT_LT(p, 1.5 / g.N);
    }
}

TEST(Grover, ExactOracleAmplifiesTarget) {
    GroverInstance g;
    GroverTrace tr = grover_run(g, 4, true);
    double best = std::max(tr.probability[1], tr.probability[2]);
    EXPECT_GT(best, 2 * tr.probability[0]);
    EXPECT_GT(best, 0.5);
    for (double p : tr.probability) {
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 1.0);
    }
    GroverTrace ex = grover_run(g, 4, false);
    for (double p : ex.probability) {
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 1.0);
    }
}

TEST(Grover, LeakageAborts) {
    GroverInstance g;
    g.squeeze = 2.0;
    g.cutoff = 20;
    EXPECT_THROW(grover_run(g, 1, true), Error);
}

TEST(Grover, PrepFidelity) {
    GroverInstance g;
    g.m = 20;
    Mat c20 = grover_expand(g);
    EXPECT_NEAR(grover_prep_fidelity(c20, grover_prep_state(c20)), 1.0, 1e-12);
    g.m = 5;
    double f = grover_prep_fidelity(grover_expand(g), grover_prep_state(c20));
    EXPECT_LT(f, 1.0);
    EXPECT_GT(f, 0.0);
    double vac = grover_prep_fidelity(c20, FockState::vacuum({1}));
    EXPECT_LT(vac, 0.5);
}

TEST(Grover, TwoModeScheduleRuns) {
    Schedule s = grover_compile(grover_bundled2d());
    validate_schedule(s);
    ASSERT_EQ(s.steps.size(), 27u);
    RunOptions opt;
    opt.seed = 3;
    register_operators(s, opt);
    ScheduleTrace tr = run_schedule(s, opt);
    EXPECT_EQ(tr.records.size(), 27u);
    EXPECT_EQ(tr.records[25].readout.size(), 1u);
    EXPECT_EQ(tr.records[26].readout.size(), 1u);
}

TEST(Schedules, TableOneHasFourSteps) {
    Schedule s = table1_schedule();
    validate_schedule(s);
    EXPECT_EQ(s.steps.size(), 4u);
    RunOptions opt;
    opt.seed = 7;
    EXPECT_EQ(run_schedule(s, opt).records.size(), 4u);
}
