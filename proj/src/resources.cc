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

#include "cvc/gaussian.h"

namespace cvc {

namespace {

double log_factorial(int n) { return std::lgamma(n + 1.0); }

double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    return std::exp(log_factorial(n) - log_factorial(k) - log_factorial(n - k));
}

FockState on_state(const OnSpec &s, int d) {
    if (s.N < 1 || s.N >= d) throw validation_error("ON state order must be in [1, cutoff)");
    CVec c = CVec::Zero(d);
    c(0) = 1.0;
    c(s.N) = s.a;
    FockState out = FockState::single(c / std::sqrt(1.0 + std::norm(s.a)));
    return out;
}

FockState gkp_state(const GkpSpec &s, int d) {
    if (s.m < 0) throw validation_error("GKP heralding outcome must be nonnegative");
    // Simulated at a wider internal cutoff, then truncated to d.
    int D = std::max(2 * d, 60);
    auto g = GaussianState::vacuum({"h", "k"})
                 .apply(SymplecticGate::squeeze("h", s.r))
                 .apply(SymplecticGate::squeeze("k", -s.r))
                 .apply(SymplecticGate::beamsplit("h", "k", kPi / 4))
                 .displace("h", 0.0, s.w);
    auto pair = gaussian_to_fock(g, D);
    if (pair.leakage > 1e-8) throw numeric_error("GKP preparation leaks beyond the internal cutoff");
    if (s.m >= D) throw validation_error("GKP heralding outcome exceeds the internal cutoff");
    auto herald = pnr_project(pair.state, 0, s.m);
    if (herald.probability < 1e-12) throw numeric_error("GKP heralding outcome is improbable (p < 1e-12)");
    FockState wide = apply_op(herald.state, squeeze_op(gkp_conditional_squeeze(s.m), 0.0, D), 0);
    FockState out = FockState::single(wide.amps().head(d));
    out.normalize();
    out.set_weight(herald.probability);
    return out;
}

FockState mff_state(const MffSpec &s, int d) {
    if (d < 4) throw validation_error("MFF state needs cutoff >= 4");
    Ladder L = ladder_matrices(d);
    CVec v = CVec::Zero(d);
    v(0) = 1.0;
    CVec c = v + cplx(0.0, s.gamma) * (L.x * (L.x * (L.x * v)));
    FockState out = apply_op(FockState::single(c), squeeze_op(s.squeeze, 0.0, d), 0);
    out.normalize();
    out.set_weight(1.0);
    return out;
}

FockState gaussopt_state(const GaussOptSpec &s, int d) {
    if (d < 4) throw validation_error("Gaussian-optimised state needs cutoff >= 4");
    CVec c = CVec::Zero(d);
    for (int i = 0; i < 4; ++i) c(i) = s.c[i];
    if (c.norm() == 0.0) throw validation_error("Gaussian-optimised coefficients are all zero");
    CMat U = displacement_op(s.alpha, d) * squeeze_op(s.squeeze, 0.0, d);
    FockState out = apply_op(FockState::single(c), U, 0);
    out.normalize();
    out.set_weight(1.0);
    return out;
}

FockState cubic_approx_state(const CubicApproxSpec &s, int d) {
    // Position representation, projected onto Hermite functions.
    const int n = 4001;
    double width = std::exp(s.squeeze);
    double half = std::max(12.0, 8.0 * width);
    Vec x = Vec::LinSpaced(n, -half, half);
    double dx = x(1) - x(0);
    CVec f(n);
    for (int i = 0; i < n; ++i) {
        double xi = x(i);
        f(i) = std::exp(cplx(-0.5 * xi * xi / (width * width), s.gamma * xi * xi * xi / 3));
    }
    Mat H = hermite_functions(x, d);
    FockState out = FockState::single(H.cast<cplx>() * f * dx);
    out.normalize();
    out.set_weight(1.0);
    return out;
}

}  // namespace

cplx on_default_a(double gamma) { return cplx(0.0, -gamma * std::sqrt(3.0) / 2); }

double gkp_conditional_squeeze(int m) { return -0.25 * std::log(2.0 * m + 1.0); }

FockState build_resource(const ResourceSpec &spec) {
    int d = spec.cutoff;
    if (d < 2) throw validation_error("resource cutoff must be at least 2");
    return std::visit(
        [d](const auto &s) -> FockState {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, OnSpec>) return on_state(s, d);
            if constexpr (std::is_same_v<T, GkpSpec>) return gkp_state(s, d);
            if constexpr (std::is_same_v<T, MffSpec>) return mff_state(s, d);
            if constexpr (std::is_same_v<T, GaussOptSpec>) return gaussopt_state(s, d);
            if constexpr (std::is_same_v<T, CubicApproxSpec>) return cubic_approx_state(s, d);
        },
        spec.kind);
}

OnEffectiveOperator on_effective_operator(double gamma, double kappa) {
    cplx a = on_default_a(gamma);
    double ca = 1.0 / std::sqrt(1.0 + std::norm(a));
    double norm = std::pow(kPi, -0.25);
    OnEffectiveOperator op;
    op.z_shift = 3 * gamma * (kappa * kappa - 0.5);
    op.shear = -3 * gamma * kappa;
    op.lhs = [=](double x) {
        double y = kappa - x;
        double psi0 = norm * std::exp(-0.5 * y * y);
        double psi3 = psi0 * (2 * y * y * y - 3 * y) / std::sqrt(3.0);
        return ca * (psi0 + a * psi3);
    };
    double zs = op.z_shift, sh = op.shear;
    op.rhs = [=](double x) {
        double y = kappa - x;
        double phase = zs * x + sh * x * x / 2 + gamma * x * x * x / 3;
        return std::exp(-0.5 * y * y) * std::polar(1.0, phase);
    };
    return op;
}

NlqStats nlq_stats(const FockState &state, double gamma) {
    if (state.modes() != 1) throw validation_error("NLQ statistics need a single-mode state");
    int d = state.dim(0);
    int pad = d + 6;
    Ladder L = ladder_matrices(pad);
    CMat O = L.p * L.p - 3 * gamma * L.x * L.x;
    CVec v = CVec::Zero(pad);
    v.head(d) = state.amps() / std::sqrt(state.norm2());
    CVec Ov = O * v;
    double mean = std::real(v.dot(Ov));
    double second = Ov.squaredNorm();
    return {mean, second - mean * mean};
}

PnrResult pnr_output(const FockState &input, const PnrParams &p) {
    if (input.modes() != 1) throw validation_error("PNR channel input must be single-mode");
    int d = input.dim(0);
    int K = p.k1 + p.k2;
    if (p.k1 < 0 || p.k2 < 0 || K >= d) throw validation_error("PNR outcomes need k1 + k2 < cutoff");
    const CVec &psi = input.amps();
    double t = std::tanh(p.r);
    CVec out = CVec::Zero(d);
    for (int n = 0; n <= K; ++n) {
        int k = K - n;
        // Coefficient <k1, k2| B(pi/4) |k, n>.
        double sum = 0.0;
        for (int r = std::max(0, p.k2 - n); r <= std::min(k, p.k2); ++r) {
            double sgn = ((n - p.k2 + r) % 2) ? -1.0 : 1.0;
            sum += sgn * binom(k, r) * binom(n, p.k2 - r);
        }
        double pref = std::exp(0.5 * (log_factorial(p.k1) + log_factorial(p.k2) - log_factorial(k) - log_factorial(n)) -
                               0.5 * K * std::log(2.0));
        out(n) = std::pow(t, n) * pref * sum * psi(k);
    }
    out /= std::cosh(p.r);
    double prob = out.squaredNorm() / input.norm2();
    if (prob < 1e-300) throw numeric_error("PNR outcome is impossible for this input");
    FockState s = FockState::single(out);
    s.normalize();
    s.set_weight(prob);
    return {s, prob};
}

namespace {

// Joint (input, arm, output) state after the TMSS and B(pi/4) on (input, arm).
FockState pnr_joint_state(const FockState &input, double r) {
    int d = input.dim(0);
    double t = std::tanh(r);
    CVec amps = CVec::Zero(static_cast<long>(d) * d * d);
    for (int k = 0; k < d; ++k) {
        for (int n = 0; n < d; ++n) amps((static_cast<long>(k) * d + n) * d + n) = input.amps()(k) * std::pow(t, n) / std::cosh(r);
    }
    FockState joint({d, d, d}, amps);
    return apply_two_mode_op(joint, beamsplitter_op(kPi / 4, d), 0, 1);
}

}  // namespace

PnrResult pnr_oracle(const FockState &input, const PnrParams &p) {
    if (input.modes() != 1) throw validation_error("PNR channel input must be single-mode");
    int d = input.dim(0);
    if (p.k1 < 0 || p.k2 < 0 || p.k1 + p.k2 >= d) throw validation_error("PNR outcomes need k1 + k2 < cutoff");
    FockState joint = pnr_joint_state(input, p.r);
    double total = joint.norm2();
    auto c1 = pnr_project(joint, 0, p.k1);
    auto c2 = pnr_project(c1.state, 0, p.k2);
    double prob = c1.probability * c2.probability * total / input.norm2();
    if (prob < 1e-300) throw numeric_error("PNR outcome is impossible for this input");
    c2.state.set_weight(prob);
    return {c2.state, prob};
}

PnrTable pnr_probability_table(const FockState &input, double r, int max_n) {
    if (input.modes() != 1) throw validation_error("PNR channel input must be single-mode");
    int d = input.dim(0);
    if (max_n < 0 || max_n >= d) throw validation_error("table size must be below the cutoff");
    FockState joint = pnr_joint_state(input, r);
    double n0 = input.norm2();
    PnrTable t{Mat::Zero(max_n + 1, max_n + 1), 0.0};
    const CVec &a = joint.amps();
    for (int n1 = 0; n1 <= max_n; ++n1) {
        for (int n2 = 0; n2 <= max_n; ++n2) {
            t.P(n1, n2) = a.segment((static_cast<long>(n1) * d + n2) * d, d).squaredNorm() / n0;
        }
    }
    t.remainder = std::max(0.0, 1.0 - t.P.sum());
    return t;
}

}  // namespace cvc
