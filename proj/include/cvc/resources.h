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

#ifndef CVC_RESOURCES_H
#define CVC_RESOURCES_H

#include <array>
#include <functional>
#include <variant>

#include "cvc/common.h"
#include "cvc/fock.h"

namespace cvc {

// (|0> + a|N>) / sqrt(1 + |a|^2).
struct OnSpec {
    int N = 3;
    cplx a = 0.0;
};
// Two-mode squeezed pair from S(r) and S(-r), Z(w) on the heralding arm,
// PNR outcome m, then S(s(m)) on the kept arm.
struct GkpSpec {
    double r = 1.0;
    double w = 2.0;
    int m = 3;
};
// S(squeeze) (1 + i gamma x^3) |0>.
struct MffSpec {
    double gamma = 0.0;
    double squeeze = 0.0;
};
// D(alpha) S(squeeze) sum_i c_i |i>.
struct GaussOptSpec {
    std::array<cplx, 4> c{1.0, 0.0, 0.0, 0.0};
    double squeeze = 0.0;
    cplx alpha = 0.0;
};
// V(gamma) S(-squeeze) |0>, a finitely squeezed cubic phase state.
struct CubicApproxSpec {
    double gamma = 0.0;
    double squeeze = 1.0;
};

struct ResourceSpec {
    std::variant<OnSpec, GkpSpec, MffSpec, GaussOptSpec, CubicApproxSpec> kind;
    int cutoff = 30;
};

// Normalized resource; GKP states carry their heralding probability as weight.
FockState build_resource(const ResourceSpec &spec);
cplx on_default_a(double gamma);
// Squeeze applied after a GKP heralding outcome m.
double gkp_conditional_squeeze(int m);

// phi_r(kappa - x) for the |03> state and the factored form
// A_kappa Z(3 gamma (kappa^2 - 1/2)) P(-3 gamma kappa) V(gamma), both as
// position-diagonal functions.
struct OnEffectiveOperator {
    std::function<cplx(double)> lhs;
    std::function<cplx(double)> rhs;
    double z_shift;
    double shear;
};
OnEffectiveOperator on_effective_operator(double gamma, double kappa);

struct NlqStats {
    double mean;
    double variance;
};
// p_NLQ = p^2 - 3 gamma x^2.
NlqStats nlq_stats(const FockState &state, double gamma);

struct PnrParams {
    int k1 = 0;
    int k2 = 0;
    double r = 0.0;
};
struct PnrResult {
    FockState state;
    double probability;
};
// Closed-form output of the PNR-heralded channel.
PnrResult pnr_output(const FockState &input, const PnrParams &params);
// Brute-force oracle: TMSS tensor, B(pi/4) on (input, arm), two PNR projections.
PnrResult pnr_oracle(const FockState &input, const PnrParams &params);

struct PnrTable {
    Mat P;  // P(n1, n2)
    double remainder;
};
PnrTable pnr_probability_table(const FockState &input, double r, int max_n);

}  // namespace cvc

#endif
