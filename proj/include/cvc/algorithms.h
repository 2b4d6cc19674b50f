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

#ifndef CVC_ALGORITHMS_H
#define CVC_ALGORITHMS_H

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cvc/cluster.h"
#include "cvc/common.h"
#include "cvc/fock.h"

namespace cvc {

// ---------------------------------------------------------------------------
// Layered compilation of logical gate lists into schedule steps.

struct LogicalGate {
    enum class Kind { Symplectic, Beamsplit, Cubic, Operator };
    Kind kind = Kind::Symplectic;
    std::vector<int> modes;
    Mat S;              // Symplectic: 2x2 block
    double delta = 0;   // Beamsplit: W(delta)
    double gamma = 0;   // Cubic
    std::string name;   // Operator

    static LogicalGate symplectic(int m, const Mat &S);
    static LogicalGate rotate(int m, double phi);
    static LogicalGate beamsplit(int j, int k, double delta);
    static LogicalGate cubic(int m, double gamma);
    static LogicalGate op(const std::vector<int> &modes, const std::string &name);
};

// Real beam splitter BS(theta) on (j, k) in terms of W and rotations.
std::vector<LogicalGate> real_beamsplitter_gates(int j, int k, double theta);
// C_Z(g) as a 50:50 splitter sandwich around opposite shears.
std::vector<LogicalGate> cz_gates(int j, int k, double g);

// Merges adjacent single-mode symplectics and packs ops into layers; every
// layer touches each mode at most once. Idle live modes get identity ops.
std::vector<std::vector<MacroOp>> layer_gates(const std::vector<LogicalGate> &gates,
                                              const std::vector<std::string> &names);

// Symplectic of a sequence of Gaussian macro ops on `modes`. r < 0 composes
// the ideal induced maps; r >= 0 chains the physical macronode circuits at
// source squeezing r and extracts the zero-outcome map.
Mat macro_ops_symplectic(const std::vector<MacroOp> &ops, const std::vector<std::string> &modes, double r = -1);

// Registers off-cluster operators described in schedule.extra["operators"].
void register_operators(const Schedule &schedule, RunOptions &options);

// ---------------------------------------------------------------------------
// Gaussian boson sampling.

struct GbsInstance {
    int n_modes = 0;
    std::vector<double> squeeze;  // per-mode r; S(r > 0) squeezes x
    CMat unitary;
    int cutoff = 12;
};

GbsInstance gbs_from_json(const nlohmann::json &j);
nlohmann::json gbs_to_json(const GbsInstance &g);
GbsInstance load_gbs(const std::string &path);
void check_gbs(const GbsInstance &g);
CMat random_unitary(int n, std::uint64_t seed);

cplx hafnian(const CMat &A);
double gbs_probability(const GbsInstance &g, const std::vector<int> &pattern);
// Brute-force photon-number distribution from the Fock backend, flattened
// row-major over modes at the given cutoff.
Vec gbs_fock_distribution(const GbsInstance &g, int cutoff);

struct U2Block {
    int mode = 0;  // acts on (mode, mode + 1)
    double delta = 0, phi1 = 0, phi2 = 0, phi3 = 0;
};
struct Interferometer {
    std::vector<U2Block> blocks;  // time order
    std::vector<double> phases;   // applied first
};
// U(2) block: diag(e^{i phi1}, e^{i phi2}) W(delta) diag(e^{i phi3}, 1).
U2Block decompose_u2(const CMat &B, int mode);
CMat u2_matrix(const U2Block &b);
Interferometer decompose_interferometer(const CMat &U);
std::vector<LogicalGate> interferometer_gates(const Interferometer &I);

Schedule gbs_compile(const GbsInstance &g);

struct GbsRun {
    std::map<std::vector<int>, int> counts;
    int shots = 0;
    double tv_distance = 0;
    double ideal_mass = 0;  // hafnian mass captured within the cutoff
};
GbsRun gbs_run(const GbsInstance &g, const Schedule &schedule, int shots, std::uint64_t seed);

// ---------------------------------------------------------------------------
// CV-IQP.

struct IqpGate {
    enum class Kind { Z, V, CZ, XPhase, XShift };
    Kind kind = Kind::Z;
    std::vector<int> modes;
    double param = 0;  // s, gamma, g or lambda
    int order = 0;     // XPhase: exp(i lambda x^k)
};

struct IqpCircuit {
    int n_modes = 0;
    double squeeze = 0.5;  // momentum squeezing of the inputs
    std::vector<IqpGate> gates;
};

IqpCircuit iqp_from_json(const nlohmann::json &j);
nlohmann::json iqp_to_json(const IqpCircuit &c);
IqpCircuit iqp_bundled();
IqpCircuit iqp_random(int n_modes, int n_gates, std::uint64_t seed);
IqpCircuit iqp_rearrange(const IqpCircuit &c);
// Position-diagonal phase of one gate.
std::function<cplx(double)> iqp_phase(const IqpGate &g);
// Fock matrix of one gate on its own modes, via the position DVR.
CMat iqp_gate_fock(const IqpGate &g, int d);
// Full unitary, gates applied in order.
CMat iqp_unitary(const IqpCircuit &c, int d);
Schedule iqp_compile(const IqpCircuit &c);

// ---------------------------------------------------------------------------
// CV Grover search.

struct GroverInstance {
    int N = 4;
    int n = 1;
    int target = 1;
    double half_width = 2.0;  // regions tile [-h, h]^n
    int m = 20;               // expansion order, first mode
    int p = 20;               // expansion order, second mode
    int cutoff = 40;
    double squeeze = 1.0;     // x-squeezing of the initial state
};

void check_grover(const GroverInstance &g);
// Interval of the target region along each axis.
std::vector<std::array<double, 2>> grover_target_box(const GroverInstance &g);
double grover_step(const GroverInstance &g, double x1, double x2 = 0);

// Hermite coefficients of the step function: (m+1) x 1, or (m+1) x (p+1).
Mat grover_expand(const GroverInstance &g);
double grover_reconstruct(const GroverInstance &g, const Mat &c, double x1, double x2 = 0);
double grover_l2_error(const GroverInstance &g, const Mat &c, double window = 4.0, int points = 401);

// Matrix of g(x) between Fock states, by quadrature.
CMat position_matrix(const std::function<double(double)> &f, int d, double a, double b);
CMat interval_projector(double a, double b, int d);

// i exp(-i pi f/2) for the sharp step (exact) or its truncated expansion.
CMat grover_inversion(const GroverInstance &g, bool exact);
// I - 2|psi0><psi0| for the initial state.
CMat grover_initial_inversion(const GroverInstance &g);
CMat grover_fourier(const GroverInstance &g, bool inverse = false);
CMat grover_compound(const GroverInstance &g, bool exact);
FockState grover_initial_state(const GroverInstance &g);
double grover_target_probability(const GroverInstance &g, const FockState &s);

// Pointwise oracle phase on the position grid.
cplx grover_oracle_phase(const GroverInstance &g, double x1, double x2 = 0);

struct GroverTrace {
    std::vector<double> probability;  // after 0..iterations applications
    double input_leakage = 0;         // norm lost truncating the initial state
    double edge_population = 0;       // largest population in the top two levels
};
GroverTrace grover_run(const GroverInstance &g, int iterations, bool exact);

double grover_prep_fidelity(const Mat &c, const FockState &reference);
FockState grover_prep_state(const Mat &c);

// Two-mode search laid out over 27 time steps.
Schedule grover_compile(const GroverInstance &g);

nlohmann::json grover_to_json(const GroverInstance &g);
GroverInstance grover_from_json(const nlohmann::json &j);

// ---------------------------------------------------------------------------
// Bundled schedules.

Schedule table1_schedule();
GbsInstance gbs_bundled4();
GbsInstance gbs_desk2();
GroverInstance grover_bundled2d();

}  // namespace cvc

#endif
