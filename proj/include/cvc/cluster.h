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


#ifndef CVC_CLUSTER_H
#define CVC_CLUSTER_H

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "cvc/common.h"
#include "cvc/fock.h"
#include "cvc/gaussian.h"
#include "cvc/macronode.h"

namespace cvc {

struct ClusterConfig {
    double squeeze_r = 1.0;
    int depth_M = 1;
    int n_timesteps = 1;
    int dimension = 1;
};

// Pulse pairs a_k = S(r)|0>, b_k = S(-r)|0> meet on B1; b_{k-1}, delayed by one
// step, meets a_k on B2. Modes are labelled "T<k>.a", "T<k>.b".
GaussianState generate_1d(const ClusterConfig &config);
// Two chains (a, b) with delay 1 and (c, d) with delay M, then B5(a_k, c_k)
// and B6(b_{k-1}, d_{k-M}) couple the chains. Modes "T<k>.a" .. "T<k>.d".
GaussianState generate_2d(const ClusterConfig &config, bool couple_chains = true);
GaussianState generate_cluster(const ClusterConfig &config);
// Rows are the squeezed source quadratures written in the output modes; each
// has variance e^{-2r}/2.
Mat cluster_nullifiers(const ClusterConfig &config);
// Macronode index k of a mode label "T<k>.x".
int macronode_of(const std::string &label);

// Schedules.
enum class Feedforward { Immediate, Deferred };
enum class Backend { Gaussian, Fock, Hybrid };
enum class SqueezingModel { Ideal, Finite };

struct InjectState {
    std::string kind = "vacuum";  // vacuum | squeezed | coherent | fock | cubic
    double r = 0.0;
    double phi = 0.0;
    cplx alpha = 0.0;
    int n = 0;
    double gamma = 0.0;
};
struct Injection {
    std::string mode;
    InjectState state;
};

// One macronode's worth of work on one or two logical modes.
struct MacroOp {
    enum class Kind { Single, Pair, Cubic, Operator };
    Kind kind = Kind::Single;
    std::vector<std::string> modes;
    std::array<double, 4> theta{};  // (theta1, theta3) for Single, four angles for Pair
    double gamma = 0.0;             // Cubic: implemented V(gamma) after R(-pi/2)
    std::string name;               // Operator: registered off-cluster operator
    std::string label;              // human-readable gate name
};

struct Readout {
    std::string mode;
    std::string measure = "homodyne";  // homodyne | pnr | state
    double theta = 0.0;
    double offset = 0.0;  // added to a homodyne outcome
};

struct ScheduleStep {
    int t = 0;
    std::string switch_top, switch_bottom;
    std::string action;  // none | homodyne | inject | cubic | operator | readout
    std::vector<Injection> inject;
    std::vector<MacroOp> ops;
    std::vector<Readout> readout;
    std::string note;
    Feedforward feedforward = Feedforward::Immediate;
};

struct Schedule {
    std::string name;
    int dimension = 1;
    int depth_M = 1;
    double squeeze_r = 10.0;
    SqueezingModel model = SqueezingModel::Ideal;
    Backend backend = Backend::Hybrid;
    int cutoff = 12;
    std::vector<std::string> modes;
    std::vector<ScheduleStep> steps;
    nlohmann::json extra;  // instance data carried for the caller
};

Schedule schedule_from_json(const nlohmann::json &j);
nlohmann::json schedule_to_json(const Schedule &s);
Schedule load_schedule(const std::string &path);
void save_schedule(const Schedule &s, const std::string &path);
// Throws validation errors naming the offending step.
void validate_schedule(const Schedule &s);
bool schedule_is_gaussian(const Schedule &s);

// Angles for the macronode gates used by compilers.
MacroOp rotate_op(const std::string &mode, double phi);
MacroOp squeeze_op_macro(const std::string &mode, double s);
MacroOp identity_op(const std::string &mode);
// Two macronodes realizing a single-mode symplectic matrix; the first acts first.
std::array<MacroOp, 2> symplectic_ops(const std::string &mode, const Mat &S);
// W = [[cos d, i sin d], [i sin d, cos d]] on (j, k).
MacroOp beamsplitter_op_macro(const std::string &j, const std::string &k, double delta);
MacroOp cubic_op_macro(const std::string &mode, double gamma);
MacroOp operator_op(const std::vector<std::string> &modes, const std::string &name);
// The operator a macronode induces at zero outcomes.
InducedOperator macro_operator(const MacroOp &op);

struct OutcomeRecord {
    int t = 0;
    std::string action;
    std::vector<double> homodyne;
    std::vector<int> pnr;
    std::vector<std::pair<std::string, double>> readout;
    std::vector<std::pair<std::string, int>> counts;
    nlohmann::json to_json() const;
};

using OperatorFactory = std::function<CMat(int cutoff)>;

struct RunOptions {
    std::uint64_t seed = 0;
    std::map<std::string, OperatorFactory> operators;
    // Injected states for "fock" kind inputs, by mode.
    std::map<std::string, FockState> fock_inputs;
    // Per-step snapshot of the corrected state, for ledger checks.
    bool record_states = false;
};

struct LiveState {
    bool fock = false;
    GaussianState gaussian;
    FockState amps;
    std::vector<std::string> fock_modes;
    int cutoff = 0;
};

struct ScheduleTrace {
    std::vector<OutcomeRecord> records;
    // Deferred displacement per logical mode, (dx, dp).
    std::map<std::string, std::array<double, 2>> ledger;
    LiveState final_state;
    std::map<std::string, LiveState> outputs;  // "state" readouts
    std::vector<LiveState> snapshots;          // corrected states after each step
    double handoff_leakage = 0.0;
    int handoff_step = -1;
};

// Step-by-step executor; run_schedule drives it over a whole schedule.
class ScheduleRunner {
  public:
    ScheduleRunner(const Schedule &schedule, RunOptions options);
    void step(const ScheduleStep &s);
    // Applies an off-cluster Fock gate to a live mode and reinserts it.
    void switch_out(const std::string &mode, const CMat &gate);
    // Corrected state of the live modes (deferred ledger applied to a copy).
    LiveState corrected_state() const;
    ScheduleTrace finish();
    const ScheduleTrace &trace() const { return trace_; }
    const LiveState &state() const { return state_; }

  private:
    void inject(const Injection &in);
    void apply_op(const MacroOp &op, Feedforward ff, OutcomeRecord &rec);
    void apply_gaussian_finite(const MacroOp &op, Feedforward ff, OutcomeRecord &rec);
    void apply_induced(const InducedOperator &op, const std::vector<std::string> &modes);
    void apply_fock_matrix(const CMat &U, const std::vector<std::string> &modes);
    void read(const Readout &r, OutcomeRecord &rec);
    void handoff(int t);
    void settle_ledger(const std::string &mode);
    void push_ledger(const InducedOperator &op, const std::vector<std::string> &modes, const Vec &shift);
    void check_live(const std::string &mode) const;

    const Schedule &schedule_;
    RunOptions options_;
    std::mt19937_64 rng_;
    LiveState state_;
    std::vector<std::string> live_;
    std::vector<std::string> done_;
    ScheduleTrace trace_;
    int current_t_ = 0;
    int ancilla_counter_ = 0;
};

ScheduleTrace run_schedule(const Schedule &schedule, const RunOptions &options);

// Largest Fock hand-off: 4 modes at cutoff 12.
constexpr long kMaxHandoffAmplitudes = 12L * 12 * 12 * 12;

}  // namespace cvc

#endif
