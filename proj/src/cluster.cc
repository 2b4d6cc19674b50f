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


#include "cvc/cluster.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace cvc {

using nlohmann::json;

namespace {

std::string label(int k, char c) { return "T" + std::to_string(k) + "." + c; }

void check_config(const ClusterConfig &c) {
    if (c.n_timesteps < 1) throw validation_error("cluster needs at least one time step");
    if (c.depth_M < 1) throw validation_error("cluster depth M must be at least 1");
    if (c.dimension != 1 && c.dimension != 2) throw validation_error("cluster dimension must be 1 or 2");
    if (c.dimension == 2 && c.n_timesteps < c.depth_M) {
        throw validation_error("2D cluster needs at least M time steps (got " + std::to_string(c.n_timesteps) +
                               " < M = " + std::to_string(c.depth_M) + ")");
    }
}

// Source pulses and the gate list of the generating circuit.
struct ClusterCircuit {
    std::vector<std::string> modes;
    std::vector<double> squeeze;
    std::vector<SymplecticGate> gates;
};

ClusterCircuit circuit_1d(const ClusterConfig &c, const std::string &pa, const std::string &pb, int delay) {
    ClusterCircuit cc;
    for (int k = 0; k < c.n_timesteps; ++k) {
        cc.modes.push_back(label(k, pa[0]));
        cc.squeeze.push_back(c.squeeze_r);
        cc.modes.push_back(label(k, pb[0]));
        cc.squeeze.push_back(-c.squeeze_r);
    }
    for (int k = 0; k < c.n_timesteps; ++k) {
        cc.gates.push_back(SymplecticGate::beamsplit(label(k, pa[0]), label(k, pb[0]), kPi / 4));
        if (k >= delay) cc.gates.push_back(SymplecticGate::beamsplit(label(k - delay, pb[0]), label(k, pa[0]), kPi / 4));
    }
    return cc;
}

ClusterCircuit circuit_for(const ClusterConfig &c, bool couple) {
    check_config(c);
    if (c.dimension == 1) return circuit_1d(c, "a", "b", 1);
    ClusterCircuit ab = circuit_1d(c, "a", "b", 1);
    ClusterCircuit cd = circuit_1d(c, "c", "d", c.depth_M);
    ClusterCircuit out = ab;
    out.modes.insert(out.modes.end(), cd.modes.begin(), cd.modes.end());
    out.squeeze.insert(out.squeeze.end(), cd.squeeze.begin(), cd.squeeze.end());
    out.gates.insert(out.gates.end(), cd.gates.begin(), cd.gates.end());
    if (couple) {
        for (int k = 0; k < c.n_timesteps; ++k) {
            out.gates.push_back(SymplecticGate::beamsplit(label(k, 'a'), label(k, 'c'), kPi / 4));
            if (k >= c.depth_M) {
                out.gates.push_back(SymplecticGate::beamsplit(label(k - 1, 'b'), label(k - c.depth_M, 'd'), kPi / 4));
            }
        }
    }
    return out;
}

Mat circuit_symplectic(const ClusterCircuit &cc, bool with_sources = true) {
    int n = static_cast<int>(cc.modes.size());
    auto idx = [&](const std::string &l) {
        return static_cast<int>(std::find(cc.modes.begin(), cc.modes.end(), l) - cc.modes.begin());
    };
    Mat S = Mat::Identity(2 * n, 2 * n);
    if (with_sources) {
        for (int i = 0; i < n; ++i) S = embed(squeeze_matrix(cc.squeeze[i]), {i}, n) * S;
    }
    for (const auto &g : cc.gates) {
        std::vector<int> t;
        for (const auto &l : g.targets) t.push_back(idx(l));
        S = embed(g.matrix(), t, n) * S;
    }
    return S;
}

GaussianState run_circuit(const ClusterCircuit &cc) {
    Mat S = circuit_symplectic(cc);
    int n = static_cast<int>(cc.modes.size());
    return GaussianState(cc.modes, Vec::Zero(2 * n), 0.5 * S * S.transpose());
}

}  // namespace

GaussianState generate_1d(const ClusterConfig &config) {
    if (config.dimension != 1) throw validation_error("generate_1d needs dimension 1");
    return run_circuit(circuit_for(config, true));
}

GaussianState generate_2d(const ClusterConfig &config, bool couple_chains) {
    if (config.dimension != 2) throw validation_error("generate_2d needs dimension 2");
    return run_circuit(circuit_for(config, couple_chains));
}

GaussianState generate_cluster(const ClusterConfig &config) {
    return config.dimension == 1 ? generate_1d(config) : generate_2d(config);
}

Mat cluster_nullifiers(const ClusterConfig &config) {
    ClusterCircuit cc = circuit_for(config, true);
    // Output quadratures are G times the squeezed source quadratures, so the
    // sources are rows of G^{-1} = -J G^T J.
    Mat G = circuit_symplectic(cc, false);
    int n = static_cast<int>(cc.modes.size());
    Mat J = symplectic_form(n);
    Mat Sinv = -J * G.transpose() * J;
    Mat rows(n, 2 * n);
    for (int i = 0; i < n; ++i) rows.row(i) = Sinv.row(cc.squeeze[i] > 0 ? 2 * i : 2 * i + 1);
    return rows;
}

int macronode_of(const std::string &l) {
    auto dot = l.find('.');
    if (l.size() < 3 || l[0] != 'T' || dot == std::string::npos) throw validation_error("bad mode label '" + l + "'");
    return std::stoi(l.substr(1, dot - 1));
}

// ---------------------------------------------------------------------------
// Macronode ops.

MacroOp rotate_op(const std::string &mode, double phi) {
    auto a = rotation_angles(phi);
    MacroOp op;
    op.modes = {mode};
    op.theta = {a.theta1, a.theta3, 0, 0};
    op.label = "rotate(" + std::to_string(phi) + ")";
    return op;
}

MacroOp squeeze_op_macro(const std::string &mode, double s) {
    auto a = squeeze_angles(s);
    MacroOp op;
    op.modes = {mode};
    op.theta = {a.theta1, a.theta3, 0, 0};
    op.label = "squeeze(" + std::to_string(s) + ")";
    return op;
}

MacroOp identity_op(const std::string &mode) {
    auto a = identity_angles();
    MacroOp op;
    op.modes = {mode};
    op.theta = {a.theta1, a.theta3, 0, 0};
    op.label = "identity";
    return op;
}

std::array<MacroOp, 2> symplectic_ops(const std::string &mode, const Mat &S) {
    // S = R(p1) S(s) R(p2); realized as R(p2 - p1) followed by R(p1) S(s) R(p1).
    Eigen::JacobiSVD<Mat> svd(S, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat U = svd.matrixU(), V = svd.matrixV();
    if (U.determinant() < 0) {
        U.col(0) *= -1;
        V.col(0) *= -1;
    }
    double s = -std::log(svd.singularValues()(0));
    double p1 = std::atan2(U(1, 0), U(0, 0));
    Mat Vt = V.transpose();
    double p2 = std::atan2(Vt(1, 0), Vt(0, 0));
    MacroOp first = rotate_op(mode, p2 - p1);
    double tm = std::atan(std::exp(s));
    MacroOp second;
    second.modes = {mode};
    second.theta = {p1 - tm, p1 + tm, 0, 0};
    second.label = "R(" + std::to_string(p1) + ")S(" + std::to_string(s) + ")R(" + std::to_string(p1) + ")";
    return {first, second};
}

MacroOp beamsplitter_op_macro(const std::string &j, const std::string &k, double delta) {
    MacroOp op;
    op.kind = MacroOp::Kind::Pair;
    op.modes = {j, k};
    op.theta = beamsplitter_pair_angles(-delta, delta);
    op.label = "beamsplitter(" + std::to_string(delta) + ")";
    return op;
}

MacroOp cubic_op_macro(const std::string &mode, double gamma) {
    MacroOp op;
    op.kind = MacroOp::Kind::Cubic;
    op.modes = {mode};
    op.gamma = gamma;
    op.label = "R(-pi/2)V(" + std::to_string(gamma) + ")";
    return op;
}

MacroOp operator_op(const std::vector<std::string> &modes, const std::string &name) {
    MacroOp op;
    op.kind = MacroOp::Kind::Operator;
    op.modes = modes;
    op.name = name;
    op.label = name;
    return op;
}

InducedOperator macro_operator(const MacroOp &op) {
    switch (op.kind) {
        case MacroOp::Kind::Single:
            return single_macronode(op.theta[0], op.theta[1]);
        case MacroOp::Kind::Pair:
            return two_mode_macronode(op.theta);
        case MacroOp::Kind::Cubic:
            return InducedOperator{1, {GateOp::rotate(0, -kPi / 2), GateOp::cubic(0, op.gamma)}};
        case MacroOp::Kind::Operator:
            break;
    }
    throw validation_error("operator '" + op.name + "' has no induced Gaussian form");
}

// ---------------------------------------------------------------------------
// Schedule files.

namespace {

const std::set<std::string> kActions = {"none", "homodyne", "inject", "cubic", "operator", "readout"};
const std::set<std::string> kSwitch = {"s1", "s2", "s3"};

cplx parse_complex(const json &j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
    throw validation_error("complex numbers are written as [re, im]");
}

json complex_json(cplx c) { return json::array({c.real(), c.imag()}); }

std::string op_kind_name(MacroOp::Kind k) {
    switch (k) {
        case MacroOp::Kind::Single: return "single";
        case MacroOp::Kind::Pair: return "pair";
        case MacroOp::Kind::Cubic: return "cubic";
        case MacroOp::Kind::Operator: return "operator";
    }
    return "";
}

MacroOp op_from_json(const json &j) {
    MacroOp op;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "single") op.kind = MacroOp::Kind::Single;
    else if (kind == "pair") op.kind = MacroOp::Kind::Pair;
    else if (kind == "cubic") op.kind = MacroOp::Kind::Cubic;
    else if (kind == "operator") op.kind = MacroOp::Kind::Operator;
    else throw validation_error("unknown op kind '" + kind + "'");
    op.modes = j.at("modes").get<std::vector<std::string>>();
    std::size_t want = op.kind == MacroOp::Kind::Pair ? 2 : 1;
    if (op.kind != MacroOp::Kind::Operator && op.modes.size() != want) {
        throw validation_error("op '" + kind + "' needs " + std::to_string(want) + " mode(s)");
    }
    if (op.kind == MacroOp::Kind::Operator && (op.modes.empty() || op.modes.size() > 2)) {
        throw validation_error("operator ops act on one or two modes");
    }
    if (op.kind == MacroOp::Kind::Single || op.kind == MacroOp::Kind::Pair) {
        auto th = j.at("theta").get<std::vector<double>>();
        if (th.size() != 2 * want) throw validation_error("op '" + kind + "' needs " + std::to_string(2 * want) + " angles");
        for (std::size_t i = 0; i < th.size(); ++i) op.theta[i] = th[i];
    }
    op.gamma = j.value("gamma", 0.0);
    op.name = j.value("name", std::string());
    op.label = j.value("label", std::string());
    return op;
}

json op_to_json(const MacroOp &op) {
    json j{{"kind", op_kind_name(op.kind)}, {"modes", op.modes}};
    if (op.kind == MacroOp::Kind::Single) j["theta"] = {op.theta[0], op.theta[1]};
    if (op.kind == MacroOp::Kind::Pair) j["theta"] = op.theta;
    if (op.kind == MacroOp::Kind::Cubic) j["gamma"] = op.gamma;
    if (op.kind == MacroOp::Kind::Operator) j["name"] = op.name;
    if (!op.label.empty()) j["label"] = op.label;
    return j;
}

InjectState state_from_json(const json &j) {
    InjectState s;
    s.kind = j.value("kind", std::string("vacuum"));
    s.r = j.value("r", 0.0);
    s.phi = j.value("phi", 0.0);
    if (j.contains("alpha")) s.alpha = parse_complex(j["alpha"]);
    s.n = j.value("n", 0);
    s.gamma = j.value("gamma", 0.0);
    static const std::set<std::string> kinds = {"vacuum", "squeezed", "coherent", "fock", "cubic", "external"};
    if (!kinds.count(s.kind)) throw validation_error("unknown input state kind '" + s.kind + "'");
    return s;
}

json state_to_json(const InjectState &s) {
    json j{{"kind", s.kind}};
    if (s.kind == "squeezed") j["r"] = s.r, j["phi"] = s.phi;
    if (s.kind == "coherent") j["alpha"] = complex_json(s.alpha);
    if (s.kind == "fock") j["n"] = s.n;
    if (s.kind == "cubic") j["gamma"] = s.gamma, j["r"] = s.r;
    return j;
}

bool inject_gaussian(const InjectState &s) {
    return s.kind == "vacuum" || s.kind == "squeezed" || s.kind == "coherent";
}

bool step_gaussian(const ScheduleStep &s) {
    for (const auto &op : s.ops) {
        if (op.kind == MacroOp::Kind::Cubic || op.kind == MacroOp::Kind::Operator) return false;
    }
    for (const auto &in : s.inject) {
        if (!inject_gaussian(in.state)) return false;
    }
    for (const auto &r : s.readout) {
        if (r.measure == "pnr") return false;
    }
    return true;
}

}  // namespace

Schedule schedule_from_json(const json &j) {
    Schedule s;
    try {
        s.name = j.value("name", std::string());
        s.dimension = j.value("dimension", 1);
        s.depth_M = j.value("depth_M", 1);
        s.squeeze_r = j.value("squeeze_r", 10.0);
        std::string model = j.value("model", std::string("ideal"));
        if (model == "ideal") s.model = SqueezingModel::Ideal;
        else if (model == "finite") s.model = SqueezingModel::Finite;
        else throw validation_error("model must be 'ideal' or 'finite'");
        std::string backend = j.value("backend", std::string("hybrid"));
        if (backend == "gaussian") s.backend = Backend::Gaussian;
        else if (backend == "fock") s.backend = Backend::Fock;
        else if (backend == "hybrid") s.backend = Backend::Hybrid;
        else throw validation_error("backend must be gaussian, fock or hybrid");
        s.cutoff = j.value("cutoff", 12);
        s.modes = j.at("modes").get<std::vector<std::string>>();
        if (j.contains("extra")) s.extra = j["extra"];
        const json &steps = j.at("steps");
        if (!steps.is_array()) throw validation_error("'steps' must be an array");
        for (std::size_t i = 0; i < steps.size(); ++i) {
            const json &js = steps[i];
            try {
                ScheduleStep st;
                for (const char *key : {"t", "switch_top", "switch_bottom", "action", "params", "feedforward"}) {
                    if (!js.contains(key)) throw validation_error(std::string("missing key '") + key + "'");
                }
                st.t = js.at("t").get<int>();
                st.switch_top = js.at("switch_top").is_null() ? "" : js.at("switch_top").get<std::string>();
                st.switch_bottom = js.at("switch_bottom").is_null() ? "" : js.at("switch_bottom").get<std::string>();
                st.action = js.at("action").get<std::string>();
                std::string ff = js.at("feedforward").get<std::string>();
                if (ff == "f1") st.feedforward = Feedforward::Immediate;
                else if (ff == "f2") st.feedforward = Feedforward::Deferred;
                else throw validation_error("feedforward must be 'f1' or 'f2'");
                const json &p = js.at("params");
                for (const auto &in : p.value("inject", json::array())) {
                    st.inject.push_back({in.at("mode").get<std::string>(), state_from_json(in.value("state", json::object()))});
                }
                for (const auto &op : p.value("ops", json::array())) st.ops.push_back(op_from_json(op));
                for (const auto &r : p.value("readout", json::array())) {
                    Readout rd;
                    rd.mode = r.at("mode").get<std::string>();
                    rd.measure = r.value("measure", std::string("homodyne"));
                    rd.theta = r.value("theta", 0.0);
                    rd.offset = r.value("offset", 0.0);
                    if (rd.measure != "homodyne" && rd.measure != "pnr" && rd.measure != "state") {
                        throw validation_error("unknown readout '" + rd.measure + "'");
                    }
                    st.readout.push_back(rd);
                }
                st.note = p.value("note", std::string());
                s.steps.push_back(st);
            } catch (const json::exception &e) {
                throw validation_error("step " + std::to_string(i) + ": " + e.what());
            } catch (const Error &e) {
                throw validation_error("step " + std::to_string(i) + ": " + e.what());
            }
        }
    } catch (const json::exception &e) {
        throw validation_error(std::string("schedule: ") + e.what());
    }
    return s;
}

json schedule_to_json(const Schedule &s) {
    json j;
    j["name"] = s.name;
    j["dimension"] = s.dimension;
    j["depth_M"] = s.depth_M;
    j["squeeze_r"] = s.squeeze_r;
    j["model"] = s.model == SqueezingModel::Ideal ? "ideal" : "finite";
    j["backend"] = s.backend == Backend::Gaussian ? "gaussian" : s.backend == Backend::Fock ? "fock" : "hybrid";
    j["cutoff"] = s.cutoff;
    j["modes"] = s.modes;
    if (!s.extra.is_null()) j["extra"] = s.extra;
    json steps = json::array();
    for (const auto &st : s.steps) {
        json p = json::object();
        if (!st.inject.empty()) {
            json a = json::array();
            for (const auto &in : st.inject) a.push_back({{"mode", in.mode}, {"state", state_to_json(in.state)}});
            p["inject"] = a;
        }
        if (!st.ops.empty()) {
            json a = json::array();
            for (const auto &op : st.ops) a.push_back(op_to_json(op));
            p["ops"] = a;
        }
        if (!st.readout.empty()) {
            json a = json::array();
            for (const auto &r : st.readout) {
                json jr{{"mode", r.mode}, {"measure", r.measure}};
                if (r.measure == "homodyne") jr["theta"] = r.theta, jr["offset"] = r.offset;
                a.push_back(jr);
            }
            p["readout"] = a;
        }
        if (!st.note.empty()) p["note"] = st.note;
        json js;
        js["t"] = st.t;
        js["switch_top"] = st.switch_top;
        js["switch_bottom"] = st.switch_bottom.empty() ? json(nullptr) : json(st.switch_bottom);
        js["action"] = st.action;
        js["params"] = p;
        js["feedforward"] = st.feedforward == Feedforward::Immediate ? "f1" : "f2";
        steps.push_back(js);
    }
    j["steps"] = steps;
    return j;
}

Schedule load_schedule(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open schedule file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception &e) {
        throw validation_error("schedule file '" + path + "' is not valid JSON: " + e.what());
    }
    Schedule s = schedule_from_json(j);
    validate_schedule(s);
    return s;
}

void save_schedule(const Schedule &s, const std::string &path) {
    std::ofstream out(path);
    if (!out) throw validation_error("cannot write schedule file '" + path + "'");
    out << schedule_to_json(s).dump(1) << "\n";
}

bool schedule_is_gaussian(const Schedule &s) {
    return std::all_of(s.steps.begin(), s.steps.end(), step_gaussian);
}

void validate_schedule(const Schedule &s) {
    if (s.dimension != 1 && s.dimension != 2) throw validation_error("schedule dimension must be 1 or 2");
    if (s.cutoff < 2) throw validation_error("schedule cutoff must be at least 2");
    if (s.modes.empty()) throw validation_error("schedule declares no modes");
    std::set<std::string> declared(s.modes.begin(), s.modes.end());
    if (declared.size() != s.modes.size()) throw validation_error("schedule mode names must be unique");
    bool gaussian = schedule_is_gaussian(s);
    std::set<std::string> live, done;
    int last_t = 0;
    for (std::size_t i = 0; i < s.steps.size(); ++i) {
        const ScheduleStep &st = s.steps[i];
        auto fail = [&](const std::string &msg) {
            throw validation_error("step " + std::to_string(i) + " (t=" + std::to_string(st.t) + "): " + msg);
        };
        if (i > 0 && st.t <= last_t) fail("time indices must be strictly increasing");
        last_t = st.t;
        if (!kActions.count(st.action)) fail("unknown action '" + st.action + "'");
        if (!kSwitch.count(st.switch_top)) fail("switch_top must be s1, s2 or s3");
        if (s.dimension == 2 && !kSwitch.count(st.switch_bottom)) fail("2D schedules need switch_bottom s1, s2 or s3");
        if (s.dimension == 1 && !st.switch_bottom.empty()) fail("1D schedules have no bottom switch");
        auto any_switch = [&](const std::string &v) { return st.switch_top == v || st.switch_bottom == v; };
        if (!st.inject.empty() && !any_switch("s2")) fail("injection requires switch state s2");
        if (!st.readout.empty() && !any_switch("s3")) fail("readout requires switch state s3");
        if (st.action == "none" && (!st.inject.empty() || !st.ops.empty() || !st.readout.empty())) {
            fail("'none' steps carry no work");
        }
        if (st.action == "inject" && st.inject.empty()) fail("'inject' steps need at least one injection");
        if (st.action != "inject" && !st.inject.empty()) fail("only 'inject' steps inject states");
        if (st.action == "readout" && st.readout.empty()) fail("'readout' steps need at least one readout");
        bool has_cubic = false, has_operator = false;
        for (const auto &op : st.ops) {
            has_cubic |= op.kind == MacroOp::Kind::Cubic;
            has_operator |= op.kind == MacroOp::Kind::Operator;
        }
        if (has_cubic && st.action != "cubic") fail("cubic gates belong to 'cubic' steps");
        if (st.action == "cubic" && !has_cubic) fail("'cubic' steps need a cubic op");
        if (has_operator && st.action != "operator") fail("off-cluster operators belong to 'operator' steps");
        if (!gaussian && st.feedforward == Feedforward::Deferred) {
            fail("deferred feedforward (f2) is only valid for all-Gaussian schedules; use f1");
        }
        if (s.backend == Backend::Gaussian && !step_gaussian(st)) fail("non-Gaussian step on the Gaussian backend");
        for (const auto &in : st.inject) {
            if (!declared.count(in.mode)) fail("unknown mode '" + in.mode + "'");
            if (live.count(in.mode) || done.count(in.mode)) fail("mode '" + in.mode + "' injected twice");
            live.insert(in.mode);
        }
        std::set<std::string> used;
        for (const auto &op : st.ops) {
            for (const auto &m : op.modes) {
                if (!live.count(m)) fail("mode '" + m + "' is not live");
                if (used.count(m)) fail("mode '" + m + "' used twice in one step");
                used.insert(m);
            }
            if (op.kind == MacroOp::Kind::Single) check_angles(op.theta[0], op.theta[1]);
            if (op.kind == MacroOp::Kind::Pair) {
                check_angles(op.theta[0], op.theta[2]);
                check_angles(op.theta[1], op.theta[3]);
            }
        }
        for (const auto &r : st.readout) {
            if (!live.count(r.mode)) fail("readout of mode '" + r.mode + "' which is not live");
            live.erase(r.mode);
            done.insert(r.mode);
        }
    }
}

// ---------------------------------------------------------------------------
// Execution.

json OutcomeRecord::to_json() const {
    json j{{"t", t}, {"action", action}, {"homodyne", homodyne}};
    if (!pnr.empty()) j["pnr"] = pnr;
    if (!readout.empty()) {
        json r = json::object();
        for (const auto &[m, v] : readout) r[m] = v;
        j["readout"] = r;
    }
    if (!counts.empty()) {
        json r = json::object();
        for (const auto &[m, v] : counts) r[m] = v;
        j["counts"] = r;
    }
    return j;
}

namespace {

FockState fock_tensor(const FockState &a, const FockState &b) {
    std::vector<int> dims = a.dims();
    if (a.modes() == 1 && a.dim(0) == 1 && a.size() == 1) dims.clear();
    dims.insert(dims.end(), b.dims().begin(), b.dims().end());
    CVec out(a.size() * b.size());
    for (long i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a.amps()(i) * b.amps();
    return FockState(dims, out);
}

}  // namespace

ScheduleRunner::ScheduleRunner(const Schedule &schedule, RunOptions options)
    : schedule_(schedule), options_(std::move(options)), rng_(options_.seed) {
    state_.gaussian = GaussianState::vacuum({});
    state_.cutoff = schedule.cutoff;
}

void ScheduleRunner::check_live(const std::string &mode) const {
    if (std::find(live_.begin(), live_.end(), mode) == live_.end()) {
        throw validation_error("mode '" + mode + "' is not live");
    }
}

void ScheduleRunner::handoff(int t) {
    if (state_.fock) return;
    for (const auto &m : live_) settle_ledger(m);
    int d = schedule_.cutoff;
    long amps = 1;
    for (std::size_t i = 0; i < live_.size(); ++i) amps *= d;
    if (amps > kMaxHandoffAmplitudes) {
        throw numeric_error("Fock hand-off of " + std::to_string(live_.size()) + " modes at cutoff " + std::to_string(d) +
                            " exceeds the budget of 12^4 amplitudes; reduce the cutoff");
    }
    FockState f = FockState::vacuum({1});
    double leak = 0.0;
    if (!live_.empty()) {
        auto g = gaussian_to_fock(state_.gaussian.reduced(live_), d);
        leak = g.leakage;
        if (leak > 1e-4) {
            throw numeric_error("Fock hand-off leakage " + std::to_string(leak) + " exceeds 1e-4; raise the cutoff");
        }
        f = g.state;
        f.normalize();
    }
    state_.fock = true;
    state_.amps = f;
    state_.fock_modes = live_;
    trace_.handoff_leakage = leak;
    trace_.handoff_step = t;
}

void ScheduleRunner::inject(const Injection &in) {
    const InjectState &s = in.state;
    if (std::find(live_.begin(), live_.end(), in.mode) != live_.end()) {
        throw validation_error("mode '" + in.mode + "' is already live");
    }
    if (!state_.fock && !inject_gaussian(s)) handoff(current_t_);
    if (!state_.fock) {
        GaussianState g = GaussianState::vacuum({in.mode});
        if (s.kind == "squeezed") g = g.apply(SymplecticGate::squeeze(in.mode, s.r, s.phi));
        if (s.kind == "coherent") g = g.apply(SymplecticGate::displace(in.mode, s.alpha));
        state_.gaussian = state_.gaussian.tensor(g);
    } else {
        int d = schedule_.cutoff;
        FockState f;
        if (s.kind == "vacuum") f = FockState::vacuum({d});
        else if (s.kind == "squeezed") f = squeezed_state(s.r, s.phi, d);
        else if (s.kind == "coherent") f = coherent_state(s.alpha, d);
        else if (s.kind == "fock") {
            if (s.n < 0 || s.n >= d) throw validation_error("Fock input exceeds the cutoff");
            f = FockState::basis({d}, {s.n});
        } else if (s.kind == "cubic") {
            f = cvc::apply_op(squeezed_state(-s.r, 0.0, d), cubic_op(s.gamma, d), 0);
        } else {
            auto it = options_.fock_inputs.find(in.mode);
            if (it == options_.fock_inputs.end()) throw validation_error("no external state supplied for '" + in.mode + "'");
            f = it->second;
            if (f.modes() != 1 || f.dim(0) != d) throw validation_error("external state must be single-mode at the cutoff");
        }
        f.normalize();
        long amps = state_.amps.size() * d;
        if (amps > kMaxHandoffAmplitudes) {
            throw numeric_error("Fock register would exceed 12^4 amplitudes; reduce the cutoff");
        }
        state_.amps = fock_tensor(state_.amps, f);
        state_.fock_modes.push_back(in.mode);
    }
    live_.push_back(in.mode);
    trace_.ledger[in.mode] = {0.0, 0.0};
}

void ScheduleRunner::push_ledger(const InducedOperator &op, const std::vector<std::string> &modes, const Vec &shift) {
    int k = static_cast<int>(modes.size());
    Vec L(2 * k);
    for (int i = 0; i < k; ++i) {
        L(2 * i) = trace_.ledger[modes[i]][0];
        L(2 * i + 1) = trace_.ledger[modes[i]][1];
    }
    Vec next = op.symplectic() * L + shift;
    for (int i = 0; i < k; ++i) trace_.ledger[modes[i]] = {next(2 * i), next(2 * i + 1)};
}

void ScheduleRunner::settle_ledger(const std::string &mode) {
    auto &l = trace_.ledger[mode];
    if (l[0] == 0.0 && l[1] == 0.0) return;
    if (!state_.fock) {
        state_.gaussian = state_.gaussian.displace(mode, -l[0], -l[1]);
    } else {
        cplx alpha(-l[0] / kSqrt2, -l[1] / kSqrt2);
        apply_fock_matrix(displacement_op(alpha, schedule_.cutoff), {mode});
    }
    l = {0.0, 0.0};
}

void ScheduleRunner::apply_fock_matrix(const CMat &U, const std::vector<std::string> &modes) {
    auto pos = [&](const std::string &m) {
        auto it = std::find(state_.fock_modes.begin(), state_.fock_modes.end(), m);
        if (it == state_.fock_modes.end()) throw validation_error("mode '" + m + "' is not in the Fock register");
        return static_cast<int>(it - state_.fock_modes.begin());
    };
    if (modes.size() == 1) {
        state_.amps = cvc::apply_op(state_.amps, U, pos(modes[0]));
    } else {
        state_.amps = apply_two_mode_op(state_.amps, U, pos(modes[0]), pos(modes[1]));
    }
}

void ScheduleRunner::apply_induced(const InducedOperator &op, const std::vector<std::string> &modes) {
    if (!state_.fock) {
        state_.gaussian = state_.gaussian.apply_symplectic(op.symplectic(), modes);
        Vec d = op.displacement();
        for (std::size_t i = 0; i < modes.size(); ++i) {
            if (d(2 * i) != 0.0 || d(2 * i + 1) != 0.0) {
                state_.gaussian = state_.gaussian.displace(modes[i], d(2 * i), d(2 * i + 1));
            }
        }
    } else {
        apply_fock_matrix(op.fock(schedule_.cutoff), modes);
    }
}

void ScheduleRunner::apply_gaussian_finite(const MacroOp &op, Feedforward ff, OutcomeRecord &rec) {
    // The macronode circuit runs on fresh squeezed ancillas standing in for the
    // cluster's time bins; outcomes come from the physical distribution.
    bool pair = op.kind == MacroOp::Kind::Pair;
    OracleCircuit c = pair ? two_mode_macronode_circuit(op.theta, schedule_.squeeze_r)
                           : single_macronode_circuit(op.theta[0], op.theta[1], schedule_.squeeze_r);
    std::map<std::string, std::string> rename;
    for (std::size_t i = 0; i < c.inputs.size(); ++i) rename[c.inputs[i]] = op.modes[i];
    for (const auto &a : c.ancillas) rename[a] = "~" + std::to_string(ancilla_counter_++);
    std::vector<std::string> anc;
    for (const auto &a : c.ancillas) anc.push_back(rename[a]);
    state_.gaussian = state_.gaussian.tensor(GaussianState::vacuum(anc));
    std::vector<double> m;
    for (const auto &o : c.ops) {
        if (auto *g = std::get_if<SymplecticGate>(&o)) {
            SymplecticGate h = *g;
            for (auto &t : h.targets) t = rename[t];
            state_.gaussian = state_.gaussian.apply(h);
        } else {
            const auto &meas = std::get<OracleMeasure>(o);
            auto s = homodyne_sample(state_.gaussian, rename[meas.mode], meas.theta, rng_);
            state_.gaussian = s.state;
            m.push_back(s.outcome);
        }
    }
    for (std::size_t i = 0; i < c.outputs.size(); ++i) state_.gaussian = state_.gaussian.relabel(rename[c.outputs[i]], op.modes[i]);
    rec.homodyne.insert(rec.homodyne.end(), m.begin(), m.end());
    InducedOperator ideal = pair ? two_mode_macronode(op.theta, {m[0], m[1], m[2], m[3]})
                                 : single_macronode(op.theta[0], op.theta[1], m[0], m[1]);
    Vec shift = ideal.displacement();
    if (ff == Feedforward::Immediate) {
        for (std::size_t i = 0; i < op.modes.size(); ++i) {
            state_.gaussian = state_.gaussian.displace(op.modes[i], -shift(2 * i), -shift(2 * i + 1));
        }
    } else {
        push_ledger(ideal, op.modes, shift);
    }
}

void ScheduleRunner::apply_op(const MacroOp &op, Feedforward ff, OutcomeRecord &rec) {
    for (const auto &m : op.modes) check_live(m);
    std::normal_distribution<double> normal(0.0, 1.0);
    if (op.kind == MacroOp::Kind::Operator) {
        auto it = options_.operators.find(op.name);
        if (it == options_.operators.end()) throw validation_error("no operator registered under '" + op.name + "'");
        if (!state_.fock) handoff(current_t_);
        apply_fock_matrix(it->second(schedule_.cutoff), op.modes);
        return;
    }
    if (op.kind == MacroOp::Kind::Cubic) {
        if (!state_.fock) handoff(current_t_);
        // Outcome-dependent displacements and shear are undone by feedforward;
        // the induced gate is R(-pi/2) V(gamma) on an ideal resource.
        for (int i = 0; i < 3; ++i) rec.homodyne.push_back(normal(rng_));
        apply_fock_matrix(macro_operator(op).fock(schedule_.cutoff), op.modes);
        return;
    }
    if (!state_.fock && schedule_.model == SqueezingModel::Finite) {
        apply_gaussian_finite(op, ff, rec);
        return;
    }
    bool pair = op.kind == MacroOp::Kind::Pair;
    std::array<double, 4> m{};
    for (int i = 0; i < (pair ? 4 : 2); ++i) m[i] = normal(rng_);
    rec.homodyne.insert(rec.homodyne.end(), m.begin(), m.begin() + (pair ? 4 : 2));
    if (ff == Feedforward::Immediate) {
        apply_induced(macro_operator(op), op.modes);
    } else {
        InducedOperator full = pair ? two_mode_macronode(op.theta, m) : single_macronode(op.theta[0], op.theta[1], m[0], m[1]);
        apply_induced(full, op.modes);
        push_ledger(full, op.modes, full.displacement());
    }
}

void ScheduleRunner::read(const Readout &r, OutcomeRecord &rec) {
    check_live(r.mode);
    settle_ledger(r.mode);
    if (r.measure == "pnr" && !state_.fock) handoff(current_t_);
    if (r.measure == "state") {
        LiveState out;
        if (!state_.fock) {
            out.gaussian = state_.gaussian.reduced({r.mode});
        } else {
            out = state_;
        }
        trace_.outputs[r.mode] = out;
        live_.erase(std::find(live_.begin(), live_.end(), r.mode));
        done_.push_back(r.mode);
        return;
    }
    if (!state_.fock) {
        auto s = homodyne_sample(state_.gaussian, r.mode, r.theta, rng_);
        state_.gaussian = s.state;
        rec.readout.push_back({r.mode, s.outcome + r.offset});
    } else {
        int pos = static_cast<int>(std::find(state_.fock_modes.begin(), state_.fock_modes.end(), r.mode) -
                                   state_.fock_modes.begin());
        if (r.measure == "pnr") {
            auto s = pnr_sample(state_.amps, pos, rng_);
            state_.amps = s.state;
            rec.counts.push_back({r.mode, s.outcome});
        } else {
            auto s = homodyne_sample_fock(state_.amps, pos, r.theta, rng_);
            state_.amps = s.state;
            rec.readout.push_back({r.mode, s.outcome + r.offset});
        }
        state_.fock_modes.erase(state_.fock_modes.begin() + pos);
    }
    live_.erase(std::find(live_.begin(), live_.end(), r.mode));
    done_.push_back(r.mode);
}

void ScheduleRunner::step(const ScheduleStep &s) {
    current_t_ = s.t;
    OutcomeRecord rec;
    rec.t = s.t;
    rec.action = s.action;
    for (const auto &in : s.inject) inject(in);
    if (schedule_.backend == Backend::Fock && !state_.fock && !live_.empty()) handoff(s.t);
    for (const auto &op : s.ops) apply_op(op, s.feedforward, rec);
    for (const auto &r : s.readout) read(r, rec);
    trace_.records.push_back(rec);
    if (options_.record_states) trace_.snapshots.push_back(corrected_state());
}

void ScheduleRunner::switch_out(const std::string &mode, const CMat &gate) {
    check_live(mode);
    if (!state_.fock) handoff(current_t_);
    settle_ledger(mode);
    if (gate.rows() != schedule_.cutoff || gate.cols() != schedule_.cutoff) {
        throw validation_error("off-cluster gate must match the cutoff");
    }
    apply_fock_matrix(gate, {mode});
}

LiveState ScheduleRunner::corrected_state() const {
    LiveState s = state_;
    for (const auto &m : live_) {
        auto it = trace_.ledger.find(m);
        if (it == trace_.ledger.end()) continue;
        auto l = it->second;
        if (l[0] == 0.0 && l[1] == 0.0) continue;
        if (!s.fock) {
            s.gaussian = s.gaussian.displace(m, -l[0], -l[1]);
        } else {
            int pos = static_cast<int>(std::find(s.fock_modes.begin(), s.fock_modes.end(), m) - s.fock_modes.begin());
            s.amps = cvc::apply_op(s.amps, displacement_op(cplx(-l[0], -l[1]) / kSqrt2, s.cutoff), pos);
        }
    }
    if (!s.fock) s.gaussian = s.gaussian.reduced(live_);
    return s;
}

ScheduleTrace ScheduleRunner::finish() {
    for (const auto &m : std::vector<std::string>(live_)) settle_ledger(m);
    trace_.final_state = state_;
    if (!state_.fock) trace_.final_state.gaussian = state_.gaussian.reduced(live_);
    return trace_;
}

ScheduleTrace run_schedule(const Schedule &schedule, const RunOptions &options) {
    validate_schedule(schedule);
    ScheduleRunner runner(schedule, options);
    for (const auto &s : schedule.steps) runner.step(s);
    return runner.finish();
}

}  // namespace cvc
