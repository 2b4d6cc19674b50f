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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <mutex>
#include <numeric>
#include <random>
#include <set>

#include "cvc/macronode.h"

namespace cvc {

using nlohmann::json;

namespace {

std::string qname(int i) { return "q" + std::to_string(i); }

std::vector<std::string> qnames(int n) {
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.push_back(qname(i));
    return out;
}

ScheduleStep make_step(int t, const std::string &top, const std::string &bottom, const std::string &action,
                       const std::string &note) {
    ScheduleStep s;
    s.t = t;
    s.switch_top = top;
    s.switch_bottom = bottom;
    s.action = action;
    s.note = note;
    return s;
}

CMat kron(const CMat &A, const CMat &B) {
    CMat out(A.rows() * B.rows(), A.cols() * B.cols());
    for (int i = 0; i < A.rows(); ++i) {
        for (int j = 0; j < A.cols(); ++j) out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    }
    return out;
}

Mat kron(const Mat &A, const Mat &B) {
    Mat out(A.rows() * B.rows(), A.cols() * B.cols());
    for (int i = 0; i < A.rows(); ++i) {
        for (int j = 0; j < A.cols(); ++j) out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    }
    return out;
}

struct Quadrature {
    Vec x, w;
};

// Gauss-Legendre nodes on [-1, 1] by Golub-Welsch.
const Quadrature &gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, Quadrature> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    Mat J = Mat::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        double b = k / std::sqrt(4.0 * k * k - 1.0);
        J(k, k - 1) = J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(J);
    Quadrature q{es.eigenvalues(), Vec(n)};
    for (int i = 0; i < n; ++i) q.w(i) = 2.0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
    return cache.emplace(n, q).first->second;
}

// Composite Gauss-Legendre on [a, b] with panels no wider than `panel`.
Quadrature composite(double a, double b, double panel = 0.25, int order = 20) {
    int panels = std::max(1, static_cast<int>(std::ceil((b - a) / panel)));
    const Quadrature &g = gauss_legendre(order);
    Quadrature q{Vec(panels * order), Vec(panels * order)};
    double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        double lo = a + p * h;
        for (int i = 0; i < order; ++i) {
            q.x(p * order + i) = lo + 0.5 * h * (g.x(i) + 1.0);
            q.w(p * order + i) = 0.5 * h * g.w(i);
        }
    }
    return q;
}

bool near_identity(const Mat &S, double tol = 1e-12) { return (S - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < tol; }

}  // namespace

// ---------------------------------------------------------------------------
// Layered compilation.

LogicalGate LogicalGate::symplectic(int m, const Mat &S) {
    LogicalGate g;
    g.kind = Kind::Symplectic;
    g.modes = {m};
    g.S = S;
    return g;
}

LogicalGate LogicalGate::rotate(int m, double phi) { return symplectic(m, rotation_matrix(phi)); }

LogicalGate LogicalGate::beamsplit(int j, int k, double delta) {
    LogicalGate g;
    g.kind = Kind::Beamsplit;
    g.modes = {j, k};
    g.delta = delta;
    return g;
}

LogicalGate LogicalGate::cubic(int m, double gamma) {
    LogicalGate g;
    g.kind = Kind::Cubic;
    g.modes = {m};
    g.gamma = gamma;
    return g;
}

LogicalGate LogicalGate::op(const std::vector<int> &modes, const std::string &name) {
    LogicalGate g;
    g.kind = Kind::Operator;
    g.modes = modes;
    g.name = name;
    return g;
}

std::vector<LogicalGate> real_beamsplitter_gates(int j, int k, double theta) {
    return {LogicalGate::rotate(k, kPi / 2), LogicalGate::beamsplit(j, k, theta), LogicalGate::rotate(k, -kPi / 2)};
}

std::vector<LogicalGate> cz_gates(int j, int k, double g) {
    std::vector<LogicalGate> out = real_beamsplitter_gates(j, k, kPi / 4);
    out.push_back(LogicalGate::symplectic(j, shear_matrix(-g)));
    out.push_back(LogicalGate::symplectic(k, shear_matrix(g)));
    for (const auto &b : real_beamsplitter_gates(j, k, -kPi / 4)) out.push_back(b);
    return out;
}

std::vector<std::vector<MacroOp>> layer_gates(const std::vector<LogicalGate> &gates,
                                              const std::vector<std::string> &names) {
    int n = static_cast<int>(names.size());
    std::vector<std::pair<MacroOp, std::vector<int>>> seq;
    std::vector<Mat> pending(n, Mat::Identity(2, 2));
    auto flush = [&](int m) {
        Mat S = pending[m];
        pending[m] = Mat::Identity(2, 2);
        if (near_identity(S)) return;
        if ((S * S.transpose() - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12) {
            double phi = std::atan2(S(1, 0), S(0, 0));
            if ((rotation_matrix(phi) - S).cwiseAbs().maxCoeff() > 1e-9) phi = -phi;
            seq.push_back({rotate_op(names[m], phi), {m}});
            return;
        }
        for (const auto &op : symplectic_ops(names[m], S)) seq.push_back({op, {m}});
    };
    for (const auto &g : gates) {
        for (int m : g.modes) {
            if (m < 0 || m >= n) throw validation_error("gate mode index out of range");
        }
        switch (g.kind) {
            case LogicalGate::Kind::Symplectic:
                pending[g.modes[0]] = g.S * pending[g.modes[0]];
                break;
            case LogicalGate::Kind::Beamsplit:
                flush(g.modes[0]);
                flush(g.modes[1]);
                seq.push_back({beamsplitter_op_macro(names[g.modes[0]], names[g.modes[1]], g.delta), g.modes});
                break;
            case LogicalGate::Kind::Cubic:
                flush(g.modes[0]);
                seq.push_back({cubic_op_macro(names[g.modes[0]], g.gamma), g.modes});
                // The macronode leaves R(-pi/2) behind.
                pending[g.modes[0]] = rotation_matrix(kPi / 2);
                break;
            case LogicalGate::Kind::Operator: {
                for (int m : g.modes) flush(m);
                std::vector<std::string> ms;
                for (int m : g.modes) ms.push_back(names[m]);
                seq.push_back({operator_op(ms, g.name), g.modes});
                break;
            }
        }
    }
    for (int m = 0; m < n; ++m) flush(m);

    std::vector<int> level(n, 0);
    std::vector<std::vector<MacroOp>> layers;
    auto kind_of = [](const std::vector<MacroOp> &layer, MacroOp::Kind k) {
        return std::any_of(layer.begin(), layer.end(), [k](const MacroOp &o) { return o.kind == k; });
    };
    for (auto &[op, modes] : seq) {
        int l = 0;
        for (int m : modes) l = std::max(l, level[m]);
        for (;; ++l) {
            if (l >= static_cast<int>(layers.size())) layers.resize(l + 1);
            bool clash = (op.kind == MacroOp::Kind::Cubic && kind_of(layers[l], MacroOp::Kind::Operator)) ||
                         (op.kind == MacroOp::Kind::Operator && kind_of(layers[l], MacroOp::Kind::Cubic));
            if (!clash) break;
        }
        layers[l].push_back(op);
        for (int m : modes) level[m] = l + 1;
    }
    for (auto &layer : layers) {
        std::set<std::string> used;
        for (const auto &op : layer) used.insert(op.modes.begin(), op.modes.end());
        for (const auto &nm : names) {
            if (!used.count(nm)) layer.push_back(identity_op(nm));
        }
    }
    return layers;
}

namespace {

std::string layer_action(const std::vector<MacroOp> &layer) {
    for (const auto &op : layer) {
        if (op.kind == MacroOp::Kind::Cubic) return "cubic";
        if (op.kind == MacroOp::Kind::Operator) return "operator";
    }
    return "homodyne";
}

std::vector<MacroOp> identity_layer(const std::vector<std::string> &names) {
    std::vector<MacroOp> out;
    for (const auto &n : names) out.push_back(identity_op(n));
    return out;
}

}  // namespace

Mat macro_ops_symplectic(const std::vector<MacroOp> &ops, const std::vector<std::string> &modes, double r) {
    int n = static_cast<int>(modes.size());
    auto index = [&](const std::string &m) {
        auto it = std::find(modes.begin(), modes.end(), m);
        if (it == modes.end()) throw validation_error("op on undeclared mode '" + m + "'");
        return static_cast<int>(it - modes.begin());
    };
    if (r < 0) {
        Mat S = Mat::Identity(2 * n, 2 * n);
        for (const auto &op : ops) {
            std::vector<int> t;
            for (const auto &m : op.modes) t.push_back(index(m));
            S = embed(macro_operator(op).symplectic(), t, n) * S;
        }
        return S;
    }
    OracleCircuit chain;
    std::vector<std::string> current;
    for (int i = 0; i < n; ++i) current.push_back("in" + std::to_string(i));
    chain.inputs = current;
    int fresh = 0;
    for (const auto &op : ops) {
        if (op.kind != MacroOp::Kind::Single && op.kind != MacroOp::Kind::Pair) {
            throw validation_error("only Gaussian macronodes have a circuit oracle");
        }
        OracleCircuit c = op.kind == MacroOp::Kind::Pair ? two_mode_macronode_circuit(op.theta, r)
                                                          : single_macronode_circuit(op.theta[0], op.theta[1], r);
        std::map<std::string, std::string> rename;
        for (std::size_t i = 0; i < c.inputs.size(); ++i) rename[c.inputs[i]] = current[index(op.modes[i])];
        for (const auto &a : c.ancillas) {
            rename[a] = "w" + std::to_string(fresh++);
            chain.ancillas.push_back(rename[a]);
        }
        for (const auto &o : c.ops) {
            if (const auto *g = std::get_if<SymplecticGate>(&o)) {
                SymplecticGate h = *g;
                for (auto &t : h.targets) t = rename.at(t);
                chain.ops.push_back(h);
            } else {
                OracleMeasure m = std::get<OracleMeasure>(o);
                m.mode = rename.at(m.mode);
                chain.ops.push_back(m);
            }
        }
        for (std::size_t i = 0; i < c.outputs.size(); ++i) current[index(op.modes[i])] = rename.at(c.outputs[i]);
    }
    chain.outputs = current;
    return extract_implemented_symplectic(chain);
}

// ---------------------------------------------------------------------------
// Off-cluster operators carried in schedule files.

namespace {

OperatorFactory cached(std::function<CMat(int)> build) {
    auto cache = std::make_shared<std::map<int, CMat>>();
    auto mu = std::make_shared<std::mutex>();
    return [build, cache, mu](int d) {
        std::lock_guard<std::mutex> lock(*mu);
        auto it = cache->find(d);
        if (it != cache->end()) return it->second;
        return cache->emplace(d, build(d)).first->second;
    };
}

}  // namespace

void register_operators(const Schedule &schedule, RunOptions &options) {
    if (!schedule.extra.is_object() || !schedule.extra.contains("operators")) return;
    for (const auto &[name, spec] : schedule.extra["operators"].items()) {
        std::string type = spec.at("type").get<std::string>();
        if (type == "xphase") {
            IqpGate g;
            g.kind = IqpGate::Kind::XPhase;
            g.modes = {0};
            g.order = spec.at("order").get<int>();
            g.param = spec.at("lambda").get<double>();
            options.operators[name] = cached([g](int d) { return iqp_gate_fock(g, d); });
        } else if (type == "grover") {
            GroverInstance gi = grover_from_json(spec.at("instance"));
            std::string which = spec.at("which").get<std::string>();
            options.operators[name] = cached([gi, which](int d) {
                GroverInstance g = gi;
                g.cutoff = d;
                if (which == "initial") return grover_initial_inversion(g);
                return grover_inversion(g, which == "exact");
            });
        } else {
            throw validation_error("unknown operator type '" + type + "'");
        }
    }
}

// ---------------------------------------------------------------------------
// Gaussian boson sampling.

namespace {

json complex_matrix_json(const CMat &U) {
    json rows = json::array();
    for (int i = 0; i < U.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < U.cols(); ++j) row.push_back({U(i, j).real(), U(i, j).imag()});
        rows.push_back(row);
    }
    return rows;
}

CMat complex_matrix_from_json(const json &j) {
    int n = static_cast<int>(j.size());
    CMat U(n, n);
    for (int i = 0; i < n; ++i) {
        if (j[i].size() != static_cast<std::size_t>(n)) throw validation_error("interferometer must be square");
        for (int k = 0; k < n; ++k) {
            const json &e = j[i][k];
            U(i, k) = e.is_number() ? cplx(e.get<double>(), 0.0) : cplx(e.at(0).get<double>(), e.at(1).get<double>());
        }
    }
    return U;
}

}  // namespace

GbsInstance gbs_from_json(const json &j) {
    try {
        GbsInstance g;
        g.n_modes = j.at("n_modes").get<int>();
        g.squeeze = j.at("squeeze").get<std::vector<double>>();
        g.unitary = complex_matrix_from_json(j.at("unitary"));
        g.cutoff = j.value("cutoff", 12);
        check_gbs(g);
        return g;
    } catch (const json::exception &e) {
        throw validation_error(std::string("malformed GBS instance: ") + e.what());
    }
}

json gbs_to_json(const GbsInstance &g) {
    return json{{"n_modes", g.n_modes}, {"squeeze", g.squeeze}, {"unitary", complex_matrix_json(g.unitary)},
                {"cutoff", g.cutoff}};
}

GbsInstance load_gbs(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception &e) {
        throw validation_error("'" + path + "' is not valid JSON: " + e.what());
    }
    return gbs_from_json(j);
}

void check_gbs(const GbsInstance &g) {
    if (g.n_modes < 1) throw validation_error("GBS instance needs at least one mode");
    if (static_cast<int>(g.squeeze.size()) != g.n_modes) throw validation_error("one squeezing value per mode");
    if (g.unitary.rows() != g.n_modes || g.unitary.cols() != g.n_modes) {
        throw validation_error("interferometer size does not match the mode count");
    }
    double err = (g.unitary.adjoint() * g.unitary - CMat::Identity(g.n_modes, g.n_modes)).cwiseAbs().maxCoeff();
    if (err > 1e-10) throw validation_error("interferometer is not unitary (error " + std::to_string(err) + ")");
    if (g.cutoff < 2) throw validation_error("GBS cutoff must be at least 2");
}

CMat random_unitary(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    CMat Z(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) Z(i, j) = cplx(nd(rng), nd(rng)) / kSqrt2;
    }
    Eigen::HouseholderQR<CMat> qr(Z);
    CMat Q = qr.householderQ();
    CMat R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j) {
        cplx d = R(j, j);
        Q.col(j) *= d / std::abs(d);
    }
    return Q;
}

namespace {

cplx hafnian_rec(const CMat &A, std::vector<int> &idx) {
    if (idx.empty()) return 1.0;
    int i = idx[0];
    cplx sum = 0.0;
    for (std::size_t k = 1; k < idx.size(); ++k) {
        int j = idx[k];
        if (A(i, j) == 0.0) continue;
        std::vector<int> rest;
        rest.reserve(idx.size() - 2);
        for (std::size_t l = 1; l < idx.size(); ++l) {
            if (l != k) rest.push_back(idx[l]);
        }
        sum += A(i, j) * hafnian_rec(A, rest);
    }
    return sum;
}

}  // namespace

cplx hafnian(const CMat &A) {
    if (A.rows() != A.cols()) throw validation_error("hafnian needs a square matrix");
    if (A.rows() % 2) return 0.0;
    std::vector<int> idx(A.rows());
    std::iota(idx.begin(), idx.end(), 0);
    return hafnian_rec(A, idx);
}

double gbs_probability(const GbsInstance &g, const std::vector<int> &pattern) {
    if (static_cast<int>(pattern.size()) != g.n_modes) throw validation_error("pattern length must match the modes");
    int total = 0;
    for (int k : pattern) {
        if (k < 0) throw validation_error("photon counts are non-negative");
        total += k;
    }
    if (total % 2) return 0.0;
    if (total > 16) throw validation_error("hafnian evaluation limited to 16 photons");
    CMat B = g.unitary * Vec(Eigen::Map<const Vec>(g.squeeze.data(), g.n_modes).array().tanh()).asDiagonal() *
             g.unitary.transpose();
    std::vector<int> rep;
    double fact = 1.0;
    for (int i = 0; i < g.n_modes; ++i) {
        for (int k = 0; k < pattern[i]; ++k) {
            rep.push_back(i);
            fact *= k + 1;
        }
    }
    CMat Bn(rep.size(), rep.size());
    for (std::size_t a = 0; a < rep.size(); ++a) {
        for (std::size_t b = 0; b < rep.size(); ++b) Bn(a, b) = B(rep[a], rep[b]);
    }
    double norm = 1.0;
    for (double r : g.squeeze) norm /= std::cosh(r);
    return norm * std::norm(hafnian(Bn)) / fact;
}

U2Block decompose_u2(const CMat &B, int mode) {
    U2Block b;
    b.mode = mode;
    double a00 = std::abs(B(0, 0)), a01 = std::abs(B(0, 1));
    b.delta = std::atan2(a01, a00);
    b.phi1 = a01 > 1e-14 ? std::arg(B(0, 1)) - kPi / 2 : 0.0;
    b.phi3 = std::arg(B(0, 0)) - b.phi1;
    if (std::cos(b.delta) > 1e-8) {
        b.phi2 = std::arg(B(1, 1));
    } else {
        b.phi3 = 0.0;
        b.phi2 = std::arg(B(1, 0)) - kPi / 2 - b.phi3;
    }
    return b;
}

CMat u2_matrix(const U2Block &b) {
    CMat W(2, 2);
    double c = std::cos(b.delta), s = std::sin(b.delta);
    W << c, cplx(0, s), cplx(0, s), c;
    CMat L = CMat::Zero(2, 2), R = CMat::Zero(2, 2);
    L(0, 0) = std::polar(1.0, b.phi1);
    L(1, 1) = std::polar(1.0, b.phi2);
    R(0, 0) = std::polar(1.0, b.phi3);
    R(1, 1) = 1.0;
    return L * W * R;
}

Interferometer decompose_interferometer(const CMat &U) {
    int n = static_cast<int>(U.rows());
    CMat V = U;
    std::vector<U2Block> nulling;
    for (int col = 0; col < n - 1; ++col) {
        for (int row = n - 1; row > col; --row) {
            cplx a = V(row - 1, col), b = V(row, col);
            double rho = std::sqrt(std::norm(a) + std::norm(b));
            if (rho < 1e-300 || std::abs(b) < 1e-15) continue;
            CMat G(2, 2);
            G << std::conj(a), std::conj(b), -b, a;
            G /= rho;
            V.middleRows(row - 1, 2) = (G * V.middleRows(row - 1, 2)).eval();
            nulling.push_back(decompose_u2(G.adjoint(), row - 1));
        }
    }
    Interferometer I;
    for (int i = 0; i < n; ++i) I.phases.push_back(std::arg(V(i, i)));
    I.blocks.assign(nulling.rbegin(), nulling.rend());
    return I;
}

std::vector<LogicalGate> interferometer_gates(const Interferometer &I) {
    std::vector<LogicalGate> out;
    for (std::size_t i = 0; i < I.phases.size(); ++i) out.push_back(LogicalGate::rotate(static_cast<int>(i), I.phases[i]));
    for (const auto &b : I.blocks) {
        out.push_back(LogicalGate::rotate(b.mode, b.phi3));
        out.push_back(LogicalGate::beamsplit(b.mode, b.mode + 1, b.delta));
        out.push_back(LogicalGate::rotate(b.mode, b.phi1));
        out.push_back(LogicalGate::rotate(b.mode + 1, b.phi2));
    }
    return out;
}

Vec gbs_fock_distribution(const GbsInstance &g, int d) {
    check_gbs(g);
    std::vector<std::string> names = qnames(g.n_modes);
    GaussianState s = GaussianState::vacuum({});
    for (int i = 0; i < g.n_modes; ++i) s = s.tensor(GaussianState::squeezed(names[i], g.squeeze[i]));
    FockState f = gaussian_to_fock(s, d).state;
    Interferometer I = decompose_interferometer(g.unitary);
    for (int i = 0; i < g.n_modes; ++i) f = apply_op(f, rotation_op(I.phases[i], d), i);
    for (const auto &b : I.blocks) {
        int j = b.mode, k = b.mode + 1;
        f = apply_op(f, rotation_op(b.phi3, d), j);
        f = apply_op(f, rotation_op(-kPi / 2, d), k);
        f = apply_two_mode_op(f, beamsplitter_op(b.delta, d), j, k);
        f = apply_op(f, rotation_op(kPi / 2, d), k);
        f = apply_op(f, rotation_op(b.phi1, d), j);
        f = apply_op(f, rotation_op(b.phi2, d), k);
    }
    return f.amps().cwiseAbs2();
}

Schedule gbs_compile(const GbsInstance &g) {
    check_gbs(g);
    Schedule s;
    s.name = "gbs";
    s.dimension = 2;
    s.cutoff = g.cutoff;
    s.modes = qnames(g.n_modes);
    s.extra = json{{"kind", "gbs"}, {"instance", gbs_to_json(g)}};
    auto layers = layer_gates(interferometer_gates(decompose_interferometer(g.unitary)), s.modes);
    int t = 1;
    auto inject = [&](const std::vector<int> &which, const std::string &note) {
        ScheduleStep st = make_step(t++, "s2", "s2", "inject", note);
        for (int i : which) {
            st.inject.push_back({s.modes[i], InjectState{}});
            st.ops.push_back(squeeze_op_macro(s.modes[i], g.squeeze[i]));
        }
        return st;
    };
    if (g.n_modes == 4) {
        s.steps.push_back(make_step(t++, "s1", "s1", "homodyne", "phase shift"));
        s.steps.push_back(inject({0, 1}, "inject inputs, squeezing"));
        ScheduleStep t3 = make_step(t++, "s1", "s1", "homodyne", "phase shift");
        t3.ops = identity_layer({s.modes[0], s.modes[1]});
        s.steps.push_back(t3);
        ScheduleStep t4 = inject({2, 3}, "inject inputs, squeezing");
        for (int i : {0, 1}) t4.ops.push_back(identity_op(s.modes[i]));
        s.steps.push_back(t4);
        s.steps.push_back(make_step(t++, "s1", "s1", "none", "none"));
        if (layers.size() > 20) throw validation_error("interferometer needs more than 20 layers");
        while (layers.size() < 20) layers.push_back(identity_layer(s.modes));
    } else {
        std::vector<int> all(g.n_modes);
        std::iota(all.begin(), all.end(), 0);
        s.steps.push_back(inject(all, "inject inputs, squeezing"));
    }
    for (const auto &layer : layers) {
        ScheduleStep st = make_step(t++, "s1", "s1", layer_action(layer), "interferometer");
        st.ops = layer;
        s.steps.push_back(st);
    }
    for (int i = 0; i < g.n_modes; ++i) {
        ScheduleStep st = make_step(t++, "s1", "s3", "readout", "photon number detection");
        st.readout.push_back({s.modes[i], "pnr", 0.0, 0.0});
        s.steps.push_back(st);
    }
    return s;
}

GbsRun gbs_run(const GbsInstance &g, const Schedule &schedule, int shots, std::uint64_t seed) {
    check_gbs(g);
    if (shots < 1) throw validation_error("shots must be positive");
    validate_schedule(schedule);
    std::size_t first_read = 0;
    while (first_read < schedule.steps.size() && schedule.steps[first_read].readout.empty()) ++first_read;
    int d = schedule.cutoff;
    std::vector<std::string> modes = schedule.modes;

    auto prefix_distribution = [&](std::uint64_t run_seed) {
        RunOptions opt;
        opt.seed = run_seed;
        ScheduleRunner runner(schedule, opt);
        for (std::size_t i = 0; i < first_read; ++i) runner.step(schedule.steps[i]);
        LiveState st = runner.corrected_state();
        FockState f;
        if (!st.fock) {
            auto conv = gaussian_to_fock(st.gaussian.reduced(modes), d);
            if (conv.leakage > 1e-3) {
                throw numeric_error("photon-number leakage " + std::to_string(conv.leakage) + " at cutoff " +
                                    std::to_string(d) + "; raise the cutoff");
            }
            f = conv.state;
        } else {
            if (st.fock_modes != modes) throw validation_error("Fock register order differs from the mode list");
            f = st.amps;
        }
        f.normalize();
        Vec p = f.amps().cwiseAbs2();
        return p;
    };
    auto decode = [&](long idx) {
        std::vector<int> pat(modes.size());
        for (int i = static_cast<int>(modes.size()) - 1; i >= 0; --i) {
            pat[i] = static_cast<int>(idx % d);
            idx /= d;
        }
        return pat;
    };

    GbsRun out;
    out.shots = shots;
    std::mt19937_64 rng(seed);
    if (schedule.model == SqueezingModel::Ideal) {
        Vec p = prefix_distribution(seed);
        std::discrete_distribution<long> dist(p.data(), p.data() + p.size());
        for (int s = 0; s < shots; ++s) out.counts[decode(dist(rng))]++;
    } else {
        for (int s = 0; s < shots; ++s) {
            Vec p = prefix_distribution(seed + 1000003ULL * (s + 1));
            std::discrete_distribution<long> dist(p.data(), p.data() + p.size());
            out.counts[decode(dist(rng))]++;
        }
    }

    // Total variation against the hafnian distribution; patterns beyond the
    // hafnian range are pooled into one bucket.
    const int max_photons = 8;
    double tv = 0.0, ideal = 0.0, emp_in = 0.0;
    std::vector<int> pat(modes.size(), 0);
    std::function<void(int, int)> walk = [&](int i, int left) {
        if (i == static_cast<int>(pat.size())) {
            double q = gbs_probability(g, pat);
            auto it = out.counts.find(pat);
            double e = it == out.counts.end() ? 0.0 : static_cast<double>(it->second) / shots;
            ideal += q;
            emp_in += e;
            tv += std::abs(q - e);
            return;
        }
        for (int k = 0; k <= left && k < d; ++k) {
            pat[i] = k;
            walk(i + 1, left - k);
        }
        pat[i] = 0;
    };
    walk(0, max_photons);
    tv += std::abs((1.0 - ideal) - (1.0 - emp_in));
    out.tv_distance = 0.5 * tv;
    out.ideal_mass = ideal;
    return out;
}

// ---------------------------------------------------------------------------
// CV-IQP.

namespace {

const std::map<std::string, IqpGate::Kind> kIqpKinds = {{"Z", IqpGate::Kind::Z},
                                                        {"V", IqpGate::Kind::V},
                                                        {"CZ", IqpGate::Kind::CZ},
                                                        {"xphase", IqpGate::Kind::XPhase},
                                                        {"X", IqpGate::Kind::XShift}};

std::string iqp_kind_name(IqpGate::Kind k) {
    for (const auto &[n, v] : kIqpKinds) {
        if (v == k) return n;
    }
    return "?";
}

int iqp_rank(const IqpGate &g) {
    switch (g.kind) {
        case IqpGate::Kind::CZ:
            return 0;
        case IqpGate::Kind::V:
        case IqpGate::Kind::XPhase:
            return 1;
        case IqpGate::Kind::Z:
            return 2;
        case IqpGate::Kind::XShift:
            break;
    }
    throw validation_error("gate kind '" + iqp_kind_name(g.kind) + "' does not commute with position-diagonal gates");
}

void check_iqp(const IqpCircuit &c) {
    if (c.n_modes < 1) throw validation_error("IQP circuit needs at least one mode");
    for (const auto &g : c.gates) {
        std::size_t want = g.kind == IqpGate::Kind::CZ ? 2 : 1;
        if (g.modes.size() != want) throw validation_error("IQP gate has the wrong number of modes");
        for (int m : g.modes) {
            if (m < 0 || m >= c.n_modes) throw validation_error("IQP gate mode out of range");
        }
        if (want == 2 && g.modes[0] == g.modes[1]) throw validation_error("C_Z needs two distinct modes");
        if (g.kind == IqpGate::Kind::XPhase && g.order < 1) throw validation_error("x-phase order must be positive");
    }
}

}  // namespace

IqpCircuit iqp_from_json(const json &j) {
    try {
        IqpCircuit c;
        c.n_modes = j.at("n_modes").get<int>();
        c.squeeze = j.value("squeeze", 0.5);
        for (const auto &gj : j.at("gates")) {
            IqpGate g;
            std::string k = gj.at("kind").get<std::string>();
            auto it = kIqpKinds.find(k);
            if (it == kIqpKinds.end()) throw validation_error("unknown IQP gate kind '" + k + "'");
            g.kind = it->second;
            g.modes = gj.at("modes").get<std::vector<int>>();
            g.param = gj.at("param").get<double>();
            g.order = gj.value("order", 0);
            c.gates.push_back(g);
        }
        check_iqp(c);
        return c;
    } catch (const json::exception &e) {
        throw validation_error(std::string("malformed IQP circuit: ") + e.what());
    }
}

json iqp_to_json(const IqpCircuit &c) {
    json gates = json::array();
    for (const auto &g : c.gates) {
        json gj{{"kind", iqp_kind_name(g.kind)}, {"modes", g.modes}, {"param", g.param}};
        if (g.kind == IqpGate::Kind::XPhase) gj["order"] = g.order;
        gates.push_back(gj);
    }
    return json{{"n_modes", c.n_modes}, {"squeeze", c.squeeze}, {"gates", gates}};
}

IqpCircuit iqp_bundled() {
    using K = IqpGate::Kind;
    IqpCircuit c;
    c.n_modes = 4;
    c.squeeze = 0.2;
    c.gates = {{K::Z, {0}, 0.3, 0},   {K::CZ, {0, 1}, 0.5, 0}, {K::V, {0}, 0.1, 0},     {K::Z, {2}, -0.2, 0},
               {K::CZ, {2, 3}, 0.5, 0}, {K::V, {1}, 0.1, 0},   {K::CZ, {1, 2}, 0.5, 0}, {K::V, {2}, 0.1, 0},
               {K::Z, {3}, 0.1, 0},   {K::V, {3}, 0.1, 0},     {K::Z, {1}, 0.2, 0}};
    return c;
}

IqpCircuit iqp_random(int n_modes, int n_gates, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> kind(0, 3), mode(0, n_modes - 1);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    IqpCircuit c;
    c.n_modes = n_modes;
    for (int i = 0; i < n_gates; ++i) {
        IqpGate g;
        int k = n_modes < 2 ? kind(rng) % 2 * 3 : kind(rng);
        switch (k) {
            case 0:
                g.kind = IqpGate::Kind::Z;
                break;
            case 1:
                g.kind = IqpGate::Kind::V;
                break;
            case 2:
                g.kind = IqpGate::Kind::CZ;
                break;
            default:
                g.kind = IqpGate::Kind::XPhase;
                g.order = 4;
        }
        g.modes = {mode(rng)};
        if (g.kind == IqpGate::Kind::CZ) {
            int b = mode(rng);
            while (b == g.modes[0]) b = mode(rng);
            g.modes.push_back(b);
        }
        g.param = g.kind == IqpGate::Kind::XPhase ? 0.05 * u(rng) : u(rng);
        c.gates.push_back(g);
    }
    return c;
}

IqpCircuit iqp_rearrange(const IqpCircuit &c) {
    check_iqp(c);
    IqpCircuit out = c;
    for (const auto &g : out.gates) iqp_rank(g);
    std::stable_sort(out.gates.begin(), out.gates.end(),
                     [](const IqpGate &a, const IqpGate &b) { return iqp_rank(a) < iqp_rank(b); });
    return out;
}

std::function<cplx(double)> iqp_phase(const IqpGate &g) {
    double p = g.param;
    switch (g.kind) {
        case IqpGate::Kind::Z:
            return [p](double x) { return std::polar(1.0, p * x); };
        case IqpGate::Kind::V:
            return [p](double x) { return std::polar(1.0, p * x * x * x / 3.0); };
        case IqpGate::Kind::XPhase: {
            int k = g.order;
            return [p, k](double x) { return std::polar(1.0, p * std::pow(x, k)); };
        }
        default:
            break;
    }
    throw validation_error("gate has no single-mode position phase");
}

CMat iqp_gate_fock(const IqpGate &g, int d) {
    if (g.kind == IqpGate::Kind::CZ) {
        double p = g.param;
        return multiplication_op_dvr_2d([p](double a, double b) { return std::polar(1.0, p * a * b); }, d);
    }
    if (g.kind == IqpGate::Kind::XShift) return x_shift_op(g.param, d);
    return multiplication_op_dvr(iqp_phase(g), d);
}

CMat iqp_unitary(const IqpCircuit &c, int d) {
    check_iqp(c);
    std::vector<int> dims(c.n_modes, d);
    long D = 1;
    for (int i = 0; i < c.n_modes; ++i) D *= d;
    CMat U = CMat::Identity(D, D);
    for (const auto &g : c.gates) {
        CMat G = iqp_gate_fock(g, d);
        for (long col = 0; col < D; ++col) {
            FockState s(dims, U.col(col));
            s = g.modes.size() == 1 ? apply_op(s, G, g.modes[0]) : apply_two_mode_op(s, G, g.modes[0], g.modes[1]);
            U.col(col) = s.amps();
        }
    }
    return U;
}

Schedule iqp_compile(const IqpCircuit &circuit) {
    IqpCircuit c = iqp_rearrange(circuit);
    int n = c.n_modes;
    Schedule s;
    s.name = "iqp";
    s.dimension = 2;
    s.modes = qnames(n);
    s.cutoff = 12;
    s.extra = json{{"kind", "iqp"}, {"circuit", iqp_to_json(circuit)}, {"operators", json::object()}};
    std::vector<LogicalGate> cz;
    std::vector<IqpGate> cubic, higher;
    std::vector<double> offsets(n, 0.0);
    for (const auto &g : c.gates) {
        switch (g.kind) {
            case IqpGate::Kind::CZ:
                for (const auto &lg : cz_gates(g.modes[0], g.modes[1], g.param)) cz.push_back(lg);
                break;
            case IqpGate::Kind::V:
                cubic.push_back(g);
                break;
            case IqpGate::Kind::XPhase:
                higher.push_back(g);
                break;
            case IqpGate::Kind::Z:
                // exp(i s x) shifts p by s.
                offsets[g.modes[0]] += g.param;
                break;
            case IqpGate::Kind::XShift:
                break;
        }
    }
    bool four = n == 4;
    int t = 1;
    auto inject = [&](const std::vector<int> &which, const std::vector<int> &idle) {
        ScheduleStep st = make_step(t++, "s2", "s2", "inject", "inject inputs, momentum squeezing");
        for (int i : which) {
            st.inject.push_back({s.modes[i], InjectState{}});
            st.ops.push_back(squeeze_op_macro(s.modes[i], -c.squeeze));
        }
        for (int i : idle) st.ops.push_back(identity_op(s.modes[i]));
        return st;
    };
    if (four) {
        s.steps.push_back(make_step(t++, "s1", "s1", "homodyne", "phase shift"));
        s.steps.push_back(inject({0, 1}, {}));
        ScheduleStep t3 = make_step(t++, "s1", "s1", "homodyne", "phase shift");
        t3.ops = identity_layer({s.modes[0], s.modes[1]});
        s.steps.push_back(t3);
        s.steps.push_back(inject({2, 3}, {0, 1}));
        s.steps.push_back(make_step(t++, "s1", "s1", "none", "none"));
    } else {
        std::vector<int> all(n);
        std::iota(all.begin(), all.end(), 0);
        s.steps.push_back(inject(all, {}));
    }
    auto layers = cz.empty() ? std::vector<std::vector<MacroOp>>{} : layer_gates(cz, s.modes);
    if (four) {
        if (layers.size() > 20) throw validation_error("C_Z block needs more than 20 layers");
        while (layers.size() < 20) layers.push_back(identity_layer(s.modes));
    }
    for (const auto &layer : layers) {
        ScheduleStep st = make_step(t++, "s1", "s1", layer_action(layer), "C_Z block");
        st.ops = layer;
        s.steps.push_back(st);
    }
    if (four) {
        ScheduleStep st = make_step(t++, "s1", "s1", "homodyne", "phase shift");
        st.ops = identity_layer(s.modes);
        s.steps.push_back(st);
    }
    // Two cubic macronodes per step; each leaves R(-pi/2) for the next step to undo.
    for (std::size_t i = 0; i < cubic.size();) {
        ScheduleStep st = make_step(t++, "s1", "s1", "cubic", "inject cubic phase state, cubic phase gate");
        ScheduleStep fix = make_step(t++, "s1", "s1", "homodyne", "phase shifts");
        std::set<int> used;
        std::size_t j = i;
        for (; j < cubic.size() && used.size() < 2; ++j) {
            int m = cubic[j].modes[0];
            if (used.count(m)) break;
            used.insert(m);
            st.ops.push_back(cubic_op_macro(s.modes[m], cubic[j].param));
            fix.ops.push_back(rotate_op(s.modes[m], kPi / 2));
        }
        i = j;
        for (int m = 0; m < n; ++m) {
            if (!used.count(m)) {
                st.ops.push_back(identity_op(s.modes[m]));
                fix.ops.push_back(identity_op(s.modes[m]));
            }
        }
        s.steps.push_back(st);
        s.steps.push_back(fix);
    }
    for (const auto &g : higher) {
        std::string name = "xphase" + std::to_string(g.order) + "_" + std::to_string(s.steps.size());
        s.extra["operators"][name] = json{{"type", "xphase"}, {"order", g.order}, {"lambda", g.param}};
        ScheduleStep st = make_step(t++, "s1", "s1", "operator", "higher-order x-phase gate");
        st.ops.push_back(operator_op({s.modes[g.modes[0]]}, name));
        s.steps.push_back(st);
    }
    if (four) {
        for (int k = 0; k < 5; ++k) {
            ScheduleStep st = make_step(t++, "s1", "s1", "homodyne", "phase shifts");
            st.ops = identity_layer(s.modes);
            s.steps.push_back(st);
        }
    }
    for (int i = 0; i < n; ++i) {
        ScheduleStep st = make_step(t++, "s1", "s3", "readout", "momentum homodyne detection");
        st.readout.push_back({s.modes[i], "homodyne", 0.0, offsets[i]});
        s.steps.push_back(st);
    }
    if (cubic.empty() && higher.empty()) s.backend = Backend::Gaussian;
    return s;
}

// ---------------------------------------------------------------------------
// CV Grover search.

void check_grover(const GroverInstance &g) {
    if (g.n != 1 && g.n != 2) throw validation_error("Grover search supports one or two qumodes");
    if (g.N < 1) throw validation_error("N must be positive");
    if (g.n == 2) {
        int s = static_cast<int>(std::lround(std::sqrt(g.N)));
        if (s * s != g.N) throw validation_error("two-qumode regions need a square N");
    }
    if (g.target < 0 || g.target >= g.N) throw validation_error("target index must be below N");
    if (g.half_width <= 0) throw validation_error("region half-width must be positive");
    if (g.m < 0 || g.p < 0) throw validation_error("expansion orders must be non-negative");
    if (g.m > 300 || g.p > 300) throw validation_error("expansion order beyond the stable Hermite recurrence range");
    if (g.cutoff < 2) throw validation_error("cutoff must be at least 2");
}

std::vector<std::array<double, 2>> grover_target_box(const GroverInstance &g) {
    check_grover(g);
    if (g.n == 1) {
        double w = 2 * g.half_width / g.N;
        return {{-g.half_width + g.target * w, -g.half_width + (g.target + 1) * w}};
    }
    int s = static_cast<int>(std::lround(std::sqrt(g.N)));
    double w = 2 * g.half_width / s;
    int i1 = g.target / s, i2 = g.target % s;
    return {{-g.half_width + i1 * w, -g.half_width + (i1 + 1) * w},
            {-g.half_width + i2 * w, -g.half_width + (i2 + 1) * w}};
}

double grover_step(const GroverInstance &g, double x1, double x2) {
    auto box = grover_target_box(g);
    bool in = x1 >= box[0][0] && x1 < box[0][1];
    if (g.n == 2) in = in && x2 >= box[1][0] && x2 < box[1][1];
    return in ? -1.0 : 1.0;
}

namespace {

// Integrals of psi_k over the real line and over [a, b], k <= K.
Vec hermite_total(int K) {
    Vec zero = Vec::Zero(1);
    Mat H = hermite_functions(zero, K + 1);
    Vec out(K + 1);
    for (int k = 0; k <= K; ++k) {
        out(k) = k % 2 ? 0.0 : std::sqrt(2 * kPi) * ((k / 2) % 2 ? -1.0 : 1.0) * H(k, 0);
    }
    return out;
}

Vec hermite_interval(int K, double a, double b) {
    Quadrature q = composite(a, b);
    Mat H = hermite_functions(q.x, K + 1);
    return H * q.w;
}

// Half-width beyond which psi_k, k < K, are negligible.
double hermite_extent(int K) { return std::sqrt(2.0 * K + 1.0) + 10.0; }

}  // namespace

Mat grover_expand(const GroverInstance &g) {
    check_grover(g);
    auto box = grover_target_box(g);
    if (g.n == 1) {
        Vec c = hermite_total(g.m) - 2.0 * hermite_interval(g.m, box[0][0], box[0][1]);
        return c;
    }
    Vec t1 = hermite_total(g.m), t2 = hermite_total(g.p);
    Vec i1 = hermite_interval(g.m, box[0][0], box[0][1]), i2 = hermite_interval(g.p, box[1][0], box[1][1]);
    return t1 * t2.transpose() - 2.0 * i1 * i2.transpose();
}

double grover_reconstruct(const GroverInstance &g, const Mat &c, double x1, double x2) {
    Vec a(1), b(1);
    a(0) = x1;
    b(0) = x2;
    Mat h1 = hermite_functions(a, static_cast<int>(c.rows()));
    if (g.n == 1) return (c.col(0).transpose() * h1.col(0))(0);
    Mat h2 = hermite_functions(b, static_cast<int>(c.cols()));
    return (h1.col(0).transpose() * c * h2.col(0))(0);
}

double grover_l2_error(const GroverInstance &g, const Mat &c, double window, int points) {
    Vec x = Vec::LinSpaced(points, -window, window);
    double dx = x(1) - x(0);
    Mat h1 = hermite_functions(x, static_cast<int>(c.rows()));
    auto trap = [&](int i) { return (i == 0 || i == points - 1) ? 0.5 : 1.0; };
    double sum = 0.0;
    if (g.n == 1) {
        Vec fm = h1.transpose() * c.col(0);
        for (int i = 0; i < points; ++i) {
            double e = grover_step(g, x(i)) - fm(i);
            sum += trap(i) * e * e * dx;
        }
        return std::sqrt(sum);
    }
    Mat h2 = hermite_functions(x, static_cast<int>(c.cols()));
    Mat F = h1.transpose() * c * h2;
    for (int i = 0; i < points; ++i) {
        for (int j = 0; j < points; ++j) {
            double e = grover_step(g, x(i), x(j)) - F(i, j);
            sum += trap(i) * trap(j) * e * e * dx * dx;
        }
    }
    return std::sqrt(sum);
}

CMat position_matrix(const std::function<double(double)> &f, int d, double a, double b) {
    Quadrature q = composite(a, b);
    Mat H = hermite_functions(q.x, d);
    Vec w(q.x.size());
    for (int i = 0; i < q.x.size(); ++i) w(i) = q.w(i) * f(q.x(i));
    Mat M = H * w.asDiagonal() * H.transpose();
    return M.cast<cplx>();
}

CMat interval_projector(double a, double b, int d) {
    return position_matrix([](double) { return 1.0; }, d, a, b);
}

namespace {

Mat target_projector(const GroverInstance &g) {
    auto box = grover_target_box(g);
    Mat P1 = interval_projector(box[0][0], box[0][1], g.cutoff).real();
    if (g.n == 1) return P1;
    Mat P2 = interval_projector(box[1][0], box[1][1], g.cutoff).real();
    return kron(P1, P2);
}

CMat phase_of(const Mat &F) {
    Eigen::SelfAdjointEigenSolver<Mat> es(F);
    CVec ph(F.rows());
    for (int i = 0; i < F.rows(); ++i) ph(i) = cplx(0, 1) * std::polar(1.0, -kPi / 2 * es.eigenvalues()(i));
    CMat V = es.eigenvectors().cast<cplx>();
    return V * ph.asDiagonal() * V.adjoint();
}

}  // namespace

CMat grover_inversion(const GroverInstance &g, bool exact) {
    check_grover(g);
    int d = g.cutoff;
    int D = g.n == 1 ? d : d * d;
    Mat F;
    if (exact) {
        F = Mat::Identity(D, D) - 2.0 * target_projector(g);
    } else {
        Mat c = grover_expand(g);
        int K = static_cast<int>(std::max(c.rows(), c.cols()));
        double L = hermite_extent(std::max(K, d));
        Quadrature q = composite(-L, L);
        Mat Hd = hermite_functions(q.x, d);
        Mat Hk = hermite_functions(q.x, K);
        if (g.n == 1) {
            Vec fm = Hk.topRows(c.rows()).transpose() * c.col(0);
            F = Hd * (q.w.array() * fm.array()).matrix().asDiagonal() * Hd.transpose();
        } else {
            std::vector<Mat> M(K);
            for (int k = 0; k < K; ++k) {
                M[k] = Hd * (q.w.array() * Hk.row(k).transpose().array()).matrix().asDiagonal() * Hd.transpose();
            }
            F = Mat::Zero(D, D);
            for (int k = 0; k < c.rows(); ++k) {
                Mat Nk = Mat::Zero(d, d);
                for (int l = 0; l < c.cols(); ++l) Nk += c(k, l) * M[l];
                F += kron(M[k], Nk);
            }
        }
        F = 0.5 * (F + F.transpose()).eval();
    }
    return phase_of(F);
}

FockState grover_initial_state(const GroverInstance &g) {
    check_grover(g);
    FockState s = squeezed_state(g.squeeze, 0.0, g.cutoff);
    s.normalize();
    if (g.n == 1) return s;
    CVec amps(g.cutoff * g.cutoff);
    for (int i = 0; i < g.cutoff; ++i) amps.segment(i * g.cutoff, g.cutoff) = s.amps()(i) * s.amps();
    return FockState({g.cutoff, g.cutoff}, amps);
}

CMat grover_initial_inversion(const GroverInstance &g) {
    CVec psi = grover_initial_state(g).amps();
    return CMat::Identity(psi.size(), psi.size()) - 2.0 * psi * psi.adjoint();
}

CMat grover_fourier(const GroverInstance &g, bool inverse) {
    check_grover(g);
    CMat R = rotation_op(inverse ? -kPi / 2 : kPi / 2, g.cutoff);
    return g.n == 1 ? R : kron(R, R);
}

CMat grover_compound(const GroverInstance &g, bool exact) {
    return -grover_initial_inversion(g) * grover_fourier(g, true) * grover_inversion(g, exact) * grover_fourier(g);
}

double grover_target_probability(const GroverInstance &g, const FockState &s) {
    CVec v = grover_fourier(g) * s.amps();
    return (v.adjoint() * target_projector(g).cast<cplx>() * v)(0).real() / v.squaredNorm();
}

cplx grover_oracle_phase(const GroverInstance &g, double x1, double x2) {
    return cplx(0, 1) * std::polar(1.0, -kPi / 2 * grover_step(g, x1, x2));
}

GroverTrace grover_run(const GroverInstance &g, int iterations, bool exact) {
    check_grover(g);
    if (iterations < 0) throw validation_error("iterations must be non-negative");
    FockState wide = squeezed_state(g.squeeze, 0.0, 2 * g.cutoff);
    double tail = wide.amps().tail(g.cutoff).squaredNorm() / wide.norm2();
    double leak0 = 1.0 - std::pow(1.0 - tail, g.n);
    auto advise = [&](double leak) {
        return numeric_error("truncation leakage " + std::to_string(leak) + " exceeds 1e-3 at cutoff " +
                             std::to_string(g.cutoff) + "; raise the cutoff or lower the squeezing");
    };
    if (leak0 > 1e-3) throw advise(leak0);
    GroverTrace out;
    out.input_leakage = leak0;
    CMat C = grover_compound(g, exact);
    FockState s = grover_initial_state(g);
    out.probability.push_back(grover_target_probability(g, s));
    for (int k = 0; k < iterations; ++k) {
        // C is exactly unitary on the truncated space, so no norm is lost here;
        // sharp region edges do populate the top levels, which is reported.
        s.amps() = C * s.amps();
        out.edge_population = std::max(out.edge_population, s.leakage(2));
        out.probability.push_back(grover_target_probability(g, s));
    }
    return out;
}

FockState grover_prep_state(const Mat &c) {
    FockState s;
    if (c.cols() == 1) {
        s = FockState::single(c.col(0).cast<cplx>());
    } else {
        CVec amps(c.size());
        for (int k = 0; k < c.rows(); ++k) {
            for (int l = 0; l < c.cols(); ++l) amps(k * c.cols() + l) = c(k, l);
        }
        s = FockState({static_cast<int>(c.rows()), static_cast<int>(c.cols())}, amps);
    }
    s.normalize();
    return s;
}

double grover_prep_fidelity(const Mat &c, const FockState &reference) {
    FockState a = grover_prep_state(c);
    if (a.modes() != reference.modes()) throw validation_error("reference has a different mode count");
    std::vector<int> dims(a.modes());
    for (int i = 0; i < a.modes(); ++i) dims[i] = std::max(a.dim(i), reference.dim(i));
    auto pad = [&](const FockState &s) {
        FockState p = FockState::vacuum(dims);
        p.amps().setZero();
        for (long idx = 0; idx < s.size(); ++idx) {
            long rest = idx;
            std::vector<int> occ(s.modes());
            for (int i = s.modes() - 1; i >= 0; --i) {
                occ[i] = static_cast<int>(rest % s.dim(i));
                rest /= s.dim(i);
            }
            p.amps()(p.flat_index(occ)) = s.amps()(idx);
        }
        return p;
    };
    FockState pa = pad(a), pb = pad(reference);
    return std::norm(pa.amps().dot(pb.amps())) / (pa.norm2() * pb.norm2());
}

json grover_to_json(const GroverInstance &g) {
    return json{{"N", g.N},         {"n", g.n},           {"target", g.target}, {"half_width", g.half_width},
                {"m", g.m},         {"p", g.p},           {"cutoff", g.cutoff}, {"squeeze", g.squeeze}};
}

GroverInstance grover_from_json(const json &j) {
    try {
        GroverInstance g;
        g.N = j.value("N", g.N);
        g.n = j.value("n", g.n);
        g.target = j.value("target", g.target);
        g.half_width = j.value("half_width", g.half_width);
        g.m = j.value("m", g.m);
        g.p = j.value("p", g.p);
        g.cutoff = j.value("cutoff", g.cutoff);
        g.squeeze = j.value("squeeze", g.squeeze);
        check_grover(g);
        return g;
    } catch (const json::exception &e) {
        throw validation_error(std::string("malformed Grover instance: ") + e.what());
    }
}

Schedule grover_compile(const GroverInstance &g) {
    check_grover(g);
    Schedule s;
    s.name = "grover";
    s.dimension = 2;
    s.modes = qnames(g.n);
    s.cutoff = g.cutoff;
    json inst = grover_to_json(g);
    s.extra = json{{"kind", "grover"},
                   {"instance", inst},
                   {"operators",
                    {{"oracle", {{"type", "grover"}, {"which", "exact"}, {"instance", inst}}},
                     {"initial", {{"type", "grover"}, {"which", "initial"}, {"instance", inst}}}}}};
    int t = 1;
    s.steps.push_back(make_step(t++, "s1", "s1", "homodyne", "phase shift"));
    ScheduleStep in = make_step(t++, "s2", "s2", "inject", "inject inputs, Fourier transform");
    for (const auto &m : s.modes) {
        InjectState st;
        st.kind = "squeezed";
        st.r = g.squeeze;
        in.inject.push_back({m, st});
        in.ops.push_back(rotate_op(m, kPi / 2));
    }
    s.steps.push_back(in);
    s.steps.push_back(make_step(t++, "s1", "s1", "none", "none"));
    const char *blocks[] = {"oracle", "inverse", "initial", "fourier", "oracle", "inverse", "initial"};
    for (const char *b : blocks) {
        std::string kind = b;
        ScheduleStep st;
        if (kind == "oracle" || kind == "initial") {
            st = make_step(t++, "s1", "s1", "operator", kind == "oracle" ? "target inversion" : "initial-state inversion");
            st.ops.push_back(operator_op(s.modes, kind));
        } else {
            st = make_step(t++, "s1", "s1", "homodyne", kind == "fourier" ? "Fourier transform" : "inverse Fourier transform");
            for (const auto &m : s.modes) st.ops.push_back(rotate_op(m, kind == "fourier" ? kPi / 2 : -kPi / 2));
        }
        s.steps.push_back(st);
        for (int k = 0; k < 2; ++k) {
            ScheduleStep ph = make_step(t++, "s1", "s1", "homodyne", "phase shifts");
            ph.ops = identity_layer(s.modes);
            s.steps.push_back(ph);
        }
    }
    s.steps.push_back(make_step(t++, "s1", "s1", "none", "none"));
    for (int i = 0; i < 2; ++i) {
        if (i < g.n) {
            ScheduleStep st = make_step(t++, "s1", "s3", "readout", "homodyne detection");
            st.readout.push_back({s.modes[i], "homodyne", 0.0, 0.0});
            s.steps.push_back(st);
        } else {
            s.steps.push_back(make_step(t++, "s1", "s1", "none", "none"));
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Bundled instances.

Schedule table1_schedule() {
    Schedule s;
    s.name = "four single-mode unitaries";
    s.dimension = 1;
    s.modes = {"q0"};
    s.cutoff = 12;
    ScheduleStep t0 = make_step(0, "s2", "", "inject", "inject input state");
    InjectState in;
    in.kind = "coherent";
    in.alpha = cplx(0.4, -0.3);
    t0.inject.push_back({"q0", in});
    t0.ops.push_back(rotate_op("q0", 0.3));
    s.steps.push_back(t0);
    ScheduleStep t1 = make_step(1, "s1", "", "homodyne", "squeezing");
    t1.ops.push_back(squeeze_op_macro("q0", 0.2));
    s.steps.push_back(t1);
    ScheduleStep t2 = make_step(2, "s1", "", "homodyne", "shear");
    t2.ops.push_back(symplectic_ops("q0", shear_matrix(0.5))[1]);
    s.steps.push_back(t2);
    ScheduleStep t3 = make_step(3, "s3", "", "readout", "read out output state");
    t3.ops.push_back(rotate_op("q0", -0.3));
    t3.readout.push_back({"q0", "state", 0.0, 0.0});
    s.steps.push_back(t3);
    return s;
}

GbsInstance gbs_bundled4() {
    GbsInstance g;
    g.n_modes = 4;
    g.squeeze = {0.3, 0.3, 0.3, 0.3};
    g.unitary = random_unitary(4, 2026);
    g.cutoff = 12;
    return g;
}

GbsInstance gbs_desk2() {
    GbsInstance g;
    g.n_modes = 2;
    g.squeeze = {0.4, 0.3};
    g.unitary = random_unitary(2, 7);
    g.cutoff = 20;
    return g;
}

GroverInstance grover_bundled2d() {
    GroverInstance g;
    g.N = 4;
    g.n = 2;
    g.target = 1;
    g.m = 10;
    g.p = 10;
    g.cutoff = 30;
    g.squeeze = 0.8;
    return g;
}

}  // namespace cvc
