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

#include <algorithm>
#include <cmath>

namespace cvc {

namespace {

template <typename T>
using MatT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

template <typename T>
MatT<T> rot_t(T t) {
    using std::cos;
    using std::sin;
    MatT<T> m(2, 2);
    m << cos(t), -sin(t), sin(t), cos(t);
    return m;
}

template <typename T>
MatT<T> sq_t(T r, T phi) {
    using std::cos;
    using std::cosh;
    using std::sin;
    using std::sinh;
    MatT<T> m(2, 2);
    T ch = cosh(r), sh = sinh(r);
    m << ch - cos(phi) * sh, -sin(phi) * sh, -sin(phi) * sh, ch + cos(phi) * sh;
    return m;
}

template <typename T>
MatT<T> bs_t(T t) {
    using std::cos;
    using std::sin;
    T c = cos(t), s = sin(t);
    MatT<T> m = MatT<T>::Zero(4, 4);
    m(0, 0) = c;
    m(0, 2) = -s;
    m(2, 0) = s;
    m(2, 2) = c;
    m(1, 1) = c;
    m(1, 3) = -s;
    m(3, 1) = s;
    m(3, 3) = c;
    return m;
}

template <typename T>
MatT<T> gate_block(const SymplecticGate &g) {
    using K = SymplecticGate::Kind;
    switch (g.kind) {
        case K::Squeeze:
            return sq_t<T>(T(g.a), T(g.b));
        case K::Rotate:
            return rot_t<T>(T(g.a));
        case K::BeamSplit:
            return bs_t<T>(T(g.a));
        case K::Shear: {
            MatT<T> m = MatT<T>::Identity(2, 2);
            m(1, 0) = T(g.a);
            return m;
        }
        case K::CZ: {
            MatT<T> m = MatT<T>::Identity(4, 4);
            m(1, 2) = T(g.a);
            m(3, 0) = T(g.a);
            return m;
        }
        case K::Displace:
            return MatT<T>::Identity(2, 2);
    }
    return {};
}

template <typename T>
MatT<T> embed_t(const MatT<T> &block, const std::vector<int> &targets, int n) {
    MatT<T> S = MatT<T>::Identity(2 * n, 2 * n);
    int k = static_cast<int>(targets.size());
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            for (int a = 0; a < 2; ++a) {
                for (int b = 0; b < 2; ++b) {
                    S(2 * targets[i] + a, 2 * targets[j] + b) = block(2 * i + a, 2 * j + b);
                }
            }
        }
    }
    return S;
}

std::vector<int> indices_of(const GaussianState &s, const std::vector<std::string> &labels) {
    std::vector<int> out;
    for (const auto &l : labels) out.push_back(s.index(l));
    return out;
}

}  // namespace

Mat rotation_matrix(double theta) { return rot_t<double>(theta); }
Mat squeeze_matrix(double r, double phi) { return sq_t<double>(r, phi); }
Mat beamsplitter_matrix(double theta) { return bs_t<double>(theta); }

Mat shear_matrix(double tau) {
    Mat m = Mat::Identity(2, 2);
    m(1, 0) = tau;
    return m;
}

Mat cz_matrix(double g) {
    Mat m = Mat::Identity(4, 4);
    m(1, 2) = g;
    m(3, 0) = g;
    return m;
}

Mat passive_matrix(const CMat &U) {
    int n = static_cast<int>(U.rows());
    Mat S(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double re = U(i, j).real(), im = U(i, j).imag();
            S(2 * i, 2 * j) = re;
            S(2 * i, 2 * j + 1) = -im;
            S(2 * i + 1, 2 * j) = im;
            S(2 * i + 1, 2 * j + 1) = re;
        }
    }
    return S;
}

Mat symplectic_form(int n) {
    Mat O = Mat::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        O(2 * i, 2 * i + 1) = 1.0;
        O(2 * i + 1, 2 * i) = -1.0;
    }
    return O;
}

Mat embed(const Mat &block, const std::vector<int> &targets, int n) { return embed_t<double>(block, targets, n); }

SymplecticGate SymplecticGate::squeeze(const std::string &m, double r, double phi) {
    return {Kind::Squeeze, {m}, r, phi, 0.0};
}
SymplecticGate SymplecticGate::rotate(const std::string &m, double theta) { return {Kind::Rotate, {m}, theta, 0.0, 0.0}; }
SymplecticGate SymplecticGate::beamsplit(const std::string &m1, const std::string &m2, double theta) {
    return {Kind::BeamSplit, {m1, m2}, theta, 0.0, 0.0};
}
SymplecticGate SymplecticGate::displace(const std::string &m, cplx alpha) { return {Kind::Displace, {m}, 0.0, 0.0, alpha}; }
SymplecticGate SymplecticGate::shear(const std::string &m, double tau) { return {Kind::Shear, {m}, tau, 0.0, 0.0}; }
SymplecticGate SymplecticGate::cz(const std::string &m1, const std::string &m2, double g) {
    return {Kind::CZ, {m1, m2}, g, 0.0, 0.0};
}

Mat SymplecticGate::matrix() const { return gate_block<double>(*this); }

GaussianState::GaussianState(std::vector<std::string> modes, Vec mean, Mat cov)
    : modes_(std::move(modes)), mean_(std::move(mean)), cov_(std::move(cov)) {
    if (mean_.size() != 2 * n() || cov_.rows() != 2 * n() || cov_.cols() != 2 * n()) {
        throw validation_error("GaussianState dimensions do not match the mode list");
    }
}

GaussianState GaussianState::vacuum(const std::vector<std::string> &modes) {
    int n = static_cast<int>(modes.size());
    return GaussianState(modes, Vec::Zero(2 * n), 0.5 * Mat::Identity(2 * n, 2 * n));
}

GaussianState GaussianState::coherent(const std::string &mode, cplx alpha) {
    return vacuum({mode}).apply(SymplecticGate::displace(mode, alpha));
}

GaussianState GaussianState::squeezed(const std::string &mode, double r, double phi) {
    return vacuum({mode}).apply(SymplecticGate::squeeze(mode, r, phi));
}

int GaussianState::index(const std::string &mode) const {
    auto it = std::find(modes_.begin(), modes_.end(), mode);
    if (it == modes_.end()) throw validation_error("unknown mode label '" + mode + "'");
    return static_cast<int>(it - modes_.begin());
}

bool GaussianState::has(const std::string &mode) const {
    return std::find(modes_.begin(), modes_.end(), mode) != modes_.end();
}

void GaussianState::check(double tol) const {
    if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, cov_.cwiseAbs().maxCoeff())) {
        throw numeric_error("covariance matrix is not symmetric");
    }
    // cov + i/2 Omega must be positive semidefinite.
    CMat H = cov_.cast<cplx>() + cplx(0, 0.5) * symplectic_form(n()).cast<cplx>();
    Eigen::SelfAdjointEigenSolver<CMat> es(H);
    if (es.eigenvalues().minCoeff() < -tol * std::max(1.0, cov_.norm())) {
        throw numeric_error("covariance violates the uncertainty relation");
    }
}

double GaussianState::purity_det() const { return (2.0 * cov_).determinant(); }

GaussianState GaussianState::apply(const SymplecticGate &gate) const {
    if (gate.kind == SymplecticGate::Kind::Displace) {
        return displace(gate.targets.at(0), kSqrt2 * gate.alpha.real(), kSqrt2 * gate.alpha.imag());
    }
    return apply_symplectic(gate.matrix(), gate.targets);
}

GaussianState GaussianState::apply_symplectic(const Mat &S, const std::vector<std::string> &targets) const {
    std::vector<int> idx = indices_of(*this, targets);
    if (S.rows() != 2 * static_cast<int>(idx.size())) throw validation_error("symplectic block size mismatch");
    // Only the touched rows and columns change.
    std::vector<int> rows;
    for (int i : idx) {
        rows.push_back(2 * i);
        rows.push_back(2 * i + 1);
    }
    int k = static_cast<int>(rows.size());
    Vec m = mean_;
    Mat c = cov_;
    Vec sub(k);
    for (int a = 0; a < k; ++a) sub(a) = mean_(rows[a]);
    Vec nm = S * sub;
    for (int a = 0; a < k; ++a) m(rows[a]) = nm(a);
    Mat rowblk(k, 2 * n());
    for (int a = 0; a < k; ++a) rowblk.row(a) = cov_.row(rows[a]);
    Mat newrows = S * rowblk;
    for (int a = 0; a < k; ++a) c.row(rows[a]) = newrows.row(a);
    Mat colblk(2 * n(), k);
    for (int a = 0; a < k; ++a) colblk.col(a) = c.col(rows[a]);
    Mat newcols = colblk * S.transpose();
    for (int a = 0; a < k; ++a) c.col(rows[a]) = newcols.col(a);
    c = 0.5 * (c + c.transpose()).eval();
    return GaussianState(modes_, m, c);
}

GaussianState GaussianState::displace(const std::string &mode, double dx, double dp) const {
    int i = index(mode);
    Vec m = mean_;
    m(2 * i) += dx;
    m(2 * i + 1) += dp;
    return GaussianState(modes_, m, cov_);
}

GaussianState GaussianState::displace_all(const Vec &d) const { return GaussianState(modes_, mean_ + d, cov_); }

GaussianState GaussianState::tensor(const GaussianState &other) const {
    for (const auto &l : other.modes_) {
        if (has(l)) throw validation_error("duplicate mode label '" + l + "'");
    }
    std::vector<std::string> modes = modes_;
    modes.insert(modes.end(), other.modes_.begin(), other.modes_.end());
    int a = 2 * n(), b = 2 * other.n();
    Vec m(a + b);
    m << mean_, other.mean_;
    Mat c = Mat::Zero(a + b, a + b);
    c.topLeftCorner(a, a) = cov_;
    c.bottomRightCorner(b, b) = other.cov_;
    return GaussianState(modes, m, c);
}

GaussianState GaussianState::reduced(const std::vector<std::string> &keep) const {
    std::vector<int> idx = indices_of(*this, keep);
    int k = static_cast<int>(idx.size());
    Vec m(2 * k);
    Mat c(2 * k, 2 * k);
    for (int i = 0; i < k; ++i) {
        m.segment<2>(2 * i) = mean_.segment<2>(2 * idx[i]);
        for (int j = 0; j < k; ++j) c.block<2, 2>(2 * i, 2 * j) = cov_.block<2, 2>(2 * idx[i], 2 * idx[j]);
    }
    return GaussianState(keep, m, c);
}

GaussianState GaussianState::remove(const std::string &mode) const {
    index(mode);
    std::vector<std::string> keep;
    for (const auto &l : modes_) {
        if (l != mode) keep.push_back(l);
    }
    return reduced(keep);
}

GaussianState GaussianState::relabel(const std::string &from, const std::string &to) const {
    int i = index(from);
    if (from != to && has(to)) throw validation_error("duplicate mode label '" + to + "'");
    std::vector<std::string> modes = modes_;
    modes[i] = to;
    return GaussianState(modes, mean_, cov_);
}

Vec quadrature_row(int n, int mode, double theta) {
    Vec v = Vec::Zero(2 * n);
    v(2 * mode) = std::sin(theta);
    v(2 * mode + 1) = std::cos(theta);
    return v;
}

Conditioned homodyne_condition(const GaussianState &state, const std::string &mode, double theta, double m) {
    int i = state.index(mode);
    Vec v = quadrature_row(state.n(), i, theta);
    Vec sv = state.cov() * v;
    double var = v.dot(sv);
    if (!(var > 0.0)) throw numeric_error("zero variance in measured quadrature of mode '" + mode + "'");
    double mu = v.dot(state.mean());
    Vec mean = state.mean() + sv * ((m - mu) / var);
    Mat cov = state.cov() - sv * sv.transpose() / var;
    double density = std::exp(-(m - mu) * (m - mu) / (2.0 * var)) / std::sqrt(2.0 * kPi * var);
    GaussianState full(state.modes(), mean, 0.5 * (cov + cov.transpose()));
    return {full.remove(mode), density};
}

Sampled homodyne_sample(const GaussianState &state, const std::string &mode, double theta, std::mt19937_64 &rng) {
    int i = state.index(mode);
    Vec v = quadrature_row(state.n(), i, theta);
    double var = v.dot(state.cov() * v);
    if (!(var > 0.0)) throw numeric_error("zero variance in measured quadrature of mode '" + mode + "'");
    std::normal_distribution<double> normal(0.0, 1.0);
    double m = v.dot(state.mean()) + std::sqrt(var) * normal(rng);
    return {m, homodyne_condition(state, mode, theta, m).state};
}

Sampled homodyne_sample(const GaussianState &state, const std::string &mode, double theta, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return homodyne_sample(state, mode, theta, rng);
}

double gaussian_fidelity(const GaussianState &a, const GaussianState &b) {
    if (a.n() != b.n()) throw validation_error("fidelity of states with different mode counts");
    Mat V = a.cov() + b.cov();
    Vec d = a.mean() - b.mean();
    double e = d.dot(V.ldlt().solve(d));
    return std::exp(-0.5 * e) / std::sqrt(V.determinant());
}

namespace {

template <typename T>
ImplementedMap extract_impl(const OracleCircuit &c) {
    std::vector<std::string> labels = c.inputs;
    labels.insert(labels.end(), c.ancillas.begin(), c.ancillas.end());
    int n = static_cast<int>(labels.size());
    auto idx = [&](const std::string &l) {
        auto it = std::find(labels.begin(), labels.end(), l);
        if (it == labels.end()) throw validation_error("unknown mode label '" + l + "' in oracle circuit");
        return static_cast<int>(it - labels.begin());
    };
    MatT<T> S = MatT<T>::Identity(2 * n, 2 * n);
    std::vector<OracleMeasure> meas;
    std::vector<bool> measured(n, false);
    for (const auto &op : c.ops) {
        if (const auto *g = std::get_if<SymplecticGate>(&op)) {
            if (g->kind == SymplecticGate::Kind::Displace) continue;
            std::vector<int> t;
            for (const auto &l : g->targets) {
                int i = idx(l);
                if (measured[i]) throw validation_error("gate on measured mode '" + l + "'");
                t.push_back(i);
            }
            S = (embed_t<T>(gate_block<T>(*g), t, n) * S).eval();
        } else {
            const auto &m = std::get<OracleMeasure>(op);
            measured[idx(m.mode)] = true;
            meas.push_back(m);
        }
    }
    int k = static_cast<int>(c.inputs.size());
    int nm = static_cast<int>(meas.size());
    int no = static_cast<int>(c.outputs.size());
    MatT<T> Q = MatT<T>::Zero(nm, 2 * n);
    for (int a = 0; a < nm; ++a) {
        using std::cos;
        using std::sin;
        int i = idx(meas[a].mode);
        T th(meas[a].theta);
        Q(a, 2 * i) = sin(th);
        Q(a, 2 * i + 1) = cos(th);
    }
    MatT<T> P = MatT<T>::Zero(2 * no, 2 * n);
    for (int a = 0; a < no; ++a) {
        int i = idx(c.outputs[a]);
        P(2 * a, 2 * i) = T(1);
        P(2 * a + 1, 2 * i + 1) = T(1);
    }
    // Inputs carry vacuum covariance; their means are perturbed through the
    // conditioned circuit, as for a physical input state.
    MatT<T> Sigma = (S * S.transpose()) * T(0.5);
    MatT<T> G = MatT<T>::Zero(2 * no, nm);
    if (nm > 0) {
        MatT<T> Saa = Q * Sigma * Q.transpose();
        MatT<T> Sba = P * Sigma * Q.transpose();
        Eigen::FullPivLU<MatT<T>> lu(Saa);
        if (!lu.isInvertible()) throw numeric_error("oracle conditioning is singular");
        G = lu.solve(Sba.transpose()).transpose();
    }
    MatT<T> K = (P * S - G * Q * S).leftCols(2 * k);
    ImplementedMap out;
    out.symplectic = K.template cast<double>();
    out.outcome_gain = G.template cast<double>();
    return out;
}

}  // namespace

ImplementedMap extract_implemented_map(const OracleCircuit &circuit) { return extract_impl<long double>(circuit); }

Mat extract_implemented_symplectic(const OracleCircuit &circuit) { return extract_implemented_map(circuit).symplectic; }

}  // namespace cvc
