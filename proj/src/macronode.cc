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

#include "cvc/macronode.h"

#include <cmath>
#include <sstream>

namespace cvc {

GateOp GateOp::rotate(int m, double theta) { return {Kind::Rotate, {m}, theta, 0.0, nullptr}; }
GateOp GateOp::squeeze(int m, double r) { return {Kind::Squeeze, {m}, r, 0.0, nullptr}; }
GateOp GateOp::beamsplit(int m1, int m2, double theta) { return {Kind::BeamSplit, {m1, m2}, theta, 0.0, nullptr}; }
GateOp GateOp::displace(int m, cplx alpha) { return {Kind::Displace, {m}, 0.0, alpha, nullptr}; }
GateOp GateOp::x_shift(int m, double s) { return {Kind::XShift, {m}, s, 0.0, nullptr}; }
GateOp GateOp::z_shift(int m, double s) { return {Kind::ZShift, {m}, s, 0.0, nullptr}; }
GateOp GateOp::shear(int m, double tau) { return {Kind::Shear, {m}, tau, 0.0, nullptr}; }
GateOp GateOp::cubic(int m, double gamma) { return {Kind::Cubic, {m}, gamma, 0.0, nullptr}; }
GateOp GateOp::multiply(int m, std::function<cplx(double)> f) {
    return {Kind::Kernel, {m}, 0.0, 0.0, std::make_shared<const std::function<cplx(double)>>(std::move(f))};
}

Mat GateOp::matrix() const {
    switch (kind) {
        case Kind::Rotate:
            return rotation_matrix(a);
        case Kind::Squeeze:
            return squeeze_matrix(a);
        case Kind::BeamSplit:
            return beamsplitter_matrix(a);
        case Kind::Shear:
            return shear_matrix(a);
        case Kind::Displace:
        case Kind::XShift:
        case Kind::ZShift:
            return Mat::Identity(2, 2);
        case Kind::Cubic:
            if (a == 0.0) return Mat::Identity(2, 2);
            [[fallthrough]];
        default:
            throw validation_error("non-Gaussian gate has no symplectic matrix");
    }
}

Vec GateOp::shift() const {
    Vec s = Vec::Zero(2 * static_cast<int>(modes.size()));
    if (kind == Kind::Displace) {
        s(0) = kSqrt2 * alpha.real();
        s(1) = kSqrt2 * alpha.imag();
    } else if (kind == Kind::XShift) {
        s(0) = a;
    } else if (kind == Kind::ZShift) {
        s(1) = a;
    }
    return s;
}

CMat GateOp::fock(int d) const {
    switch (kind) {
        case Kind::Rotate:
            return rotation_op(a, d);
        case Kind::Squeeze:
            return squeeze_op(a, 0.0, d);
        case Kind::BeamSplit:
            return beamsplitter_op(a, d);
        case Kind::Displace:
            return displacement_op(alpha, d);
        case Kind::XShift:
            return x_shift_op(a, d);
        case Kind::ZShift:
            return z_shift_op(a, d);
        case Kind::Shear:
            return shear_op(a, d);
        case Kind::Cubic:
            return cubic_op(a, d);
        case Kind::Kernel:
            return multiplication_op_grid(*kernel, d);
    }
    return {};
}

std::string GateOp::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::Rotate:
            os << "R(" << a << ")";
            break;
        case Kind::Squeeze:
            os << "S(" << a << ")";
            break;
        case Kind::BeamSplit:
            os << "B(" << a << ")";
            break;
        case Kind::Displace:
            os << "D(" << alpha.real() << (alpha.imag() < 0 ? "" : "+") << alpha.imag() << "i)";
            break;
        case Kind::XShift:
            os << "X(" << a << ")";
            break;
        case Kind::ZShift:
            os << "Z(" << a << ")";
            break;
        case Kind::Shear:
            os << "P(" << a << ")";
            break;
        case Kind::Cubic:
            os << "V(" << a << ")";
            break;
        case Kind::Kernel:
            os << "K";
            break;
    }
    os << "[";
    for (size_t i = 0; i < modes.size(); ++i) os << (i ? "," : "") << modes[i];
    os << "]";
    return os.str();
}

bool InducedOperator::gaussian() const {
    for (const auto &g : gates) {
        if (!g.gaussian()) return false;
    }
    return true;
}

Mat InducedOperator::symplectic() const {
    Mat M = Mat::Identity(2 * modes, 2 * modes);
    for (const auto &g : gates) M = M * embed(g.matrix(), g.modes, modes);
    return M;
}

Vec InducedOperator::displacement() const {
    Vec c = Vec::Zero(2 * modes);
    for (auto it = gates.rbegin(); it != gates.rend(); ++it) {
        c = embed(it->matrix(), it->modes, modes) * c;
        Vec s = it->shift();
        for (size_t k = 0; k < it->modes.size(); ++k) c.segment(2 * it->modes[k], 2) += s.segment(2 * k, 2);
    }
    return c;
}

namespace {

CMat kron(const CMat &A, const CMat &B) {
    CMat K(A.rows() * B.rows(), A.cols() * B.cols());
    for (int i = 0; i < A.rows(); ++i) {
        for (int j = 0; j < A.cols(); ++j) K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    }
    return K;
}

}  // namespace

CMat InducedOperator::fock(int d) const {
    long dim = 1;
    for (int i = 0; i < modes; ++i) dim *= d;
    CMat U = CMat::Identity(dim, dim);
    CMat I = CMat::Identity(d, d);
    // Adjacent shifts on one mode merge into a single displacement, which
    // keeps cancelling corrections exact under truncation (up to a global phase).
    std::vector<GateOp> merged;
    for (const auto &g : gates) {
        bool shift = g.kind == GateOp::Kind::Displace || g.kind == GateOp::Kind::XShift ||
                     g.kind == GateOp::Kind::ZShift;
        if (shift && !merged.empty() && merged.back().kind == GateOp::Kind::Displace &&
            merged.back().modes == g.modes) {
            Vec s = g.shift();
            merged.back().alpha += cplx(s(0), s(1)) / kSqrt2;
        } else if (shift) {
            Vec s = g.shift();
            merged.push_back(GateOp::displace(g.modes[0], cplx(s(0), s(1)) / kSqrt2));
        } else {
            merged.push_back(g);
        }
    }
    for (const auto &g : merged) {
        if (g.kind == GateOp::Kind::Displace && std::abs(g.alpha) == 0.0) continue;
        CMat G = g.fock(d);
        if (modes == 2 && g.modes.size() == 1) G = g.modes[0] == 0 ? kron(G, I) : kron(I, G);
        if (g.modes.size() == 2 && g.modes[0] == 1) {
            throw validation_error("two-mode gates must list modes in order (0, 1)");
        }
        U = U * G;
    }
    return U;
}

InducedOperator InducedOperator::then(const InducedOperator &later) const {
    if (later.modes != modes) throw validation_error("composing operators on different mode counts");
    InducedOperator out{modes, later.gates};
    out.gates.insert(out.gates.end(), gates.begin(), gates.end());
    return out;
}

std::string InducedOperator::describe() const {
    std::string s;
    for (const auto &g : gates) s += (s.empty() ? "" : " ") + g.describe();
    return s.empty() ? "I" : s;
}

void check_angles(double theta_h, double theta_l) {
    if (!std::isfinite(theta_h) || !std::isfinite(theta_l)) throw validation_error("measurement angles must be finite");
    if (std::abs(std::sin(theta_h - theta_l)) <= 1e-9) throw SingularConfiguration(theta_h, theta_l);
}

cplx macronode_displacement(double theta1, double theta3, double m1, double m3) {
    check_angles(theta1, theta3);
    return (std::polar(m3, theta1) + std::polar(m1, theta3)) / std::sin(theta1 - theta3);
}

namespace {

void append_single(std::vector<GateOp> &gates, int mode, double theta1, double theta3, double m1, double m3) {
    cplx beta = macronode_displacement(theta1, theta3, m1, m3);
    double tp = 0.5 * (theta3 + theta1);
    double t = std::tan(0.5 * (theta3 - theta1));
    gates.push_back(GateOp::displace(mode, beta));
    gates.push_back(GateOp::rotate(mode, tp));
    gates.push_back(GateOp::squeeze(mode, std::log(std::abs(t))));
    gates.push_back(GateOp::rotate(mode, tp));
    // Negative tan(theta-) contributes a sign flip of both quadratures.
    if (t < 0) gates.push_back(GateOp::rotate(mode, kPi));
}

}  // namespace

InducedOperator single_macronode(double theta1, double theta3, double m1, double m3) {
    InducedOperator op;
    append_single(op.gates, 0, theta1, theta3, m1, m3);
    return op;
}

InducedOperator two_mode_macronode(const std::array<double, 4> &theta, const std::array<double, 4> &m) {
    check_angles(theta[0], theta[2]);
    check_angles(theta[1], theta[3]);
    InducedOperator op{2, {}};
    op.gates.push_back(GateOp::beamsplit(0, 1, -kPi / 4));
    append_single(op.gates, 0, theta[0], theta[2], m[0], m[2]);
    append_single(op.gates, 1, theta[1], theta[3], m[1], m[3]);
    op.gates.push_back(GateOp::beamsplit(0, 1, kPi / 4));
    return op;
}

double cubic_tau(double gamma, double sigma, const CubicOutcomes &m) {
    return 4 * sigma + 4 * gamma * (m.m3 + kSqrt2 * m.me);
}

double cubic_kappa(double gamma, double sigma, const CubicOutcomes &m) {
    double u = m.m3 + kSqrt2 * m.me;
    return -2 * m.m1 * std::sqrt(1 + sigma * sigma) - 2 * sigma * (kSqrt2 * m.m3 + m.me) - kSqrt2 * gamma * u * u;
}

InducedOperator cubic_teleportation(double gamma, double theta1, const CubicOutcomes &m) {
    if (!std::isfinite(gamma) || !std::isfinite(theta1) || std::abs(std::cos(theta1)) < 1e-12) {
        throw validation_error("cubic teleportation needs finite gamma and tan(theta1)");
    }
    double sigma = std::tan(theta1);
    InducedOperator op;
    op.gates = {GateOp::z_shift(0, kSqrt2 * m.m3), GateOp::x_shift(0, cubic_kappa(gamma, sigma, m)),
                GateOp::rotate(0, -kPi / 2), GateOp::shear(0, cubic_tau(gamma, sigma, m)),
                GateOp::cubic(0, -2 * kSqrt2 * gamma)};
    return op;
}

InducedOperator general_resource_teleportation(const std::function<cplx(double)> &phi_r, double theta,
                                               const CubicOutcomes &m) {
    if (std::abs(std::cos(theta)) < 1e-12) throw validation_error("general teleportation needs finite sec(theta)");
    // Squeezers are written in the exp[-r(a^2 - a^dag^2)/2] sign, i.e. S(-r) here.
    double shift = kSqrt2 * m.me;
    InducedOperator op;
    op.gates = {GateOp::z_shift(0, (kSqrt2 * m.m3 - m.me) / 2),
                GateOp::x_shift(0, -2 * m.m1 / std::cos(theta)),
                GateOp::rotate(0, -kPi / 2),
                GateOp::squeeze(0, std::log(2.0)),
                GateOp::shear(0, std::tan(theta)),
                GateOp::x_shift(0, -m.me),
                GateOp::squeeze(0, -std::log(kSqrt2)),
                GateOp::multiply(0, [phi_r, shift](double x) { return phi_r(shift - x); }),
                GateOp::x_shift(0, -m.m3),
                GateOp::squeeze(0, -std::log(2.0))};
    return op;
}

InducedOperator general_resource_teleportation(const FockState &phi_r, double theta, const CubicOutcomes &m) {
    if (phi_r.modes() != 1) throw validation_error("resource state must be single-mode");
    CVec amps = phi_r.amps() / std::sqrt(phi_r.norm2());
    auto f = [amps](double x) {
        Vec p(1);
        p(0) = x;
        return wavefunction(amps, p)(0);
    };
    return general_resource_teleportation(f, theta, m);
}

AnglePair rotation_angles(double phi) {
    double t1 = 0.5 * (phi - kPi / 2);
    return {t1, t1 - kPi / 2};
}

AnglePair squeeze_angles(double s) {
    double t = std::atan(std::exp(s));
    return {-t, t};
}

AnglePair identity_angles() { return {-kPi / 4, kPi / 4}; }

std::array<double, 4> beamsplitter_pair_angles(double a, double b) {
    double t1 = 0.5 * (a - kPi / 2), t2 = 0.5 * (b - kPi / 2);
    return {t1, t2, t1 - kPi / 2, t2 - kPi / 2};
}

namespace {

void add_single_circuit(OracleCircuit &c, const std::string &in, const std::string &s1, const std::string &s2,
                        double r) {
    c.ops.push_back(SymplecticGate::rotate(in, kPi / 2));
    c.ops.push_back(SymplecticGate::squeeze(s1, r));
    c.ops.push_back(SymplecticGate::squeeze(s2, -r));
    c.ops.push_back(SymplecticGate::beamsplit(s1, s2, kPi / 4));
    c.ops.push_back(SymplecticGate::beamsplit(in, s1, kPi / 4));
}

}  // namespace

OracleCircuit single_macronode_circuit(double theta1, double theta3, double r) {
    OracleCircuit c{{"in"}, {"s1", "s2"}, {}, {"s2"}};
    add_single_circuit(c, "in", "s1", "s2", r);
    c.ops.push_back(OracleMeasure{"in", theta1});
    c.ops.push_back(OracleMeasure{"s1", theta3});
    return c;
}

OracleCircuit two_mode_macronode_circuit(const std::array<double, 4> &theta, double r) {
    OracleCircuit c{{"a", "b"}, {"a1", "a2", "b1", "b2"}, {}, {"a2", "b2"}};
    c.ops.push_back(SymplecticGate::beamsplit("a", "b", kPi / 4));
    add_single_circuit(c, "a", "a1", "a2", r);
    add_single_circuit(c, "b", "b1", "b2", r);
    c.ops.push_back(SymplecticGate::beamsplit("a2", "b2", -kPi / 4));
    c.ops.push_back(OracleMeasure{"a", theta[0]});
    c.ops.push_back(OracleMeasure{"b", theta[1]});
    c.ops.push_back(OracleMeasure{"a1", theta[2]});
    c.ops.push_back(OracleMeasure{"b1", theta[3]});
    return c;
}

OracleCircuit cubic_gaussian_circuit(double theta1, double r) {
    OracleCircuit c{{"in"}, {"t1", "t2", "e"}, {}, {"t2"}};
    c.ops.push_back(SymplecticGate::squeeze("t1", r));
    c.ops.push_back(SymplecticGate::squeeze("t2", -r));
    c.ops.push_back(SymplecticGate::squeeze("e", -r));
    c.ops.push_back(SymplecticGate::beamsplit("t1", "t2", kPi / 4));
    c.ops.push_back(SymplecticGate::beamsplit("in", "t1", kPi / 4));
    c.ops.push_back(SymplecticGate::beamsplit("in", "e", kPi / 4));
    c.ops.push_back(SymplecticGate::rotate("t2", -kPi / 2));
    c.ops.push_back(OracleMeasure{"t1", kPi / 2});
    c.ops.push_back(OracleMeasure{"in", theta1});
    c.ops.push_back(OracleMeasure{"e", kPi / 2});
    return c;
}

FockState simulate_cubic_circuit(const FockState &input, double r, double gamma, double theta1,
                                 const CubicOutcomes &m, int d_out) {
    if (input.modes() != 1) throw validation_error("cubic circuit input must be single-mode");
    if (std::abs(std::cos(theta1)) < 1e-12) throw validation_error("cubic circuit needs finite tan(theta1)");
    // Position coordinates (in, t1, t2, e); the beam splitters act on x as the
    // orthogonal matrix M and the wavefunction transforms as psi(M^T y).
    Eigen::Matrix4d M = Eigen::Matrix4d::Identity();
    auto bs = [](int i, int j) {
        Eigen::Matrix4d b = Eigen::Matrix4d::Identity();
        double c = std::cos(kPi / 4), s = std::sin(kPi / 4);
        b(i, i) = c;
        b(i, j) = -s;
        b(j, i) = s;
        b(j, j) = c;
        return b;
    };
    M = bs(0, 3) * bs(0, 1) * bs(1, 2);
    Eigen::Matrix4d Mt = M.transpose();

    // Gauss-Hermite nodes for the narrow t1 factor exp(-x1^2 e^{2r} / 2).
    const int nq = 40;
    Mat J = Mat::Zero(nq, nq);
    for (int i = 1; i < nq; ++i) J(i, i - 1) = J(i - 1, i) = std::sqrt(i / 2.0);
    Eigen::SelfAdjointEigenSolver<Mat> es(J);
    Vec u = es.eigenvalues();
    Vec w = es.eigenvectors().row(0).transpose().array().square() * std::sqrt(kPi);

    const int ny = 2801;
    Vec y = Vec::LinSpaced(ny, -14.0, 14.0);
    double dy = y(1) - y(0);
    double e2r = std::exp(-2 * r);
    double A = Mt(1, 0);
    double st = std::sin(theta1), ct = std::cos(theta1);

    // All input-mode positions, evaluated in one Hermite table.
    Vec x0(static_cast<long>(ny) * nq);
    Mat other(static_cast<long>(ny) * nq, 3);
    Vec zs(static_cast<long>(ny) * nq);
    for (int iy = 0; iy < ny; ++iy) {
        double B = Mt(1, 1) * m.m3 + Mt(1, 3) * m.me + Mt(1, 2) * y(iy);
        for (int q = 0; q < nq; ++q) {
            double x1 = u(q) * kSqrt2 * std::exp(-r);
            double z = (x1 - B) / A;
            Eigen::Vector4d yv(z, m.m3, y(iy), m.me);
            Eigen::Vector4d X = Mt * yv;
            long k = static_cast<long>(iy) * nq + q;
            x0(k) = X(0);
            other(k, 0) = X(2);
            other(k, 1) = X(3);
            zs(k) = z;
        }
    }
    CVec amps = input.amps() / std::sqrt(input.norm2());
    CVec psi = wavefunction(amps, x0);
    CVec out(ny);
    const cplx I(0.0, 1.0);
    for (int iy = 0; iy < ny; ++iy) {
        cplx acc = 0.0;
        for (int q = 0; q < nq; ++q) {
            long k = static_cast<long>(iy) * nq + q;
            double x2 = other(k, 0), x3 = other(k, 1), z = zs(k);
            cplx f = psi(k) * std::exp(-0.5 * x2 * x2 * e2r) * std::exp(I * (gamma * x3 * x3 * x3 / 3)) *
                     std::exp(-0.5 * x3 * x3 * e2r);
            cplx chi = std::exp(I * ((m.m1 * z - st * z * z / 2) / ct));
            acc += w(q) * f * std::conj(chi);
        }
        out(iy) = acc;
    }
    Mat H = hermite_functions(y, d_out);
    CVec c = H.cast<cplx>() * out * dy;
    FockState s = FockState::single(c);
    s.normalize();
    return apply_op(s, rotation_op(-kPi / 2, d_out), 0);
}

double operator_distance(const CMat &A, const CMat &B, int block) {
    CMat a = A.topLeftCorner(block, block), b = B.topLeftCorner(block, block);
    cplx lambda = (a.adjoint() * b).trace() / (a.adjoint() * a).trace();
    return (lambda * a - b).norm() / b.norm();
}

}  // namespace cvc
