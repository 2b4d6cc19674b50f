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

#ifndef CVC_MACRONODE_H
#define CVC_MACRONODE_H

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cvc/common.h"
#include "cvc/fock.h"
#include "cvc/gaussian.h"

namespace cvc {

// Symbolic gate on the local modes (0 or 1) of an induced operator.
struct GateOp {
    enum class Kind { Rotate, Squeeze, BeamSplit, Displace, XShift, ZShift, Shear, Cubic, Kernel };
    Kind kind;
    std::vector<int> modes;
    double a = 0.0;
    cplx alpha = 0.0;
    // Position-diagonal factor f(x) for Kind::Kernel.
    std::shared_ptr<const std::function<cplx(double)>> kernel;

    static GateOp rotate(int m, double theta);
    static GateOp squeeze(int m, double r);
    static GateOp beamsplit(int m1, int m2, double theta);
    static GateOp displace(int m, cplx alpha);
    static GateOp x_shift(int m, double s);
    static GateOp z_shift(int m, double s);
    static GateOp shear(int m, double tau);
    static GateOp cubic(int m, double gamma);
    static GateOp multiply(int m, std::function<cplx(double)> f);

    bool gaussian() const { return (kind != Kind::Cubic || a == 0.0) && kind != Kind::Kernel; }
    // Symplectic block on the gate's own modes and its phase-space shift.
    Mat matrix() const;
    Vec shift() const;
    CMat fock(int d) const;
    std::string describe() const;
};

// Operator product U = gates[0] * gates[1] * ..., so the last gate acts first.
struct InducedOperator {
    int modes = 1;
    std::vector<GateOp> gates;

    bool gaussian() const;
    Mat symplectic() const;
    // Affine action on phase-space means: mu -> symplectic() * mu + displacement().
    Vec displacement() const;
    // Fock matrix at cutoff d per mode, compiled gate by gate.
    CMat fock(int d) const;
    InducedOperator then(const InducedOperator &later) const;
    std::string describe() const;
};

// Measured quadrature p(theta) = p cos(theta) + x sin(theta).
void check_angles(double theta_h, double theta_l);

InducedOperator single_macronode(double theta1, double theta3, double m1 = 0.0, double m3 = 0.0);
cplx macronode_displacement(double theta1, double theta3, double m1, double m3);
// theta and m are ordered (1, 2, 3, 4); mode j uses (1, 3), mode k uses (2, 4).
InducedOperator two_mode_macronode(const std::array<double, 4> &theta, const std::array<double, 4> &m = {});

struct CubicOutcomes {
    double m3 = 0.0, m1 = 0.0, me = 0.0;
};
double cubic_tau(double gamma, double sigma, const CubicOutcomes &m);
double cubic_kappa(double gamma, double sigma, const CubicOutcomes &m);
InducedOperator cubic_teleportation(double gamma, double theta1, const CubicOutcomes &m = {});

// Teleportation through an arbitrary single-mode resource phi_r. The factor
// phi_r(sqrt2 m_e - x) is kept as a position-diagonal kernel.
InducedOperator general_resource_teleportation(const std::function<cplx(double)> &phi_r, double theta,
                                               const CubicOutcomes &m = {});
InducedOperator general_resource_teleportation(const FockState &phi_r, double theta, const CubicOutcomes &m = {});

// Angle recipes for the single macronode.
struct AnglePair {
    double theta1, theta3;
};
AnglePair rotation_angles(double phi);
AnglePair squeeze_angles(double s);
AnglePair identity_angles();
// Pair angles realizing the passive map exp(i(a+b)/2) [[cos d, i sin d], [i sin d, cos d]]
// with d = (b - a) / 2, a = 2 theta1 + pi/2, b = 2 theta2 + pi/2.
std::array<double, 4> beamsplitter_pair_angles(double a, double b);

// Physical circuits, for the oracle. Ancillas are squeezed by r.
OracleCircuit single_macronode_circuit(double theta1, double theta3, double r);
OracleCircuit two_mode_macronode_circuit(const std::array<double, 4> &theta, double r);
// Gaussian version of the cubic circuit with a zero-momentum approximant resource.
OracleCircuit cubic_gaussian_circuit(double theta1, double r);

// Position-representation simulation of the cubic teleportation circuit with a
// finitely squeezed cubic resource e^{i gamma x^3 / 3} S(-r)|0>, projected onto
// Fock cutoff d_out.
FockState simulate_cubic_circuit(const FockState &input, double r, double gamma, double theta1,
                                 const CubicOutcomes &m, int d_out);

// min over complex scale of |lambda A - B| / |B| (Frobenius) on the top-left block.
double operator_distance(const CMat &A, const CMat &B, int block);

}  // namespace cvc

#endif
