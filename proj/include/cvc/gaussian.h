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

#ifndef CVC_GAUSSIAN_H
#define CVC_GAUSSIAN_H

#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "cvc/common.h"

namespace cvc {

// Single-mode symplectic blocks in (x, p) order.
Mat rotation_matrix(double theta);
Mat squeeze_matrix(double r, double phi = 0.0);
Mat shear_matrix(double tau);
// Two-mode blocks in (x1, p1, x2, p2) order.
Mat beamsplitter_matrix(double theta);
Mat cz_matrix(double g);
// Passive network acting on annihilation operators as a -> U a.
Mat passive_matrix(const CMat &U);
// Standard symplectic form for n modes, interleaved ordering.
Mat symplectic_form(int n);
// Embeds a 2k x 2k block acting on the listed modes of an n-mode system.
Mat embed(const Mat &block, const std::vector<int> &targets, int n);

struct SymplecticGate {
    enum class Kind { Squeeze, Rotate, BeamSplit, Displace, Shear, CZ };
    Kind kind;
    std::vector<std::string> targets;
    double a = 0.0;  // r, theta, tau or g
    double b = 0.0;  // squeeze angle
    cplx alpha = 0.0;

    static SymplecticGate squeeze(const std::string &m, double r, double phi = 0.0);
    static SymplecticGate rotate(const std::string &m, double theta);
    static SymplecticGate beamsplit(const std::string &m1, const std::string &m2, double theta);
    static SymplecticGate displace(const std::string &m, cplx alpha);
    static SymplecticGate shear(const std::string &m, double tau);
    static SymplecticGate cz(const std::string &m1, const std::string &m2, double g);

    // Matrix on the gate's own modes; identity for displacements.
    Mat matrix() const;
};

class GaussianState {
   public:
    GaussianState() = default;
    GaussianState(std::vector<std::string> modes, Vec mean, Mat cov);
    static GaussianState vacuum(const std::vector<std::string> &modes);
    static GaussianState coherent(const std::string &mode, cplx alpha);
    static GaussianState squeezed(const std::string &mode, double r, double phi = 0.0);

    int n() const { return static_cast<int>(modes_.size()); }
    const std::vector<std::string> &modes() const { return modes_; }
    const Vec &mean() const { return mean_; }
    const Mat &cov() const { return cov_; }
    int index(const std::string &mode) const;
    bool has(const std::string &mode) const;

    // Throws when symmetry or the uncertainty relation is violated.
    void check(double tol = 1e-9) const;
    double purity_det() const;

    GaussianState apply(const SymplecticGate &gate) const;
    GaussianState apply_symplectic(const Mat &S, const std::vector<std::string> &targets) const;
    GaussianState displace(const std::string &mode, double dx, double dp) const;
    GaussianState displace_all(const Vec &d) const;
    GaussianState tensor(const GaussianState &other) const;
    GaussianState remove(const std::string &mode) const;
    GaussianState relabel(const std::string &from, const std::string &to) const;
    GaussianState reduced(const std::vector<std::string> &keep) const;

   private:
    std::vector<std::string> modes_;
    Vec mean_;
    Mat cov_;
};

inline GaussianState apply_gate(const GaussianState &s, const SymplecticGate &g) { return s.apply(g); }

// Row vector selecting p(theta) = p cos(theta) + x sin(theta) of one mode.
Vec quadrature_row(int n, int mode, double theta);

struct Conditioned {
    GaussianState state;
    double density;
};
Conditioned homodyne_condition(const GaussianState &state, const std::string &mode, double theta, double m);

struct Sampled {
    double outcome;
    GaussianState state;
};
Sampled homodyne_sample(const GaussianState &state, const std::string &mode, double theta, std::mt19937_64 &rng);
Sampled homodyne_sample(const GaussianState &state, const std::string &mode, double theta, std::uint64_t seed);

// Fidelity of two Gaussian states, at least one of them pure.
double gaussian_fidelity(const GaussianState &a, const GaussianState &b);

// Circuit oracle. Ancillas are prepared in vacuum; measurements are deferred
// and must not be followed by gates on the measured mode.
struct OracleMeasure {
    std::string mode;
    double theta;
};
using OracleOp = std::variant<SymplecticGate, OracleMeasure>;

struct OracleCircuit {
    std::vector<std::string> inputs;
    std::vector<std::string> ancillas;
    std::vector<OracleOp> ops;
    std::vector<std::string> outputs;
};

struct ImplementedMap {
    Mat symplectic;    // 2k x 2k input -> output map at zero outcomes
    Mat outcome_gain;  // 2k x (#measurements), displacement per unit outcome
};
// Extended precision keeps the conditioning accurate at r >= 10.
ImplementedMap extract_implemented_map(const OracleCircuit &circuit);
Mat extract_implemented_symplectic(const OracleCircuit &circuit);

}  // namespace cvc

#endif
