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

#ifndef CVC_FOCK_H
#define CVC_FOCK_H

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cvc/common.h"
#include "cvc/gaussian.h"

namespace cvc {

// Pure state on a truncated Fock space. Amplitudes are stored row-major with
// mode 0 as the slowest index. Unnormalized states keep their squared norm in
// `weight` once normalize() has been called.
class FockState {
   public:
    FockState() = default;
    FockState(std::vector<int> dims, CVec amps);
    static FockState basis(const std::vector<int> &dims, const std::vector<int> &occupation);
    static FockState vacuum(const std::vector<int> &dims);
    static FockState single(CVec amps);

    int modes() const { return static_cast<int>(dims_.size()); }
    const std::vector<int> &dims() const { return dims_; }
    int dim(int mode) const { return dims_.at(mode); }
    const CVec &amps() const { return amps_; }
    CVec &amps() { return amps_; }
    long size() const { return static_cast<long>(amps_.size()); }
    double norm2() const { return amps_.squaredNorm(); }
    double weight() const { return weight_; }
    void set_weight(double w) { weight_ = w; }

    // Returns the squared norm before normalization; zero norm throws.
    double normalize();
    long flat_index(const std::vector<int> &occupation) const;
    // Largest population in the top Fock level of any mode.
    double top_level_population() const;
    // Population in the top `levels` levels of any mode.
    double leakage(int levels = 1) const;
    std::vector<double> photon_distribution(int mode) const;

   private:
    std::vector<int> dims_;
    CVec amps_;
    double weight_ = 1.0;
};

struct Ladder {
    CMat a, ad, x, p;
};
Ladder ladder_matrices(int d);

CMat expm(const CMat &A);

// Single-mode operators at cutoff d. Generators with unbounded matrix
// elements are exponentiated at 2d and cropped.
CMat rotation_op(double theta, int d);
CMat squeeze_op(double r, double phi, int d);
CMat displacement_op(cplx alpha, int d);
CMat displacement_closed_form(cplx alpha, int d);
CMat x_shift_op(double s, int d);  // X(s) = exp(-i s p)
CMat z_shift_op(double s, int d);  // Z(s) = exp(i s x)
CMat shear_op(double tau, int d);  // P(tau) = exp(i tau x^2 / 2)
CMat cubic_op(double gamma, int d);  // V(gamma) = exp(i gamma x^3 / 3)
// Two-mode operators on the d*d space, mode 0 slowest.
CMat beamsplitter_op(double theta, int d);
CMat beamsplitter_closed_form(int d);  // 50:50, closed-form coefficients
double bs_coefficient(int m1, int m2, int n1, int n2);
CMat cz_op(double g, int d);

// Position-diagonal operators. The DVR form diagonalizes the truncated x
// operator, which keeps unimodular functions exactly unitary; the grid form
// integrates the kernel against Hermite functions.
struct Dvr {
    Vec nodes;
    CMat vectors;
};
const Dvr &dvr(int d);
CMat multiplication_op_dvr(const std::function<cplx(double)> &f, int d);
CMat multiplication_op_grid(const std::function<cplx(double)> &f, int d, double half_width = 10.0,
                            int points = 601);
CMat multiplication_op_dvr_2d(const std::function<cplx(double, double)> &f, int d);

// Hermite-function table psi_k(x_j), K rows by x.size() columns.
Mat hermite_functions(const Vec &x, int K);
// Wavefunction of a single-mode state at the given positions.
CVec wavefunction(const CVec &amps, const Vec &x);

FockState apply_op(const FockState &state, const CMat &U, int mode);
FockState apply_two_mode_op(const FockState &state, const CMat &U, int mode1, int mode2);

struct FockConditioned {
    FockState state;
    double probability;  // density for homodyne, probability for PNR
};
FockConditioned homodyne_project(const FockState &state, int mode, double theta, double m);
FockConditioned pnr_project(const FockState &state, int mode, int k);
// Samples a quadrature outcome on a 401-point grid over +-8 standard deviations.
struct FockSampled {
    double outcome;
    FockState state;
};
FockSampled homodyne_sample_fock(const FockState &state, int mode, double theta, std::mt19937_64 &rng);
struct PnrSampled {
    int outcome;
    FockState state;
};
PnrSampled pnr_sample(const FockState &state, int mode, std::mt19937_64 &rng);

double fidelity(const FockState &a, const FockState &b);

struct WignerGrid {
    double x_min = -5, x_max = 5, p_min = -5, p_max = 5;
    int n_points = 101;
};
struct WignerResult {
    Vec xs, ps;
    Mat W;  // W(ip, ix)
    double integral() const;
    double min() const { return W.minCoeff(); }
};
WignerResult wigner(const FockState &state, const WignerGrid &grid = {});

// Exact amplitudes of a pure Gaussian state, with leakage 1 - sum |c|^2.
struct GaussianToFock {
    FockState state;
    double leakage;
};
GaussianToFock gaussian_to_fock(const GaussianState &state, int cutoff);

FockState coherent_state(cplx alpha, int d);
FockState squeezed_state(double r, double phi, int d);

}  // namespace cvc

#endif
