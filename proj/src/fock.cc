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

#include "cvc/fock.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>

#include <unsupported/Eigen/MatrixFunctions>

#include "cvc/kernels.h"

namespace cvc {

FockState::FockState(std::vector<int> dims, CVec amps) : dims_(std::move(dims)), amps_(std::move(amps)) {
    long total = 1;
    for (int d : dims_) {
        if (d < 1) throw validation_error("Fock cutoff must be positive");
        total *= d;
    }
    if (total != amps_.size()) throw validation_error("amplitude count does not match the cutoffs");
}

FockState FockState::basis(const std::vector<int> &dims, const std::vector<int> &occupation) {
    long total = 1;
    for (int d : dims) total *= d;
    FockState s(dims, CVec::Zero(total));
    s.amps_(s.flat_index(occupation)) = 1.0;
    return s;
}

FockState FockState::vacuum(const std::vector<int> &dims) { return basis(dims, std::vector<int>(dims.size(), 0)); }

FockState FockState::single(CVec amps) {
    int d = static_cast<int>(amps.size());
    return FockState({d}, std::move(amps));
}

double FockState::normalize() {
    double n2 = norm2();
    if (!(n2 > 0.0)) throw numeric_error("state has zero norm");
    amps_ /= std::sqrt(n2);
    weight_ *= n2;
    return n2;
}

long FockState::flat_index(const std::vector<int> &occ) const {
    if (occ.size() != dims_.size()) throw validation_error("occupation length does not match the mode count");
    long idx = 0;
    for (size_t i = 0; i < dims_.size(); ++i) {
        if (occ[i] < 0 || occ[i] >= dims_[i]) throw validation_error("occupation exceeds the cutoff");
        idx = idx * dims_[i] + occ[i];
    }
    return idx;
}

std::vector<double> FockState::photon_distribution(int mode) const {
    std::vector<double> out(dims_.at(mode), 0.0);
    long right = 1;
    for (size_t i = mode + 1; i < dims_.size(); ++i) right *= dims_[i];
    long d = dims_[mode];
    double n2 = norm2();
    for (long f = 0; f < size(); ++f) out[(f / right) % d] += std::norm(amps_(f)) / n2;
    return out;
}

double FockState::top_level_population() const {
    double worst = 0.0;
    for (int m = 0; m < modes(); ++m) worst = std::max(worst, photon_distribution(m).back());
    return worst;
}

double FockState::leakage(int levels) const {
    double worst = 0.0;
    for (int m = 0; m < modes(); ++m) {
        auto dist = photon_distribution(m);
        double s = 0.0;
        for (int k = std::max(0, dims_[m] - levels); k < dims_[m]; ++k) s += dist[k];
        worst = std::max(worst, s);
    }
    return worst;
}

Ladder ladder_matrices(int d) {
    if (d < 2) throw validation_error("ladder matrices need cutoff d >= 2");
    Ladder L;
    L.a = CMat::Zero(d, d);
    for (int n = 1; n < d; ++n) L.a(n - 1, n) = std::sqrt(static_cast<double>(n));
    L.ad = L.a.adjoint();
    L.x = (L.a + L.ad) / kSqrt2;
    L.p = (L.a - L.ad) / cplx(0.0, kSqrt2);
    return L;
}

CMat expm(const CMat &A) { return A.exp(); }

namespace {

CMat padded_expm(const std::function<CMat(const Ladder &)> &generator, int d) {
    Ladder L = ladder_matrices(2 * d);
    return expm(generator(L)).topLeftCorner(d, d);
}

}  // namespace

CMat rotation_op(double theta, int d) {
    CMat U = CMat::Zero(d, d);
    for (int n = 0; n < d; ++n) U(n, n) = std::polar(1.0, theta * n);
    return U;
}

CMat squeeze_op(double r, double phi, int d) {
    cplx z = std::polar(r, phi);
    return padded_expm([&](const Ladder &L) { return CMat(0.5 * (std::conj(z) * L.a * L.a - z * L.ad * L.ad)); }, d);
}

CMat displacement_op(cplx alpha, int d) { return displacement_closed_form(alpha, d); }

CMat displacement_closed_form(cplx alpha, int d) {
    // <m|D|n> = sqrt(n!/m!) alpha^(m-n) e^{-|a|^2/2} L_n^(m-n)(|a|^2) for m >= n,
    // built from the normalized Laguerre recurrence used by the Wigner kernel.
    CMat U = CMat::Zero(d, d);
    double t = std::norm(alpha);
    double env = std::exp(-0.5 * t);
    for (int k = 0; k < d; ++k) {
        cplx pk = std::pow(alpha, k) / std::sqrt(std::tgamma(k + 1.0));
        cplx qk = std::pow(-std::conj(alpha), k) / std::sqrt(std::tgamma(k + 1.0));
        if (k == 0) pk = qk = 1.0;
        double lm1 = 0.0, l = 1.0;
        for (int n = 0; n + k < d; ++n) {
            if (n == 1) {
                lm1 = l;
                l = (1.0 + k - t) / std::sqrt(k + 1.0);
            } else if (n > 1) {
                int m = n - 1;
                double nl = ((2.0 * m + 1 + k - t) * l - std::sqrt(double(m) * (m + k)) * lm1) /
                            std::sqrt((m + 1.0) * (m + k + 1.0));
                lm1 = l;
                l = nl;
            }
            U(n + k, n) = env * pk * l;
            if (k > 0) U(n, n + k) = env * qk * l;
        }
    }
    return U;
}

CMat x_shift_op(double s, int d) { return displacement_op(cplx(s / kSqrt2, 0.0), d); }
CMat z_shift_op(double s, int d) { return displacement_op(cplx(0.0, s / kSqrt2), d); }

CMat shear_op(double tau, int d) {
    return padded_expm([&](const Ladder &L) { return CMat(cplx(0.0, 0.5 * tau) * L.x * L.x); }, d);
}

CMat cubic_op(double gamma, int d) {
    return padded_expm([&](const Ladder &L) { return CMat(cplx(0.0, gamma / 3.0) * L.x * L.x * L.x); }, d);
}

namespace {

CMat kron(const CMat &A, const CMat &B) {
    CMat K(A.rows() * B.rows(), A.cols() * B.cols());
    for (int i = 0; i < A.rows(); ++i) {
        for (int j = 0; j < A.cols(); ++j) K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    }
    return K;
}

double log_factorial(int n) { return std::lgamma(n + 1.0); }

double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    return std::exp(log_factorial(n) - log_factorial(k) - log_factorial(n - k));
}

}  // namespace

CMat beamsplitter_op(double theta, int d) {
    static std::mutex mu;
    static std::map<std::pair<double, int>, CMat> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find({theta, d});
        if (it != cache.end()) return it->second;
    }
    // The generator preserves n1 + n2, so each total-number block of the
    // truncated generator is exponentiated on its own.
    CMat U = CMat::Zero(d * d, d * d);
    for (int N = 0; N <= 2 * d - 2; ++N) {
        int lo = std::max(0, N - d + 1), hi = std::min(N, d - 1);
        int m = hi - lo + 1;
        CMat G = CMat::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            int n1 = lo + i, n2 = N - n1;
            // a1 a2^dag |n1, n2> = sqrt(n1 (n2 + 1)) |n1 - 1, n2 + 1>
            if (i > 0) {
                double v = theta * std::sqrt(double(n1) * (n2 + 1));
                G(i - 1, i) += v;
                G(i, i - 1) -= v;
            }
        }
        CMat E = expm(G);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) U((lo + i) * d + (N - lo - i), (lo + j) * d + (N - lo - j)) = E(i, j);
        }
    }
    std::lock_guard<std::mutex> lock(mu);
    if (cache.size() > 64) cache.clear();
    cache.emplace(std::make_pair(theta, d), U);
    return U;
}

double bs_coefficient(int m1, int m2, int n1, int n2) {
    if (m1 + m2 != n1 + n2) return 0.0;
    double sum = 0.0;
    for (int r = 0; r <= n1; ++r) {
        int j = m2 - r;
        if (j < 0 || j > n2) continue;
        double sgn = ((n2 - j) % 2) ? -1.0 : 1.0;
        sum += sgn * binom(n1, r) * binom(n2, j);
    }
    double pref = std::exp(0.5 * (log_factorial(m1) + log_factorial(m2) - log_factorial(n1) - log_factorial(n2)) -
                           0.5 * (n1 + n2) * std::log(2.0));
    return pref * sum;
}

CMat beamsplitter_closed_form(int d) {
    CMat U = CMat::Zero(d * d, d * d);
    for (int n1 = 0; n1 < d; ++n1) {
        for (int n2 = 0; n2 < d; ++n2) {
            for (int m1 = 0; m1 < d; ++m1) {
                int m2 = n1 + n2 - m1;
                if (m2 < 0 || m2 >= d) continue;
                U(m1 * d + m2, n1 * d + n2) = bs_coefficient(m1, m2, n1, n2);
            }
        }
    }
    return U;
}

CMat cz_op(double g, int d) {
    return multiplication_op_dvr_2d([g](double x1, double x2) { return std::polar(1.0, g * x1 * x2); }, d);
}

const Dvr &dvr(int d) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<Dvr>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(d);
    if (it != cache.end()) return *it->second;
    Ladder L = ladder_matrices(d);
    Mat X = L.x.real();
    Eigen::SelfAdjointEigenSolver<Mat> es(X);
    auto entry = std::make_unique<Dvr>();
    entry->nodes = es.eigenvalues();
    entry->vectors = es.eigenvectors().cast<cplx>();
    const Dvr &ref = *entry;
    cache.emplace(d, std::move(entry));
    return ref;
}

CMat multiplication_op_dvr(const std::function<cplx(double)> &f, int d) {
    const Dvr &D = dvr(d);
    CVec diag(d);
    for (int i = 0; i < d; ++i) diag(i) = f(D.nodes(i));
    return D.vectors * diag.asDiagonal() * D.vectors.adjoint();
}

CMat multiplication_op_dvr_2d(const std::function<cplx(double, double)> &f, int d) {
    const Dvr &D = dvr(d);
    CMat V = kron(D.vectors, D.vectors);
    CVec diag(d * d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) diag(i * d + j) = f(D.nodes(i), D.nodes(j));
    }
    return V * diag.asDiagonal() * V.adjoint();
}

Mat hermite_functions(const Vec &x, int K) {
    if (K > 400) throw validation_error("Hermite order beyond the supported recurrence range");
    Mat out(K, x.size());
    // Eigen is column-major; the kernel writes row k contiguously.
    std::vector<double> buf(static_cast<size_t>(K) * x.size());
    kernels::hermite_table(x.data(), static_cast<int>(x.size()), K, buf.data());
    for (int k = 0; k < K; ++k) {
        for (int j = 0; j < x.size(); ++j) out(k, j) = buf[static_cast<size_t>(k) * x.size() + j];
    }
    return out;
}

CVec wavefunction(const CVec &amps, const Vec &x) {
    Mat H = hermite_functions(x, static_cast<int>(amps.size()));
    return H.transpose().cast<cplx>() * amps;
}

CMat multiplication_op_grid(const std::function<cplx(double)> &f, int d, double half_width, int points) {
    Vec x = Vec::LinSpaced(points, -half_width, half_width);
    double dx = x(1) - x(0);
    Mat H = hermite_functions(x, d);
    CVec w(points);
    for (int j = 0; j < points; ++j) w(j) = f(x(j)) * ((j == 0 || j == points - 1) ? 0.5 * dx : dx);
    CMat Hc = H.cast<cplx>();
    return Hc * w.asDiagonal() * Hc.transpose();
}

namespace {

void axis_shape(const std::vector<int> &dims, int mode, long &left, long &right) {
    left = 1;
    right = 1;
    for (int i = 0; i < mode; ++i) left *= dims[i];
    for (size_t i = mode + 1; i < dims.size(); ++i) right *= dims[i];
}

}  // namespace

FockState apply_op(const FockState &state, const CMat &U, int mode) {
    if (mode < 0 || mode >= state.modes()) throw validation_error("mode index out of range");
    int d = state.dim(mode);
    if (U.rows() != d || U.cols() != d) throw validation_error("operator size does not match the cutoff");
    long left, right;
    axis_shape(state.dims(), mode, left, right);
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> Ur = U;
    CVec out(state.size());
    kernels::apply_axis(Ur.data(), d, d, state.amps().data(), out.data(), left, right);
    FockState s(state.dims(), out);
    s.set_weight(state.weight());
    return s;
}

FockState apply_two_mode_op(const FockState &state, const CMat &U, int mode1, int mode2) {
    if (mode2 != mode1 + 1) {
        // Route through adjacent-mode application by building the permuted operator.
        if (mode1 == mode2) throw validation_error("two-mode operator needs distinct modes");
    }
    int d1 = state.dim(mode1), d2 = state.dim(mode2);
    if (U.rows() != d1 * d2) throw validation_error("operator size does not match the cutoffs");
    const auto &dims = state.dims();
    int n = state.modes();
    std::vector<long> stride(n, 1);
    for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * dims[i + 1];
    CVec out = CVec::Zero(state.size());
    // Iterate over the other modes, gathering the (mode1, mode2) slice.
    long total = state.size();
    CVec slice(d1 * d2), res(d1 * d2);
    for (long f = 0; f < total; ++f) {
        long i1 = (f / stride[mode1]) % d1, i2 = (f / stride[mode2]) % d2;
        if (i1 != 0 || i2 != 0) continue;
        for (int a = 0; a < d1; ++a) {
            for (int b = 0; b < d2; ++b) slice(a * d2 + b) = state.amps()(f + a * stride[mode1] + b * stride[mode2]);
        }
        res.noalias() = U * slice;
        for (int a = 0; a < d1; ++a) {
            for (int b = 0; b < d2; ++b) out(f + a * stride[mode1] + b * stride[mode2]) = res(a * d2 + b);
        }
    }
    FockState s(dims, out);
    s.set_weight(state.weight());
    return s;
}

namespace {

FockState contract_mode(const FockState &state, int mode, const CVec &row) {
    long left, right;
    axis_shape(state.dims(), mode, left, right);
    int d = state.dim(mode);
    std::vector<int> dims;
    for (int i = 0; i < state.modes(); ++i) {
        if (i != mode) dims.push_back(state.dim(i));
    }
    CVec out = CVec::Zero(left * right);
    for (long l = 0; l < left; ++l) {
        for (int k = 0; k < d; ++k) {
            cplx c = row(k);
            if (c == cplx(0.0)) continue;
            for (long r = 0; r < right; ++r) out(l * right + r) += c * state.amps()((l * d + k) * right + r);
        }
    }
    if (dims.empty()) dims.push_back(1);
    return FockState(dims, out);
}

CVec homodyne_row(int d, double theta, double m) {
    Vec x(1);
    x(0) = m;
    Mat H = hermite_functions(x, d);
    double phi = theta - kPi / 2;
    CVec row(d);
    for (int n = 0; n < d; ++n) row(n) = H(n, 0) * std::polar(1.0, phi * n);
    return row;
}

}  // namespace

FockConditioned homodyne_project(const FockState &state, int mode, double theta, double m) {
    int d = state.dim(mode);
    FockState out = contract_mode(state, mode, homodyne_row(d, theta, m));
    double density = out.norm2() / state.norm2();
    if (density < 1e-300) throw numeric_error("homodyne outcome density underflow; choose a different outcome");
    out.normalize();
    out.set_weight(state.weight() * density);
    return {out, density};
}

FockConditioned pnr_project(const FockState &state, int mode, int k) {
    int d = state.dim(mode);
    if (k < 0 || k >= d) throw validation_error("PNR outcome exceeds the cutoff of the mode");
    CVec row = CVec::Zero(d);
    row(k) = 1.0;
    FockState out = contract_mode(state, mode, row);
    double prob = out.norm2() / state.norm2();
    if (prob > 0.0) {
        out.normalize();
        out.set_weight(state.weight() * prob);
    }
    return {out, prob};
}

FockSampled homodyne_sample_fock(const FockState &state, int mode, double theta, std::mt19937_64 &rng) {
    int d = state.dim(mode);
    Ladder L = ladder_matrices(d);
    CMat Q = std::sin(theta) * L.x + std::cos(theta) * L.p;
    FockState q1 = apply_op(state, Q, mode);
    FockState q2 = apply_op(q1, Q, mode);
    double n2 = state.norm2();
    double mean = std::real(state.amps().dot(q1.amps())) / n2;
    double var = std::real(state.amps().dot(q2.amps())) / n2 - mean * mean;
    double sd = std::sqrt(std::max(var, 1e-12));
    const int points = 401;
    Vec grid = Vec::LinSpaced(points, mean - 8 * sd, mean + 8 * sd);
    Vec dens(points);
    Mat H = hermite_functions(grid, d);
    long left, right;
    axis_shape(state.dims(), mode, left, right);
    for (int g = 0; g < points; ++g) {
        double acc = 0.0;
        double phi = theta - kPi / 2;
        for (long l = 0; l < left; ++l) {
            for (long r = 0; r < right; ++r) {
                cplx s = 0.0;
                for (int k = 0; k < d; ++k) s += H(k, g) * std::polar(1.0, phi * k) * state.amps()((l * d + k) * right + r);
                acc += std::norm(s);
            }
        }
        dens(g) = acc / n2;
    }
    std::vector<double> cdf(points, 0.0);
    double h = grid(1) - grid(0);
    for (int g = 1; g < points; ++g) cdf[g] = cdf[g - 1] + 0.5 * h * (dens(g) + dens(g - 1));
    std::uniform_real_distribution<double> uni(0.0, cdf.back());
    double u = uni(rng);
    int g = static_cast<int>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    g = std::clamp(g, 1, points - 1);
    double frac = (cdf[g] > cdf[g - 1]) ? (u - cdf[g - 1]) / (cdf[g] - cdf[g - 1]) : 0.5;
    double m = grid(g - 1) + frac * h;
    return {m, homodyne_project(state, mode, theta, m).state};
}

PnrSampled pnr_sample(const FockState &state, int mode, std::mt19937_64 &rng) {
    std::vector<double> dist = state.photon_distribution(mode);
    std::discrete_distribution<int> pick(dist.begin(), dist.end());
    int k = pick(rng);
    return {k, pnr_project(state, mode, k).state};
}

double fidelity(const FockState &a, const FockState &b) {
    if (a.dims() != b.dims()) throw validation_error("fidelity of states with different cutoffs");
    cplx ov = a.amps().dot(b.amps());
    return std::norm(ov) / (a.norm2() * b.norm2());
}

double WignerResult::integral() const {
    double dx = xs(1) - xs(0), dp = ps(1) - ps(0);
    double s = 0.0;
    for (int i = 0; i < W.rows(); ++i) {
        double wi = (i == 0 || i == W.rows() - 1) ? 0.5 : 1.0;
        for (int j = 0; j < W.cols(); ++j) {
            double wj = (j == 0 || j == W.cols() - 1) ? 0.5 : 1.0;
            s += wi * wj * W(i, j);
        }
    }
    return s * dx * dp;
}

WignerResult wigner(const FockState &state, const WignerGrid &grid) {
    if (state.modes() != 1) throw validation_error("wigner needs a single-mode state");
    if (grid.n_points < 2) throw validation_error("wigner grid needs at least two points");
    WignerResult res;
    res.xs = Vec::LinSpaced(grid.n_points, grid.x_min, grid.x_max);
    res.ps = Vec::LinSpaced(grid.n_points, grid.p_min, grid.p_max);
    CVec psi = state.amps() / std::sqrt(state.norm2());
    std::vector<double> out(static_cast<size_t>(grid.n_points) * grid.n_points);
    kernels::wigner_grid(psi.data(), static_cast<int>(psi.size()), res.xs.data(), grid.n_points, res.ps.data(),
                         grid.n_points, out.data());
    res.W.resize(grid.n_points, grid.n_points);
    for (int ip = 0; ip < grid.n_points; ++ip) {
        for (int ix = 0; ix < grid.n_points; ++ix) res.W(ip, ix) = out[static_cast<size_t>(ip) * grid.n_points + ix];
    }
    return res;
}

GaussianToFock gaussian_to_fock(const GaussianState &g, int cutoff) {
    int n = g.n();
    Mat V = g.cov();
    Mat Vxx(n, n), Vpp(n, n), Vxp(n, n), Vpx(n, n);
    CVec alpha(n);
    for (int i = 0; i < n; ++i) {
        alpha(i) = cplx(g.mean()(2 * i), g.mean()(2 * i + 1)) / kSqrt2;
        for (int j = 0; j < n; ++j) {
            Vxx(i, j) = V(2 * i, 2 * j);
            Vpp(i, j) = V(2 * i + 1, 2 * j + 1);
            Vxp(i, j) = V(2 * i, 2 * j + 1);
            Vpx(i, j) = V(2 * i + 1, 2 * j);
        }
    }
    const cplx I(0.0, 1.0);
    CMat M = 0.5 * (Vxx - Vpp).cast<cplx>() + 0.5 * I * (Vxp + Vpx).cast<cplx>();
    CMat Np = 0.5 * (Vxx + Vpp).cast<cplx>() + 0.5 * I * (Vxp - Vpx).cast<cplx>() + 0.5 * CMat::Identity(n, n);
    CMat B = Np.transpose().partialPivLu().solve(M.transpose()).transpose();
    CVec b = alpha - B * alpha.conjugate();

    Mat Vq = V + 0.5 * Mat::Identity(2 * n, 2 * n);
    double e = g.mean().dot(Vq.ldlt().solve(g.mean()));
    double p0 = std::exp(-0.5 * e) / std::sqrt(Vq.determinant());

    std::vector<int> dims(n, cutoff);
    long total = 1;
    for (int i = 0; i < n; ++i) total *= cutoff;
    std::vector<long> stride(n, 1);
    for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * cutoff;
    CVec c = CVec::Zero(total);
    c(0) = std::sqrt(p0);
    std::vector<int> occ(n, 0);
    for (long f = 1; f < total; ++f) {
        long rem = f;
        for (int i = 0; i < n; ++i) {
            occ[i] = static_cast<int>(rem / stride[i]);
            rem %= stride[i];
        }
        int i = 0;
        while (occ[i] == 0) ++i;
        long base = f - stride[i];
        cplx acc = b(i) * c(base);
        for (int j = 0; j < n; ++j) {
            int nj = occ[j] - (j == i ? 1 : 0);
            if (nj > 0) acc += B(i, j) * std::sqrt(static_cast<double>(nj)) * c(base - stride[j]);
        }
        c(f) = acc / std::sqrt(static_cast<double>(occ[i]));
    }
    FockState s(dims, c);
    double leak = std::max(0.0, 1.0 - s.norm2());
    return {s, leak};
}

FockState coherent_state(cplx alpha, int d) {
    CVec c(d);
    double env = std::exp(-0.5 * std::norm(alpha));
    cplx term = env;
    for (int n = 0; n < d; ++n) {
        if (n > 0) term *= alpha / std::sqrt(static_cast<double>(n));
        c(n) = term;
    }
    return FockState::single(c);
}

FockState squeezed_state(double r, double phi, int d) {
    return gaussian_to_fock(GaussianState::squeezed("m", r, phi), d).state;
}

}  // namespace cvc
